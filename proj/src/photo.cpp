// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/photo.hpp"

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <vector>

#include <jpeglib.h>
#include <png.h>

namespace gatekeeper::photo {

namespace {

// Rejects decompression bombs before allocating pixel buffers.
constexpr unsigned long kMaxPixels = 40'000'000;

bool decode_png(ByteView bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) return false;
  if (image.width == 0 || image.height == 0 ||
      static_cast<unsigned long>(image.width) * image.height > kMaxPixels) {
    png_image_free(&image);
    return false;
  }
  image.format = PNG_FORMAT_RGBA;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  const bool ok = png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr) != 0;
  png_image_free(&image);
  return ok && PNG_IMAGE_FAILED(image) == 0;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

void jpeg_silent(j_common_ptr, int) {}

bool decode_jpeg(ByteView bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  std::vector<JSAMPLE> row;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_silent;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  if (jpeg_read_header(&cinfo, TRUE) != JPEG_HEADER_OK) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  if (static_cast<unsigned long>(cinfo.image_width) * cinfo.image_height > kMaxPixels) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_start_decompress(&cinfo);
  row.resize(static_cast<std::size_t>(cinfo.output_width) * cinfo.output_components);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW rows[1] = {row.data()};
    jpeg_read_scanlines(&cinfo, rows, 1);
  }
  jpeg_finish_decompress(&cinfo);
  // Corrupt-data conditions surface as warnings, not errors.
  const bool clean = err.base.num_warnings == 0;
  jpeg_destroy_decompress(&cinfo);
  return clean;
}

}  // namespace

std::string_view to_string(MediaType type) { return type == MediaType::png ? "png" : "jpeg"; }

std::optional<MediaType> parse_media_type(std::string_view text) {
  if (text == "png" || text == "image/png") return MediaType::png;
  if (text == "jpeg" || text == "jpg" || text == "image/jpeg") return MediaType::jpeg;
  return std::nullopt;
}

std::string_view content_type(MediaType type) { return type == MediaType::png ? "image/png" : "image/jpeg"; }

std::string_view extension(MediaType type) { return type == MediaType::png ? "png" : "jpg"; }

std::optional<MediaType> sniff(ByteView bytes) {
  static constexpr std::uint8_t kPng[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= sizeof kPng && std::equal(std::begin(kPng), std::end(kPng), bytes.begin()))
    return MediaType::png;
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return MediaType::jpeg;
  return std::nullopt;
}

bool decodes_as(ByteView bytes, MediaType type) {
  if (bytes.empty() || sniff(bytes) != type) return false;
  return type == MediaType::png ? decode_png(bytes) : decode_jpeg(bytes);
}

}  // namespace gatekeeper::photo
