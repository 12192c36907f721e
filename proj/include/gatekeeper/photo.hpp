// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "gatekeeper/bytes.hpp"

namespace gatekeeper::photo {

enum class MediaType { png, jpeg };

inline constexpr std::size_t kMaxPhotoBytes = 5 * 1024 * 1024;

/// "png" / "jpeg".
std::string_view to_string(MediaType type);
std::optional<MediaType> parse_media_type(std::string_view text);
/// "image/png" / "image/jpeg".
std::string_view content_type(MediaType type);
/// File extension used in the blob store, without the dot.
std::string_view extension(MediaType type);

/// Media type from the file signature alone.
std::optional<MediaType> sniff(ByteView bytes);

/// Fully decodes the image with libpng or libjpeg. False on any decoder
/// error, including truncated data and absurd dimensions.
bool decodes_as(ByteView bytes, MediaType type);

}  // namespace gatekeeper::photo
