// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gatekeeper {

/// Exception carrying a module-specific error code. Each module defines its
/// own `Errc` enum plus a `to_string(Errc)` overload and aliases
/// `Error = BasicError<Errc>`.
template <typename Code>
class BasicError : public std::runtime_error {
 public:
  explicit BasicError(Code code)
      : std::runtime_error(std::string(to_string(code))), code_(code) {}

  BasicError(Code code, std::string_view detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + std::string(detail)),
        code_(code),
        detail_(detail) {}

  Code code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Code code_;
  std::string detail_;
};

}  // namespace gatekeeper
