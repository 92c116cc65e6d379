#pragma once

#include <string>
#include <string_view>

namespace ownet {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
/// Lower-case hex SHA-256 of a file's contents.
std::string sha256_file(const std::string& path);

}  // namespace ownet
