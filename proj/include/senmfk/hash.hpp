#pragma once

#include <string>

namespace senmfk {

// SHA-256 of a byte string, as lowercase hex.
std::string sha256_hex(const std::string& data);

// SHA-256 of a file's contents, as lowercase hex. Throws IoError if the file
// cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace senmfk
