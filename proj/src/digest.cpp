#include "metajudge/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cstdint>
#include <stdexcept>

namespace metajudge {

static std::string to_hex(const unsigned char* bytes, size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(n * 2);
  for (size_t i = 0; i < n; ++i) {
    out.push_back(digits[bytes[i] >> 4]);
    out.push_back(digits[bytes[i] & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int md_len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &md_len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  return to_hex(md.data(), md_len);
}

std::string sha256_hex_fields(const std::vector<std::string_view>& fields) {
  std::string buffer;
  size_t total = 0;
  for (const auto& f : fields) total += f.size() + 24;
  buffer.reserve(total);
  for (const auto& f : fields) {
    buffer += std::to_string(f.size());
    buffer += ':';
    buffer += f;
    buffer += '\n';
  }
  return sha256_hex(buffer);
}

std::string canonical_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc())
    throw std::runtime_error("double formatting failed");
  return std::string(buf.data(), ptr);
}

}  // namespace metajudge
