#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace metajudge {

/// SHA-256 of the input, lowercase hex.
std::string sha256_hex(std::string_view data);

/// Digest of a field tuple. Fields are length-prefixed before hashing so
/// that ("ab","c") and ("a","bc") produce different digests.
std::string sha256_hex_fields(const std::vector<std::string_view>& fields);

/// Shortest round-trip decimal form of a double (used wherever a floating
/// value participates in a digest; stable across platforms).
std::string canonical_double(double value);

}  // namespace metajudge
