#include "metajudge/digest.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace metajudge {
namespace {

// FIPS 180-2 test vectors.
TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(Sha256, OutputShape) {
  std::string hex = sha256_hex("anything");
  EXPECT_EQ(hex.size(), 64u);
  for (char c : hex) {
    EXPECT_TRUE((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')) << c;
  }
}

TEST(FieldDigest, FieldBoundariesMatter) {
  // Without length prefixing these two would collide.
  EXPECT_NE(sha256_hex_fields({"ab", "c"}), sha256_hex_fields({"a", "bc"}));
  EXPECT_NE(sha256_hex_fields({"abc"}), sha256_hex_fields({"ab", "c"}));
  EXPECT_NE(sha256_hex_fields({"", "x"}), sha256_hex_fields({"x", ""}));
  EXPECT_EQ(sha256_hex_fields({"ab", "c"}), sha256_hex_fields({"ab", "c"}));
}

TEST(FieldDigest, SensitiveToEveryField) {
  std::string base = sha256_hex_fields({"one", "two", "three"});
  EXPECT_NE(base, sha256_hex_fields({"one!", "two", "three"}));
  EXPECT_NE(base, sha256_hex_fields({"one", "two!", "three"}));
  EXPECT_NE(base, sha256_hex_fields({"one", "two", "three!"}));
  EXPECT_NE(base, sha256_hex_fields({"one", "two"}));
}

TEST(CanonicalDouble, ShortestRoundTripForms) {
  EXPECT_EQ(canonical_double(0.0), "0");
  EXPECT_EQ(canonical_double(1.0), "1");
  EXPECT_EQ(canonical_double(0.7), "0.7");
  EXPECT_EQ(canonical_double(0.5), "0.5");
  EXPECT_EQ(canonical_double(2.0), "2");
  EXPECT_EQ(canonical_double(-1.5), "-1.5");
}

TEST(CanonicalDouble, RoundTripsExactly) {
  for (double value : {0.1, 0.2, 0.3, 0.7, 1e-9, 123456.789, -0.000123}) {
    std::string text = canonical_double(value);
    EXPECT_EQ(std::stod(text), value) << text;
  }
}

TEST(CanonicalDouble, DistinguishesNearbyValues) {
  // 0.7 and its nearest double neighbour must not key identically.
  double nudged = std::nextafter(0.7, 1.0);
  EXPECT_NE(canonical_double(0.7), canonical_double(nudged));
}

}  // namespace
}  // namespace metajudge
