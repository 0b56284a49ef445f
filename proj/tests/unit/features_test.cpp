// Copyright 2026 The transeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "transeval/features.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "transeval/error.hpp"
#include "transeval/rng.hpp"

namespace transeval {
namespace {

using testing::TempDir;

FeatureMatrix Random(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::vector<float> data(n * d);
  rng::CounterStream s(seed);
  for (auto& v : data) v = static_cast<float>(s.NextNormal() * 1e3);
  return FeatureMatrix(n, d, std::move(data));
}

std::string Message(const std::vector<std::uint8_t>& bytes) {
  try {
    DecodeFeatures(bytes);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

TEST(FeatureMatrix, ValidatesContents) {
  EXPECT_THROW(FeatureMatrix(0, 3, {}), InputError);
  EXPECT_THROW(FeatureMatrix(1, 2, {1.0f}), InputError);
  EXPECT_THROW(FeatureMatrix(1, 1, {std::numeric_limits<float>::quiet_NaN()}), InputError);
  EXPECT_THROW(FeatureMatrix(1, 1, {std::numeric_limits<float>::infinity()}), InputError);
  EXPECT_THROW(FeatureMatrix(2, 1, {1.0f, 2.0f}, {"only one"}), InputError);
}

TEST(FeatureMatrix, ConcatAndSelect) {
  const FeatureMatrix a(2, 2, {1, 2, 3, 4});
  const FeatureMatrix b(1, 2, {5, 6});
  const FeatureMatrix* parts[] = {&a, &b};
  const FeatureMatrix c = FeatureMatrix::Concat(parts);
  EXPECT_EQ(c.rows(), 3u);
  EXPECT_EQ(c.at(2, 1), 6.0f);
  const std::size_t pick[] = {2, 0};
  const FeatureMatrix s = c.SelectRows(pick);
  EXPECT_EQ(s.at(0, 0), 5.0f);
  EXPECT_EQ(s.at(1, 1), 2.0f);
  const FeatureMatrix bad(1, 3, {1, 2, 3});
  const FeatureMatrix* mismatch[] = {&a, &bad};
  EXPECT_THROW(FeatureMatrix::Concat(mismatch), InputError);
}

TEST(FeatureMatrix, EigenRoundTrip) {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6.5;
  const FeatureMatrix f = FeatureMatrix::FromEigen(m);
  EXPECT_EQ(f.at(1, 2), 6.5f);
  EXPECT_EQ(f.ToEigen(), m);
}

TEST(Feat1, RandomRoundTripIsBitIdentical) {
  TempDir dir;
  const FeatureMatrix f = Random(7, 16, 1);
  SaveFeatures(f, dir / "f.feat");
  const FeatureMatrix g = LoadFeatures(dir / "f.feat");
  ASSERT_EQ(g.rows(), 7u);
  ASSERT_EQ(g.cols(), 16u);
  EXPECT_EQ(std::memcmp(f.data().data(), g.data().data(), 7 * 16 * sizeof(float)), 0);
  EXPECT_FALSE(std::filesystem::exists(dir / "f.feat.tmp"));
}

TEST(Feat1, LabelsRoundTrip) {
  const FeatureMatrix f(2, 1, {1.5f, -2.0f}, {"a.png", "sub/\xc3\xa9.tif"});
  const FeatureMatrix g = DecodeFeatures(EncodeFeatures(f));
  EXPECT_EQ(g, f);
  EXPECT_EQ(g.labels()[1], "sub/\xc3\xa9.tif");
}

TEST(Feat1, ByteLayout) {
  const FeatureMatrix f(1, 2, {1.0f, -2.0f});
  const std::vector<std::uint8_t> expected = {'F', 'E', 'A', 'T', '1',
                                              1,   0,   0,   0,          // n
                                              2,   0,   0,   0,          // d
                                              0x00, 0x00, 0x80, 0x3F,    // 1.0f
                                              0x00, 0x00, 0x00, 0xC0};   // -2.0f
  EXPECT_EQ(EncodeFeatures(f), expected);
}

TEST(Feat1, VersionMismatch) {
  auto bytes = EncodeFeatures(Random(2, 2, 2));
  bytes[4] = '2';
  EXPECT_NE(Message(bytes).find("unsupported version 'FEAT2'"), std::string::npos);
  bytes[0] = 'X';
  EXPECT_NE(Message(bytes).find("bad magic"), std::string::npos);
}

TEST(Feat1, TruncatedPayloadNamesByteCounts) {
  auto bytes = EncodeFeatures(Random(3, 4, 3));
  bytes.resize(bytes.size() - 5);
  const std::string msg = Message(bytes);
  EXPECT_NE(msg.find("expected 48 bytes, found 43"), std::string::npos) << msg;
}

TEST(Feat1, OversizedHeaderIsRejected) {
  std::vector<std::uint8_t> bytes = {'F', 'E', 'A', 'T', '1', 0xFF, 0xFF, 0xFF, 0xFF,
                                     0xFF, 0xFF, 0xFF, 0xFF};
  EXPECT_NE(Message(bytes).find("overflows"), std::string::npos);
}

TEST(Feat1, TrailingGarbageIsRejected) {
  auto bytes = EncodeFeatures(FeatureMatrix(1, 1, {3.0f}, {"x"}));
  bytes.push_back(0);
  EXPECT_THROW(DecodeFeatures(bytes), InputError);
}

TEST(Feat1, MissingFile) {
  TempDir dir;
  EXPECT_THROW(LoadFeatures(dir / "none.feat"), InputError);
}

}  // namespace
}  // namespace transeval
