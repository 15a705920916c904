// Copyright 2026 The Credence Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "credence/demographics.hpp"
#include "credence/hash.hpp"
#include "credence/model_gateway.hpp"
#include "credence/rng.hpp"
#include "credence/text.hpp"

namespace credence {
namespace {

TEST(NaturalOrder, NumericRunsCompareByValue) {
  std::vector<std::string> ids = {"q10", "q2", "q1", "Q1a", "q100", "q02"};
  std::sort(ids.begin(), ids.end(), NaturalLess{});
  // Equal numeric values fall back to byte order.
  EXPECT_EQ(ids, (std::vector<std::string>{"Q1a", "q1", "q02", "q2", "q10",
                                           "q100"}));
  EXPECT_TRUE(natural_less("c9", "c10"));
  EXPECT_FALSE(natural_less("c10", "c9"));
  EXPECT_FALSE(natural_less("c1", "c1"));
}

TEST(Text, TrimLowerAndFixedFormatting) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(to_lower("MiXeD"), "mixed");
  EXPECT_EQ(format_fixed(0.1234567, 6), "0.123457");
  EXPECT_EQ(format_fixed(-0.0000001, 3), "0.000");
  EXPECT_EQ(format_fixed(-1.5, 1), "-1.5");
}

TEST(Hash, Sha256StandardVectors) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, KeyBuilderSeparatesFields) {
  const auto a = KeyBuilder().add("ab").add("c").hex();
  const auto b = KeyBuilder().add("a").add("bc").hex();
  EXPECT_NE(a, b);
  EXPECT_EQ(a, KeyBuilder().add("ab").add("c").hex());
}

TEST(Rng, ReproducibleAndBounded) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng r(9);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.bounded(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 100; ++s) seeds.insert(derive_seed(42, s));
  EXPECT_EQ(seeds.size(), 100u);
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
}

TEST(Rng, ShuffleIsAPermutation) {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  Rng r(1);
  r.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Demographics, NamesRoundTrip) {
  for (Axis axis : kAllAxes) {
    EXPECT_EQ(parse_axis(axis_name(axis)), axis);
    for (Group g : groups_of(axis)) {
      EXPECT_EQ(parse_group(group_name(g)), g);
      EXPECT_EQ(axis_of(g), axis);
      EXPECT_EQ(other_group(other_group(g)), g);
      EXPECT_NE(other_group(g), g);
      EXPECT_FALSE(persona_phrase(g).empty());
    }
  }
  EXPECT_FALSE(parse_axis("height").has_value());
}

TEST(Demographics, LabelAliases) {
  EXPECT_EQ(normalize_label_alias(" Real "), Label::kTrue);
  EXPECT_EQ(normalize_label_alias("FALSE"), Label::kFake);
  EXPECT_EQ(normalize_label_alias("misinfo"), Label::kFake);
  EXPECT_FALSE(normalize_label_alias("maybe").has_value());
}

TEST(Verdict, FirstWholeWordWins) {
  EXPECT_EQ(parse_verdict("True."), Verdict::kTrue);
  EXPECT_EQ(parse_verdict("I think it is FAKE, not true"), Verdict::kFake);
  EXPECT_EQ(parse_verdict("untrue and fakery"), Verdict::kUnparseable);
  EXPECT_EQ(parse_verdict(""), Verdict::kUnparseable);
  EXPECT_EQ(parse_verdict("answer: true"), Verdict::kTrue);
}

}  // namespace
}  // namespace credence
