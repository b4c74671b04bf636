/* Copyright 2026 The binorm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "binorm/checkpoint.hpp"
#include "binorm/errors.hpp"

namespace binorm {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "binorm-test-checkpoint";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

Checkpoint sample_checkpoint(NormalizerKind norm, HeadKind head) {
  Checkpoint c;
  c.spec = ModelSpec::b_shape(norm, head, 6, 5);
  c.params = ModelParams::initial(c.spec, 9);
  c.optimizer = adam_init(c.params);
  c.optimizer.step = 17;
  for (auto& t : tensors(c.optimizer.first)) t.value.setConstant(0.25);
  for (auto& t : tensors(c.optimizer.second)) t.value.setConstant(1.0 / 3.0);
  c.epoch = 4;
  c.horizon_scale = 12.5;
  c.config_hash = "0123abcd";
  return c;
}

void expect_same(const ModelParams& a, const ModelParams& b) {
  const auto ta = tensors(a);
  const auto tb = tensors(b);
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    EXPECT_EQ(ta[i].name, tb[i].name);
    EXPECT_EQ(ta[i].value, tb[i].value) << ta[i].name;
  }
}

class CheckpointRoundTrip
    : public ::testing::TestWithParam<std::tuple<NormalizerKind, HeadKind>> {};

TEST_P(CheckpointRoundTrip, BitExact) {
  const auto [norm, head] = GetParam();
  const Checkpoint c = sample_checkpoint(norm, head);
  const fs::path path = temp_file(std::string("rt-") + to_string(norm) + "-" + to_string(head) + ".bin");
  save_checkpoint(path, c);
  const Checkpoint d = load_checkpoint(path);
  EXPECT_EQ(d.spec, c.spec);
  EXPECT_EQ(d.epoch, 4);
  EXPECT_EQ(d.horizon_scale, 12.5);
  EXPECT_EQ(d.config_hash, "0123abcd");
  EXPECT_FALSE(d.partial);
  EXPECT_EQ(d.optimizer.step, 17);
  expect_same(d.params, c.params);
  expect_same(d.optimizer.first, c.optimizer.first);
  expect_same(d.optimizer.second, c.optimizer.second);
  const fs::path again = temp_file("rt-again.bin");
  save_checkpoint(again, d);
  EXPECT_EQ(slurp(again), slurp(path));
}

INSTANTIATE_TEST_SUITE_P(AllModels, CheckpointRoundTrip,
                         ::testing::Combine(::testing::Values(NormalizerKind::kNone, NormalizerKind::kZScore,
                                                              NormalizerKind::kMinMax, NormalizerKind::kBatchNorm,
                                                              NormalizerKind::kDain, NormalizerKind::kBin),
                                            ::testing::Values(HeadKind::kSoftmax3,
                                                              HeadKind::kSoftmax2Regression)));

TEST(Checkpoint, CorruptionIsDetected) {
  const fs::path path = temp_file("corrupt.bin");
  save_checkpoint(path, sample_checkpoint(NormalizerKind::kBin, HeadKind::kSoftmax3));
  const std::string good = slurp(path);
  for (std::size_t pos : {std::size_t{0}, std::size_t{20}, good.size() / 2, good.size() - 1}) {
    std::string bad = good;
    bad[pos] = static_cast<char>(bad[pos] ^ 0x10);
    spit(path, bad);
    EXPECT_THROW(load_checkpoint(path), ChecksumError) << "byte " << pos;
  }
  spit(path, good.substr(0, good.size() - 9));
  EXPECT_THROW(load_checkpoint(path), ChecksumError);
  spit(path, "");
  EXPECT_THROW(load_checkpoint(path), ChecksumError);
  EXPECT_THROW(load_checkpoint(temp_file("missing.bin")), IoError);
}

TEST(Checkpoint, PartialFlagSurvives) {
  Checkpoint c = sample_checkpoint(NormalizerKind::kDain, HeadKind::kSoftmax3);
  c.partial = true;
  const fs::path path = temp_file("partial.bin");
  save_checkpoint(path, c);
  EXPECT_TRUE(load_checkpoint(path).partial);
}

TEST(SpecJson, RoundTrip) {
  for (auto norm : {NormalizerKind::kNone, NormalizerKind::kBin, NormalizerKind::kDain}) {
    const ModelSpec spec = ModelSpec::c_shape(norm, HeadKind::kSoftmax2Regression, 12, 7);
    EXPECT_EQ(spec_from_json(spec_to_json(spec)), spec);
  }
}

TEST(SpecJson, PresetsAndDefaults) {
  EXPECT_EQ(spec_from_json(R"({"preset": "B"})"),
            ModelSpec::b_shape(NormalizerKind::kBin, HeadKind::kSoftmax3));
  EXPECT_EQ(spec_from_json(R"({"preset": "C", "normalizer": "dain", "input": [8, 5]})"),
            ModelSpec::c_shape(NormalizerKind::kDain, HeadKind::kSoftmax3, 8, 5));
}

TEST(SpecJson, StrictKeys) {
  EXPECT_THROW(spec_from_json(R"({"preset": "C", "colour": 1})"), ValidationError);
  EXPECT_THROW(spec_from_json(R"({"preset": "Z"})"), ValidationError);
  EXPECT_THROW(spec_from_json(R"({"normalizer": "layernorm"})"), ValidationError);
  EXPECT_THROW(spec_from_json("{not json"), ValidationError);
}

TEST(Crc32, KnownValue) {
  EXPECT_EQ(crc32_hex("123456789"), "cbf43926");
  EXPECT_EQ(crc32_hex(""), "00000000");
}

}  // namespace
}  // namespace binorm
