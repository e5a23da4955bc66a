/*
 * Copyright 2026 The TIN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tin/checkpoint.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace tin {
namespace {

using testing::toy_model;
using testing::toy_samples;
using testing::toy_spec;

std::string save(const Model& m) {
  std::ostringstream os;
  save_checkpoint(m, os);
  return os.str();
}

Model load(const std::string& text) {
  std::istringstream in(text);
  return load_checkpoint(in, "ckpt");
}

class CheckpointRoundTrip : public ::testing::TestWithParam<std::pair<Variant, EncoderKind>> {};

TEST_P(CheckpointRoundTrip, PredictionsAndBytesMatch) {
  const auto [v, enc] = GetParam();
  const auto samples = toy_samples(20, 3);
  Model m = toy_model(toy_spec(v, enc), samples, 9);
  testing::randomize(m, 4);
  const std::string text = save(m);
  const Model back = load(text);
  EXPECT_EQ(back.spec().variant, v);
  EXPECT_EQ(back.encoder().bin_edges(), m.encoder().bin_edges());
  for (const Sample& s : samples) EXPECT_EQ(back.predict(s), m.predict(s));
  EXPECT_EQ(save(back), text);
}

INSTANTIATE_TEST_SUITE_P(Variants, CheckpointRoundTrip,
                         ::testing::Values(std::pair{Variant::kTin, EncoderKind::kTteP},
                                           std::pair{Variant::kTin, EncoderKind::kTteT},
                                           std::pair{Variant::kTin, EncoderKind::kCoe},
                                           std::pair{Variant::kDin, EncoderKind::kNone},
                                           std::pair{Variant::kDinSplit, EncoderKind::kNone},
                                           std::pair{Variant::kAvgConcat, EncoderKind::kNone}));

TEST(Checkpoint, HexFloatsAreExact) {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 0.0, -0.0, 123456.789}) {
    const double back = detail::parse_hex_double(detail::hex_double(v));
    EXPECT_EQ(back, v);
    EXPECT_EQ(std::signbit(back), std::signbit(v));
  }
}

TEST(Checkpoint, CorruptInputsAreRejected) {
  const auto samples = toy_samples(10, 3);
  const std::string good = save(toy_model(toy_spec(Variant::kTin), samples, 1));
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  EXPECT_THROW(load(""), InputError);
  EXPECT_THROW(load(replace("tin-checkpoint 1", "tin-checkpoint 9")), InputError);
  EXPECT_THROW(load(replace("code 111", "code 011")), InputError);
  EXPECT_THROW(load(replace("d_cat 3", "d_kat 3")), InputError);
  EXPECT_THROW(load(good.substr(0, good.size() / 2)), InputError);
  EXPECT_THROW(load(replace("\nend\n", "\njunk\n")), InputError);
}

TEST(Checkpoint, MissingFile) { EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), InputError); }

}  // namespace
}  // namespace tin
