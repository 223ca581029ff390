// Copyright 2026 The PACS Authors.
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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pacs/io.hpp"
#include "scenarios.hpp"

namespace pacs::io {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, EmptyTextGivesDefaults) {
  const ScenarioConfig c = parse_config("");
  const ScenarioConfig d;
  EXPECT_EQ(to_json(c).dump(), to_json(d).dump());
  EXPECT_EQ(c.game.N, 100);
  EXPECT_EQ(parse_config("{}").game.T, 30);
}

TEST(Config, ErrorsNameTheOffendingKey) {
  EXPECT_NE(error_of(R"({"game": {"N": 0}})").find("N"), std::string::npos);
  EXPECT_NE(error_of(R"({"game": {"gamma": "x"}})").find("gamma"), std::string::npos);
  EXPECT_NE(error_of(R"({"gmae": {}})").find("gmae"), std::string::npos);
  EXPECT_NE(error_of(R"({"task": {"kind": "cnn"}})").find("cnn"), std::string::npos);
  EXPECT_NE(error_of("{not json").find("invalid JSON"), std::string::npos);
}

TEST(Config, RoundTrip) {
  const ScenarioConfig c = parse_config(R"({
    "scenario": "compare",
    "game": {"N": 12, "T": 7, "K": 4, "rho_L": 0.02, "rho_H": 3.5},
    "task": {"kind": "logistic", "heterogeneity": 0.4},
    "run": {"mode": "with-replacement", "eta": 0.02},
    "strategies": ["fedpcs", "random", "gradnorm"],
    "seeds": "1..3"
  })");
  EXPECT_EQ(c.scenario, Scenario::kCompare);
  EXPECT_EQ(c.game.N, 12);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  const ScenarioConfig again = parse_config(to_json(c).dump());
  EXPECT_EQ(to_json(again).dump(), to_json(c).dump());
  EXPECT_EQ(config_hash(again), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, MissingFileNamesPath) {
  try {
    load_config("/nonexistent/pacs.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/pacs.json"), std::string::npos);
  }
}

TEST(Seeds, RangesAndLists) {
  EXPECT_EQ(parse_seeds("1..4,9"), (std::vector<std::uint64_t>{1, 2, 3, 4, 9}));
  EXPECT_EQ(parse_seeds("0"), (std::vector<std::uint64_t>{0}));
  EXPECT_THROW(parse_seeds("4..1"), ConfigError);
  EXPECT_THROW(parse_seeds("a"), ConfigError);
}

TEST(Csv, RowsAndFormatting) {
  CsvWriter w({"a", "b"});
  w.row(1, 0.1);
  EXPECT_EQ(w.str(), "a,b\n1,0.10000000000000001\n");
  EXPECT_THROW(w.row(1), ShapeError);
}

TEST(Scenarios, SolveGameOutputIsDeterministic) {
  ScenarioConfig c = parse_config(R"({"game": {"N": 8, "T": 4, "K": 2}})");
  const auto a = scenarios::run(c);
  const auto b = scenarios::run(c);
  ASSERT_FALSE(a.files.empty());
  EXPECT_EQ(a.files, b.files);
}

}  // namespace
}  // namespace pacs::io
