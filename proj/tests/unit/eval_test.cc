// Copyright 2026 The ComEM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>
#include <string>
#include <vector>

#include "comem/error.h"
#include "comem/eval.h"
#include "comem/hash.h"
#include "comem/oracle.h"
#include "comem/pipeline.h"
#include "comem/strategies.h"
#include "comem/synthetic.h"
#include "test_util.h"

namespace comem {
namespace {

using testing::MakeTask;

// Expands every task into its (anchor, candidate) pairs and counts.
Confusion BruteForce(const Dataset &d, const PredictionSet &preds) {
  Confusion c;
  for (const auto &t : d.tasks()) {
    for (std::size_t i = 1; i <= t.size(); ++i) {
      bool positive = t.gold() && *t.gold() == i;
      bool predicted = preds.at(t.task_id()) == i;
      if (positive && predicted) ++c.tp;
      if (!positive && predicted) ++c.fp;
      if (positive && !predicted) ++c.fn;
    }
  }
  return c;
}

TEST_CASE("confusion arithmetic") {
  Confusion c{3, 1, 2};
  CHECK(c.Precision() == doctest::Approx(0.75));
  CHECK(c.Recall() == doctest::Approx(0.6));
  CHECK(c.F1() == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  CHECK(Confusion{}.F1() == 0.0);
  CHECK(Confusion{0, 2, 0}.F1() == 0.0);
}

TEST_CASE("perfect predictions score one") {
  Dataset d("d", {MakeTask("a", 3, 1), MakeTask("b", 3, 2), MakeTask("c", 3, 3),
                  MakeTask("e", 3)});
  auto r = ScorePredictions(d, {{"a", 1}, {"b", 2}, {"c", 3}, {"e", std::nullopt}});
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.by_position.size() == 3);
}

TEST_CASE("a wrong prediction is one false positive and one false negative") {
  Dataset d("d", {MakeTask("a", 6, 5)});
  auto r = ScorePredictions(d, {{"a", 2}});
  CHECK(r.counts == Confusion{0, 1, 1});
  auto none = ScorePredictions(d, {{"a", std::nullopt}});
  CHECK(none.counts == Confusion{0, 0, 1});
  Dataset g("g", {MakeTask("a", 6)});
  auto goldless = ScorePredictions(g, {{"a", 3}});
  CHECK(goldless.counts == Confusion{0, 1, 0});
  CHECK(goldless.goldless_fp == 1);
  CHECK(goldless.by_position.empty());
}

TEST_CASE("score predictions errors") {
  Dataset d("d", {MakeTask("a", 3, 1), MakeTask("b", 3)});
  try {
    ScorePredictions(d, {{"a", 1}});
    FAIL("expected throw");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  CHECK_THROWS_AS(ScorePredictions(d, {{"a", 1}, {"b", 1}, {"zz", 1}}), ValidationError);
  CHECK_THROWS_AS(ScorePredictions(d, {{"a", 4}, {"b", 1}}), ValidationError);
  CHECK_THROWS_AS(ScorePredictions(d, {{"a", 0}, {"b", 1}}), ValidationError);
}

TEST_CASE("score predictions agrees with pair expansion") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SplitMix64 rng(seed);
    std::vector<MatchTask> tasks;
    PredictionSet preds;
    std::size_t pairs = 0;
    std::size_t limit = 1 + rng.Below(1000);
    for (std::size_t t = 0; pairs < limit; ++t) {
      std::size_t n = 1 + rng.Below(12);
      std::optional<std::size_t> gold;
      if (rng.Below(4) != 0) gold = 1 + rng.Below(n);
      std::string id = "t" + std::to_string(t);
      tasks.push_back(MakeTask(id, n, gold));
      std::optional<std::size_t> pred;
      if (rng.Below(3) != 0) pred = rng.Below(2) && gold ? *gold : 1 + rng.Below(n);
      preds[id] = pred;
      pairs += n;
    }
    Dataset d("rand", std::move(tasks));
    auto r = ScorePredictions(d, preds);
    CHECK(r.counts == BruteForce(d, preds));

    // Per-position buckets plus goldless false positives rebuild the totals.
    Confusion sum;
    for (const auto &[pos, c] : r.by_position) sum += c;
    sum.fp += r.goldless_fp;
    CHECK(sum == r.counts);
  }
}

std::shared_ptr<OracleBackend> Oracle(const Dataset &d, OracleConfig cfg = {}) {
  auto o = std::make_shared<OracleBackend>(std::move(cfg));
  o->Register(d);
  return o;
}

TEST_CASE("sweep with a perfect oracle") {
  Dataset d = MakeSyntheticDataset({60, 45, 10, 2});
  PipelineConfig c;
  c.filter_backend = Oracle(d);
  c.select_backend = c.filter_backend;
  std::vector<std::size_t> ks = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto points = SweepTopK(d, c, ks, 4);
  REQUIRE(points.size() == 10);
  for (const auto &p : points) CHECK(p.metrics.f1 == 1.0);
  CHECK(points[3].metrics.ledger.invocations == 60 * 11);

  std::vector<std::size_t> zero = {3, 0};
  CHECK_THROWS_AS(SweepTopK(d, c, zero), ValidationError);
}

TEST_CASE("sweep recall grows with k under selecting position bias") {
  Dataset d = MakeSyntheticDataset({400, 300, 10, 1});
  OracleConfig biased;
  biased.position_bias = LinearPositionBias(10, 1.0, 0.5);
  PipelineConfig c;
  c.filter_strategy = FilterStrategy::kComparingBubble;
  c.filter_backend = Oracle(d);
  c.select_backend = Oracle(d, biased);
  std::vector<std::size_t> ks = {1, 2, 4, 6, 8, 10};
  auto points = SweepTopK(d, c, ks, 4);
  for (std::size_t i = 1; i < points.size(); ++i) {
    CHECK(points[i].metrics.recall >= points[i - 1].metrics.recall);
  }
}

TEST_CASE("sweep at k=4 reproduces a direct run") {
  Dataset d = MakeSyntheticDataset({50, 40, 10, 6});
  OracleConfig noisy;
  noisy.flip_rate = 0.2;
  noisy.probability_mode = ProbabilityMode::kCalibrated;
  PipelineConfig c;
  c.filter_backend = Oracle(d, noisy);
  c.select_backend = c.filter_backend;
  std::vector<std::size_t> ks = {4};
  auto points = SweepTopK(d, c, ks);
  PredictionSet preds;
  CostLedger ledger;
  for (const auto &t : d.tasks()) {
    auto r = RunComem(t, c);
    preds[t.task_id()] = r.prediction;
    ledger += r.ledger;
  }
  auto direct = ScorePredictions(d, preds);
  CHECK(points[0].metrics.counts == direct.counts);
  CHECK(points[0].metrics.ledger == ledger);
}

std::vector<MatchDecision> Edges(std::initializer_list<std::pair<const char *, const char *>> e,
                                 const std::string &dir = "D1->D2") {
  std::vector<MatchDecision> out;
  for (const auto &[a, b] : e) out.push_back({a, std::string(b), dir});
  return out;
}

TEST_CASE("consistency fixtures") {
  auto clean = Edges({{"A", "B"}});
  auto back = Edges({{"B", "A"}}, "D2->D1");
  clean.insert(clean.end(), back.begin(), back.end());
  CHECK(ValidateConsistency(clean).violations.empty());

  auto fan = ValidateConsistency(Edges({{"A", "B"}, {"A", "C"}}));
  REQUIRE(fan.violations.size() == 1);
  CHECK(fan.Count(ViolationKind::kMutualExclusivity) == 1);
  CHECK(fan.violations[0].records.front() == "A");

  auto chain = ValidateConsistency(Edges({{"A", "B"}, {"B", "C"}}));
  REQUIRE(chain.violations.size() == 1);
  CHECK(chain.Count(ViolationKind::kTransitivity) == 1);
  CHECK(chain.violations[0].records == std::vector<std::string>{"A", "C"});
  CHECK(chain.Format() ==
        "1 violations\ntransitivity: A C (linked through a shared match but not matched)\n");

  auto closed = ValidateConsistency(Edges({{"A", "B"}, {"B", "C"}, {"A", "C"}}));
  CHECK(closed.Count(ViolationKind::kTransitivity) == 0);
}

TEST_CASE("symmetry needs both directions to have been asked") {
  std::vector<MatchDecision> d = {{"A", std::string("B"), "D1->D2"},
                                  {"B", std::nullopt, "D2->D1"}};
  auto r = ValidateConsistency(d);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.Count(ViolationKind::kSymmetry) == 1);
  CHECK(ViolationKindName(ViolationKind::kSymmetry) == "symmetry");
  CHECK(ValidateConsistency(std::vector<MatchDecision>{}).Format() == "0 violations\n");
}

TEST_CASE("single-direction selecting output is consistent") {
  Dataset d = MakeSyntheticDataset({200, 150, 10, 3});
  OracleConfig noisy;
  noisy.flip_rate = 0.5;
  auto oracle = Oracle(d, noisy);
  std::vector<MatchDecision> decisions;
  for (const auto &t : d.tasks()) {
    auto r = SelectFromList(t, *oracle);
    decisions.push_back({t.anchor().id(),
                         r.prediction ? std::optional<std::string>(t.candidate(*r.prediction).id())
                                      : std::nullopt,
                         "D1->D2"});
  }
  CHECK(ValidateConsistency(decisions).violations.empty());
}

TEST_CASE("closed-form cost expectations") {
  CHECK(ExpectedMatching(10) == CostExpectation{10, 20});
  CHECK(ExpectedMatching(10, 6) == CostExpectation{10, 140});
  CHECK(ExpectedComparingBubble(10, 1) == CostExpectation{18, 54});
  CHECK(ExpectedComparingBubble(10, 10) == CostExpectation{90, 270});
  CHECK(ExpectedComparingAllPairs(10) == CostExpectation{90, 270});
  CHECK(ExpectedCompareThenMatch(10) == CostExpectation{19, 56});
  CHECK(ExpectedSelecting(10) == CostExpectation{1, 11});
  CHECK(ExpectedComem(10, FilterStrategy::kMatching, 4) == CostExpectation{11, 25});
  CHECK(ExpectedComem(3, FilterStrategy::kMatching, 4) == CostExpectation{4, 10});
  // Dataset-level: matching over 400 tasks of 10 candidates.
  CostExpectation total;
  for (int i = 0; i < 400; ++i) total += ExpectedMatching(10);
  CHECK(total == CostExpectation{4000, 8000});
  CostExpectation comem;
  for (int i = 0; i < 400; ++i) comem += ExpectedComem(10, FilterStrategy::kMatching, 4);
  CHECK(comem.invocations == 4400);
}

TEST_CASE("cost table flags mismatches") {
  CostLedger ok;
  ok.invocations = 400;
  ok.input_records = 4400;
  CostLedger off = ok;
  off.invocations = 401;
  std::vector<CostRow> rows = {{"sel", ok, {400, 4400}}, {"odd, name", off, {400, 4400}}};
  CHECK(rows[0].Matches());
  CHECK_FALSE(rows[1].Matches());
  std::string table = FormatCostTable(rows);
  CHECK(table.rfind("strategy,invocations,expected_invocations,", 0) == 0);
  CHECK(table.find("sel,400,400,4400,4400,0,0,0,no\n") != std::string::npos);
  CHECK(table.find("\"odd, name\",401,400,") != std::string::npos);
  CHECK(table.find(",yes\n") != std::string::npos);
}

}  // namespace
}  // namespace comem
