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

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "comem/backend.h"
#include "comem/error.h"
#include "comem/hash.h"
#include "comem/oracle.h"
#include "comem/prompts.h"
#include "comem/synthetic.h"
#include "test_util.h"

namespace comem {
namespace {

const LabelSet kMatch{Strategy::kMatching, 0, true};
const LabelSet kCompare{Strategy::kComparing, 0, true};

LabelSet Select(std::size_t n, bool allow_none = true) {
  return {Strategy::kSelecting, n, allow_none};
}

TEST_CASE("matching labels") {
  CHECK(ParseLabel("Yes", kMatch).Canonical() == "Yes");
  CHECK(ParseLabel("  yes.", kMatch).is_yes());
  CHECK(ParseLabel("No, they differ. Yes?", kMatch).Canonical() == "No");
  CHECK(ParseLabel("Answer: YES", kMatch).is_yes());
  CHECK_FALSE(ParseLabel("Nobody knows", kMatch).parse_ok);
  CHECK_FALSE(ParseLabel("Yesterday", kMatch).is_yes());
  auto none = ParseLabel("", kMatch);
  CHECK_FALSE(none.parse_ok);
  CHECK(none.Canonical() == "No");
}

TEST_CASE("comparing labels") {
  CHECK(ParseLabel("Record A", kCompare).choice() == AorB::kA);
  CHECK(ParseLabel("record b is closer", kCompare).choice() == AorB::kB);
  CHECK(ParseLabel("I pick Record B over Record A", kCompare).choice() == AorB::kB);
  CHECK(ParseLabel("B", kCompare).choice() == AorB::kB);
  CHECK(ParseLabel("(b)", kCompare).parse_ok);
  CHECK(ParseLabel("Recordb or record ab then a", kCompare).choice() == AorB::kA);
  auto bad = ParseLabel("neither", kCompare);
  CHECK_FALSE(bad.parse_ok);
  CHECK(bad.Canonical() == "A");
}

TEST_CASE("selecting labels") {
  CHECK(ParseLabel("[3]", Select(5)).index() == 3);
  CHECK(ParseLabel("The answer is [ 2 ].", Select(5)).index() == 2);
  CHECK(ParseLabel("[0]", Select(5)).index() == 0);
  CHECK(ParseLabel("[9] no wait [4]", Select(5)).index() == 4);
  CHECK(ParseLabel("record 5", Select(5)).index() == 5);
  CHECK_FALSE(ParseLabel("[0]", Select(5, false)).parse_ok);
  CHECK_FALSE(ParseLabel("[6]", Select(5)).parse_ok);
  CHECK_FALSE(ParseLabel("[99999999999999999999999]", Select(5)).parse_ok);
  auto bad = ParseLabel("none of them", Select(5));
  CHECK_FALSE(bad.parse_ok);
  CHECK(bad.Canonical() == "0");
}

TEST_CASE("parse label is total and returns admissible labels") {
  const std::string alphabet = "ab yesnoRECORD[]0123456789.,\n\t\"";
  SplitMix64 rng(99);
  for (int trial = 0; trial < 5000; ++trial) {
    std::string text;
    for (std::size_t i = 0, n = rng.Below(24); i < n; ++i) {
      text.push_back(rng.Below(10) == 0 ? static_cast<char>(rng.Below(256))
                                        : alphabet[rng.Below(alphabet.size())]);
    }
    std::size_t n = 1 + rng.Below(12);
    bool allow_none = rng.Below(2) == 0;
    for (const LabelSet &set : {kMatch, kCompare, Select(n, allow_none)}) {
      ParsedLabel p;
      REQUIRE_NOTHROW(p = ParseLabel(text, set));
      CHECK(p.strategy() == set.strategy);
      auto admissible = set.Labels();
      if (set.strategy == Strategy::kSelecting && !allow_none && !p.parse_ok) {
        // The unparsed default is "0", outside a forced label set.
        CHECK(p.index() == 0);
      } else {
        CHECK(std::find(admissible.begin(), admissible.end(), p.Canonical()) !=
              admissible.end());
      }
      if (p.parse_ok) {
        CHECK(ParseLabel(set.strategy == Strategy::kSelecting
                             ? "[" + p.Canonical() + "]"
                             : p.Canonical(),
                         set)
                  .Canonical() == p.Canonical());
      }
    }
  }
}

TEST_CASE("usage accounting") {
  RenderedPrompt prompt;
  prompt.text = std::string(10, 'x');
  prompt.record_count = 3;
  BackendResponse resp;
  resp.text = "Yes";
  CostLedger l = AccountUsage(resp, prompt, {}, {2.0, 4.0});
  CHECK(l.invocations == 1);
  CHECK(l.input_records == 3);
  CHECK(l.prompt_tokens == 3);
  CHECK(l.completion_tokens == 1);
  CHECK(l.tokens() == 4);
  CHECK(l.cost == doctest::Approx((3 * 2.0 + 1 * 4.0) / 1e6));
  resp.usage = Usage{100, 7};
  l = AccountUsage(resp, prompt, l);
  CHECK(l.invocations == 2);
  CHECK(l.prompt_tokens == 103);
  CHECK(EstimateTokens("") == 0);
  CHECK(EstimateTokens("abcde") == 2);
}

TEST_CASE("ledger addition is associative and commutative") {
  SplitMix64 rng(3);
  auto random = [&] {
    CostLedger l;
    l.invocations = rng.Below(100);
    l.input_records = rng.Below(1000);
    l.prompt_tokens = rng.Below(10000);
    l.completion_tokens = rng.Below(100);
    l.cost = static_cast<double>(rng.Below(1000)) / 8.0;  // exact in binary
    return l;
  };
  for (int i = 0; i < 200; ++i) {
    CostLedger a = random(), b = random(), c = random();
    CHECK((a + b) + c == a + (b + c));
    CHECK(a + b == b + a);
    CHECK(a + CostLedger{} == a);
  }
}

BackendRequest Request(const RenderedPrompt &prompt, const std::string &task,
                       std::vector<std::string> ids, bool probs = false) {
  BackendRequest r;
  r.prompt = prompt;
  r.subject = {task, task + "_anchor", std::move(ids)};
  r.want_probabilities = probs;
  return r;
}

TEST_CASE("perfect oracle answers from ground truth") {
  auto task = testing::MakeTask("t", 4, 3);
  OracleBackend oracle({});
  oracle.Register(task);
  PromptRenderer r;
  auto m = r.Matching(task.anchor(), task.candidate(3));
  CHECK(oracle.Complete(Request(m, "t", {"t_c3"})).text == "Yes");
  CHECK(oracle.Complete(Request(m, "t", {"t_c1"})).text == "No");
  auto c = r.Comparing(task.anchor(), task.candidate(1), task.candidate(3));
  CHECK(oracle.Complete(Request(c, "t", {"t_c1", "t_c3"})).text == "Record B");
  CHECK(oracle.Complete(Request(c, "t", {"t_c3", "t_c1"})).text == "Record A");
  auto s = r.Selecting(task.anchor(), task.candidates());
  CHECK(oracle.Complete(Request(s, "t", {"t_c1", "t_c2", "t_c3", "t_c4"})).text == "[3]");
  CHECK_FALSE(oracle.Complete(Request(s, "t", {"t_c1", "t_c2", "t_c3", "t_c4"}))
                  .label_probs.has_value());

  auto none = testing::MakeTask("u", 2);
  oracle.Register(none);
  auto s2 = r.Selecting(none.anchor(), none.candidates());
  CHECK(oracle.Complete(Request(s2, "u", {"u_c1", "u_c2"})).text == "[0]");
  auto s3 = r.Selecting(none.anchor(), none.candidates(), false);
  auto forced = oracle.Complete(Request(s3, "u", {"u_c1", "u_c2"})).text;
  CHECK((forced == "[1]" || forced == "[2]"));
}

TEST_CASE("oracle rejects unknown subjects") {
  OracleBackend oracle({});
  auto task = testing::MakeTask("t", 2, 1);
  auto m = PromptRenderer().Matching(task.anchor(), task.candidate(1));
  CHECK_THROWS_AS(oracle.Complete(Request(m, "t", {"t_c1"})), BackendError);
  oracle.Register(task);
  CHECK_THROWS_AS(oracle.Complete(Request(m, "t", {"zzz"})), BackendError);
  CHECK_THROWS_AS(oracle.Complete(Request(m, "t", {"t_c1", "t_c2"})), BackendError);
  OracleConfig bad;
  bad.flip_rate = 1.5;
  CHECK_THROWS_AS(OracleBackend{bad}, ValidationError);
  bad.flip_rate = 0.0;
  bad.position_bias = {1.0, -0.1};
  CHECK_THROWS_AS(OracleBackend{bad}, ValidationError);
}

TEST_CASE("oracle is deterministic per seed") {
  Dataset d = MakeSyntheticDataset({50, 40, 6, 2});
  OracleConfig cfg;
  cfg.flip_rate = 0.3;
  cfg.probability_mode = ProbabilityMode::kCalibrated;
  cfg.seed = 11;
  OracleBackend a(cfg), b(cfg);
  cfg.seed = 12;
  OracleBackend c(cfg);
  a.Register(d);
  b.Register(d);
  c.Register(d);
  PromptRenderer r;
  std::size_t differ = 0;
  for (const auto &t : d.tasks()) {
    for (std::size_t i = 1; i <= t.size(); ++i) {
      auto req = Request(r.Matching(t.anchor(), t.candidate(i)), t.task_id(),
                         {t.candidate(i).id()}, true);
      auto x = a.Complete(req), y = b.Complete(req), z = c.Complete(req);
      CHECK(x.text == y.text);
      CHECK(x.label_probs == y.label_probs);
      differ += x.text != z.text;
    }
  }
  CHECK(differ > 0);
}

TEST_CASE("calibrated probabilities form a distribution favoring the answer") {
  Dataset d = MakeSyntheticDataset({40, 30, 7, 5});
  OracleConfig cfg;
  cfg.flip_rate = 0.25;
  cfg.probability_mode = ProbabilityMode::kCalibrated;
  OracleBackend oracle(cfg);
  oracle.Register(d);
  PromptRenderer r;
  for (const auto &t : d.tasks()) {
    std::vector<std::string> ids;
    for (const auto &c : t.candidates()) ids.push_back(c.id());
    std::vector<BackendRequest> reqs = {
        Request(r.Matching(t.anchor(), t.candidate(1)), t.task_id(), {ids[0]}, true),
        Request(r.Comparing(t.anchor(), t.candidate(1), t.candidate(2)), t.task_id(),
                {ids[0], ids[1]}, true),
        Request(r.Selecting(t.anchor(), t.candidates()), t.task_id(), ids, true),
        Request(r.Selecting(t.anchor(), t.candidates(), false), t.task_id(), ids, true)};
    for (const auto &req : reqs) {
      auto resp = oracle.Complete(req);
      REQUIRE(resp.label_probs);
      double sum = 0;
      for (const auto &[label, p] : *resp.label_probs) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      auto parsed = ParseLabel(resp.text, req.prompt.expected_labels);
      REQUIRE(parsed.parse_ok);
      double mine = resp.label_probs->at(parsed.Canonical());
      CHECK(mine >= 0.5);
      for (const auto &[label, p] : *resp.label_probs) {
        if (label != parsed.Canonical()) CHECK(p <= mine);
      }
      CHECK(resp.label_probs->size() == req.prompt.expected_labels.Labels().size());
    }
  }
}

TEST_CASE("flip rate is realized approximately") {
  Dataset d = MakeSyntheticDataset({400, 300, 10, 8});
  OracleConfig cfg;
  cfg.flip_rate = 0.2;
  OracleBackend oracle(cfg);
  oracle.Register(d);
  PromptRenderer r;
  std::size_t wrong = 0, total = 0;
  for (const auto &t : d.tasks()) {
    for (std::size_t i = 1; i <= t.size(); ++i) {
      auto resp = oracle.Complete(Request(r.Matching(t.anchor(), t.candidate(i)),
                                          t.task_id(), {t.candidate(i).id()}));
      bool truth = t.gold() == i;
      wrong += (resp.text == "Yes") != truth;
      ++total;
    }
  }
  double rate = static_cast<double>(wrong) / static_cast<double>(total);
  CHECK(rate == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("position bias schedule") {
  CHECK(LinearPositionBias(10, 1.0, 0.5).front() == 1.0);
  CHECK(LinearPositionBias(10, 1.0, 0.5).back() == 0.5);
  CHECK(LinearPositionBias(3, 1.0, 0.5)[1] == doctest::Approx(0.75));
  CHECK(LinearPositionBias(1, 0.9, 0.1) == std::vector<double>{0.9});

  // Selecting accuracy per gold position follows the schedule.
  SyntheticConfig sc{2000, 2000, 10, 5};
  Dataset d = MakeSyntheticDataset(sc);
  OracleConfig cfg;
  cfg.position_bias = LinearPositionBias(10, 1.0, 0.5);
  OracleBackend oracle(cfg);
  oracle.Register(d);
  PromptRenderer r;
  std::vector<std::size_t> hit(11, 0), seen(11, 0);
  for (const auto &t : d.tasks()) {
    std::vector<std::string> ids;
    for (const auto &c : t.candidates()) ids.push_back(c.id());
    auto resp = oracle.Complete(
        Request(r.Selecting(t.anchor(), t.candidates()), t.task_id(), ids));
    auto label = ParseLabel(resp.text, Select(10));
    ++seen[*t.gold()];
    hit[*t.gold()] += label.index() == *t.gold();
  }
  CHECK(hit[1] == seen[1]);
  for (std::size_t p = 1; p <= 10; ++p) {
    double acc = static_cast<double>(hit[p]) / static_cast<double>(seen[p]);
    CHECK(std::abs(acc - cfg.position_bias[p - 1]) < 0.12);
  }
}

TEST_CASE("function backend forwards") {
  FunctionBackend f([](const BackendRequest &r) {
    BackendResponse out;
    out.text = r.subject.task_id;
    return out;
  });
  BackendRequest req;
  req.subject.task_id = "hello";
  CHECK(f.Complete(req).text == "hello");
  CHECK(f.model_name() == "function");
  CHECK_FALSE(f.provides_probabilities());
  CHECK(BackendRequest::kTemperature == 0.0);
}

}  // namespace
}  // namespace comem
