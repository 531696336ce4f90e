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

#include "comem/eval.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "comem/error.h"
#include "comem/parallel.h"
#include "csv.h"

namespace comem {

double Confusion::Precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Confusion::Recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Confusion::F1() const {
  double p = Precision();
  double r = Recall();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

Confusion &Confusion::operator+=(const Confusion &o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

MetricsReport ScorePredictions(const Dataset &dataset, const PredictionSet &preds) {
  std::vector<std::string> missing;
  for (const auto &t : dataset.tasks()) {
    if (!preds.count(t.task_id())) missing.push_back(t.task_id());
  }
  std::vector<std::string> unknown;
  for (const auto &[id, _] : preds) {
    if (!dataset.Find(id)) unknown.push_back(id);
  }
  auto list = [](const std::vector<std::string> &ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < 20; ++i) out += (i ? ", " : "") + ids[i];
    if (ids.size() > 20) out += ", ... (" + std::to_string(ids.size()) + " total)";
    return out;
  };
  if (!missing.empty()) {
    throw ValidationError("predictions missing for tasks: " + list(missing));
  }
  if (!unknown.empty()) {
    throw ValidationError("predictions for tasks not in the dataset: " + list(unknown));
  }

  MetricsReport report;
  for (const auto &t : dataset.tasks()) {
    const auto &pred = preds.at(t.task_id());
    if (pred && (*pred < 1 || *pred > t.size())) {
      throw ValidationError("task " + t.task_id() + ": prediction " +
                            std::to_string(*pred) + " outside 1.." +
                            std::to_string(t.size()));
    }
    Confusion c;
    if (t.gold()) {
      if (pred && *pred == *t.gold()) {
        c.tp = 1;
      } else {
        c.fn = 1;
        if (pred) c.fp = 1;
      }
      report.by_position[*t.gold()] += c;
    } else if (pred) {
      c.fp = 1;
      report.goldless_fp += 1;
    }
    report.counts += c;
  }
  report.precision = report.counts.Precision();
  report.recall = report.counts.Recall();
  report.f1 = report.counts.F1();
  return report;
}

std::vector<SweepPoint> SweepTopK(const Dataset &dataset, const PipelineConfig &config,
                                  std::span<const std::size_t> ks,
                                  std::size_t parallelism) {
  for (std::size_t k : ks) {
    if (k < 1) throw ValidationError("sweep values of k must be at least 1");
  }
  config.Validate();
  std::vector<SweepPoint> out;
  for (std::size_t k : ks) {
    PipelineConfig cfg = config;
    cfg.top_k = k;
    const auto &tasks = dataset.tasks();
    std::vector<StrategyResult> results(tasks.size());
    ParallelFor(tasks.size(), parallelism,
                [&](std::size_t i) { results[i] = RunComem(tasks[i], cfg); });
    PredictionSet preds;
    CostLedger ledger;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      preds[tasks[i].task_id()] = results[i].prediction;
      ledger += results[i].ledger;
    }
    SweepPoint point{k, ScorePredictions(dataset, preds)};
    point.metrics.ledger = ledger;
    out.push_back(std::move(point));
  }
  return out;
}

std::string_view ViolationKindName(ViolationKind k) {
  switch (k) {
    case ViolationKind::kSymmetry:
      return "symmetry";
    case ViolationKind::kMutualExclusivity:
      return "mutual_exclusivity";
    case ViolationKind::kTransitivity:
      return "transitivity";
  }
  return "?";
}

std::size_t ConsistencyReport::Count(ViolationKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(),
      [&](const Violation &v) { return v.kind == kind; }));
}

std::string ConsistencyReport::Format() const {
  std::ostringstream out;
  out << violations.size() << " violations\n";
  for (const auto &v : violations) {
    out << ViolationKindName(v.kind) << ":";
    for (const auto &r : v.records) out << " " << r;
    out << " (" << v.detail << ")\n";
  }
  return out.str();
}

ConsistencyReport ValidateConsistency(std::span<const MatchDecision> decisions) {
  // Directed edges, deduplicated.
  std::map<std::string, std::set<std::string>> out_edges;
  std::set<std::pair<std::string, std::string>> edges;
  // Directions in which each record was queried as an anchor.
  std::map<std::string, std::set<std::string>> queried;
  std::map<std::pair<std::string, std::string>, std::string> edge_direction;
  for (const auto &d : decisions) {
    queried[d.anchor].insert(d.direction);
    if (!d.match) continue;
    out_edges[d.anchor].insert(*d.match);
    edges.insert({d.anchor, *d.match});
    edge_direction.emplace(std::make_pair(d.anchor, *d.match), d.direction);
  }
  auto connected = [&](const std::string &a, const std::string &b) {
    return edges.count({a, b}) || edges.count({b, a});
  };

  ConsistencyReport report;
  for (const auto &[from, to] : edges) {
    if (from == to) continue;
    auto q = queried.find(to);
    if (q == queried.end()) continue;
    const std::string &dir = edge_direction.at({from, to});
    bool other_direction = std::any_of(q->second.begin(), q->second.end(),
                                       [&](const std::string &d) { return d != dir; });
    if (other_direction && !edges.count({to, from})) {
      report.violations.push_back({ViolationKind::kSymmetry,
                                   {from, to},
                                   from + " matches " + to + " but not the reverse"});
    }
  }
  for (const auto &[anchor, targets] : out_edges) {
    if (targets.size() >= 2) {
      std::vector<std::string> recs{anchor};
      recs.insert(recs.end(), targets.begin(), targets.end());
      report.violations.push_back({ViolationKind::kMutualExclusivity, recs,
                                   anchor + " matches " + std::to_string(targets.size()) +
                                       " records"});
    }
  }
  std::set<std::pair<std::string, std::string>> missing;
  for (const auto &[a, b] : edges) {
    auto it = out_edges.find(b);
    if (it == out_edges.end()) continue;
    for (const auto &c : it->second) {
      if (c == a || a == b || b == c) continue;
      if (!connected(a, c)) missing.insert(std::minmax(a, c));
    }
  }
  for (const auto &[a, c] : missing) {
    report.violations.push_back({ViolationKind::kTransitivity,
                                 {a, c},
                                 "linked through a shared match but not matched"});
  }
  return report;
}

CostExpectation &CostExpectation::operator+=(const CostExpectation &o) {
  invocations += o.invocations;
  input_records += o.input_records;
  return *this;
}

CostExpectation ExpectedMatching(std::size_t n, std::size_t shots) {
  return {n, n * (2 + 2 * shots)};
}

CostExpectation ExpectedComparingBubble(std::size_t n, std::size_t k) {
  std::size_t calls = k * (2 * n - k - 1);
  return {calls, 3 * calls};
}

CostExpectation ExpectedComparingAllPairs(std::size_t n) {
  std::size_t calls = n * (n - 1);
  return {calls, 3 * calls};
}

CostExpectation ExpectedCompareThenMatch(std::size_t n) {
  CostExpectation e = ExpectedComparingBubble(n, 1);
  e += ExpectedMatching(1);
  return e;
}

CostExpectation ExpectedSelecting(std::size_t n) { return {1, n + 1}; }

CostExpectation ExpectedComem(std::size_t n, FilterStrategy filter, std::size_t top_k) {
  std::size_t keep = std::min(top_k, n);
  CostExpectation e = filter == FilterStrategy::kMatching
                          ? ExpectedMatching(n)
                          : ExpectedComparingBubble(n, keep);
  e += ExpectedSelecting(keep);
  return e;
}

std::string FormatCostTable(std::span<const CostRow> rows) {
  std::ostringstream out;
  out << "strategy,invocations,expected_invocations,input_records,"
         "expected_input_records,prompt_tokens,completion_tokens,cost,mismatch\n";
  for (const auto &r : rows) {
    out << internal::CsvEscape(r.name) << ',' << r.observed.invocations << ','
        << r.expected.invocations << ',' << r.observed.input_records << ','
        << r.expected.input_records << ',' << r.observed.prompt_tokens << ','
        << r.observed.completion_tokens << ',' << r.observed.cost << ','
        << (r.Matches() ? "no" : "yes") << '\n';
  }
  return out.str();
}

}  // namespace comem
