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

// Evaluation: pairwise precision/recall/F1, accuracy by gold position, top-k
// sweeps, cost tables and a global-consistency checker.
//
// F1 is pairwise. A task with n candidates expands into n (anchor,
// candidate) pairs, positive iff the candidate is gold and predicted positive
// iff it is the prediction. Counts are summed over all pairs of all tasks.

#ifndef COMEM_EVAL_H_
#define COMEM_EVAL_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comem/backend.h"
#include "comem/pipeline.h"
#include "comem/records.h"

namespace comem {

// task_id -> predicted 1-based candidate index, or none.
using PredictionSet = std::map<std::string, std::optional<std::size_t>>;

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double Precision() const;
  double Recall() const;
  // 2PR/(P+R), or 0 when P+R is 0.
  double F1() const;
  Confusion &operator+=(const Confusion &o);
  bool operator==(const Confusion &) const = default;
};

struct MetricsReport {
  Confusion counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Gold position -> counts over tasks whose gold sits there.
  std::map<std::size_t, Confusion> by_position;
  // False positives from tasks without a gold record.
  std::size_t goldless_fp = 0;
  CostLedger ledger;
};

// Throws ValidationError listing task ids missing from `preds` or unknown to
// the dataset, and for predictions outside 1..n.
MetricsReport ScorePredictions(const Dataset &dataset, const PredictionSet &preds);

struct SweepPoint {
  std::size_t k = 0;
  MetricsReport metrics;
};

// Runs the pipeline over the dataset once per k. Throws ValidationError for
// k == 0.
std::vector<SweepPoint> SweepTopK(const Dataset &dataset, const PipelineConfig &config,
                                  std::span<const std::size_t> ks,
                                  std::size_t parallelism = 1);

// One predicted match. `direction` tags the run the prediction came from
// (e.g. "left-to-right"); empty when the run went one way only.
struct MatchDecision {
  std::string anchor;
  std::optional<std::string> match;
  std::string direction;
};

enum class ViolationKind { kSymmetry, kMutualExclusivity, kTransitivity };

std::string_view ViolationKindName(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::vector<std::string> records;
  std::string detail;
};

struct ConsistencyReport {
  std::vector<Violation> violations;

  std::size_t Count(ViolationKind kind) const;
  std::string Format() const;
};

// Checks predicted matches against
//   symmetry      A->B needs B->A when B was itself queried in another
//                 direction;
//   exclusivity   an anchor matched to two or more distinct records;
//   transitivity  A->B and B->C need a match between A and C.
// Reflexivity always holds and is not checked. Output is sorted.
ConsistencyReport ValidateConsistency(std::span<const MatchDecision> decisions);

struct CostExpectation {
  std::size_t invocations = 0;
  std::size_t input_records = 0;

  CostExpectation &operator+=(const CostExpectation &o);
  bool operator==(const CostExpectation &) const = default;
};

CostExpectation ExpectedMatching(std::size_t n, std::size_t shots = 0);
CostExpectation ExpectedComparingBubble(std::size_t n, std::size_t k);
CostExpectation ExpectedComparingAllPairs(std::size_t n);
CostExpectation ExpectedCompareThenMatch(std::size_t n);
CostExpectation ExpectedSelecting(std::size_t n);
CostExpectation ExpectedComem(std::size_t n, FilterStrategy filter, std::size_t top_k);

struct CostRow {
  std::string name;
  CostLedger observed;
  CostExpectation expected;

  bool Matches() const {
    return observed.invocations == expected.invocations &&
           observed.input_records == expected.input_records;
  }
};

// CSV with one line per row, closed-form expectations beside observed
// counts and a mismatch flag.
std::string FormatCostTable(std::span<const CostRow> rows);

}  // namespace comem

#endif  // COMEM_EVAL_H_
