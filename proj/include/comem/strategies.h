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

// The three ways of asking an LLM to find an anchor's match.
//
//   matching   one Yes/No call per candidate.
//   comparing  "which of A and B is closer to the anchor", asked twice per
//              pair with the order swapped. Used for all-pair scores or a
//              k-pass bubble sort that settles the top k.
//   selecting  one call listing every candidate; the answer is an index,
//              with 0 meaning none of them.
//
// Invocation and input-record costs per task of n candidates:
//   matching           n              2n
//   comparing, top-k   k(2n-k-1)      3k(2n-k-1)
//   selecting          1              n+1

#ifndef COMEM_STRATEGIES_H_
#define COMEM_STRATEGIES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comem/backend.h"
#include "comem/prompts.h"
#include "comem/records.h"

namespace comem {

struct ScoredCandidate {
  std::size_t index = 0;  // 1-based
  double score = 0.0;

  bool operator==(const ScoredCandidate &) const = default;
};

struct TraceEntry {
  std::string stage;
  Strategy kind = Strategy::kMatching;
  std::vector<std::string> candidate_ids;
  std::string response;
  std::string label;
  bool parse_ok = false;

  bool operator==(const TraceEntry &) const = default;
};

struct StageLedger {
  std::string stage;
  CostLedger ledger;

  bool operator==(const StageLedger &) const = default;
};

struct StrategyResult {
  // 1-based candidate index, or none.
  std::optional<std::size_t> prediction;
  // One entry per candidate, in candidate order.
  std::optional<std::vector<ScoredCandidate>> scores;
  // Candidate indices best first. Set by the comparing strategies.
  std::optional<std::vector<std::size_t>> ranking;
  CostLedger ledger;
  std::vector<StageLedger> stages;
  std::vector<TraceEntry> trace;
};

struct StrategyOptions {
  // Concurrent backend calls within one task.
  std::size_t parallelism = 1;
  // Request label probabilities when the backend offers them.
  bool want_probabilities = true;
  const PromptRenderer *renderer = nullptr;  // nullptr: default templates
  std::string stage = "main";
};

// Similarity from a matching answer: 1 + p(Yes) after "Yes", 1 - p(No) after
// "No", where p is the probability of the generated label. Without a
// probability the score is 1 for "Yes" and 0 for "No".
double MatchingScore(bool said_yes, std::optional<double> label_probability);

// Probability of "A" renormalized over {A, B}; 0.5 when both are zero.
double RenormalizedA(const std::map<std::string, double> &probs);

// One matching call per candidate. The prediction is the best-scoring
// candidate among those answered "Yes" (ties: lowest index), none if all
// answers are "No".
StrategyResult MatchPairwise(const MatchTask &task, Backend &backend,
                             std::span<const FewShotExample> fewshot = {},
                             const StrategyOptions &options = {});

// Both orders of every unordered pair. Each call credits the A-side
// candidate with its A-share and the B-side with the rest: the renormalized
// probability when the response has one, else 1 for the winner. Without
// probabilities this is 2 per double win and 1 per split. No prediction.
// Requires n >= 2.
StrategyResult CompareAllPairs(const MatchTask &task, Backend &backend,
                               const StrategyOptions &options = {});

// k bubble passes from the end of the list. Adjacent candidates are compared
// in both orders and the later one moves up only if it wins both. After pass
// i the first i positions are settled. Requires 1 <= k <= n.
StrategyResult CompareBubbleTopK(const MatchTask &task, Backend &backend,
                                 std::size_t k, const StrategyOptions &options = {});

// Bubble top-1, then one matching call on the winner.
StrategyResult CompareThenMatch(const MatchTask &task, Backend &backend,
                                const StrategyOptions &options = {});

// One selecting call; answer 0 maps to no prediction.
StrategyResult SelectFromList(const MatchTask &task, Backend &backend,
                              bool allow_none = true,
                              const StrategyOptions &options = {});

}  // namespace comem

#endif  // COMEM_STRATEGIES_H_
