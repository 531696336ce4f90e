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

#include "comem/pipeline.h"

#include <algorithm>
#include <numeric>

#include "comem/error.h"

namespace comem {

std::string_view FilterStrategyName(FilterStrategy f) {
  return f == FilterStrategy::kMatching ? "matching" : "comparing";
}

FilterStrategy ParseFilterStrategy(std::string_view name) {
  if (name == "matching") return FilterStrategy::kMatching;
  if (name == "comparing" || name == "comparing_bubble") {
    return FilterStrategy::kComparingBubble;
  }
  throw ValidationError("unknown filter strategy \"" + std::string(name) +
                        "\" (expected matching or comparing)");
}

std::vector<std::string> PipelineConfig::Validate() const {
  if (!filter_backend) throw ValidationError("pipeline has no filter backend");
  if (!select_backend) throw ValidationError("pipeline has no select backend");
  if (top_k < 1) throw ValidationError("pipeline top_k must be at least 1");
  std::vector<std::string> warnings;
  if (filter_strategy == FilterStrategy::kMatching &&
      !filter_backend->provides_probabilities()) {
    warnings.push_back(
        "matching filter backend reports no label probabilities; ranking falls "
        "back to Yes/No buckets ordered by position. Consider the comparing filter.");
  }
  return warnings;
}

StrategyResult RunComem(const MatchTask &task, const PipelineConfig &config,
                        const StrategyOptions &options) {
  config.Validate();
  const std::size_t n = task.size();
  const std::size_t keep = std::min(config.top_k, n);

  StrategyOptions filter_opts = options;
  filter_opts.stage = "filter";
  StrategyResult filtered;
  std::vector<std::size_t> ranking;
  try {
    if (config.filter_strategy == FilterStrategy::kMatching) {
      filtered = MatchPairwise(task, *config.filter_backend, {}, filter_opts);
      ranking.resize(n);
      std::iota(ranking.begin(), ranking.end(), 1);
      const auto &scores = *filtered.scores;
      std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) {
        return scores[a - 1].score > scores[b - 1].score;
      });
    } else {
      filtered = CompareBubbleTopK(task, *config.filter_backend, keep, filter_opts);
      ranking = *filtered.ranking;
    }
  } catch (const BackendError &e) {
    throw e.WithContext("stage 1 (filter)");
  }
  ranking.resize(keep);

  std::vector<EntityRecord> kept;
  std::optional<std::size_t> kept_gold;
  for (std::size_t i = 0; i < keep; ++i) {
    kept.push_back(task.candidate(ranking[i]));
    if (task.gold() && *task.gold() == ranking[i]) kept_gold = i + 1;
  }
  MatchTask shortlist(task.task_id(), task.anchor(), std::move(kept), kept_gold);

  StrategyOptions select_opts = options;
  select_opts.stage = "select";
  StrategyResult selected;
  try {
    selected = SelectFromList(shortlist, *config.select_backend, config.allow_none,
                              select_opts);
  } catch (const BackendError &e) {
    throw e.WithContext("stage 2 (select)");
  }

  StrategyResult result;
  if (selected.prediction) result.prediction = ranking[*selected.prediction - 1];
  result.scores = std::move(filtered.scores);
  result.ranking = std::move(ranking);
  result.ledger = filtered.ledger + selected.ledger;
  result.stages = {{"filter", filtered.ledger}, {"select", selected.ledger}};
  result.trace = std::move(filtered.trace);
  result.trace.insert(result.trace.end(), selected.trace.begin(), selected.trace.end());
  return result;
}

}  // namespace comem
