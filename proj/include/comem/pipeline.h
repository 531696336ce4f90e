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

// Two-stage filter-then-select matching.
//
// Stage 1 ranks the candidates with a cheap strategy (matching scores or a
// bubble top-k) and keeps the best top_k. Stage 2 asks the selecting
// strategy to pick among the survivors, presented best first. Only stage 2
// may answer "none"; the filter never rejects a task on its own.

#ifndef COMEM_PIPELINE_H_
#define COMEM_PIPELINE_H_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "comem/backend.h"
#include "comem/records.h"
#include "comem/strategies.h"

namespace comem {

enum class FilterStrategy { kMatching, kComparingBubble };

std::string_view FilterStrategyName(FilterStrategy f);
FilterStrategy ParseFilterStrategy(std::string_view name);

struct PipelineConfig {
  FilterStrategy filter_strategy = FilterStrategy::kMatching;
  std::shared_ptr<Backend> filter_backend;
  std::size_t top_k = 4;
  std::shared_ptr<Backend> select_backend;
  bool allow_none = true;

  // Throws ValidationError for a missing backend or top_k == 0. Returns
  // warnings for settings that work but degrade the ranking.
  std::vector<std::string> Validate() const;
};

// Stage 1 ledger is tagged "filter", stage 2 "select". The prediction is an
// index into the task's original candidate list.
StrategyResult RunComem(const MatchTask &task, const PipelineConfig &config,
                        const StrategyOptions &options = {});

}  // namespace comem

#endif  // COMEM_PIPELINE_H_
