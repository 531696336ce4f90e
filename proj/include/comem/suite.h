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

// Runs strategies and pipelines over whole datasets and writes reports.

#ifndef COMEM_SUITE_H_
#define COMEM_SUITE_H_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "comem/eval.h"
#include "comem/pipeline.h"
#include "comem/strategies.h"

namespace comem {

enum class JobKind { kMatching, kCompareThenMatch, kSelecting, kComem };

std::string_view JobKindName(JobKind k);
JobKind ParseJobKind(std::string_view name);

struct JobConfig {
  std::string name;
  JobKind kind = JobKind::kSelecting;
  // Backend for the single-strategy jobs.
  std::shared_ptr<Backend> backend;
  bool allow_none = true;
  // Few-shot examples per class for the matching job.
  std::size_t fewshot_positives = 0;
  std::size_t fewshot_negatives = 0;
  // Used when kind == kComem.
  PipelineConfig pipeline;
};

struct SuiteOptions {
  // Tasks processed concurrently.
  std::size_t parallelism = 1;
  // Abort on the first failing task instead of recording it.
  bool strict = false;
  std::span<const FewShotExample> fewshot_pool;
  const PromptRenderer *renderer = nullptr;
};

struct TaskOutcome {
  std::string task_id;
  std::optional<std::size_t> prediction;
  std::optional<std::string> error;
  StrategyResult result;
};

struct JobReport {
  std::string name;
  JobKind kind = JobKind::kSelecting;
  std::vector<TaskOutcome> tasks;  // dataset order
  MetricsReport metrics;
  std::vector<StageLedger> stages;  // summed per stage, first-seen order
  CostRow cost;
  std::size_t failures = 0;
};

struct SuiteReport {
  std::string dataset;
  std::vector<JobReport> jobs;
};

// Throws ValidationError for a job that cannot run (missing backend, k == 0,
// few-shot without a pool).
void ValidateJob(const JobConfig &job, const SuiteOptions &options);

JobReport RunJob(const Dataset &dataset, const JobConfig &job,
                 const SuiteOptions &options = {});

SuiteReport RunStrategySuite(const Dataset &dataset, std::span<const JobConfig> jobs,
                             const SuiteOptions &options = {});

// Serialization. All output is deterministic for a deterministic run.
std::string SummaryJson(const SuiteReport &report);
// {"job","task_id","anchor_id","prediction","match_id","error"} per line.
std::string PredictionsJsonl(const Dataset &dataset, const JobReport &job);
std::string TraceJsonl(const JobReport &job);
std::string CostTableCsv(const SuiteReport &report);
std::string PositionCsv(const JobReport &job);
std::string SweepCsv(std::span<const SweepPoint> points);
std::string SweepJson(std::span<const SweepPoint> points);

// Writes summary.json, costs.csv, and per job predictions_<job>.jsonl,
// trace_<job>.jsonl and positions_<job>.csv into `dir`.
void WriteSuiteOutputs(const Dataset &dataset, const SuiteReport &report,
                       const std::filesystem::path &dir);

// Reads a predictions file back as consistency-checker input. Lines with a
// null match_id become "no match" decisions. An optional "direction" field
// is carried through.
std::vector<MatchDecision> ParseDecisionsJsonl(std::string_view text,
                                               const std::string &source = "<memory>");
// Reads a predictions file back as task_id -> prediction.
PredictionSet ParsePredictionSetJsonl(std::string_view text,
                                      const std::string &source = "<memory>");

}  // namespace comem

#endif  // COMEM_SUITE_H_
