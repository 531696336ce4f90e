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

// JSON run configuration.
//
//   {
//     "dataset": "tasks.jsonl",            // relative to the config file
//     "dataset_format": "task-jsonl",      // or "pair-table"
//     "fewshot_pool": "pool.jsonl",        // optional
//     "templates_dir": "prompts/",         // optional
//     "output_dir": "out",
//     "strict": false,
//     "parallelism": 4,
//     "backends": {
//       "sim":  {"kind": "oracle", "seed": 7, "flip_rate": 0.1,
//                "position_bias": [1.0, 0.9], "probability_mode": "calibrated"},
//       "gpt":  {"kind": "http", "endpoint": "https://api.openai.com",
//                "model": "gpt-4o-mini", "api_key_env": "OPENAI_API_KEY",
//                "price": {"input_per_million": 0.15, "output_per_million": 0.6}}
//     },
//     "jobs": [
//       {"name": "sel", "strategy": "selecting", "backend": "gpt"},
//       {"name": "comem", "strategy": "comem", "filter": "matching",
//        "filter_backend": "sim", "select_backend": "gpt", "top_k": 4}
//     ]
//   }
//
// API keys are never read from the file; `api_key_env` names an environment
// variable.

#ifndef COMEM_CONFIG_H_
#define COMEM_CONFIG_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "comem/backend.h"
#include "comem/error.h"
#include "comem/http_backend.h"
#include "comem/oracle.h"
#include "comem/records.h"
#include "comem/suite.h"

namespace comem {

// ValidationError whose message starts with the offending field path.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string &field, const std::string &what)
      : ValidationError(field + ": " + what), field_(field) {}
  const std::string &field() const { return field_; }

 private:
  std::string field_;
};

struct HttpBackendSpec {
  HttpBackendConfig config;  // api_key left empty
  std::string api_key_env;
};

struct BackendSpec {
  std::string name;
  std::variant<OracleConfig, HttpBackendSpec> params;
};

struct JobSpec {
  std::string name;
  JobKind kind = JobKind::kSelecting;
  std::string backend;
  bool allow_none = true;
  std::size_t fewshot_positives = 0;
  std::size_t fewshot_negatives = 0;
  FilterStrategy filter = FilterStrategy::kMatching;
  std::string filter_backend;
  std::string select_backend;
  std::size_t top_k = 4;
};

struct RunConfig {
  std::filesystem::path dataset;
  TaskFormat dataset_format = TaskFormat::kTaskJsonl;
  std::optional<std::filesystem::path> fewshot_pool;
  std::optional<std::filesystem::path> templates_dir;
  std::filesystem::path output_dir = "out";
  bool strict = false;
  std::size_t parallelism = 1;
  std::vector<BackendSpec> backends;
  std::vector<JobSpec> jobs;
};

// Parses and validates. Relative paths resolve against `base_dir`. Throws
// ConfigError naming the field.
RunConfig ParseRunConfig(std::string_view text,
                         const std::filesystem::path &base_dir = {});
RunConfig LoadRunConfig(const std::filesystem::path &path);

// Everything a run needs, materialized from a config.
struct RunContext {
  Dataset dataset;
  std::vector<FewShotExample> fewshot_pool;
  std::unique_ptr<PromptRenderer> renderer;
  std::map<std::string, std::shared_ptr<Backend>> backends;
  std::vector<JobConfig> jobs;
  std::vector<std::string> warnings;

  SuiteOptions Options(const RunConfig &config) const;
};

// Loads data, builds backends (oracles get the dataset's ground truth) and
// resolves jobs. `getenv` is injectable for tests.
RunContext BuildRunContext(
    const RunConfig &config,
    const std::function<std::optional<std::string>(const std::string &)> &getenv = {});

}  // namespace comem

#endif  // COMEM_CONFIG_H_
