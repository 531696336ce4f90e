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

// Completion backends, answer parsing and cost accounting.

#ifndef COMEM_BACKEND_H_
#define COMEM_BACKEND_H_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "comem/prompts.h"

namespace comem {

// Which records a prompt is about. Backends that answer from ground truth
// (the oracle) read this; HTTP backends ignore it.
struct PromptSubject {
  std::string task_id;
  std::string anchor_id;
  // Candidate record ids in prompt order: {right} for matching,
  // {A, B} for comparing, the enumerated list for selecting.
  std::vector<std::string> candidate_ids;
};

struct BackendRequest {
  // Generation is always greedy.
  static constexpr double kTemperature = 0.0;

  RenderedPrompt prompt;
  PromptSubject subject;
  bool want_probabilities = false;
  std::string model_name;
};

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct BackendResponse {
  std::string text;
  // Canonical label (see LabelSet::Labels) -> probability in [0, 1].
  std::optional<std::map<std::string, double>> label_probs;
  std::optional<Usage> usage;
};

enum class YesNo { kYes, kNo };
enum class AorB { kA, kB };

struct ParsedLabel {
  // YesNo for matching, AorB for comparing, the 0..n index for selecting.
  std::variant<YesNo, AorB, std::size_t> label;
  bool parse_ok = false;

  Strategy strategy() const { return static_cast<Strategy>(label.index()); }
  bool is_yes() const { return std::get<YesNo>(label) == YesNo::kYes; }
  AorB choice() const { return std::get<AorB>(label); }
  std::size_t index() const { return std::get<std::size_t>(label); }
  // Same spelling as LabelSet::Labels().
  std::string Canonical() const;
};

// Never fails: text without a recognizable answer yields parse_ok=false and
// the conservative default (No / A / 0).
ParsedLabel ParseLabel(std::string_view text, const LabelSet &expected);

struct PriceTable {
  double input_per_million = 0.0;
  double output_per_million = 0.0;
};

struct CostLedger {
  std::size_t invocations = 0;
  std::size_t input_records = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double cost = 0.0;

  std::size_t tokens() const { return prompt_tokens + completion_tokens; }
  CostLedger &operator+=(const CostLedger &other);
  bool operator==(const CostLedger &) const = default;
};

CostLedger operator+(CostLedger a, const CostLedger &b);

// ceil(chars / 4), used when a service reports no usage.
std::size_t EstimateTokens(std::string_view text);

// Adds one invocation to `ledger` and returns the result.
CostLedger AccountUsage(const BackendResponse &response,
                        const RenderedPrompt &prompt, CostLedger ledger,
                        const PriceTable &prices = {});

// Backends are shared across worker threads; Complete must be thread-safe.
class Backend {
 public:
  virtual ~Backend() = default;

  // Throws BackendError.
  virtual BackendResponse Complete(const BackendRequest &request) = 0;

  virtual std::string model_name() const = 0;
  virtual const PriceTable &prices() const = 0;
  // Whether responses may carry label_probs.
  virtual bool provides_probabilities() const = 0;
};

// Backend answering through a callable. Test double and scripting hook.
class FunctionBackend : public Backend {
 public:
  using Fn = std::function<BackendResponse(const BackendRequest &)>;

  explicit FunctionBackend(Fn fn, bool probabilities = false,
                           std::string model = "function");

  BackendResponse Complete(const BackendRequest &request) override;
  std::string model_name() const override { return model_; }
  const PriceTable &prices() const override { return prices_; }
  bool provides_probabilities() const override { return probabilities_; }

 private:
  Fn fn_;
  bool probabilities_;
  std::string model_;
  PriceTable prices_;
};

}  // namespace comem

#endif  // COMEM_BACKEND_H_
