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

// A simulated LLM that answers from registered ground truth.
//
// Every answer is a pure function of (config, task, prompt subject). Noise is
// drawn from a hash of (seed, task_id, strategy, discriminator), where the
// discriminator is the ordered candidate ids of the prompt. The two
// order-swapped comparisons of one pair therefore flip independently, and
// call order or parallelism never changes an answer.
//
// Ground truth per strategy:
//   matching   "Yes" iff the candidate is the gold record.
//   comparing  the gold record wins; otherwise the candidate whose serialized
//              form has the higher token Jaccard with the anchor, then the
//              smaller record id. This is a strict total order per task.
//   selecting  "[g]" for the gold position g in the presented list, "[0]"
//              when gold is absent. Without the none option a goldless list
//              gets the top candidate under the comparing order.

#ifndef COMEM_ORACLE_H_
#define COMEM_ORACLE_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "comem/backend.h"
#include "comem/records.h"

namespace comem {

enum class ProbabilityMode { kNone, kCalibrated };

struct OracleConfig {
  std::uint64_t seed = 0;
  // Probability of answering against ground truth.
  double flip_rate = 0.0;
  // Selecting only: probability of a correct answer when the gold record is
  // presented at position i (1-based) is position_bias[i-1] * (1 - flip_rate).
  // Positions past the end reuse the last entry. Empty disables.
  std::vector<double> position_bias;
  ProbabilityMode probability_mode = ProbabilityMode::kNone;
  PriceTable prices;
  std::string model = "oracle";

  // Throws ValidationError when a rate lies outside [0, 1].
  void Validate() const;
};

// The linear accuracy schedule 1.0 at position 1 down to `last` at position n.
std::vector<double> LinearPositionBias(std::size_t n, double first, double last);

class OracleBackend : public Backend {
 public:
  explicit OracleBackend(OracleConfig config);

  // Registration must complete before concurrent use.
  void Register(const MatchTask &task);
  void Register(const Dataset &dataset);

  BackendResponse Complete(const BackendRequest &request) override;
  std::string model_name() const override { return config_.model; }
  const PriceTable &prices() const override { return config_.prices; }
  bool provides_probabilities() const override {
    return config_.probability_mode == ProbabilityMode::kCalibrated;
  }

  const OracleConfig &config() const { return config_; }

 private:
  struct Truth {
    std::optional<std::string> gold_id;
    // Candidate id -> token Jaccard with the anchor.
    std::unordered_map<std::string, double> similarity;
  };

  const Truth &Lookup(const PromptSubject &subject) const;
  double Similarity(const Truth &truth, const std::string &id,
                    const std::string &task_id) const;
  // True when candidate `a` ranks above `b`.
  bool Prefer(const Truth &truth, const std::string &a, const std::string &b,
              const std::string &task_id) const;
  double Draw(const PromptSubject &subject, Strategy strategy,
              std::string_view salt) const;
  BackendResponse Answer(const BackendRequest &request,
                         const std::string &label, const std::string &text) const;

  OracleConfig config_;
  std::unordered_map<std::string, Truth> truth_;
};

}  // namespace comem

#endif  // COMEM_ORACLE_H_
