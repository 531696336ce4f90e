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

#include "comem/oracle.h"

#include <algorithm>

#include "comem/error.h"
#include "comem/hash.h"

namespace comem {

namespace {

std::string JoinIds(const std::vector<std::string> &ids) {
  std::string out;
  for (const auto &id : ids) {
    out += id;
    out += '\x1f';
  }
  return out;
}

}  // namespace

void OracleConfig::Validate() const {
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) {
    throw ValidationError("oracle flip_rate must lie in [0, 1]");
  }
  for (double v : position_bias) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("oracle position_bias entries must lie in [0, 1]");
    }
  }
}

std::vector<double> LinearPositionBias(std::size_t n, double first, double last) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? first
                    : first + (last - first) * static_cast<double>(i) /
                                  static_cast<double>(n - 1);
  }
  return out;
}

OracleBackend::OracleBackend(OracleConfig config) : config_(std::move(config)) {
  config_.Validate();
}

void OracleBackend::Register(const MatchTask &task) {
  Truth t;
  t.gold_id = task.gold_id();
  const std::string anchor = SerializeRecord(task.anchor());
  for (const auto &c : task.candidates()) {
    t.similarity[c.id()] = TokenJaccard(anchor, SerializeRecord(c));
  }
  truth_[task.task_id()] = std::move(t);
}

void OracleBackend::Register(const Dataset &dataset) {
  for (const auto &t : dataset.tasks()) Register(t);
}

const OracleBackend::Truth &OracleBackend::Lookup(const PromptSubject &subject) const {
  auto it = truth_.find(subject.task_id);
  if (it == truth_.end()) {
    throw BackendError("oracle has no ground truth for task " + subject.task_id);
  }
  return it->second;
}

double OracleBackend::Similarity(const Truth &truth, const std::string &id,
                                 const std::string &task_id) const {
  auto it = truth.similarity.find(id);
  if (it == truth.similarity.end()) {
    throw BackendError("oracle: record " + id + " is not a candidate of task " +
                       task_id);
  }
  return it->second;
}

bool OracleBackend::Prefer(const Truth &truth, const std::string &a,
                           const std::string &b, const std::string &task_id) const {
  if (truth.gold_id) {
    if (a == *truth.gold_id) return true;
    if (b == *truth.gold_id) return false;
  }
  double sa = Similarity(truth, a, task_id);
  double sb = Similarity(truth, b, task_id);
  if (sa != sb) return sa > sb;
  return a < b;
}

double OracleBackend::Draw(const PromptSubject &subject, Strategy strategy,
                           std::string_view salt) const {
  return UnitInterval(HashFields(config_.seed,
                                 {subject.task_id, StrategyName(strategy),
                                  JoinIds(subject.candidate_ids), salt}));
}

BackendResponse OracleBackend::Answer(const BackendRequest &request,
                                      const std::string &label,
                                      const std::string &text) const {
  BackendResponse r;
  r.text = text;
  if (request.want_probabilities &&
      config_.probability_mode == ProbabilityMode::kCalibrated) {
    auto labels = request.prompt.expected_labels.Labels();
    double confidence =
        0.5 + 0.5 * Draw(request.subject, request.prompt.strategy, "confidence");
    std::map<std::string, double> probs;
    double rest = labels.size() > 1
                      ? (1.0 - confidence) / static_cast<double>(labels.size() - 1)
                      : 0.0;
    for (const auto &l : labels) probs[l] = l == label ? confidence : rest;
    if (labels.size() == 1) probs[label] = 1.0;
    r.label_probs = std::move(probs);
  }
  return r;
}

BackendResponse OracleBackend::Complete(const BackendRequest &request) {
  const PromptSubject &subject = request.subject;
  const Truth &truth = Lookup(subject);
  const Strategy strategy = request.prompt.strategy;
  const double noise = Draw(subject, strategy, "flip");

  switch (strategy) {
    case Strategy::kMatching: {
      if (subject.candidate_ids.size() != 1) {
        throw BackendError("oracle: matching prompt must name one candidate");
      }
      const std::string &id = subject.candidate_ids.front();
      Similarity(truth, id, subject.task_id);
      bool yes = truth.gold_id && *truth.gold_id == id;
      if (noise < config_.flip_rate) yes = !yes;
      return Answer(request, yes ? "Yes" : "No", yes ? "Yes" : "No");
    }
    case Strategy::kComparing: {
      if (subject.candidate_ids.size() != 2) {
        throw BackendError("oracle: comparing prompt must name two candidates");
      }
      bool a_wins = Prefer(truth, subject.candidate_ids[0], subject.candidate_ids[1],
                           subject.task_id);
      if (noise < config_.flip_rate) a_wins = !a_wins;
      return Answer(request, a_wins ? "A" : "B", a_wins ? "Record A" : "Record B");
    }
    case Strategy::kSelecting: {
      const auto &ids = subject.candidate_ids;
      const LabelSet &expected = request.prompt.expected_labels;
      if (ids.empty() || ids.size() != expected.n) {
        throw BackendError("oracle: selecting prompt candidate count mismatch");
      }
      std::size_t gold_pos = 0;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        Similarity(truth, ids[i], subject.task_id);
        if (truth.gold_id && ids[i] == *truth.gold_id) gold_pos = i + 1;
      }
      std::size_t correct = gold_pos;
      if (correct == 0 && !expected.allow_none) {
        correct = 1;
        for (std::size_t i = 2; i <= ids.size(); ++i) {
          if (Prefer(truth, ids[i - 1], ids[correct - 1], subject.task_id)) correct = i;
        }
      }
      double p_correct = 1.0 - config_.flip_rate;
      if (gold_pos > 0 && !config_.position_bias.empty()) {
        std::size_t at = std::min(gold_pos, config_.position_bias.size()) - 1;
        p_correct *= config_.position_bias[at];
      }
      std::size_t answer = correct;
      if (noise >= p_correct) {
        // Uniform over the other admissible labels.
        std::size_t lo = expected.allow_none ? 0 : 1;
        std::size_t others = expected.n + 1 - lo - 1;
        if (others > 0) {
          auto pick = static_cast<std::size_t>(
              Draw(subject, strategy, "wrong") * static_cast<double>(others));
          answer = lo + pick;
          if (answer >= correct) ++answer;
        }
      }
      std::string label = std::to_string(answer);
      return Answer(request, label, "[" + label + "]");
    }
  }
  throw BackendError("oracle: unknown strategy");
}

}  // namespace comem
