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

#include "comem/strategies.h"

#include <numeric>

#include "comem/error.h"
#include "comem/parallel.h"

namespace comem {

namespace {

struct Call {
  RenderedPrompt prompt;
  PromptSubject subject;
};

struct Outcome {
  BackendResponse response;
  ParsedLabel label;
};

const PromptRenderer &RendererOf(const StrategyOptions &options) {
  static const PromptRenderer kDefault;
  return options.renderer ? *options.renderer : kDefault;
}

std::string Describe(const PromptSubject &s) {
  std::string out = "task " + s.task_id + ", " +
                    std::string(s.candidate_ids.size() == 1 ? "candidate " : "candidates ");
  for (std::size_t i = 0; i < s.candidate_ids.size(); ++i) {
    if (i) out += " vs ";
    out += s.candidate_ids[i];
  }
  return out;
}

Outcome Invoke(Backend &backend, const Call &call, const StrategyOptions &options) {
  BackendRequest req;
  req.prompt = call.prompt;
  req.subject = call.subject;
  req.want_probabilities = options.want_probabilities && backend.provides_probabilities();
  req.model_name = backend.model_name();
  try {
    Outcome o;
    o.response = backend.Complete(req);
    o.label = ParseLabel(o.response.text, call.prompt.expected_labels);
    return o;
  } catch (const BackendError &e) {
    throw e.WithContext(Describe(call.subject));
  }
}

// Issues the calls (concurrently up to options.parallelism) and folds their
// cost and trace into `result` in call order.
std::vector<Outcome> InvokeAll(Backend &backend, const std::vector<Call> &calls,
                               const StrategyOptions &options,
                               StrategyResult &result) {
  std::vector<Outcome> outcomes(calls.size());
  ParallelFor(calls.size(), options.parallelism,
              [&](std::size_t i) { outcomes[i] = Invoke(backend, calls[i], options); });
  for (std::size_t i = 0; i < calls.size(); ++i) {
    result.ledger = AccountUsage(outcomes[i].response, calls[i].prompt, result.ledger,
                                 backend.prices());
    result.trace.push_back({options.stage, calls[i].prompt.strategy,
                            calls[i].subject.candidate_ids, outcomes[i].response.text,
                            outcomes[i].label.Canonical(), outcomes[i].label.parse_ok});
  }
  return outcomes;
}

PromptSubject Subject(const MatchTask &task, std::vector<std::string> ids) {
  return {task.task_id(), task.anchor().id(), std::move(ids)};
}

Call ComparingCall(const MatchTask &task, const PromptRenderer &renderer,
                   std::size_t a, std::size_t b) {
  const auto &ra = task.candidate(a);
  const auto &rb = task.candidate(b);
  return {renderer.Comparing(task.anchor(), ra, rb), Subject(task, {ra.id(), rb.id()})};
}

// Share of the comparison credited to the A-side candidate.
double AShare(const Outcome &o) {
  if (o.response.label_probs) return RenormalizedA(*o.response.label_probs);
  return o.label.choice() == AorB::kA ? 1.0 : 0.0;
}

void CloseStage(StrategyResult &result, const std::string &stage) {
  result.stages.push_back({stage, result.ledger});
}

}  // namespace

double MatchingScore(bool said_yes, std::optional<double> label_probability) {
  if (!label_probability) return said_yes ? 1.0 : 0.0;
  return said_yes ? 1.0 + *label_probability : 1.0 - *label_probability;
}

double RenormalizedA(const std::map<std::string, double> &probs) {
  auto get = [&](const char *k) {
    auto it = probs.find(k);
    return it == probs.end() ? 0.0 : it->second;
  };
  double a = get("A");
  double b = get("B");
  if (a + b <= 0.0) return 0.5;
  return a / (a + b);
}

StrategyResult MatchPairwise(const MatchTask &task, Backend &backend,
                             std::span<const FewShotExample> fewshot,
                             const StrategyOptions &options) {
  const PromptRenderer &renderer = RendererOf(options);
  std::vector<Call> calls;
  calls.reserve(task.size());
  for (std::size_t i = 1; i <= task.size(); ++i) {
    const auto &c = task.candidate(i);
    calls.push_back({renderer.Matching(task.anchor(), c, fewshot), Subject(task, {c.id()})});
  }
  StrategyResult result;
  auto outcomes = InvokeAll(backend, calls, options, result);

  std::vector<ScoredCandidate> scores;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto &o = outcomes[i];
    bool yes = o.label.is_yes();
    std::optional<double> p;
    if (o.response.label_probs) {
      auto it = o.response.label_probs->find(yes ? "Yes" : "No");
      if (it != o.response.label_probs->end()) p = it->second;
    }
    scores.push_back({i + 1, MatchingScore(yes, p)});
    if (yes && (!result.prediction || scores[i].score > scores[*result.prediction - 1].score)) {
      result.prediction = i + 1;
    }
  }
  result.scores = std::move(scores);
  CloseStage(result, options.stage);
  return result;
}

StrategyResult CompareAllPairs(const MatchTask &task, Backend &backend,
                               const StrategyOptions &options) {
  const std::size_t n = task.size();
  if (n < 2) {
    throw ValidationError("task " + task.task_id() +
                          ": all-pair comparing needs at least two candidates");
  }
  const PromptRenderer &renderer = RendererOf(options);
  struct Pair {
    std::size_t a, b;
  };
  std::vector<Pair> order;
  std::vector<Call> calls;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      order.push_back({i, j});
      calls.push_back(ComparingCall(task, renderer, i, j));
      order.push_back({j, i});
      calls.push_back(ComparingCall(task, renderer, j, i));
    }
  }
  StrategyResult result;
  auto outcomes = InvokeAll(backend, calls, options, result);

  std::vector<double> s(n + 1, 0.0);
  for (std::size_t c = 0; c < calls.size(); ++c) {
    double a_share = AShare(outcomes[c]);
    s[order[c].a] += a_share;
    s[order[c].b] += 1.0 - a_share;
  }
  std::vector<ScoredCandidate> scores;
  for (std::size_t i = 1; i <= n; ++i) scores.push_back({i, s[i]});
  std::vector<std::size_t> ranking(n);
  std::iota(ranking.begin(), ranking.end(), 1);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](std::size_t x, std::size_t y) { return s[x] > s[y]; });
  result.scores = std::move(scores);
  result.ranking = std::move(ranking);
  CloseStage(result, options.stage);
  return result;
}

StrategyResult CompareBubbleTopK(const MatchTask &task, Backend &backend,
                                 std::size_t k, const StrategyOptions &options) {
  const std::size_t n = task.size();
  if (k < 1 || k > n) {
    throw ValidationError("task " + task.task_id() + ": bubble top-k needs 1 <= k <= n, got k=" +
                          std::to_string(k) + ", n=" + std::to_string(n));
  }
  const PromptRenderer &renderer = RendererOf(options);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 1);
  StrategyResult result;

  for (std::size_t pass = 0; pass < k; ++pass) {
    for (std::size_t j = n - 1; j > pass; --j) {
      std::size_t earlier = order[j - 1];
      std::size_t later = order[j];
      std::vector<Call> calls{ComparingCall(task, renderer, earlier, later),
                              ComparingCall(task, renderer, later, earlier)};
      auto outcomes = InvokeAll(backend, calls, options, result);
      bool later_wins_both = outcomes[0].label.choice() == AorB::kB &&
                             outcomes[1].label.choice() == AorB::kA;
      if (later_wins_both) std::swap(order[j - 1], order[j]);
    }
  }
  result.ranking = std::move(order);
  CloseStage(result, options.stage);
  return result;
}

StrategyResult CompareThenMatch(const MatchTask &task, Backend &backend,
                                const StrategyOptions &options) {
  StrategyOptions compare_opts = options;
  compare_opts.stage = "compare";
  StrategyResult result = CompareBubbleTopK(task, backend, 1, compare_opts);
  const std::size_t top = result.ranking->front();

  StrategyOptions match_opts = options;
  match_opts.stage = "match";
  const PromptRenderer &renderer = RendererOf(options);
  const auto &c = task.candidate(top);
  std::vector<Call> calls{{renderer.Matching(task.anchor(), c), Subject(task, {c.id()})}};
  StrategyResult match;
  auto outcomes = InvokeAll(backend, calls, match_opts, match);
  if (outcomes[0].label.is_yes()) result.prediction = top;

  result.ledger += match.ledger;
  result.stages.push_back({"match", match.ledger});
  result.trace.insert(result.trace.end(), match.trace.begin(), match.trace.end());
  return result;
}

StrategyResult SelectFromList(const MatchTask &task, Backend &backend, bool allow_none,
                              const StrategyOptions &options) {
  const PromptRenderer &renderer = RendererOf(options);
  std::vector<std::string> ids;
  for (const auto &c : task.candidates()) ids.push_back(c.id());
  std::vector<Call> calls{{renderer.Selecting(task.anchor(), task.candidates(), allow_none),
                           Subject(task, std::move(ids))}};
  StrategyResult result;
  auto outcomes = InvokeAll(backend, calls, options, result);
  std::size_t picked = outcomes[0].label.index();
  if (picked != 0) result.prediction = picked;
  CloseStage(result, options.stage);
  return result;
}

}  // namespace comem
