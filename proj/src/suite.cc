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

#include "comem/suite.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "comem/error.h"
#include "comem/parallel.h"
#include "csv.h"
#include "json.hpp"

namespace comem {

namespace {

using ordered_json = nlohmann::ordered_json;

CostExpectation ExpectedFor(const JobConfig &job, const MatchTask &task) {
  const std::size_t n = task.size();
  switch (job.kind) {
    case JobKind::kMatching:
      return ExpectedMatching(n, job.fewshot_positives + job.fewshot_negatives);
    case JobKind::kCompareThenMatch:
      return ExpectedCompareThenMatch(n);
    case JobKind::kSelecting:
      return ExpectedSelecting(n);
    case JobKind::kComem:
      return ExpectedComem(n, job.pipeline.filter_strategy, job.pipeline.top_k);
  }
  return {};
}

StrategyResult RunOne(const MatchTask &task, const JobConfig &job,
                      const SuiteOptions &options) {
  StrategyOptions so;
  so.renderer = options.renderer;
  switch (job.kind) {
    case JobKind::kMatching: {
      std::vector<FewShotExample> shots;
      if (job.fewshot_positives + job.fewshot_negatives > 0) {
        shots = RetrieveFewShot(options.fewshot_pool, task, job.fewshot_positives,
                                job.fewshot_negatives);
      }
      return MatchPairwise(task, *job.backend, shots, so);
    }
    case JobKind::kCompareThenMatch:
      return CompareThenMatch(task, *job.backend, so);
    case JobKind::kSelecting:
      return SelectFromList(task, *job.backend, job.allow_none, so);
    case JobKind::kComem:
      return RunComem(task, job.pipeline, so);
  }
  throw Error("unknown job kind");
}

ordered_json LedgerJson(const CostLedger &l) {
  ordered_json j = ordered_json::object();
  j["invocations"] = l.invocations;
  j["input_records"] = l.input_records;
  j["prompt_tokens"] = l.prompt_tokens;
  j["completion_tokens"] = l.completion_tokens;
  j["tokens"] = l.tokens();
  j["cost"] = l.cost;
  return j;
}

ordered_json ConfusionJson(const Confusion &c) {
  ordered_json j = ordered_json::object();
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["precision"] = c.Precision();
  j["recall"] = c.Recall();
  j["f1"] = c.F1();
  return j;
}

ordered_json MetricsJson(const MetricsReport &m) {
  ordered_json j = ConfusionJson(m.counts);
  j["goldless_fp"] = m.goldless_fp;
  ordered_json pos = ordered_json::array();
  for (const auto &[p, c] : m.by_position) {
    ordered_json e = ordered_json::object();
    e["position"] = p;
    e.update(ConfusionJson(c));
    pos.push_back(std::move(e));
  }
  j["by_position"] = std::move(pos);
  return j;
}

std::string FileSafe(std::string_view name) {
  std::string out;
  for (char c : name) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

void WriteFile(const std::filesystem::path &path, const std::string &data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << data;
  if (!out) throw Error("failed writing " + path.string());
}

template <typename Fn>
void ForEachJsonLine(std::string_view text, const std::string &source, Fn &&fn) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!obj.is_object()) throw ParseError(source, line_no, "line is not a JSON object");
    try {
      fn(obj, line_no);
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(source, line_no, e.what());
    }
  }
}

}  // namespace

std::string_view JobKindName(JobKind k) {
  switch (k) {
    case JobKind::kMatching:
      return "matching";
    case JobKind::kCompareThenMatch:
      return "compare_then_match";
    case JobKind::kSelecting:
      return "selecting";
    case JobKind::kComem:
      return "comem";
  }
  return "?";
}

JobKind ParseJobKind(std::string_view name) {
  if (name == "matching") return JobKind::kMatching;
  if (name == "compare_then_match" || name == "comparing") return JobKind::kCompareThenMatch;
  if (name == "selecting") return JobKind::kSelecting;
  if (name == "comem") return JobKind::kComem;
  throw ValidationError("unknown strategy \"" + std::string(name) +
                        "\" (expected matching, compare_then_match, selecting or comem)");
}

void ValidateJob(const JobConfig &job, const SuiteOptions &options) {
  if (job.kind == JobKind::kComem) {
    job.pipeline.Validate();
    return;
  }
  if (!job.backend) throw ValidationError("job " + job.name + " has no backend");
  if (job.kind == JobKind::kMatching) {
    std::size_t pos = 0;
    for (const auto &ex : options.fewshot_pool) pos += ex.label ? 1 : 0;
    std::size_t neg = options.fewshot_pool.size() - pos;
    if (pos < job.fewshot_positives || neg < job.fewshot_negatives) {
      throw ValidationError("job " + job.name + " asks for " +
                            std::to_string(job.fewshot_positives) + "+" +
                            std::to_string(job.fewshot_negatives) +
                            " few-shot examples but the pool has " + std::to_string(pos) +
                            " positives and " + std::to_string(neg) + " negatives");
    }
  }
}

JobReport RunJob(const Dataset &dataset, const JobConfig &job, const SuiteOptions &options) {
  ValidateJob(job, options);
  const auto &tasks = dataset.tasks();
  JobReport report;
  report.name = job.name;
  report.kind = job.kind;
  report.tasks.resize(tasks.size());

  ParallelFor(tasks.size(), options.parallelism, [&](std::size_t i) {
    TaskOutcome &out = report.tasks[i];
    out.task_id = tasks[i].task_id();
    if (options.strict) {
      out.result = RunOne(tasks[i], job, options);
      out.prediction = out.result.prediction;
      return;
    }
    try {
      out.result = RunOne(tasks[i], job, options);
      out.prediction = out.result.prediction;
    } catch (const Error &e) {
      out.error = e.what();
    }
  });

  PredictionSet preds;
  report.cost.name = job.name;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskOutcome &out = report.tasks[i];
    preds[out.task_id] = out.prediction;
    if (out.error) {
      ++report.failures;
      continue;
    }
    report.cost.observed += out.result.ledger;
    report.cost.expected += ExpectedFor(job, tasks[i]);
    for (const auto &stage : out.result.stages) {
      auto it = std::find_if(report.stages.begin(), report.stages.end(),
                             [&](const StageLedger &s) { return s.stage == stage.stage; });
      if (it == report.stages.end()) {
        report.stages.push_back(stage);
      } else {
        it->ledger += stage.ledger;
      }
    }
  }
  report.metrics = ScorePredictions(dataset, preds);
  report.metrics.ledger = report.cost.observed;
  return report;
}

SuiteReport RunStrategySuite(const Dataset &dataset, std::span<const JobConfig> jobs,
                             const SuiteOptions &options) {
  for (const auto &job : jobs) ValidateJob(job, options);
  SuiteReport report;
  report.dataset = dataset.metadata().name;
  for (const auto &job : jobs) report.jobs.push_back(RunJob(dataset, job, options));
  return report;
}

std::string SummaryJson(const SuiteReport &report) {
  ordered_json root = ordered_json::object();
  root["dataset"] = report.dataset;
  root["metric"] =
      "pairwise: each task expands into (anchor, candidate) pairs; a pair is "
      "positive iff the candidate is gold and predicted positive iff it is the "
      "prediction";
  ordered_json jobs = ordered_json::array();
  for (const auto &job : report.jobs) {
    ordered_json j = ordered_json::object();
    j["name"] = job.name;
    j["strategy"] = JobKindName(job.kind);
    j["tasks"] = job.tasks.size();
    j["failures"] = job.failures;
    j["metrics"] = MetricsJson(job.metrics);
    j["ledger"] = LedgerJson(job.cost.observed);
    ordered_json stages = ordered_json::array();
    for (const auto &s : job.stages) {
      ordered_json e = ordered_json::object();
      e["stage"] = s.stage;
      e["ledger"] = LedgerJson(s.ledger);
      stages.push_back(std::move(e));
    }
    j["stages"] = std::move(stages);
    ordered_json expected = ordered_json::object();
    expected["invocations"] = job.cost.expected.invocations;
    expected["input_records"] = job.cost.expected.input_records;
    j["expected_cost"] = std::move(expected);
    j["cost_mismatch"] = !job.cost.Matches();
    jobs.push_back(std::move(j));
  }
  root["jobs"] = std::move(jobs);
  return root.dump(2) + "\n";
}

std::string PredictionsJsonl(const Dataset &dataset, const JobReport &job) {
  std::string out;
  const auto &tasks = dataset.tasks();
  for (std::size_t i = 0; i < job.tasks.size(); ++i) {
    const TaskOutcome &t = job.tasks[i];
    const MatchTask &task = tasks.at(i);
    ordered_json j = ordered_json::object();
    j["job"] = job.name;
    j["task_id"] = t.task_id;
    j["anchor_id"] = task.anchor().id();
    if (t.prediction) {
      j["prediction"] = *t.prediction;
      j["match_id"] = task.candidate(*t.prediction).id();
    } else {
      j["prediction"] = nullptr;
      j["match_id"] = nullptr;
    }
    j["error"] = t.error ? ordered_json(*t.error) : ordered_json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string TraceJsonl(const JobReport &job) {
  std::string out;
  for (const auto &t : job.tasks) {
    for (const auto &e : t.result.trace) {
      ordered_json j = ordered_json::object();
      j["job"] = job.name;
      j["task_id"] = t.task_id;
      j["stage"] = e.stage;
      j["prompt"] = StrategyName(e.kind);
      j["candidates"] = e.candidate_ids;
      j["response"] = e.response;
      j["label"] = e.label;
      j["parse_ok"] = e.parse_ok;
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

std::string CostTableCsv(const SuiteReport &report) {
  std::vector<CostRow> rows;
  for (const auto &job : report.jobs) rows.push_back(job.cost);
  return FormatCostTable(rows);
}

std::string PositionCsv(const JobReport &job) {
  std::ostringstream out;
  out << "position,tasks,tp,fp,fn,f1\n";
  for (const auto &[p, c] : job.metrics.by_position) {
    out << p << ',' << (c.tp + c.fn) << ',' << c.tp << ',' << c.fp << ',' << c.fn << ','
        << ordered_json(c.F1()).dump() << '\n';
  }
  return out.str();
}

std::string SweepCsv(std::span<const SweepPoint> points) {
  std::ostringstream out;
  out << "k,f1,precision,recall,invocations,input_records\n";
  for (const auto &p : points) {
    out << p.k << ',' << ordered_json(p.metrics.f1).dump() << ','
        << ordered_json(p.metrics.precision).dump() << ','
        << ordered_json(p.metrics.recall).dump() << ',' << p.metrics.ledger.invocations << ','
        << p.metrics.ledger.input_records << '\n';
  }
  return out.str();
}

std::string SweepJson(std::span<const SweepPoint> points) {
  ordered_json arr = ordered_json::array();
  for (const auto &p : points) {
    ordered_json j = ordered_json::object();
    j["k"] = p.k;
    j["metrics"] = MetricsJson(p.metrics);
    j["ledger"] = LedgerJson(p.metrics.ledger);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void WriteSuiteOutputs(const Dataset &dataset, const SuiteReport &report,
                       const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  WriteFile(dir / "summary.json", SummaryJson(report));
  WriteFile(dir / "costs.csv", CostTableCsv(report));
  for (const auto &job : report.jobs) {
    std::string stem = FileSafe(job.name);
    WriteFile(dir / ("predictions_" + stem + ".jsonl"), PredictionsJsonl(dataset, job));
    WriteFile(dir / ("trace_" + stem + ".jsonl"), TraceJsonl(job));
    WriteFile(dir / ("positions_" + stem + ".csv"), PositionCsv(job));
  }
}

std::vector<MatchDecision> ParseDecisionsJsonl(std::string_view text,
                                               const std::string &source) {
  std::vector<MatchDecision> out;
  ForEachJsonLine(text, source, [&](const nlohmann::json &obj, std::size_t line) {
    if (!obj.contains("anchor_id") || !obj["anchor_id"].is_string()) {
      throw ParseError(source, line, "missing string field anchor_id");
    }
    MatchDecision d;
    d.anchor = obj["anchor_id"].get<std::string>();
    if (obj.contains("match_id") && !obj["match_id"].is_null()) {
      d.match = obj["match_id"].get<std::string>();
    }
    if (obj.contains("direction") && obj["direction"].is_string()) {
      d.direction = obj["direction"].get<std::string>();
    }
    out.push_back(std::move(d));
  });
  return out;
}

PredictionSet ParsePredictionSetJsonl(std::string_view text, const std::string &source) {
  PredictionSet out;
  ForEachJsonLine(text, source, [&](const nlohmann::json &obj, std::size_t line) {
    if (!obj.contains("task_id") || !obj["task_id"].is_string()) {
      throw ParseError(source, line, "missing string field task_id");
    }
    std::optional<std::size_t> pred;
    if (obj.contains("prediction") && !obj["prediction"].is_null()) {
      pred = obj["prediction"].get<std::size_t>();
    }
    if (!out.emplace(obj["task_id"].get<std::string>(), pred).second) {
      throw ParseError(source, line, "duplicate task_id");
    }
  });
  return out;
}

}  // namespace comem
