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

#include "comem/cli.h"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "comem/config.h"
#include "comem/error.h"
#include "comem/eval.h"
#include "comem/records.h"
#include "comem/suite.h"
#include "comem/synthetic.h"
#include "json.hpp"

namespace comem::cli {

namespace {

std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::filesystem::path &path, const std::string &data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << data;
}

// The only wall-clock output; kept out of every other artifact.
void WriteRunInfo(const std::filesystem::path &dir, const std::string &command) {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  nlohmann::ordered_json j;
  j["command"] = command;
  j["finished_at"] = ts.str();
  WriteFile(dir / "run_info.json", j.dump(2) + "\n");
}

RunConfig LoadWithOverrides(const RunArgs &args) {
  RunConfig config = LoadRunConfig(args.config);
  if (args.output_dir) config.output_dir = *args.output_dir;
  if (args.strict) config.strict = true;
  if (args.parallelism) {
    if (*args.parallelism == 0) throw ConfigError("--parallelism", "must be at least 1");
    config.parallelism = *args.parallelism;
  }
  return config;
}

void PrintSummary(const SuiteReport &report, std::ostream &out) {
  out << std::left << std::setw(22) << "job" << std::right << std::setw(8) << "F1"
      << std::setw(8) << "P" << std::setw(8) << "R" << std::setw(10) << "calls"
      << std::setw(10) << "records" << std::setw(12) << "cost" << std::setw(8) << "fail"
      << "\n";
  for (const auto &job : report.jobs) {
    const auto &m = job.metrics;
    out << std::left << std::setw(22) << job.name << std::right << std::fixed
        << std::setprecision(4) << std::setw(8) << m.f1 << std::setw(8) << m.precision
        << std::setw(8) << m.recall << std::setw(10) << job.cost.observed.invocations
        << std::setw(10) << job.cost.observed.input_records << std::setw(12)
        << std::setprecision(6) << job.cost.observed.cost << std::setw(8) << job.failures
        << (job.cost.Matches() ? "" : "  (cost differs from closed form)") << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

template <typename Fn>
int Guard(std::ostream &err, Fn &&fn) {
  try {
    return fn();
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const BackendError &e) {
    err << "error: " << e.what();
    if (e.status()) err << " [HTTP " << e.status() << "]";
    err << "\n";
    return kFailed;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
}

std::vector<std::size_t> ParseKs(const std::string &spec) {
  std::vector<std::size_t> ks;
  std::stringstream in(spec);
  std::string part;
  while (std::getline(in, part, ',')) {
    auto dash = part.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        std::size_t lo = std::stoul(part.substr(0, dash));
        std::size_t hi = std::stoul(part.substr(dash + 1));
        for (std::size_t k = lo; k <= hi; ++k) ks.push_back(k);
      } else {
        if (!part.empty() && part[0] == '-') throw std::invalid_argument(part);
        ks.push_back(std::stoul(part));
      }
    } catch (const std::logic_error &) {
      throw ConfigError("--ks", "cannot parse \"" + part + "\"");
    }
  }
  if (ks.empty()) throw ConfigError("--ks", "no values given");
  return ks;
}

}  // namespace

int CmdRun(const RunArgs &args, std::ostream &out, std::ostream &err) {
  return Guard(err, [&] {
    RunConfig config = LoadWithOverrides(args);
    RunContext ctx = BuildRunContext(config);
    for (const auto &w : ctx.warnings) err << "warning: " << w << "\n";
    SuiteReport report = RunStrategySuite(ctx.dataset, ctx.jobs, ctx.Options(config));
    WriteSuiteOutputs(ctx.dataset, report, config.output_dir);
    WriteRunInfo(config.output_dir, "run");
    PrintSummary(report, out);
    out << "outputs written to " << config.output_dir.string() << "\n";
    std::size_t failures = 0;
    for (const auto &job : report.jobs) failures += job.failures;
    if (failures) err << failures << " task(s) failed; see predictions files\n";
    return kOk;
  });
}

int CmdSweep(const SweepArgs &args, std::ostream &out, std::ostream &err) {
  return Guard(err, [&] {
    for (std::size_t k : args.ks) {
      if (k == 0) throw ConfigError("--ks", "every k must be at least 1");
    }
    if (args.ks.empty()) throw ConfigError("--ks", "no values given");
    RunConfig config = LoadWithOverrides(args.run);
    RunContext ctx = BuildRunContext(config);
    const JobConfig *job = nullptr;
    for (const auto &j : ctx.jobs) {
      if (j.kind != JobKind::kComem) continue;
      if (args.job && j.name != *args.job) continue;
      job = &j;
      break;
    }
    if (!job) {
      throw ConfigError("jobs", args.job ? "no comem job named \"" + *args.job + "\""
                                         : std::string("sweep needs a comem job"));
    }
    auto points = SweepTopK(ctx.dataset, job->pipeline, args.ks, config.parallelism);
    WriteFile(config.output_dir / "sweep.csv", SweepCsv(points));
    WriteFile(config.output_dir / "sweep.json", SweepJson(points));
    WriteRunInfo(config.output_dir, "sweep");
    out << SweepCsv(points);
    return kOk;
  });
}

int CmdValidate(const ValidateArgs &args, std::ostream &out, std::ostream &err) {
  return Guard(err, [&] {
    auto decisions = ParseDecisionsJsonl(ReadFile(args.predictions), args.predictions.string());
    ConsistencyReport report = ValidateConsistency(decisions);
    out << report.Format();
    return report.violations.empty() || !args.strict ? kOk : kFailed;
  });
}

int CmdConvert(const ConvertArgs &args, std::ostream &out, std::ostream &err) {
  return Guard(err, [&] {
    Dataset d = LoadPairTable({args.pairs, args.left, args.right});
    WriteFile(args.output, WriteTasksJsonl(d));
    out << "wrote " << d.size() << " tasks to " << args.output.string() << "\n";
    return kOk;
  });
}

int Main(int argc, char **argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Entity matching with LLM strategies: matching, comparing, selecting, ComEM"};
  app.require_subcommand(1);

  RunArgs run;
  std::size_t run_par = 0;
  auto *run_cmd = app.add_subcommand("run", "Run the configured jobs and write reports");
  run_cmd->add_option("config", run.config, "Run configuration (JSON)")->required();
  run_cmd->add_option("-o,--output", run.output_dir, "Override output_dir");
  run_cmd->add_flag("--strict", run.strict, "Abort on the first failed task");
  auto *run_par_opt = run_cmd->add_option("-j,--parallelism", run_par, "Override parallelism");

  SweepArgs sweep;
  std::string ks = "1-10";
  std::size_t sweep_par = 0;
  auto *sweep_cmd = app.add_subcommand("sweep", "Vary the ComEM top-k and report metrics per k");
  sweep_cmd->add_option("config", sweep.run.config, "Run configuration (JSON)")->required();
  sweep_cmd->add_option("--ks", ks, "Values of k, e.g. 1-10 or 1,2,4,8")->capture_default_str();
  sweep_cmd->add_option("--job", sweep.job, "Name of the comem job to sweep");
  sweep_cmd->add_option("-o,--output", sweep.run.output_dir, "Override output_dir");
  auto *sweep_par_opt =
      sweep_cmd->add_option("-j,--parallelism", sweep_par, "Override parallelism");

  ValidateArgs validate;
  auto *validate_cmd =
      app.add_subcommand("validate", "Check predictions for global-consistency violations");
  validate_cmd->add_option("predictions", validate.predictions, "Predictions JSONL")->required();
  validate_cmd->add_flag("--strict", validate.strict, "Exit non-zero when violations exist");

  ConvertArgs convert;
  auto *convert_cmd = app.add_subcommand("convert", "Convert a pair table to task JSONL");
  convert_cmd->add_option("--pairs", convert.pairs, "anchor_id,candidate_id,label CSV")->required();
  convert_cmd->add_option("--left", convert.left, "Anchor-side record CSV")->required();
  convert_cmd->add_option("--right", convert.right, "Candidate-side record CSV")->required();
  convert_cmd->add_option("-o,--output", convert.output, "Output task JSONL")->required();

  SyntheticConfig synth;
  std::filesystem::path synth_out;
  std::optional<std::filesystem::path> pool_out;
  std::size_t pool_size = 40;
  auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic bibliographic dataset");
  synth_cmd->add_option("-o,--output", synth_out, "Output task JSONL")->required();
  synth_cmd->add_option("--tasks", synth.tasks, "Number of tasks")->capture_default_str();
  synth_cmd->add_option("--with-gold", synth.tasks_with_gold, "Tasks that have a true match")
      ->capture_default_str();
  synth_cmd->add_option("--candidates", synth.candidates, "Candidates per task")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--fewshot-pool", pool_out, "Also write a few-shot pool here");
  synth_cmd->add_option("--pool-size", pool_size, "Few-shot pool size")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? kOk : kBadInput;
  }

  if (*run_cmd) {
    if (run_par_opt->count()) run.parallelism = run_par;
    return CmdRun(run, out, err);
  }
  if (*sweep_cmd) {
    if (sweep_par_opt->count()) sweep.run.parallelism = sweep_par;
    return Guard(err, [&] {
      sweep.ks = ParseKs(ks);
      return CmdSweep(sweep, out, err);
    });
  }
  if (*validate_cmd) return CmdValidate(validate, out, err);
  if (*convert_cmd) return CmdConvert(convert, out, err);
  if (*synth_cmd) {
    return Guard(err, [&] {
      Dataset d = MakeSyntheticDataset(synth);
      WriteFile(synth_out, WriteTasksJsonl(d));
      out << "wrote " << d.size() << " tasks to " << synth_out.string() << "\n";
      if (pool_out) {
        auto pool = MakeSyntheticFewShotPool(pool_size, synth.seed);
        WriteFile(*pool_out, WriteFewShotPool(pool));
        out << "wrote " << pool.size() << " few-shot examples to " << pool_out->string() << "\n";
      }
      return kOk;
    });
  }
  return kBadInput;
}

}  // namespace comem::cli
