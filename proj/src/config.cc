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

#include "comem/config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace comem {

namespace {

using json = nlohmann::json;

// Typed accessors that report the JSON path of a bad field.
class Fields {
 public:
  Fields(const json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string Path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  bool Has(std::string_view key) const {
    return obj_.contains(std::string(key)) && !obj_.at(std::string(key)).is_null();
  }
  const json &At(std::string_view key) const { return obj_.at(std::string(key)); }

  std::string String(std::string_view key) const {
    if (!Has(key)) throw ConfigError(Path(key), "required field is missing");
    return StringOr(key, "");
  }
  std::string StringOr(std::string_view key, std::string fallback) const {
    if (!Has(key)) return fallback;
    const json &v = At(key);
    if (!v.is_string()) throw ConfigError(Path(key), "expected a string");
    return v.get<std::string>();
  }
  bool BoolOr(std::string_view key, bool fallback) const {
    if (!Has(key)) return fallback;
    const json &v = At(key);
    if (!v.is_boolean()) throw ConfigError(Path(key), "expected true or false");
    return v.get<bool>();
  }
  double NumberOr(std::string_view key, double fallback) const {
    if (!Has(key)) return fallback;
    const json &v = At(key);
    if (!v.is_number()) throw ConfigError(Path(key), "expected a number");
    return v.get<double>();
  }
  std::size_t CountOr(std::string_view key, std::size_t fallback) const {
    if (!Has(key)) return fallback;
    const json &v = At(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(Path(key), "expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }

 private:
  const json &obj_;
  std::string path_;
};

std::filesystem::path Resolve(const std::filesystem::path &base, const std::string &p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

PriceTable ParsePrice(const Fields &f) {
  PriceTable price;
  if (!f.Has("price")) return price;
  Fields p(f.At("price"), f.Path("price"));
  price.input_per_million = p.NumberOr("input_per_million", 0.0);
  price.output_per_million = p.NumberOr("output_per_million", 0.0);
  if (price.input_per_million < 0 || price.output_per_million < 0) {
    throw ConfigError(f.Path("price"), "prices must be non-negative");
  }
  return price;
}

OracleConfig ParseOracle(const Fields &f) {
  OracleConfig c;
  if (f.Has("seed")) {
    const json &s = f.At("seed");
    if (!s.is_number_integer()) throw ConfigError(f.Path("seed"), "expected an integer");
    c.seed = s.is_number_unsigned() ? s.get<std::uint64_t>()
                                    : static_cast<std::uint64_t>(s.get<std::int64_t>());
  }
  c.flip_rate = f.NumberOr("flip_rate", 0.0);
  if (c.flip_rate < 0.0 || c.flip_rate > 1.0) {
    throw ConfigError(f.Path("flip_rate"), "must lie in [0, 1]");
  }
  if (f.Has("position_bias")) {
    const json &pb = f.At("position_bias");
    if (pb.is_array()) {
      for (std::size_t i = 0; i < pb.size(); ++i) {
        if (!pb[i].is_number()) {
          throw ConfigError(f.Path("position_bias") + "[" + std::to_string(i) + "]",
                            "expected a number");
        }
        c.position_bias.push_back(pb[i].get<double>());
      }
    } else if (pb.is_object()) {
      // {"first": 1.0, "last": 0.5, "positions": 10}
      Fields lin(pb, f.Path("position_bias"));
      c.position_bias = LinearPositionBias(lin.CountOr("positions", 10),
                                           lin.NumberOr("first", 1.0),
                                           lin.NumberOr("last", 1.0));
    } else {
      throw ConfigError(f.Path("position_bias"), "expected an array or {first,last,positions}");
    }
    for (double v : c.position_bias) {
      if (v < 0.0 || v > 1.0) throw ConfigError(f.Path("position_bias"), "values must lie in [0, 1]");
    }
  }
  std::string mode = f.StringOr("probability_mode", "none");
  if (mode == "none") {
    c.probability_mode = ProbabilityMode::kNone;
  } else if (mode == "calibrated") {
    c.probability_mode = ProbabilityMode::kCalibrated;
  } else {
    throw ConfigError(f.Path("probability_mode"), "expected \"none\" or \"calibrated\"");
  }
  c.model = f.StringOr("model", "oracle");
  c.prices = ParsePrice(f);
  return c;
}

HttpBackendSpec ParseHttp(const Fields &f, std::size_t default_parallelism) {
  HttpBackendSpec spec;
  auto &c = spec.config;
  c.endpoint = f.String("endpoint");
  c.path = f.StringOr("path", c.path);
  c.model = f.String("model");
  if (f.Has("api_key")) {
    throw ConfigError(f.Path("api_key"),
                      "inline API keys are not accepted; use api_key_env");
  }
  spec.api_key_env = f.StringOr("api_key_env", "");
  c.parallelism = f.CountOr("parallelism", default_parallelism);
  if (c.parallelism == 0) throw ConfigError(f.Path("parallelism"), "must be at least 1");
  c.max_retries = static_cast<int>(f.CountOr("max_retries", 3));
  c.initial_backoff = std::chrono::milliseconds(f.CountOr("initial_backoff_ms", 500));
  c.max_backoff = std::chrono::milliseconds(f.CountOr("max_backoff_ms", 8000));
  c.timeout = std::chrono::seconds(f.CountOr("timeout_s", 120));
  c.logprobs = f.BoolOr("logprobs", false);
  c.top_logprobs = static_cast<int>(f.CountOr("top_logprobs", 5));
  c.prices = ParsePrice(f);
  return spec;
}

std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RunConfig ParseRunConfig(std::string_view text, const std::filesystem::path &base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError("<config>", e.what());
  }
  Fields top(root, "");
  RunConfig rc;
  rc.dataset = Resolve(base_dir, top.String("dataset"));
  try {
    rc.dataset_format = ParseTaskFormat(top.StringOr("dataset_format", "task-jsonl"));
  } catch (const ValidationError &e) {
    throw ConfigError("dataset_format", e.what());
  }
  if (top.Has("fewshot_pool")) rc.fewshot_pool = Resolve(base_dir, top.String("fewshot_pool"));
  if (top.Has("templates_dir")) {
    rc.templates_dir = Resolve(base_dir, top.String("templates_dir"));
  }
  rc.output_dir = Resolve(base_dir, top.StringOr("output_dir", "out"));
  rc.strict = top.BoolOr("strict", false);
  rc.parallelism = top.CountOr("parallelism", 1);
  if (rc.parallelism == 0) throw ConfigError("parallelism", "must be at least 1");

  if (!top.Has("backends")) throw ConfigError("backends", "required field is missing");
  const json &backends = top.At("backends");
  if (!backends.is_object()) throw ConfigError("backends", "expected an object of named backends");
  for (auto it = backends.begin(); it != backends.end(); ++it) {
    Fields f(it.value(), "backends." + it.key());
    std::string kind = f.String("kind");
    BackendSpec spec{it.key(), OracleConfig{}};
    if (kind == "oracle") {
      spec.params = ParseOracle(f);
    } else if (kind == "http") {
      spec.params = ParseHttp(f, rc.parallelism);
    } else {
      throw ConfigError(f.Path("kind"), "expected \"oracle\" or \"http\"");
    }
    rc.backends.push_back(std::move(spec));
  }

  std::set<std::string> defined;
  for (const auto &b : rc.backends) defined.insert(b.name);

  if (!top.Has("jobs") || !top.At("jobs").is_array() || top.At("jobs").empty()) {
    throw ConfigError("jobs", "expected a non-empty array");
  }
  const json &jobs = top.At("jobs");
  std::set<std::string> names;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    std::string path = "jobs[" + std::to_string(i) + "]";
    Fields f(jobs[i], path);
    JobSpec job;
    try {
      job.kind = ParseJobKind(f.String("strategy"));
    } catch (const ConfigError &) {
      throw;
    } catch (const ValidationError &e) {
      throw ConfigError(f.Path("strategy"), e.what());
    }
    job.name = f.StringOr("name", std::string(JobKindName(job.kind)));
    if (!names.insert(job.name).second) {
      throw ConfigError(f.Path("name"), "duplicate job name \"" + job.name + "\"");
    }
    job.allow_none = f.BoolOr("allow_none", true);
    auto require_backend = [&](std::string_view key) {
      std::string name = f.String(key);
      if (!defined.count(name)) {
        throw ConfigError(f.Path(key), "job \"" + job.name + "\" references undefined backend \"" +
                                           name + "\"");
      }
      return name;
    };
    if (job.kind == JobKind::kComem) {
      job.filter_backend = require_backend("filter_backend");
      job.select_backend = require_backend("select_backend");
      try {
        job.filter = ParseFilterStrategy(f.StringOr("filter", "matching"));
      } catch (const ValidationError &e) {
        throw ConfigError(f.Path("filter"), e.what());
      }
      job.top_k = f.CountOr("top_k", 4);
      if (job.top_k < 1) throw ConfigError(f.Path("top_k"), "must be at least 1");
    } else {
      job.backend = require_backend("backend");
    }
    if (f.Has("fewshot")) {
      if (job.kind != JobKind::kMatching) {
        throw ConfigError(f.Path("fewshot"), "few-shot examples apply to the matching strategy only");
      }
      Fields fs(f.At("fewshot"), f.Path("fewshot"));
      job.fewshot_positives = fs.CountOr("positives", 3);
      job.fewshot_negatives = fs.CountOr("negatives", 3);
      if (job.fewshot_positives + job.fewshot_negatives > 0 && !rc.fewshot_pool) {
        throw ConfigError(f.Path("fewshot"), "few-shot examples need a fewshot_pool");
      }
    }
    rc.jobs.push_back(std::move(job));
  }
  return rc;
}

RunConfig LoadRunConfig(const std::filesystem::path &path) {
  return ParseRunConfig(ReadFile(path), path.parent_path());
}

SuiteOptions RunContext::Options(const RunConfig &config) const {
  SuiteOptions o;
  o.parallelism = config.parallelism;
  o.strict = config.strict;
  o.fewshot_pool = fewshot_pool;
  o.renderer = renderer.get();
  return o;
}

RunContext BuildRunContext(
    const RunConfig &config,
    const std::function<std::optional<std::string>(const std::string &)> &getenv) {
  auto env = [&](const std::string &name) -> std::optional<std::string> {
    if (getenv) return getenv(name);
    const char *v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };

  RunContext ctx;
  ctx.dataset = LoadTasks(config.dataset, config.dataset_format);
  if (config.fewshot_pool) ctx.fewshot_pool = LoadFewShotPool(*config.fewshot_pool);
  ctx.renderer = std::make_unique<PromptRenderer>(
      config.templates_dir ? PromptTemplates::FromDirectory(*config.templates_dir)
                           : PromptTemplates::Defaults());

  for (const auto &spec : config.backends) {
    if (const auto *oracle = std::get_if<OracleConfig>(&spec.params)) {
      auto b = std::make_shared<OracleBackend>(*oracle);
      b->Register(ctx.dataset);
      ctx.backends[spec.name] = std::move(b);
    } else {
      HttpBackendConfig http = std::get<HttpBackendSpec>(spec.params).config;
      const std::string &var = std::get<HttpBackendSpec>(spec.params).api_key_env;
      if (!var.empty()) {
        auto key = env(var);
        if (!key) {
          throw ConfigError("backends." + spec.name + ".api_key_env",
                            "environment variable " + var + " is not set");
        }
        http.api_key = *key;
      }
      ctx.backends[spec.name] = std::make_shared<HttpBackend>(std::move(http));
    }
  }

  for (std::size_t i = 0; i < config.jobs.size(); ++i) {
    const JobSpec &s = config.jobs[i];
    JobConfig job;
    job.name = s.name;
    job.kind = s.kind;
    job.allow_none = s.allow_none;
    job.fewshot_positives = s.fewshot_positives;
    job.fewshot_negatives = s.fewshot_negatives;
    if (s.kind == JobKind::kComem) {
      job.pipeline.filter_strategy = s.filter;
      job.pipeline.filter_backend = ctx.backends.at(s.filter_backend);
      job.pipeline.select_backend = ctx.backends.at(s.select_backend);
      job.pipeline.top_k = s.top_k;
      job.pipeline.allow_none = s.allow_none;
      for (auto &w : job.pipeline.Validate()) {
        ctx.warnings.push_back("jobs[" + std::to_string(i) + "] (" + s.name + "): " + w);
      }
    } else {
      job.backend = ctx.backends.at(s.backend);
    }
    ctx.jobs.push_back(std::move(job));
  }
  return ctx;
}

}  // namespace comem
