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

#ifndef COMEM_CLI_H_
#define COMEM_CLI_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace comem::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;      // run failures, violations under --strict
inline constexpr int kBadInput = 2;    // config, usage or parse errors

struct RunArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> output_dir;
  bool strict = false;
  std::optional<std::size_t> parallelism;
};

struct SweepArgs {
  RunArgs run;
  std::vector<std::size_t> ks;
  std::optional<std::string> job;
};

struct ValidateArgs {
  std::filesystem::path predictions;
  bool strict = false;
};

struct ConvertArgs {
  std::filesystem::path pairs;
  std::filesystem::path left;
  std::filesystem::path right;
  std::filesystem::path output;
};

int CmdRun(const RunArgs &args, std::ostream &out, std::ostream &err);
int CmdSweep(const SweepArgs &args, std::ostream &out, std::ostream &err);
int CmdValidate(const ValidateArgs &args, std::ostream &out, std::ostream &err);
int CmdConvert(const ConvertArgs &args, std::ostream &out, std::ostream &err);

// Parses argv and dispatches.
int Main(int argc, char **argv, std::ostream &out, std::ostream &err);

}  // namespace comem::cli

#endif  // COMEM_CLI_H_
