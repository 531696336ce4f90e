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

// Seeded generator of bibliographic match tasks for simulation runs.

#ifndef COMEM_SYNTHETIC_H_
#define COMEM_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "comem/records.h"

namespace comem {

struct SyntheticConfig {
  std::size_t tasks = 400;
  std::size_t tasks_with_gold = 300;
  std::size_t candidates = 10;
  std::uint64_t seed = 1;
};

// Gold positions are spread evenly over 1..candidates. Anchor ids are
// "a<i>", candidate ids "b<i>" (the true match) or "c<i>_<j>", so anchors and
// candidates never share an id.
Dataset MakeSyntheticDataset(const SyntheticConfig &config);

// Half positives (a record and a perturbed copy), half negatives.
std::vector<FewShotExample> MakeSyntheticFewShotPool(std::size_t size, std::uint64_t seed);

}  // namespace comem

#endif  // COMEM_SYNTHETIC_H_
