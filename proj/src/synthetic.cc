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

#include "comem/synthetic.h"

#include <array>
#include <string_view>

#include "comem/error.h"
#include "comem/hash.h"

namespace comem {

namespace {

constexpr std::array<std::string_view, 48> kTitleWords = {
    "adaptive",   "query",       "processing", "distributed", "streams",   "index",
    "learning",   "entity",      "resolution", "scalable",    "graph",     "database",
    "efficient",  "join",        "algorithms", "transaction", "storage",   "semantic",
    "integration", "schema",     "matching",   "approximate", "similarity", "search",
    "optimization", "parallel",  "warehouse",  "lineage",     "tracing",   "views",
    "incremental", "maintenance", "xml",       "data",        "cleaning",  "provenance",
    "probabilistic", "ranking",  "top-k",      "spatial",     "temporal",  "mining",
    "clustering", "sampling",    "estimation", "cardinality", "caching",   "workloads"};

constexpr std::array<std::string_view, 24> kSurnames = {
    "Widom",  "Cui",     "Stonebraker", "Halevy",  "Doan",    "Ives",
    "Naumann", "Getoor", "Koudas",      "Srivastava", "Chaudhuri", "Ganti",
    "Dong",   "Rahm",    "Bernstein",   "Madhavan",  "Franklin",  "Hellerstein",
    "Abadi",  "Kraska",  "Li",          "Tan",       "Wang",      "Zhang"};

constexpr std::array<std::string_view, 16> kGiven = {
    "Jennifer", "Yingwei", "Michael", "Alon",  "AnHai",  "Zachary", "Felix", "Lise",
    "Nick",     "Divesh",  "Surajit", "Venkatesh", "Xin", "Erhard", "Philip", "Jayant"};

struct Venue {
  std::string_view full;
  std::string_view abbrev;
};

constexpr std::array<Venue, 6> kVenues = {{{"Very Large Data Bases", "VLDB"},
                                           {"ACM SIGMOD Conference", "SIGMOD"},
                                           {"IEEE Data Engineering", "ICDE"},
                                           {"ACM Transactions on Database Systems", "TODS"},
                                           {"The VLDB Journal", "VLDBJ"},
                                           {"Extending Database Technology", "EDBT"}}};

template <std::size_t N>
std::string_view Pick(SplitMix64 &rng, const std::array<std::string_view, N> &from) {
  return from[rng.Below(N)];
}

std::string Capitalize(std::string_view w) {
  std::string s(w);
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct Paper {
  std::vector<std::string_view> title;
  std::vector<std::pair<std::string_view, std::string_view>> authors;  // given, surname
  std::size_t venue = 0;
  int year = 2000;
};

Paper RandomPaper(SplitMix64 &rng) {
  Paper p;
  std::size_t words = 4 + rng.Below(4);
  for (std::size_t i = 0; i < words; ++i) p.title.push_back(Pick(rng, kTitleWords));
  std::size_t authors = 1 + rng.Below(3);
  for (std::size_t i = 0; i < authors; ++i) {
    p.authors.emplace_back(Pick(rng, kGiven), Pick(rng, kSurnames));
  }
  p.venue = rng.Below(kVenues.size());
  p.year = 1995 + static_cast<int>(rng.Below(26));
  return p;
}

// A near miss: most title words kept, some replaced, year shifted.
Paper Confuser(const Paper &base, SplitMix64 &rng) {
  Paper p = base;
  for (auto &w : p.title) {
    if (rng.Below(3) == 0) w = Pick(rng, kTitleWords);
  }
  p.title.push_back(Pick(rng, kTitleWords));
  p.year = base.year + 1 + static_cast<int>(rng.Below(3));
  if (rng.Below(2) == 0) p.authors.front().second = Pick(rng, kSurnames);
  return p;
}

// Formatting for the anchor side: capitalized title, full names, full venue.
EntityRecord Render(const Paper &p, std::string id, std::string source, bool abbreviated) {
  std::string title;
  for (std::size_t i = 0; i < p.title.size(); ++i) {
    if (i) title += ' ';
    title += abbreviated ? std::string(p.title[i]) : Capitalize(p.title[i]);
  }
  std::string authors;
  for (std::size_t i = 0; i < p.authors.size(); ++i) {
    if (i) authors += ", ";
    if (abbreviated) {
      authors += p.authors[i].first.substr(0, 1);
      authors += ". ";
    } else {
      authors += p.authors[i].first;
      authors += ' ';
    }
    authors += p.authors[i].second;
  }
  const Venue &v = kVenues[p.venue];
  return EntityRecord(std::move(id),
                      {{"Title", title},
                       {"Authors", authors},
                       {"Venue", std::string(abbreviated ? v.abbrev : v.full)},
                       {"Year", std::to_string(p.year)}},
                      std::move(source));
}

template <typename T>
void Shuffle(std::vector<T> &v, SplitMix64 &rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.Below(i)]);
}

}  // namespace

Dataset MakeSyntheticDataset(const SyntheticConfig &config) {
  if (config.candidates == 0) throw ValidationError("synthetic tasks need candidates");
  if (config.tasks_with_gold > config.tasks) {
    throw ValidationError("tasks_with_gold exceeds tasks");
  }
  SplitMix64 rng(config.seed);

  std::vector<bool> has_gold(config.tasks, false);
  for (std::size_t i = 0; i < config.tasks_with_gold; ++i) has_gold[i] = true;
  Shuffle(has_gold, rng);
  std::vector<std::size_t> positions(config.tasks_with_gold);
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i % config.candidates + 1;
  Shuffle(positions, rng);

  std::vector<MatchTask> tasks;
  std::size_t next_gold = 0;
  for (std::size_t i = 0; i < config.tasks; ++i) {
    Paper anchor = RandomPaper(rng);
    std::string ai = std::to_string(i);
    std::optional<std::size_t> gold;
    if (has_gold[i]) gold = positions[next_gold++];

    std::vector<EntityRecord> cands;
    for (std::size_t j = 1; j <= config.candidates; ++j) {
      if (gold && j == *gold) {
        cands.push_back(Render(anchor, "b" + ai, "D2", true));
        continue;
      }
      Paper other = rng.Below(2) == 0 ? Confuser(anchor, rng) : RandomPaper(rng);
      cands.push_back(Render(other, "c" + ai + "_" + std::to_string(j), "D2",
                             rng.Below(2) == 0));
    }
    tasks.emplace_back("t" + ai, Render(anchor, "a" + ai, "D1", false), std::move(cands),
                       gold);
  }
  return Dataset("synthetic-" + std::to_string(config.seed), std::move(tasks));
}

std::vector<FewShotExample> MakeSyntheticFewShotPool(std::size_t size, std::uint64_t seed) {
  SplitMix64 rng(Mix64(seed ^ 0x5f3759dfULL));
  std::vector<FewShotExample> pool;
  for (std::size_t i = 0; i < size; ++i) {
    std::string base = "f" + std::to_string(i);
    Paper left = RandomPaper(rng);
    bool positive = i % 2 == 0;
    Paper right = positive ? left : (rng.Below(2) == 0 ? Confuser(left, rng) : RandomPaper(rng));
    pool.push_back({Render(left, base + "l", "D1", false), Render(right, base + "r", "D2", true),
                    positive});
  }
  return pool;
}

}  // namespace comem
