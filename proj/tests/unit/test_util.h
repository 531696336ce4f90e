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

// Fixtures shared by the unit tests.

#ifndef COMEM_TESTS_TEST_UTIL_H_
#define COMEM_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "comem/backend.h"
#include "comem/hash.h"
#include "comem/records.h"

namespace comem::testing {

inline EntityRecord Rec(const std::string &id, const std::string &title,
                        const std::string &year = "2001") {
  return EntityRecord(id, {{"Title", title}, {"Year", year}});
}

// Task with candidates "<task>_c1".."<task>_cN".
inline MatchTask MakeTask(const std::string &task_id, std::size_t n,
                          std::optional<std::size_t> gold = std::nullopt) {
  std::vector<EntityRecord> cands;
  for (std::size_t i = 1; i <= n; ++i) {
    cands.push_back(Rec(task_id + "_c" + std::to_string(i), "candidate " + std::to_string(i)));
  }
  return MatchTask(task_id, Rec(task_id + "_anchor", "anchor"), std::move(cands), gold);
}

// Comparator that prefers the candidate with the larger rank value, keyed by
// record id. Answers for both orders agree, so it induces a strict total
// order.
inline FunctionBackend RankComparator(std::map<std::string, int> rank) {
  return FunctionBackend([rank = std::move(rank)](const BackendRequest &req) {
    BackendResponse r;
    const auto &ids = req.subject.candidate_ids;
    if (req.prompt.strategy == Strategy::kComparing) {
      r.text = rank.at(ids[0]) > rank.at(ids[1]) ? "Record A" : "Record B";
    } else if (req.prompt.strategy == Strategy::kMatching) {
      r.text = rank.at(ids[0]) == std::max_element(rank.begin(), rank.end(),
                                                     [](auto &a, auto &b) {
                                                       return a.second < b.second;
                                                     })->second
                   ? "Yes"
                   : "No";
    } else {
      r.text = "[0]";
    }
    return r;
  });
}

// Wraps a backend and records every request it forwards.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(Backend &inner) : inner_(inner) {}

  BackendResponse Complete(const BackendRequest &request) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      requests_.push_back(request);
    }
    return inner_.Complete(request);
  }
  std::string model_name() const override { return inner_.model_name(); }
  const PriceTable &prices() const override { return inner_.prices(); }
  bool provides_probabilities() const override { return inner_.provides_probabilities(); }

  std::size_t calls() const { return requests_.size(); }
  std::size_t records() const {
    std::size_t n = 0;
    for (const auto &r : requests_) n += r.prompt.record_count;
    return n;
  }
  const std::vector<BackendRequest> &requests() const { return requests_; }

 private:
  Backend &inner_;
  std::mutex mu_;
  std::vector<BackendRequest> requests_;
};

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("comem_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void WriteText(const std::filesystem::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string ReadText(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace comem::testing

#endif  // COMEM_TESTS_TEST_UTIL_H_
