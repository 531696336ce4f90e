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

// Records, match tasks and datasets, plus their file formats.
//
// A match task is one anchor record and the ordered list of its potential
// matches. At most one candidate is the true match; `gold` holds its 1-based
// position in the list, or nothing when none of the candidates match.

#ifndef COMEM_RECORDS_H_
#define COMEM_RECORDS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace comem {

struct Attribute {
  std::string name;
  std::string value;

  bool operator==(const Attribute &) const = default;
};

// An identified record with attributes in ingestion order. Attribute names
// are unique; the constructor enforces it.
class EntityRecord {
 public:
  EntityRecord() = default;
  EntityRecord(std::string id, std::vector<Attribute> attributes,
               std::string source = {});

  const std::string &id() const { return id_; }
  const std::string &source() const { return source_; }
  const std::vector<Attribute> &attributes() const { return attributes_; }

  // Value of the named attribute, or nullptr.
  const std::string *Find(std::string_view name) const;

  bool operator==(const EntityRecord &) const = default;

 private:
  std::string id_;
  std::string source_;
  std::vector<Attribute> attributes_;
};

class MatchTask {
 public:
  MatchTask(std::string task_id, EntityRecord anchor,
            std::vector<EntityRecord> candidates,
            std::optional<std::size_t> gold = std::nullopt);

  const std::string &task_id() const { return task_id_; }
  const EntityRecord &anchor() const { return anchor_; }
  const std::vector<EntityRecord> &candidates() const { return candidates_; }
  std::size_t size() const { return candidates_.size(); }
  // 1-based index into candidates().
  std::optional<std::size_t> gold() const { return gold_; }
  const EntityRecord &candidate(std::size_t index) const {
    return candidates_.at(index - 1);
  }
  // Record id of the true match, if any.
  std::optional<std::string> gold_id() const;

  bool operator==(const MatchTask &) const = default;

 private:
  std::string task_id_;
  EntityRecord anchor_;
  std::vector<EntityRecord> candidates_;
  std::optional<std::size_t> gold_;
};

struct DatasetMetadata {
  std::string name;
  // Attribute names in first-seen order across all records.
  std::vector<std::string> schema;
  std::size_t task_count = 0;
  std::size_t candidate_count = 0;
  std::size_t gold_count = 0;

  bool operator==(const DatasetMetadata &) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  // Throws ValidationError on duplicate task ids.
  Dataset(std::string name, std::vector<MatchTask> tasks);

  const std::vector<MatchTask> &tasks() const { return tasks_; }
  const DatasetMetadata &metadata() const { return metadata_; }
  std::size_t size() const { return tasks_.size(); }
  const MatchTask *Find(std::string_view task_id) const;

  bool operator==(const Dataset &) const = default;

 private:
  std::vector<MatchTask> tasks_;
  DatasetMetadata metadata_;
};

struct FewShotExample {
  EntityRecord left;
  EntityRecord right;
  bool label = false;

  bool operator==(const FewShotExample &) const = default;
};

enum class TaskFormat { kTaskJsonl, kPairTable };

// Flat rendering of a record: "name<kv>value" pairs joined by <sep>.
struct RecordFormat {
  std::string pair_separator = "; ";
  std::string key_value_separator = ": ";
};

std::string SerializeRecord(const EntityRecord &record,
                            const RecordFormat &format = {});

// task-jsonl ingestion. Errors carry the 1-based line number.
Dataset ParseTasksJsonl(std::string_view text, std::string source = "<memory>");
Dataset LoadTasksJsonl(const std::filesystem::path &path);
std::string WriteTasksJsonl(const Dataset &dataset);

// pair-table ingestion: a CSV of (anchor_id, candidate_id, label) rows plus
// one record CSV per side. Record CSVs have an `id` column; every other
// column is an attribute, in header order.
struct PairTablePaths {
  std::filesystem::path pairs;
  std::filesystem::path left_records;
  std::filesystem::path right_records;
};
Dataset LoadPairTable(const PairTablePaths &paths);

// Dispatches on `format`. A pair-table path names the pairs CSV; the record
// CSVs are expected next to it as left.csv and right.csv.
Dataset LoadTasks(const std::filesystem::path &path, TaskFormat format);

TaskFormat ParseTaskFormat(std::string_view name);

std::vector<FewShotExample> ParseFewShotPool(std::string_view text,
                                             std::string source = "<memory>");
std::vector<FewShotExample> LoadFewShotPool(const std::filesystem::path &path);
std::string WriteFewShotPool(std::span<const FewShotExample> pool);

// Jaccard similarity of the lowercased whitespace-token sets of two strings.
double TokenJaccard(std::string_view a, std::string_view b);

// The n_pos positives and n_neg negatives most similar to the task's anchor,
// positives first, each group by descending similarity with ties in pool
// order. Throws ValidationError when the pool is short of either class.
std::vector<FewShotExample> RetrieveFewShot(std::span<const FewShotExample> pool,
                                            const MatchTask &target,
                                            std::size_t n_pos, std::size_t n_neg,
                                            const RecordFormat &format = {});

}  // namespace comem

#endif  // COMEM_RECORDS_H_
