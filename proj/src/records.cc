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

#include "comem/records.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "comem/error.h"
#include "csv.h"
#include "json.hpp"

namespace comem {

namespace {

using ordered_json = nlohmann::ordered_json;

// Reserved keys inside a record object. Everything else is an attribute.
constexpr std::string_view kIdKey = "_id";
constexpr std::string_view kSourceKey = "_source";

std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string ValueText(const ordered_json &v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

EntityRecord RecordFromJson(const ordered_json &obj, std::string default_id,
                            const std::string &source, std::size_t line) {
  if (!obj.is_object()) throw ParseError(source, line, "record is not an object");
  std::string id = std::move(default_id);
  std::string origin;
  std::vector<Attribute> attrs;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it.key() == kIdKey) {
      id = ValueText(it.value());
    } else if (it.key() == kSourceKey) {
      origin = ValueText(it.value());
    } else {
      attrs.push_back({it.key(), ValueText(it.value())});
    }
  }
  try {
    return EntityRecord(std::move(id), std::move(attrs), std::move(origin));
  } catch (const ValidationError &e) {
    throw ParseError(source, line, e.what());
  }
}

ordered_json RecordToJson(const EntityRecord &r) {
  ordered_json obj = ordered_json::object();
  obj[std::string(kIdKey)] = r.id();
  if (!r.source().empty()) obj[std::string(kSourceKey)] = r.source();
  for (const auto &a : r.attributes()) obj[a.name] = a.value;
  return obj;
}

std::vector<std::string> Tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Reads one record CSV into id -> record.
std::unordered_map<std::string, EntityRecord> LoadRecordCsv(
    const std::filesystem::path &path, const std::string &source_label) {
  auto rows = internal::ParseCsv(ReadFile(path), path.string());
  if (rows.empty()) throw ParseError(path.string(), 1, "missing header row");
  const auto &header = rows.front().fields;
  auto id_col = std::find(header.begin(), header.end(), "id");
  if (id_col == header.end()) {
    throw ParseError(path.string(), 1, "header has no `id` column");
  }
  std::size_t id_index = static_cast<std::size_t>(id_col - header.begin());
  std::unordered_map<std::string, EntityRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    if (row.fields.size() != header.size()) {
      throw ParseError(path.string(), row.line,
                       "expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(row.fields.size()));
    }
    std::vector<Attribute> attrs;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != id_index) attrs.push_back({header[c], row.fields[c]});
    }
    const std::string &id = row.fields[id_index];
    EntityRecord rec;
    try {
      rec = EntityRecord(id, std::move(attrs), source_label);
    } catch (const ValidationError &e) {
      throw ParseError(path.string(), row.line, e.what());
    }
    if (!out.emplace(id, std::move(rec)).second) {
      throw ParseError(path.string(), row.line, "duplicate record id " + id);
    }
  }
  return out;
}

bool ParseLabelCell(const std::string &cell, const std::string &source,
                    std::size_t line) {
  std::string v;
  for (char c : cell) v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ParseError(source, line, "label must be 0/1, got \"" + cell + "\"");
}

}  // namespace

EntityRecord::EntityRecord(std::string id, std::vector<Attribute> attributes,
                           std::string source)
    : id_(std::move(id)),
      source_(std::move(source)),
      attributes_(std::move(attributes)) {
  std::unordered_set<std::string_view> seen;
  for (const auto &a : attributes_) {
    if (!seen.insert(a.name).second) {
      throw ValidationError("record " + id_ + ": duplicate attribute \"" +
                            a.name + "\"");
    }
  }
}

const std::string *EntityRecord::Find(std::string_view name) const {
  for (const auto &a : attributes_) {
    if (a.name == name) return &a.value;
  }
  return nullptr;
}

MatchTask::MatchTask(std::string task_id, EntityRecord anchor,
                     std::vector<EntityRecord> candidates,
                     std::optional<std::size_t> gold)
    : task_id_(std::move(task_id)),
      anchor_(std::move(anchor)),
      candidates_(std::move(candidates)),
      gold_(gold) {
  if (candidates_.empty()) {
    throw ValidationError("task " + task_id_ + ": candidate list is empty");
  }
  if (gold_ && (*gold_ < 1 || *gold_ > candidates_.size())) {
    throw ValidationError("task " + task_id_ + ": gold index " +
                          std::to_string(*gold_) + " outside 1.." +
                          std::to_string(candidates_.size()));
  }
}

std::optional<std::string> MatchTask::gold_id() const {
  if (!gold_) return std::nullopt;
  return candidate(*gold_).id();
}

Dataset::Dataset(std::string name, std::vector<MatchTask> tasks)
    : tasks_(std::move(tasks)) {
  metadata_.name = std::move(name);
  std::unordered_set<std::string_view> ids;
  std::unordered_set<std::string> schema_seen;
  auto note_schema = [&](const EntityRecord &r) {
    for (const auto &a : r.attributes()) {
      if (schema_seen.insert(a.name).second) metadata_.schema.push_back(a.name);
    }
  };
  for (const auto &t : tasks_) {
    if (!ids.insert(t.task_id()).second) {
      throw ValidationError("duplicate task_id " + t.task_id());
    }
    note_schema(t.anchor());
    for (const auto &c : t.candidates()) note_schema(c);
    metadata_.candidate_count += t.size();
    if (t.gold()) ++metadata_.gold_count;
  }
  metadata_.task_count = tasks_.size();
}

const MatchTask *Dataset::Find(std::string_view task_id) const {
  for (const auto &t : tasks_) {
    if (t.task_id() == task_id) return &t;
  }
  return nullptr;
}

std::string SerializeRecord(const EntityRecord &record,
                            const RecordFormat &format) {
  std::string out;
  bool first = true;
  for (const auto &a : record.attributes()) {
    if (!first) out += format.pair_separator;
    first = false;
    out += a.name;
    out += format.key_value_separator;
    out += a.value;
  }
  return out;
}

Dataset ParseTasksJsonl(std::string_view text, std::string source) {
  std::vector<MatchTask> tasks;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!obj.is_object()) throw ParseError(source, line_no, "line is not a JSON object");
    if (!obj.contains("task_id") || !obj["task_id"].is_string()) {
      throw ParseError(source, line_no, "missing string field task_id");
    }
    std::string task_id = obj["task_id"].get<std::string>();
    if (!ids.insert(task_id).second) {
      throw ParseError(source, line_no, "duplicate task_id " + task_id);
    }
    if (!obj.contains("anchor")) throw ParseError(source, line_no, "missing anchor");
    if (!obj.contains("candidates") || !obj["candidates"].is_array()) {
      throw ParseError(source, line_no, "missing candidates array");
    }
    EntityRecord anchor =
        RecordFromJson(obj["anchor"], task_id + ":anchor", source, line_no);
    std::vector<EntityRecord> candidates;
    const auto &cands = obj["candidates"];
    for (std::size_t i = 0; i < cands.size(); ++i) {
      candidates.push_back(RecordFromJson(
          cands[i], task_id + ":" + std::to_string(i + 1), source, line_no));
    }
    std::optional<std::size_t> gold;
    if (obj.contains("gold") && !obj["gold"].is_null()) {
      const auto &g = obj["gold"];
      if (!g.is_number_integer()) {
        throw ParseError(source, line_no, "gold must be an integer or null");
      }
      auto v = g.get<std::int64_t>();
      if (v < 1 || static_cast<std::size_t>(v) > candidates.size()) {
        throw ParseError(source, line_no,
                         "gold index " + std::to_string(v) + " outside 1.." +
                             std::to_string(candidates.size()));
      }
      gold = static_cast<std::size_t>(v);
    }
    try {
      tasks.emplace_back(std::move(task_id), std::move(anchor),
                         std::move(candidates), gold);
    } catch (const ValidationError &e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return Dataset(std::move(source), std::move(tasks));
}

Dataset LoadTasksJsonl(const std::filesystem::path &path) {
  Dataset d = ParseTasksJsonl(ReadFile(path), path.string());
  return d;
}

std::string WriteTasksJsonl(const Dataset &dataset) {
  std::string out;
  for (const auto &t : dataset.tasks()) {
    ordered_json obj = ordered_json::object();
    obj["task_id"] = t.task_id();
    obj["anchor"] = RecordToJson(t.anchor());
    ordered_json cands = ordered_json::array();
    for (const auto &c : t.candidates()) cands.push_back(RecordToJson(c));
    obj["candidates"] = std::move(cands);
    obj["gold"] = t.gold() ? ordered_json(*t.gold()) : ordered_json(nullptr);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

Dataset LoadPairTable(const PairTablePaths &paths) {
  auto left = LoadRecordCsv(paths.left_records, "D1");
  auto right = LoadRecordCsv(paths.right_records, "D2");
  const std::string source = paths.pairs.string();
  auto rows = internal::ParseCsv(ReadFile(paths.pairs), source);
  if (rows.empty()) throw ParseError(source, 1, "missing header row");

  const auto &header = rows.front().fields;
  auto column = [&](const char *name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw ParseError(source, 1, std::string("header has no `") + name + "` column");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  std::size_t anchor_col = column("anchor_id");
  std::size_t cand_col = column("candidate_id");
  std::size_t label_col = column("label");

  struct Group {
    std::string anchor_id;
    std::vector<EntityRecord> candidates;
    std::optional<std::size_t> gold;
    std::size_t first_line = 0;
  };
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> group_of;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    if (row.fields.size() != header.size()) {
      throw ParseError(source, row.line,
                       "expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(row.fields.size()));
    }
    const std::string &aid = row.fields[anchor_col];
    const std::string &cid = row.fields[cand_col];
    if (!left.count(aid)) throw ParseError(source, row.line, "unknown anchor_id " + aid);
    auto cit = right.find(cid);
    if (cit == right.end()) {
      throw ParseError(source, row.line, "unknown candidate_id " + cid);
    }
    auto [git, fresh] = group_of.emplace(aid, groups.size());
    if (fresh) groups.push_back({aid, {}, std::nullopt, row.line});
    Group &g = groups[git->second];
    for (const auto &c : g.candidates) {
      if (c.id() == cid) {
        throw ParseError(source, row.line,
                         "duplicate pair (" + aid + ", " + cid + ")");
      }
    }
    g.candidates.push_back(cit->second);
    if (ParseLabelCell(row.fields[label_col], source, row.line)) {
      if (g.gold) {
        throw ParseError(source, row.line,
                         "anchor " + aid + " has more than one positive pair");
      }
      g.gold = g.candidates.size();
    }
  }

  std::vector<MatchTask> tasks;
  tasks.reserve(groups.size());
  for (auto &g : groups) {
    tasks.emplace_back(g.anchor_id, left.at(g.anchor_id), std::move(g.candidates),
                       g.gold);
  }
  return Dataset(source, std::move(tasks));
}

Dataset LoadTasks(const std::filesystem::path &path, TaskFormat format) {
  switch (format) {
    case TaskFormat::kTaskJsonl:
      return LoadTasksJsonl(path);
    case TaskFormat::kPairTable: {
      auto dir = path.parent_path();
      return LoadPairTable({path, dir / "left.csv", dir / "right.csv"});
    }
  }
  throw Error("unknown task format");
}

TaskFormat ParseTaskFormat(std::string_view name) {
  if (name == "task-jsonl") return TaskFormat::kTaskJsonl;
  if (name == "pair-table") return TaskFormat::kPairTable;
  throw ValidationError("unknown dataset format \"" + std::string(name) +
                        "\" (expected task-jsonl or pair-table)");
}

std::vector<FewShotExample> ParseFewShotPool(std::string_view text,
                                             std::string source) {
  std::vector<FewShotExample> pool;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!obj.is_object() || !obj.contains("left") || !obj.contains("right") ||
        !obj.contains("label") || !obj["label"].is_boolean()) {
      throw ParseError(source, line_no,
                       "expected {\"left\": {...}, \"right\": {...}, \"label\": bool}");
    }
    std::string base = "fewshot:" + std::to_string(line_no);
    pool.push_back({RecordFromJson(obj["left"], base + ":left", source, line_no),
                    RecordFromJson(obj["right"], base + ":right", source, line_no),
                    obj["label"].get<bool>()});
  }
  return pool;
}

std::vector<FewShotExample> LoadFewShotPool(const std::filesystem::path &path) {
  return ParseFewShotPool(ReadFile(path), path.string());
}

std::string WriteFewShotPool(std::span<const FewShotExample> pool) {
  std::string out;
  for (const auto &ex : pool) {
    ordered_json obj = ordered_json::object();
    obj["left"] = RecordToJson(ex.left);
    obj["right"] = RecordToJson(ex.right);
    obj["label"] = ex.label;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

double TokenJaccard(std::string_view a, std::string_view b) {
  auto ta = Tokens(a);
  auto tb = Tokens(b);
  std::set<std::string> sa(ta.begin(), ta.end());
  std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto &t : sa) common += sb.count(t);
  std::size_t uni = sa.size() + sb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::vector<FewShotExample> RetrieveFewShot(std::span<const FewShotExample> pool,
                                            const MatchTask &target,
                                            std::size_t n_pos, std::size_t n_neg,
                                            const RecordFormat &format) {
  std::size_t have_pos = 0;
  for (const auto &ex : pool) have_pos += ex.label ? 1 : 0;
  std::size_t have_neg = pool.size() - have_pos;
  if (have_pos < n_pos) {
    throw ValidationError("few-shot pool has " + std::to_string(have_pos) +
                          " positives, " + std::to_string(n_pos) + " requested");
  }
  if (have_neg < n_neg) {
    throw ValidationError("few-shot pool has " + std::to_string(have_neg) +
                          " negatives, " + std::to_string(n_neg) + " requested");
  }
  if (n_pos == 0 && n_neg == 0) return {};

  const std::string anchor = SerializeRecord(target.anchor(), format);
  std::vector<double> sim(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    sim[i] = TokenJaccard(anchor, SerializeRecord(pool[i].left, format));
  }
  auto top = [&](bool label, std::size_t count) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].label == label) idx.push_back(i);
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
    idx.resize(count);
    return idx;
  };
  std::vector<FewShotExample> out;
  for (std::size_t i : top(true, n_pos)) out.push_back(pool[i]);
  for (std::size_t i : top(false, n_neg)) out.push_back(pool[i]);
  return out;
}

}  // namespace comem
