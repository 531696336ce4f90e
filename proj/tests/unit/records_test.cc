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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <iterator>
#include <set>
#include <string>
#include <vector>

#include "comem/error.h"
#include "comem/hash.h"
#include "comem/records.h"
#include "comem/synthetic.h"
#include "test_util.h"

namespace comem {
namespace {

using testing::ReadText;
using testing::Rec;
using testing::TempDir;
using testing::WriteText;

TEST_CASE("serialize keeps attribute order and separators") {
  EntityRecord r("x", {{"Title", "Deep Learning"}, {"Year", "2015"}, {"Venue", ""}});
  CHECK(SerializeRecord(r) == "Title: Deep Learning; Year: 2015; Venue: ");
  CHECK(SerializeRecord(r, {" | ", "="}) == "Title=Deep Learning | Year=2015 | Venue=");
  CHECK(SerializeRecord(EntityRecord("e", {})) == "");
}

TEST_CASE("serialize is injective over distinct attribute lists") {
  // Values avoid the separators; under that restriction distinct records
  // must serialize differently.
  SplitMix64 rng(7);
  const std::vector<std::string> names = {"a", "b", "Title", "Year"};
  const std::vector<std::string> values = {"", "x", "y z", "2001", "x y"};
  std::map<std::string, std::vector<Attribute>> seen;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Attribute> attrs;
    std::set<std::string> used;
    std::size_t count = rng.Below(4);
    for (std::size_t i = 0; i < count; ++i) {
      const auto &n = names[rng.Below(names.size())];
      if (!used.insert(n).second) continue;
      attrs.push_back({n, values[rng.Below(values.size())]});
    }
    std::string s = SerializeRecord(EntityRecord("r", attrs));
    auto [it, fresh] = seen.emplace(s, attrs);
    if (!fresh) CHECK(it->second == attrs);
  }
}

TEST_CASE("duplicate attribute names are rejected") {
  CHECK_THROWS_AS(EntityRecord("x", {{"a", "1"}, {"a", "2"}}), ValidationError);
}

TEST_CASE("task validation") {
  CHECK_THROWS_AS(testing::MakeTask("t", 3, 4), ValidationError);
  CHECK_THROWS_AS(testing::MakeTask("t", 3, 0), ValidationError);
  auto t = testing::MakeTask("t", 3, 2);
  CHECK(t.gold_id() == "t_c2");
  CHECK(testing::MakeTask("u", 2).gold_id() == std::nullopt);
  CHECK_THROWS_AS(Dataset("d", {testing::MakeTask("t", 1), testing::MakeTask("t", 2)}),
                  ValidationError);
}

TEST_CASE("dataset metadata") {
  Dataset d("d", {testing::MakeTask("a", 3, 1), testing::MakeTask("b", 2)});
  CHECK(d.metadata().task_count == 2);
  CHECK(d.metadata().candidate_count == 5);
  CHECK(d.metadata().gold_count == 1);
  CHECK(d.metadata().schema == std::vector<std::string>{"Title", "Year"});
  CHECK(d.Find("b") != nullptr);
  CHECK(d.Find("zzz") == nullptr);
}

TEST_CASE("task jsonl parse") {
  const char *text =
      R"({"task_id":"t1","anchor":{"_id":"a1","Title":"foo bar","Year":2001},)"
      R"("candidates":[{"_id":"b1","Title":"foo"},{"Title":"baz"}],"gold":1})"
      "\n\n"
      R"({"task_id":"t2","anchor":{"_id":"a2","_source":"D1","Title":"q"},"candidates":[{"_id":"c"}]})"
      "\n";
  Dataset d = ParseTasksJsonl(text);
  REQUIRE(d.size() == 2);
  const auto &t1 = d.tasks()[0];
  CHECK(t1.anchor().id() == "a1");
  CHECK(*t1.anchor().Find("Year") == "2001");
  CHECK(t1.candidate(2).id() == "t1:2");
  CHECK(t1.gold() == 1u);
  CHECK(d.tasks()[1].anchor().source() == "D1");
  CHECK(d.tasks()[1].gold() == std::nullopt);
}

TEST_CASE("task jsonl errors carry line numbers") {
  auto line_of = [](const std::string &text) -> std::size_t {
    try {
      ParseTasksJsonl(text, "f.jsonl");
    } catch (const ParseError &e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("{\"task_id\":\"a\",\"anchor\":{},\"candidates\":[{}]}\n{oops") == 2);
  CHECK(line_of("\n\n{\"task_id\":\"a\",\"candidates\":[]}") == 3);
  CHECK(line_of("{\"task_id\":\"a\",\"anchor\":{},\"candidates\":[{}],\"gold\":2}") == 1);
  CHECK(line_of("{\"task_id\":\"a\",\"anchor\":{},\"candidates\":[{}],\"gold\":\"1\"}") == 1);
  CHECK(line_of("{\"task_id\":\"a\",\"anchor\":{},\"candidates\":[{}]}\n"
                "{\"task_id\":\"a\",\"anchor\":{},\"candidates\":[{}]}") == 2);
  CHECK(line_of("{\"task_id\":\"a\",\"anchor\":{},\"candidates\":[]}") == 1);
  CHECK(line_of("[1,2]") == 1);
  try {
    ParseTasksJsonl("x", "f.jsonl");
    FAIL("expected throw");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).rfind("f.jsonl:1:", 0) == 0);
  }
}

Dataset RandomDataset(std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<MatchTask> tasks;
  std::size_t count = 1 + rng.Below(6);
  for (std::size_t t = 0; t < count; ++t) {
    std::string tid = "t" + std::to_string(t);
    std::vector<EntityRecord> cands;
    std::size_t n = 1 + rng.Below(5);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Attribute> attrs = {{"Title", "w" + std::to_string(rng.Below(100)) + " \"q\""},
                                      {"Note", rng.Below(2) ? "" : "line\\break"}};
      cands.emplace_back(tid + "c" + std::to_string(i), attrs,
                         rng.Below(2) ? "D2" : "");
    }
    std::optional<std::size_t> gold;
    if (rng.Below(2)) gold = 1 + rng.Below(n);
    tasks.emplace_back(tid, Rec(tid + "a", "anchor " + std::to_string(t)), cands, gold);
  }
  return Dataset("rand", std::move(tasks));
}

TEST_CASE("task jsonl round trip") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Dataset d = RandomDataset(seed);
    std::string once = WriteTasksJsonl(d);
    Dataset back = ParseTasksJsonl(once, "rand");
    CHECK(back.tasks() == d.tasks());
    CHECK(WriteTasksJsonl(back) == once);
  }
}

TEST_CASE("task jsonl file round trip") {
  TempDir dir;
  Dataset d = MakeSyntheticDataset({20, 15, 5, 3});
  WriteText(dir / "tasks.jsonl", WriteTasksJsonl(d));
  Dataset back = LoadTasks(dir / "tasks.jsonl", TaskFormat::kTaskJsonl);
  CHECK(back.tasks() == d.tasks());
  CHECK_THROWS_AS(LoadTasksJsonl(dir / "missing.jsonl"), Error);
}

TEST_CASE("pair table load") {
  TempDir dir;
  WriteText(dir / "left.csv", "id,Title,Year\nl1,\"Foo, Bar\",2001\nl2,Baz,1999\n");
  WriteText(dir / "right.csv", "Title,id\nfoo bar,r1\n\"say \"\"hi\"\"\",r2\nq,r3\n");
  WriteText(dir / "pairs.csv",
            "anchor_id,candidate_id,label\nl1,r1,1\nl1,r2,0\nl2,r3,0\nl2,r1,false\n");
  Dataset d = LoadTasks(dir / "pairs.csv", TaskFormat::kPairTable);
  REQUIRE(d.size() == 2);
  const auto &t = d.tasks()[0];
  CHECK(t.task_id() == "l1");
  CHECK(*t.anchor().Find("Title") == "Foo, Bar");
  CHECK(t.anchor().source() == "D1");
  CHECK(t.gold() == 1u);
  CHECK(*t.candidate(2).Find("Title") == "say \"hi\"");
  CHECK(t.candidate(2).source() == "D2");
  CHECK(d.tasks()[1].gold() == std::nullopt);
  CHECK(d.tasks()[1].size() == 2);
}

TEST_CASE("pair table errors") {
  TempDir dir;
  WriteText(dir / "left.csv", "id,Title\nl1,a\n");
  WriteText(dir / "right.csv", "id,Title\nr1,b\nr2,c\n");
  PairTablePaths paths{dir / "pairs.csv", dir / "left.csv", dir / "right.csv"};
  auto line_of = [&](const std::string &pairs) -> std::size_t {
    WriteText(paths.pairs, pairs);
    try {
      LoadPairTable(paths);
    } catch (const ParseError &e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("anchor_id,candidate_id,label\nl1,r1,1\nl1,r2,1\n") == 3);
  CHECK(line_of("anchor_id,candidate_id,label\nl1,r9,1\n") == 2);
  CHECK(line_of("anchor_id,candidate_id,label\nlx,r1,1\n") == 2);
  CHECK(line_of("anchor_id,candidate_id,label\nl1,r1,maybe\n") == 2);
  CHECK(line_of("anchor_id,candidate_id,label\nl1,r1,1\nl1,r1,0\n") == 3);
  CHECK(line_of("anchor_id,candidate_id\nl1,r1\n") == 1);
  CHECK(line_of("anchor_id,candidate_id,label\nl1,r1\n") == 2);
}

TEST_CASE("task format names") {
  CHECK(ParseTaskFormat("task-jsonl") == TaskFormat::kTaskJsonl);
  CHECK(ParseTaskFormat("pair-table") == TaskFormat::kPairTable);
  CHECK_THROWS_AS(ParseTaskFormat("csv"), ValidationError);
}

TEST_CASE("few-shot pool round trip") {
  auto pool = MakeSyntheticFewShotPool(30, 4);
  auto back = ParseFewShotPool(WriteFewShotPool(pool));
  CHECK(back == pool);
  CHECK_THROWS_AS(ParseFewShotPool("{\"left\":{},\"right\":{},\"label\":1}"), ParseError);
}

// Independent Jaccard: sorted unique lowercase tokens from a stream.
double NaiveJaccard(const std::string &a, const std::string &b) {
  auto toks = [](std::string s) {
    for (auto &c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::istringstream in(s);
    std::vector<std::string> v{std::istream_iterator<std::string>(in), {}};
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  auto x = toks(a), y = toks(b);
  std::vector<std::string> inter, uni;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(inter));
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(uni));
  return uni.empty() ? 0.0 : double(inter.size()) / double(uni.size());
}

TEST_CASE("token jaccard") {
  CHECK(TokenJaccard("a b c", "A  b d") == doctest::Approx(0.5));
  CHECK(TokenJaccard("", "") == 0.0);
  CHECK(TokenJaccard("x x", "x") == 1.0);
}

TEST_CASE("few-shot retrieval agrees with exhaustive selection") {
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "eps", "Beta"};
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    SplitMix64 rng(seed);
    std::size_t size = 1 + rng.Below(100);
    std::vector<FewShotExample> pool;
    auto words = [&] {
      std::string s;
      for (std::size_t w = 0, n = 1 + rng.Below(4); w < n; ++w) {
        s += vocab[rng.Below(vocab.size())] + " ";
      }
      return s;
    };
    for (std::size_t i = 0; i < size; ++i) {
      pool.push_back({Rec("l" + std::to_string(i), words()), Rec("r", words()),
                      rng.Below(2) == 1});
    }
    MatchTask task("t", Rec("a", words()), {Rec("c", "x")});
    std::size_t pos = 0;
    for (const auto &e : pool) pos += e.label;
    std::size_t want_pos = pos ? rng.Below(std::min<std::size_t>(pos, 5) + 1) : 0;
    std::size_t want_neg =
        size - pos ? rng.Below(std::min<std::size_t>(size - pos, 5) + 1) : 0;

    // Exhaustive: repeatedly take the highest similarity, lowest index
    // among unused examples of the class.
    std::string anchor = SerializeRecord(task.anchor());
    std::vector<bool> used(size, false);
    std::vector<FewShotExample> expect;
    auto take = [&](bool label, std::size_t count) {
      for (std::size_t c = 0; c < count; ++c) {
        std::size_t best = size;
        double best_sim = -1;
        for (std::size_t i = 0; i < size; ++i) {
          if (used[i] || pool[i].label != label) continue;
          double s = NaiveJaccard(anchor, SerializeRecord(pool[i].left));
          if (s > best_sim) {
            best = i;
            best_sim = s;
          }
        }
        used[best] = true;
        expect.push_back(pool[best]);
      }
    };
    take(true, want_pos);
    take(false, want_neg);
    CHECK(RetrieveFewShot(pool, task, want_pos, want_neg) == expect);
  }
}

TEST_CASE("few-shot retrieval rejects a short pool") {
  std::vector<FewShotExample> pool = {{Rec("l", "a"), Rec("r", "a"), true}};
  auto task = testing::MakeTask("t", 1);
  CHECK(RetrieveFewShot(pool, task, 1, 0).size() == 1);
  CHECK(RetrieveFewShot(pool, task, 0, 0).empty());
  try {
    RetrieveFewShot(pool, task, 1, 1);
    FAIL("expected throw");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("negatives") != std::string::npos);
  }
  CHECK_THROWS_AS(RetrieveFewShot(pool, task, 2, 0), ValidationError);
}

TEST_CASE("synthetic dataset shape") {
  Dataset d = MakeSyntheticDataset({});
  CHECK(d.size() == 400);
  CHECK(d.metadata().gold_count == 300);
  std::set<std::size_t> positions;
  for (const auto &t : d.tasks()) {
    CHECK(t.size() == 10);
    if (t.gold()) positions.insert(*t.gold());
  }
  CHECK(positions.size() == 10);
  CHECK(WriteTasksJsonl(MakeSyntheticDataset({})) == WriteTasksJsonl(d));
}

}  // namespace
}  // namespace comem
