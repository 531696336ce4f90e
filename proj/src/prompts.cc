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

#include "comem/prompts.h"

#include <fstream>
#include <optional>
#include <sstream>

#include "comem/error.h"

namespace comem {

namespace {

constexpr std::string_view kMatchingTemplate =
    "Do the two entity records refer to the same real-world entity? "
    "Answer \"Yes\" if they do and \"No\" if they do not.\n"
    "\n"
    "Record 1: {{ record_left }}\n"
    "Record 2: {{ record_right }}";

constexpr std::string_view kComparingTemplate =
    "Which of the following two records is more likely to refer to the same "
    "real-world entity as the given record? Answer with the corresponding "
    "record identifier \"Record A\" or \"Record B\".\n"
    "\n"
    "Given entity record: {{ anchor }}\n"
    "\n"
    "Record A: {{ candidate_left }}\n"
    "Record B: {{ candidate_right }}";

constexpr std::string_view kSelectingTemplate =
    "Select a record from the following candidates that refers to the same "
    "real-world entity as the given record. Answer with the corresponding "
    "record number surrounded by \"[]\" or \"[0]\" if there is none.\n"
    "\n"
    "Given entity record: {{ anchor }}\n"
    "\n"
    "Candidate records:{% for candidate in candidates %}\n"
    "[{{ loop.index }}] {{ candidate }}{% endfor %}";

// Selecting without the "none of the above" option.
constexpr std::string_view kSelectingForcedTemplate =
    "Select a record from the following candidates that refers to the same "
    "real-world entity as the given record. Answer with the corresponding "
    "record number surrounded by \"[]\".\n"
    "\n"
    "Given entity record: {{ anchor }}\n"
    "\n"
    "Candidate records:{% for candidate in candidates %}\n"
    "[{{ loop.index }}] {{ candidate }}{% endfor %}";

std::string_view Trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct LoopScope {
  std::string_view item_name;
  std::string_view item_value;
  std::size_t index = 0;
};

std::string Lookup(std::string_view name, const TemplateValues &values,
                   const std::optional<LoopScope> &loop) {
  if (loop) {
    if (name == loop->item_name) return std::string(loop->item_value);
    if (name == "loop.index") return std::to_string(loop->index);
  }
  auto it = values.scalars.find(name);
  if (it == values.scalars.end()) {
    throw ValidationError("template references unknown placeholder \"" +
                          std::string(name) + "\"");
  }
  return it->second;
}

// Substitutes {{ }} expressions in a loop-free span.
void Substitute(std::string_view body, const TemplateValues &values,
                const std::optional<LoopScope> &loop, std::string &out) {
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto open = body.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(body.substr(pos));
      return;
    }
    out.append(body.substr(pos, open - pos));
    auto close = body.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw ValidationError("template has an unterminated {{ expression");
    }
    out += Lookup(Trim(body.substr(open + 2, close - open - 2)), values, loop);
    pos = close + 2;
  }
}

}  // namespace

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kMatching:
      return "matching";
    case Strategy::kComparing:
      return "comparing";
    case Strategy::kSelecting:
      return "selecting";
  }
  return "?";
}

std::vector<std::string> LabelSet::Labels() const {
  switch (strategy) {
    case Strategy::kMatching:
      return {"Yes", "No"};
    case Strategy::kComparing:
      return {"A", "B"};
    case Strategy::kSelecting: {
      std::vector<std::string> out;
      for (std::size_t i = allow_none ? 0 : 1; i <= n; ++i) {
        out.push_back(std::to_string(i));
      }
      return out;
    }
  }
  return {};
}

PromptTemplates PromptTemplates::Defaults() {
  return {std::string(kMatchingTemplate), std::string(kComparingTemplate),
          std::string(kSelectingTemplate), std::string(kSelectingForcedTemplate)};
}

PromptTemplates PromptTemplates::FromDirectory(const std::filesystem::path &dir) {
  PromptTemplates t = Defaults();
  auto load = [&](const char *file, std::string &slot) {
    auto path = dir / file;
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    slot = buf.str();
    // Editors append a trailing newline; templates are compared byte-wise.
    if (!slot.empty() && slot.back() == '\n') slot.pop_back();
  };
  load("matching.txt", t.matching);
  load("comparing.txt", t.comparing);
  load("selecting.txt", t.selecting);
  load("selecting_forced.txt", t.selecting_forced);
  return t;
}

std::string RenderTemplate(std::string_view body, const TemplateValues &values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto tag = body.find("{%", pos);
    if (tag == std::string_view::npos) {
      Substitute(body.substr(pos), values, std::nullopt, out);
      break;
    }
    Substitute(body.substr(pos, tag - pos), values, std::nullopt, out);
    auto tag_end = body.find("%}", tag + 2);
    if (tag_end == std::string_view::npos) {
      throw ValidationError("template has an unterminated {% tag");
    }
    // Expect: for <item> in <list>
    std::istringstream words{std::string(Trim(body.substr(tag + 2, tag_end - tag - 2)))};
    std::string kw, item, in_kw, list;
    words >> kw >> item >> in_kw >> list;
    if (kw != "for" || in_kw != "in" || list.empty()) {
      throw ValidationError("unsupported template tag; only for-loops are allowed");
    }
    auto loop_body_begin = tag_end + 2;
    auto endfor = body.find("{% endfor %}", loop_body_begin);
    if (endfor == std::string_view::npos) {
      throw ValidationError("template for-loop lacks {% endfor %}");
    }
    auto it = values.lists.find(list);
    if (it == values.lists.end()) {
      throw ValidationError("template loops over unknown list \"" + list + "\"");
    }
    std::string_view loop_body = body.substr(loop_body_begin, endfor - loop_body_begin);
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      Substitute(loop_body, values, LoopScope{item, it->second[i], i + 1}, out);
    }
    pos = endfor + std::string_view("{% endfor %}").size();
  }
  return out;
}

PromptRenderer::PromptRenderer(PromptTemplates templates, RecordFormat format)
    : templates_(std::move(templates)), format_(std::move(format)) {}

RenderedPrompt PromptRenderer::Matching(
    const EntityRecord &left, const EntityRecord &right,
    std::span<const FewShotExample> fewshot) const {
  auto one = [&](const EntityRecord &l, const EntityRecord &r) {
    TemplateValues v;
    v.scalars["record_left"] = SerializeRecord(l, format_);
    v.scalars["record_right"] = SerializeRecord(r, format_);
    return RenderTemplate(templates_.matching, v);
  };
  RenderedPrompt p;
  p.strategy = Strategy::kMatching;
  for (const auto &ex : fewshot) {
    p.text += one(ex.left, ex.right);
    p.text += ex.label ? "\nYes\n\n" : "\nNo\n\n";
  }
  p.text += one(left, right);
  p.record_count = 2 + 2 * fewshot.size();
  p.expected_labels = {Strategy::kMatching, 0, true};
  return p;
}

RenderedPrompt PromptRenderer::Comparing(const EntityRecord &anchor,
                                         const EntityRecord &cand_left,
                                         const EntityRecord &cand_right) const {
  TemplateValues v;
  v.scalars["anchor"] = SerializeRecord(anchor, format_);
  v.scalars["candidate_left"] = SerializeRecord(cand_left, format_);
  v.scalars["candidate_right"] = SerializeRecord(cand_right, format_);
  RenderedPrompt p;
  p.strategy = Strategy::kComparing;
  p.text = RenderTemplate(templates_.comparing, v);
  p.record_count = 3;
  p.expected_labels = {Strategy::kComparing, 0, true};
  return p;
}

RenderedPrompt PromptRenderer::Selecting(const EntityRecord &anchor,
                                         std::span<const EntityRecord> candidates,
                                         bool allow_none) const {
  if (candidates.empty()) {
    throw ValidationError("selecting prompt needs at least one candidate");
  }
  TemplateValues v;
  v.scalars["anchor"] = SerializeRecord(anchor, format_);
  auto &list = v.lists["candidates"];
  for (const auto &c : candidates) list.push_back(SerializeRecord(c, format_));
  RenderedPrompt p;
  p.strategy = Strategy::kSelecting;
  p.text = RenderTemplate(allow_none ? templates_.selecting
                                     : templates_.selecting_forced,
                          v);
  p.record_count = candidates.size() + 1;
  p.expected_labels = {Strategy::kSelecting, candidates.size(), allow_none};
  return p;
}

}  // namespace comem
