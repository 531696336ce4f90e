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

// Prompt templates for the three strategies and their rendering.
//
// Templates use a small Jinja subset: `{{ name }}` substitution and a single
// `{% for item in list %}...{% endfor %}` loop exposing `{{ loop.index }}`
// (1-based) and `{{ item }}`.

#ifndef COMEM_PROMPTS_H_
#define COMEM_PROMPTS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "comem/records.h"

namespace comem {

enum class Strategy { kMatching, kComparing, kSelecting };

std::string_view StrategyName(Strategy s);

// The answers a prompt admits. Matching: Yes/No. Comparing: A/B.
// Selecting: 1..n, plus 0 ("none of the above") when allow_none.
struct LabelSet {
  Strategy strategy = Strategy::kMatching;
  std::size_t n = 0;
  bool allow_none = true;

  // Canonical label strings: "Yes","No" / "A","B" / "0".."n".
  std::vector<std::string> Labels() const;

  bool operator==(const LabelSet &) const = default;
};

struct RenderedPrompt {
  Strategy strategy = Strategy::kMatching;
  std::string text;
  // Entity records embedded in `text`, few-shot examples included.
  std::size_t record_count = 0;
  LabelSet expected_labels;
};

// Template bodies, byte-identical to the published prompts by default.
struct PromptTemplates {
  std::string matching;
  std::string comparing;
  std::string selecting;
  // Used when the caller disallows the "[0]" answer.
  std::string selecting_forced;

  static PromptTemplates Defaults();
  // Overrides any of matching.txt, comparing.txt, selecting.txt and
  // selecting_forced.txt found in `dir`.
  static PromptTemplates FromDirectory(const std::filesystem::path &dir);
};

struct TemplateValues {
  std::map<std::string, std::string, std::less<>> scalars;
  std::map<std::string, std::vector<std::string>, std::less<>> lists;
};

// Renders a template. Throws ValidationError on an unknown placeholder or a
// malformed tag.
std::string RenderTemplate(std::string_view body, const TemplateValues &values);

class PromptRenderer {
 public:
  explicit PromptRenderer(PromptTemplates templates = PromptTemplates::Defaults(),
                          RecordFormat format = {});

  // Few-shot examples are rendered first, each as a full matching prompt
  // followed by a "Yes"/"No" line, blocks separated by a blank line.
  RenderedPrompt Matching(const EntityRecord &left, const EntityRecord &right,
                          std::span<const FewShotExample> fewshot = {}) const;
  // Record A is cand_left, Record B is cand_right.
  RenderedPrompt Comparing(const EntityRecord &anchor,
                           const EntityRecord &cand_left,
                           const EntityRecord &cand_right) const;
  // Throws ValidationError when candidates is empty.
  RenderedPrompt Selecting(const EntityRecord &anchor,
                           std::span<const EntityRecord> candidates,
                           bool allow_none = true) const;

  const RecordFormat &format() const { return format_; }

 private:
  PromptTemplates templates_;
  RecordFormat format_;
};

}  // namespace comem

#endif  // COMEM_PROMPTS_H_
