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

#include "comem/backend.h"

#include <cctype>

namespace comem {

namespace {

bool IsWordChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Alphanumeric runs in order, with their offsets.
struct Token {
  std::string_view text;
  std::size_t pos;
};

std::vector<Token> WordTokens(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!IsWordChar(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && IsWordChar(s[j])) ++j;
    out.push_back({s.substr(i, j - i), i});
    i = j;
  }
  return out;
}

bool AllDigits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Parses a digit string, rejecting values beyond `limit`.
std::optional<std::size_t> ToIndex(std::string_view digits, std::size_t limit) {
  std::size_t v = 0;
  for (char c : digits) {
    v = v * 10 + static_cast<std::size_t>(c - '0');
    if (v > limit) return std::nullopt;
  }
  return v;
}

ParsedLabel ParseMatching(const std::string &text) {
  for (const auto &t : WordTokens(text)) {
    if (t.text == "yes") return {YesNo::kYes, true};
    if (t.text == "no") return {YesNo::kNo, true};
  }
  return {YesNo::kNo, false};
}

ParsedLabel ParseComparing(const std::string &text) {
  std::size_t from = 0;
  while (true) {
    auto at = text.find("record ", from);
    if (at == std::string::npos) break;
    std::size_t letter = at + 7;
    bool left_ok = at == 0 || !IsWordChar(text[at - 1]);
    bool right_ok = letter + 1 >= text.size() || !IsWordChar(text[letter + 1]);
    if (left_ok && right_ok && letter < text.size()) {
      if (text[letter] == 'a') return {AorB::kA, true};
      if (text[letter] == 'b') return {AorB::kB, true};
    }
    from = at + 1;
  }
  for (const auto &t : WordTokens(text)) {
    if (t.text == "a") return {AorB::kA, true};
    if (t.text == "b") return {AorB::kB, true};
  }
  return {AorB::kA, false};
}

ParsedLabel ParseSelecting(const std::string &text, const LabelSet &expected) {
  const std::size_t lo = expected.allow_none ? 0 : 1;
  auto in_range = [&](std::string_view digits) -> std::optional<std::size_t> {
    auto v = ToIndex(digits, expected.n);
    if (v && *v >= lo) return v;
    return std::nullopt;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    std::size_t j = i + 1;
    while (j < text.size() && text[j] == ' ') ++j;
    std::size_t d = j;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view digits(text.data() + d, j - d);
    while (j < text.size() && text[j] == ' ') ++j;
    if (!digits.empty() && j < text.size() && text[j] == ']') {
      if (auto v = in_range(digits)) return {*v, true};
    }
  }
  for (const auto &t : WordTokens(text)) {
    if (!AllDigits(t.text)) continue;
    if (auto v = in_range(t.text)) return {*v, true};
  }
  return {std::size_t{0}, false};
}

}  // namespace

std::string ParsedLabel::Canonical() const {
  switch (label.index()) {
    case 0:
      return is_yes() ? "Yes" : "No";
    case 1:
      return choice() == AorB::kA ? "A" : "B";
    default:
      return std::to_string(index());
  }
}

ParsedLabel ParseLabel(std::string_view text, const LabelSet &expected) {
  const std::string lower = Lower(text);
  switch (expected.strategy) {
    case Strategy::kMatching:
      return ParseMatching(lower);
    case Strategy::kComparing:
      return ParseComparing(lower);
    case Strategy::kSelecting:
      return ParseSelecting(lower, expected);
  }
  return {YesNo::kNo, false};
}

CostLedger &CostLedger::operator+=(const CostLedger &other) {
  invocations += other.invocations;
  input_records += other.input_records;
  prompt_tokens += other.prompt_tokens;
  completion_tokens += other.completion_tokens;
  cost += other.cost;
  return *this;
}

CostLedger operator+(CostLedger a, const CostLedger &b) { return a += b; }

std::size_t EstimateTokens(std::string_view text) { return (text.size() + 3) / 4; }

CostLedger AccountUsage(const BackendResponse &response,
                        const RenderedPrompt &prompt, CostLedger ledger,
                        const PriceTable &prices) {
  Usage usage = response.usage.value_or(
      Usage{EstimateTokens(prompt.text), EstimateTokens(response.text)});
  ledger.invocations += 1;
  ledger.input_records += prompt.record_count;
  ledger.prompt_tokens += usage.prompt_tokens;
  ledger.completion_tokens += usage.completion_tokens;
  ledger.cost += static_cast<double>(usage.prompt_tokens) * prices.input_per_million / 1e6 +
                 static_cast<double>(usage.completion_tokens) * prices.output_per_million / 1e6;
  return ledger;
}

FunctionBackend::FunctionBackend(Fn fn, bool probabilities, std::string model)
    : fn_(std::move(fn)), probabilities_(probabilities), model_(std::move(model)) {}

BackendResponse FunctionBackend::Complete(const BackendRequest &request) {
  return fn_(request);
}

}  // namespace comem
