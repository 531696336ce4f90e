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

#ifndef COMEM_SRC_CSV_H_
#define COMEM_SRC_CSV_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace comem::internal {

struct CsvRow {
  std::size_t line = 0;  // 1-based line the row starts on
  std::vector<std::string> fields;
};

// RFC 4180 reader: comma separated, double-quote escaping, CRLF or LF line
// ends, quoted fields may span lines. Blank lines are skipped.
std::vector<CsvRow> ParseCsv(std::string_view text, const std::string &source);

// Quotes a field when it contains a comma, quote or line break.
std::string CsvEscape(std::string_view field);

}  // namespace comem::internal

#endif  // COMEM_SRC_CSV_H_
