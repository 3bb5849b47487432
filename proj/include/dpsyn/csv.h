//
// Copyright 2026 The DPSyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPSYN_CSV_H_
#define DPSYN_CSV_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace dpsyn {

using CsvRow = std::vector<std::string>;

// Parses an RFC-4180 document (quoted fields, doubled quotes, CRLF or LF
// line endings, embedded newlines inside quotes). A leading UTF-8 BOM is
// dropped. Blank trailing lines are ignored.
absl::StatusOr<std::vector<CsvRow>> ParseCsv(std::string_view text);

// Serializes one record, quoting only fields that need it. Appends "\n".
void AppendCsvRow(const CsvRow& row, std::string& out);

}  // namespace dpsyn

#endif  // DPSYN_CSV_H_
