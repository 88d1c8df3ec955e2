//
// Copyright 2026 The FilAudit Authors
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

#ifndef FILAUDIT_IO_H_
#define FILAUDIT_IO_H_

#include <string>
#include <vector>

#include "json.hpp"

#include "filaudit/smooth_map.h"

namespace filaudit {

// Sample files are CSV with one row per sample, plain decimal, no header.
// Parse failures throw std::runtime_error with a line-level message; rows
// of inconsistent width or with non-finite entries are rejected.
std::vector<Vector> LoadSamplesCsv(const std::string& path);

void WriteSamplesCsv(const std::string& path,
                     const std::vector<Vector>& samples);

// Splits a CSV line on commas; no quoting, matching the formats this tool
// emits.
std::vector<std::string> SplitCsvLine(const std::string& line);

std::vector<std::string> ReadLines(const std::string& path);
void WriteLines(const std::string& path,
                const std::vector<std::string>& lines);

nlohmann::json LoadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const nlohmann::json& value);

}  // namespace filaudit

#endif  // FILAUDIT_IO_H_
