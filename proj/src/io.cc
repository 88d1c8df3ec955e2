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

#include "filaudit/io.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace filaudit {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::vector<Vector> LoadSamplesCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open");
  }
  std::vector<Vector> samples;
  std::string line;
  int64_t line_no = 0;
  Eigen::Index width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = SplitCsvLine(line);
    Vector row(fields.size());
    for (size_t i = 0; i < fields.size(); ++i) {
      try {
        size_t consumed = 0;
        row[i] = std::stod(fields[i], &consumed);
        if (consumed != fields[i].size()) {
          throw std::invalid_argument("trailing characters");
        }
      } catch (const std::exception&) {
        throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                 ": bad number '" + fields[i] + "'");
      }
      if (!std::isfinite(row[i])) {
        throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                 ": non-finite entry");
      }
    }
    if (width < 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) +
                               ": expected " + std::to_string(width) +
                               " columns, got " + std::to_string(row.size()));
    }
    samples.push_back(std::move(row));
  }
  if (samples.empty()) {
    throw std::runtime_error(path + ": no samples");
  }
  return samples;
}

void WriteSamplesCsv(const std::string& path,
                     const std::vector<Vector>& samples) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out.precision(17);
  for (const Vector& row : samples) {
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open");
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void WriteLines(const std::string& path,
                const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  for (const std::string& line : lines) out << line << '\n';
}

nlohmann::json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open");
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const nlohmann::json& value) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << value.dump(2) << '\n';
}

}  // namespace filaudit
