// Copyright 2026 The IPRG Authors
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

#include "iprg/jsonl.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "iprg/errors.hpp"

namespace iprg {

void read_jsonl(std::istream& in, const std::string& source,
                const RecordVisitor& visit) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(source, number, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) {
      throw ParseError(source, number, "record is not a JSON object");
    }
    visit(record, number);
  }
}

void read_jsonl_file(const std::filesystem::path& path,
                     const RecordVisitor& visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  read_jsonl(in, path.string(), visit);
}

void write_jsonl(std::ostream& out, const Json& record) {
  out << record.dump(-1, ' ', true, Json::error_handler_t::replace) << '\n';
}

std::string require_string(const Json& record, const char* field,
                           const std::string& source, std::size_t line) {
  auto it = record.find(field);
  if (it == record.end()) {
    throw ParseError(source, line, std::string("missing field \"") + field + "\"");
  }
  if (!it->is_string()) {
    throw ParseError(source, line, std::string("field \"") + field + "\" is not a string");
  }
  return it->get<std::string>();
}

std::optional<std::vector<std::string>> optional_string_list(
    const Json& record, const char* field, const std::string& source,
    std::size_t line) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_array()) {
    throw ParseError(source, line, std::string("field \"") + field + "\" is not a list");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ParseError(source, line, std::string("field \"") + field + "\" holds a non-string");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace iprg
