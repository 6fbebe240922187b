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

// Line-delimited UTF-8 JSON records, the on-disk format for every dataset,
// corpus, trace, and report.

#ifndef IPRG_JSONL_HPP_
#define IPRG_JSONL_HPP_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace iprg {

// Insertion-ordered so written records keep a stable, readable field order.
using Json = nlohmann::ordered_json;

using RecordVisitor = std::function<void(const Json& record, std::size_t line)>;

/// Blank lines are skipped; a line that is not a JSON object throws
/// ParseError naming `source` and the line.
void read_jsonl(std::istream& in, const std::string& source,
                const RecordVisitor& visit);
void read_jsonl_file(const std::filesystem::path& path,
                     const RecordVisitor& visit);

/// One compact record per line; non-ASCII text is written as \u escapes.
void write_jsonl(std::ostream& out, const Json& record);

std::string require_string(const Json& record, const char* field,
                           const std::string& source, std::size_t line);
std::optional<std::vector<std::string>> optional_string_list(
    const Json& record, const char* field, const std::string& source,
    std::size_t line);

}  // namespace iprg

#endif  // IPRG_JSONL_HPP_
