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

#ifndef IPRG_RESOURCES_HPP_
#define IPRG_RESOURCES_HPP_

#include <string_view>

#include "iprg/text.hpp"

namespace iprg {

// Identifies the bundled familiar-word list; echoed in evaluation reports
// because Dale-Chall scores shift with the list version.
inline constexpr std::string_view kDaleChallListVersion =
    "dale-chall-2941 (textstat 0.7.13 easy_words)";

const WordSet& default_stopwords();
const WordSet& dale_chall_words();
const WordSet& default_abbreviations();

}  // namespace iprg

#endif  // IPRG_RESOURCES_HPP_
