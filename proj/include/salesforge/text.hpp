//
// text.hpp
//
// Copyright 2026 The Salesforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers. ASCII-only case folding and whitespace handling.
namespace salesforge::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);
/// Lowercase plus collapsed whitespace; the form used for fuzzy comparisons.
std::string normalize(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);
/// Position of needle in haystack ignoring ASCII case, or npos.
std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from = 0);
bool contains_ci(std::string_view haystack, std::string_view needle);

std::vector<std::string_view> split_lines(std::string_view s);
std::string join(std::span<const std::string> parts, std::string_view sep);

std::size_t edit_distance(std::string_view a, std::string_view b);
/// 1 - edit_distance / max(len) over normalize()d inputs; 1.0 for two empty strings.
double normalized_similarity(std::string_view a, std::string_view b);

}  // namespace salesforge::text
