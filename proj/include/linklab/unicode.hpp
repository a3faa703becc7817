// Copyright 2026-present the linklab project
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
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace linklab::unicode {

/// Decodes UTF-8 into scalar values. Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);

/// Number of scalar values in a UTF-8 string.
std::size_t length(std::string_view utf8);

/// Slices [start, end) measured in scalar values. Throws ArgumentError when
/// the range falls outside the string.
std::string substr(std::string_view utf8, std::size_t start, std::size_t end);

/// Locale-independent case fold: simple lowercase mapping followed by simple
/// case folding, per scalar value. Maps U+0130 to 'i' and final sigma to sigma.
char32_t fold(char32_t cp);
std::string fold(std::string_view utf8);

bool is_whitespace(char32_t cp);
bool is_punctuation(char32_t cp);

}  // namespace linklab::unicode
