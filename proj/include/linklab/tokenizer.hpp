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
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace linklab {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kMentionMark = 1;

/// Hashed token id space: 0 and 1 are reserved, content ids live in [2, size).
class Vocabulary {
 public:
  static constexpr std::size_t kDefaultSize = 65536;

  explicit Vocabulary(std::size_t size = kDefaultSize);

  std::size_t size() const { return size_; }
  TokenId id(std::string_view token_utf8) const;

 private:
  std::size_t size_;
};

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

struct TokenizedDoc {
  std::vector<TokenId> ids;
  std::vector<CharSpan> word_spans;
};

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Splits on Unicode whitespace, then splits every maximal punctuation run
/// into its own token.
TokenizedDoc tokenize(std::string_view text, const Vocabulary& vocab);

/// [M] label [M] body..., truncated or PAD-padded to exactly `window` ids.
std::vector<TokenId> compose_description(std::string_view label, std::string_view body,
                                         std::size_t window, const Vocabulary& vocab);

struct MentionWindow {
  std::vector<TokenId> ids;
  /// The mention alone exceeded window - 2 tokens; the closing marker is absent.
  bool truncated = false;
};

/// Mention tokens wrapped in [M] markers, centered in `window` ids of
/// context. Throws ArgumentError when no token overlaps `span`.
MentionWindow extract_mention_window(const TokenizedDoc& doc, CharSpan span, std::size_t window);

}  // namespace linklab
