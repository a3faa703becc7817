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
#include "linklab/tokenizer.hpp"

#include <algorithm>
#include <string>

#include "linklab/error.hpp"
#include "linklab/unicode.hpp"

namespace linklab {

Vocabulary::Vocabulary(std::size_t size) : size_(size) {
  if (size < 3) throw ArgumentError("vocabulary needs at least one content id");
}

TokenId Vocabulary::id(std::string_view token_utf8) const {
  return static_cast<TokenId>(2 + fnv1a64(token_utf8) % (size_ - 2));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

TokenizedDoc tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenizedDoc doc;
  const std::u32string chars = unicode::decode(text);
  std::size_t i = 0;
  while (i < chars.size()) {
    if (unicode::is_whitespace(chars[i])) {
      ++i;
      continue;
    }
    const bool punct = unicode::is_punctuation(chars[i]);
    std::size_t j = i + 1;
    while (j < chars.size() && !unicode::is_whitespace(chars[j]) &&
           unicode::is_punctuation(chars[j]) == punct) {
      ++j;
    }
    const std::string token = unicode::encode(std::u32string_view(chars).substr(i, j - i));
    doc.ids.push_back(vocab.id(token));
    doc.word_spans.push_back({i, j});
    i = j;
  }
  return doc;
}

std::vector<TokenId> compose_description(std::string_view label, std::string_view body,
                                         std::size_t window, const Vocabulary& vocab) {
  if (window < 3) throw ArgumentError("description window must be >= 3");
  std::vector<TokenId> out;
  out.reserve(window);
  out.push_back(kMentionMark);
  const auto label_ids = tokenize(label, vocab).ids;
  const std::size_t label_fit = std::min(label_ids.size(), window - 2);
  out.insert(out.end(), label_ids.begin(), label_ids.begin() + static_cast<std::ptrdiff_t>(label_fit));
  out.push_back(kMentionMark);
  if (out.size() < window) {
    const auto body_ids = tokenize(body, vocab).ids;
    const std::size_t body_fit = std::min(body_ids.size(), window - out.size());
    out.insert(out.end(), body_ids.begin(), body_ids.begin() + static_cast<std::ptrdiff_t>(body_fit));
  }
  out.resize(window, kPad);
  return out;
}

MentionWindow extract_mention_window(const TokenizedDoc& doc, CharSpan span, std::size_t window) {
  if (window < 3) throw ArgumentError("mention window must be >= 3");
  const auto& spans = doc.word_spans;
  // First token ending after span.start, first token starting at/after span.end.
  const auto first = std::partition_point(spans.begin(), spans.end(),
                                          [&](const CharSpan& s) { return s.end <= span.start; });
  const auto last = std::partition_point(first, spans.end(),
                                         [&](const CharSpan& s) { return s.start < span.end; });
  if (first == last || span.start >= span.end) {
    throw ArgumentError("mention span [" + std::to_string(span.start) + ", " +
                        std::to_string(span.end) + ") covers no token");
  }
  const auto s = static_cast<std::size_t>(first - spans.begin());
  const auto e = static_cast<std::size_t>(last - spans.begin());
  const std::size_t n = doc.ids.size();
  const std::size_t slots = window - 2;
  const auto ids = [&](std::size_t from, std::size_t to) {
    return std::pair{doc.ids.begin() + static_cast<std::ptrdiff_t>(from),
                     doc.ids.begin() + static_cast<std::ptrdiff_t>(to)};
  };

  MentionWindow out;
  out.ids.reserve(window);
  if (e - s > slots) {
    out.truncated = true;
    out.ids.push_back(kMentionMark);
    auto [b, en] = ids(s, s + slots);
    out.ids.insert(out.ids.end(), b, en);
    out.ids.resize(window, kPad);
    return out;
  }

  const std::size_t budget = slots - (e - s);
  std::size_t left = budget / 2;
  std::size_t right = budget - left;
  if (left > s) {
    right += left - s;
    left = s;
  }
  if (right > n - e) {
    left = std::min(s, left + (right - (n - e)));
    right = n - e;
  }
  auto [lb, le] = ids(s - left, s);
  out.ids.insert(out.ids.end(), lb, le);
  out.ids.push_back(kMentionMark);
  auto [mb, me] = ids(s, e);
  out.ids.insert(out.ids.end(), mb, me);
  out.ids.push_back(kMentionMark);
  auto [rb, re] = ids(e, e + right);
  out.ids.insert(out.ids.end(), rb, re);
  out.ids.resize(window, kPad);
  return out;
}

}  // namespace linklab
