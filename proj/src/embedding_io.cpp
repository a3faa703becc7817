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
#include "linklab/embedding_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>

#include "linklab/io.hpp"

namespace linklab {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

namespace {

constexpr std::array<char, 8> kParamsMagic{'L', 'L', 'P', 'A', 'R', 'A', 'M', '1'};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

template <typename T>
T parse_number(std::string_view tok, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw FormatError(std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return value;
}

template <typename Fn>
void for_each_field(std::string_view s, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (pos >= s.size()) break;
    auto sp = s.find(' ', pos);
    if (sp == std::string_view::npos) sp = s.size();
    fn(s.substr(pos, sp - pos));
    pos = sp;
  }
}

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

}  // namespace

TokenBlock to_token_block(const std::vector<std::vector<TokenId>>& rows) {
  const Eigen::Index cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  TokenBlock block(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != cols) {
      throw ArgumentError("token rows have unequal lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) block(static_cast<Eigen::Index>(r), c) = rows[r][c];
  }
  return block;
}

std::string dump_embeddings(const EmbeddingMatrix<double>& rows, const std::vector<Qid>& qids) {
  if (static_cast<std::size_t>(rows.rows()) != qids.size()) {
    throw ArgumentError("embedding rows and qids differ in count");
  }
  std::string out = std::to_string(rows.rows()) + " " + std::to_string(rows.cols()) + "\n";
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    out += to_string(qids[static_cast<std::size_t>(r)]);
    out += '\t';
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (c > 0) out += ' ';
      append_double(out, rows(r, c));
    }
    out += '\n';
  }
  return out;
}

LabeledEmbeddings parse_embeddings(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw FormatError("embedding file has no header");
  std::vector<std::size_t> header;
  for_each_field(lines[0], [&](std::string_view f) {
    header.push_back(parse_number<std::size_t>(f, "header field"));
  });
  if (header.size() != 2) throw FormatError("embedding header must be 'n d'");
  const std::size_t n = header[0];
  const std::size_t d = header[1];
  if (lines.size() - 1 != n) {
    throw FormatError("embedding header promises " + std::to_string(n) + " rows, found " +
                      std::to_string(lines.size() - 1));
  }
  LabeledEmbeddings out;
  out.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  out.qids.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto line = lines[r + 1];
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError("embedding row " + std::to_string(r) + " lacks a tab");
    out.qids.push_back(parse_qid(line.substr(0, tab)));
    std::size_t c = 0;
    for_each_field(line.substr(tab + 1), [&](std::string_view f) {
      if (c >= d) throw FormatError("embedding row " + std::to_string(r) + " has more than " + std::to_string(d) + " values");
      out.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c++)) = parse_number<double>(f, "embedding value");
    });
    if (c != d) {
      throw FormatError("embedding row " + std::to_string(r) + " has " + std::to_string(c) +
                        " values, expected " + std::to_string(d));
    }
    const double norm = out.rows.row(static_cast<Eigen::Index>(r)).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw FormatError("embedding row " + std::to_string(r) + " cannot be normalized");
    }
    out.rows.row(static_cast<Eigen::Index>(r)) /= norm;
  }
  return out;
}

LabeledEmbeddings load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(io::read_file(path));
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix<double>& rows,
                     const std::vector<Qid>& qids) {
  io::write_file(path, dump_embeddings(rows, qids));
}

void save_params(const std::filesystem::path& path, const EncoderParams<double>& params) {
  std::string data(kParamsMagic.begin(), kParamsMagic.end());
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(params.vocab_size()),
                                 static_cast<std::uint64_t>(params.dim())};
  data.append(reinterpret_cast<const char*>(dims), sizeof dims);
  data.append(reinterpret_cast<const char*>(params.table.data()),
              static_cast<std::size_t>(params.table.size()) * sizeof(double));
  io::write_file(path, data);
}

EncoderParams<double> load_params(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  constexpr std::size_t header = kParamsMagic.size() + 2 * sizeof(std::uint64_t);
  if (data.size() < header || std::memcmp(data.data(), kParamsMagic.data(), kParamsMagic.size()) != 0) {
    throw FormatError("not a parameter checkpoint: " + path.string());
  }
  std::uint64_t dims[2];
  std::memcpy(dims, data.data() + kParamsMagic.size(), sizeof dims);
  if (data.size() != header + dims[0] * dims[1] * sizeof(double)) {
    throw FormatError("truncated parameter checkpoint: " + path.string());
  }
  EncoderParams<double> p;
  p.table.resize(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
  std::memcpy(p.table.data(), data.data() + header, dims[0] * dims[1] * sizeof(double));
  return p;
}

std::string dump_token_rows(const std::vector<Qid>& qids,
                            const std::vector<std::vector<TokenId>>& tokens) {
  if (qids.size() != tokens.size()) throw ArgumentError("token rows and qids differ in count");
  std::string out;
  for (std::size_t r = 0; r < qids.size(); ++r) {
    out += to_string(qids[r]);
    out += '\t';
    for (std::size_t i = 0; i < tokens[r].size(); ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(tokens[r][i]);
    }
    out += '\n';
  }
  return out;
}

void parse_token_rows(std::string_view text, std::vector<Qid>& qids,
                      std::vector<std::vector<TokenId>>& tokens) {
  qids.clear();
  tokens.clear();
  for (const auto line : split_lines(text)) {
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError("token row lacks a tab");
    qids.push_back(parse_qid(line.substr(0, tab)));
    auto& row = tokens.emplace_back();
    for_each_field(line.substr(tab + 1), [&](std::string_view f) {
      row.push_back(parse_number<TokenId>(f, "token id"));
    });
  }
}

}  // namespace linklab
