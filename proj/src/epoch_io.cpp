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
#include <bit>
#include <cstring>

#include "linklab/error.hpp"
#include "linklab/io.hpp"
#include "linklab/trainer.hpp"

namespace linklab {

static_assert(std::endian::native == std::endian::little, "epoch files are little-endian");

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_block(std::string& out, const TokenBlock& block) {
  out.append(reinterpret_cast<const char*>(block.data()),
             static_cast<std::size_t>(block.size()) * sizeof(TokenId));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  std::uint32_t u32() {
    need(sizeof(std::uint32_t));
    std::uint32_t v;
    std::memcpy(&v, data_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }

  void block(TokenBlock& out, Eigen::Index rows, Eigen::Index cols) {
    const auto bytes = static_cast<std::size_t>(rows * cols) * sizeof(TokenId);
    need(bytes);
    out.resize(rows, cols);
    std::memcpy(out.data(), data_.data() + pos_, bytes);
    pos_ += bytes;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (out.data()[i] < 0) {
        throw FormatError("epoch file holds a negative token id");
      }
    }
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError("epoch file is truncated");
  }

  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_epoch(const std::filesystem::path& path, const std::vector<TrainingBatch>& batches,
                std::size_t b, std::size_t neg, std::size_t window) {
  const std::size_t cols = b * (1 + neg);
  std::string data;
  data.reserve(16 + batches.size() * (b + cols) * (window + 1) * sizeof(TokenId));
  put_u32(data, static_cast<std::uint32_t>(b));
  put_u32(data, static_cast<std::uint32_t>(neg));
  put_u32(data, static_cast<std::uint32_t>(window));
  put_u32(data, static_cast<std::uint32_t>(batches.size()));
  for (const auto& batch : batches) {
    if (static_cast<std::size_t>(batch.mention_ids.rows()) != b ||
        static_cast<std::size_t>(batch.mention_ids.cols()) != window ||
        static_cast<std::size_t>(batch.entity_ids.rows()) != cols ||
        static_cast<std::size_t>(batch.entity_ids.cols()) != window || batch.gold_columns.size() != b) {
      throw ArgumentError("batch shape does not match the epoch header");
    }
    put_block(data, batch.mention_ids);
    put_block(data, batch.entity_ids);
    for (auto g : batch.gold_columns) put_u32(data, g);
  }
  io::write_gzip(path, data);
}

Epoch load_epoch(const std::filesystem::path& path) {
  std::string data;
  try {
    data = io::read_gzip(path);
  } catch (const IoError& e) {
    if (!std::filesystem::exists(path)) throw;
    throw FormatError(e.what());
  }
  Reader in(data);
  Epoch epoch;
  epoch.batch_size = in.u32();
  epoch.neg = in.u32();
  epoch.window = in.u32();
  const std::uint32_t n = in.u32();
  const std::size_t cols = epoch.batch_size * (1 + epoch.neg);
  if (epoch.batch_size == 0 || epoch.window == 0) throw FormatError("epoch header has zero sizes");
  for (std::uint32_t i = 0; i < n; ++i) {
    TrainingBatch batch;
    in.block(batch.mention_ids, static_cast<Eigen::Index>(epoch.batch_size),
             static_cast<Eigen::Index>(epoch.window));
    in.block(batch.entity_ids, static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(epoch.window));
    batch.gold_columns.resize(epoch.batch_size);
    for (auto& g : batch.gold_columns) {
      g = in.u32();
      if (g >= cols) throw FormatError("epoch gold column outside the entity block");
    }
    epoch.batches.push_back(std::move(batch));
  }
  if (!in.done()) throw FormatError("trailing bytes after the last batch");
  return epoch;
}

}  // namespace linklab
