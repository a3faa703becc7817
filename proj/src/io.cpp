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
#include "linklab/io.hpp"

#include <lzma.h>
#include <zlib.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "linklab/error.hpp"

namespace linklab::io {

namespace {

std::string read_plain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(buf).str();
}

std::string decompress_xz(const std::string& raw, const std::filesystem::path& path) {
  lzma_stream strm = LZMA_STREAM_INIT;
  if (lzma_stream_decoder(&strm, UINT64_MAX, LZMA_CONCATENATED) != LZMA_OK) {
    throw IoError("lzma init failed");
  }
  std::unique_ptr<lzma_stream, void (*)(lzma_stream*)> guard(&strm, lzma_end);
  strm.next_in = reinterpret_cast<const uint8_t*>(raw.data());
  strm.avail_in = raw.size();
  std::string out;
  std::array<uint8_t, 1 << 16> chunk{};
  for (;;) {
    strm.next_out = chunk.data();
    strm.avail_out = chunk.size();
    const lzma_ret ret = lzma_code(&strm, LZMA_FINISH);
    out.append(reinterpret_cast<const char*>(chunk.data()), chunk.size() - strm.avail_out);
    if (ret == LZMA_STREAM_END) break;
    if (ret != LZMA_OK) throw IoError("corrupt xz stream: " + path.string());
  }
  return out;
}

}  // namespace

std::string read_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw IoError("cannot open " + path.string());
  std::unique_ptr<gzFile_s, int (*)(gzFile)> guard(f, gzclose);
  std::string out;
  std::array<char, 1 << 16> chunk{};
  for (;;) {
    const int n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) throw IoError("corrupt gzip stream: " + path.string());
    // zlib passes non-gzip input through unchanged; refuse it instead.
    if (n > 0 && gzdirect(f) == 1) throw IoError("not a gzip stream: " + path.string());
    if (n == 0) break;
    out.append(chunk.data(), static_cast<std::size_t>(n));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  const auto ext = path.extension();
  if (ext == ".gz") return read_gzip(path);
  if (ext == ".xz") return decompress_xz(read_plain(path), path);
  return read_plain(path);
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_gzip(const std::filesystem::path& path, std::string_view data) {
  // gzopen writes a fixed header (no mtime), so equal data gives equal bytes.
  gzFile f = gzopen(path.c_str(), "wb6");
  if (f == nullptr) throw IoError("cannot write " + path.string());
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = static_cast<unsigned>(std::min<std::size_t>(data.size() - off, 1 << 20));
    if (gzwrite(f, data.data() + off, n) != static_cast<int>(n)) {
      gzclose(f);
      throw IoError("gzip write failed: " + path.string());
    }
    off += n;
  }
  if (gzclose(f) != Z_OK) throw IoError("gzip close failed: " + path.string());
}

}  // namespace linklab::io
