// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/bytes.hpp"

#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace lva {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path + "'");
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::Io, "read failed for '" + path + "'");
  return data;
}

void write_file_atomic(const std::string& path, std::span<const std::uint8_t> data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot create '" + tmp + "'");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw Error(ErrorCode::Io, "write failed for '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::Io, "cannot move output into place at '" + path + "': " + ec.message());
  }
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t pos = 0;
  while (pos < data.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(data.size() - pos, 1u << 30));
    crc = ::crc32(crc, data.data() + pos, n);
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace lva
