// Copyright 2026 The cuaeval Authors
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

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>

#include "cuaeval/error.hpp"
#include "cuaeval/sim/render.hpp"

namespace cuaeval::sim {

namespace {

constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
constexpr int kZlibLevel = 9;

void put_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

void put_chunk(Bytes& out, const char type[4], const Bytes& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

[[noreturn]] void bad_png(const std::string& why) {
  throw Error(ErrorCode::kParse, "not a decodable PNG: " + why);
}

int channels_for(int color_type) {
  switch (color_type) {
    case 0: return 1;
    case 2: return 3;
    case 3: return 1;
    case 4: return 2;
    case 6: return 4;
    default: return 0;
  }
}

}  // namespace

Canvas::Canvas(int width, int height)
    : width_(width),
      height_(height),
      pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 1) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "canvas dimensions must be positive");
  }
}

void Canvas::set(int x, int y, std::uint8_t v) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  pixels_[index(x, y)] = v ? 1 : 0;
}

void Canvas::fill_rect(int x, int y, int w, int h, std::uint8_t v) {
  int x0 = std::max(x, 0), y0 = std::max(y, 0);
  int x1 = std::min(x + w, width_), y1 = std::min(y + h, height_);
  for (int yy = y0; yy < y1; ++yy) {
    for (int xx = x0; xx < x1; ++xx) pixels_[index(xx, yy)] = v ? 1 : 0;
  }
}

void Canvas::outline_rect(int x, int y, int w, int h, std::uint8_t v) {
  fill_rect(x, y, w, 1, v);
  fill_rect(x, y + h - 1, w, 1, v);
  fill_rect(x, y, 1, h, v);
  fill_rect(x + w - 1, y, 1, h, v);
}

int Canvas::text_width(std::string_view text, int scale) {
  return static_cast<int>(text.size()) * 6 * scale;
}

int Canvas::draw_text(int x, int y, std::string_view text, int scale, std::uint8_t v) {
  for (char c : text) {
    const std::uint8_t* g = glyph(c);
    for (int col = 0; col < 5; ++col) {
      for (int row = 0; row < 7; ++row) {
        if (g[col] & (1u << row)) fill_rect(x + col * scale, y + row * scale, scale, scale, v);
      }
    }
    x += 6 * scale;
  }
  return x;
}

Bytes Canvas::encode_png() const {
  const std::size_t row_bytes = (static_cast<std::size_t>(width_) + 7) / 8;
  Bytes raw;
  raw.reserve((row_bytes + 1) * static_cast<std::size_t>(height_));
  for (int y = 0; y < height_; ++y) {
    raw.push_back(0);  // filter: none
    std::size_t row_start = raw.size();
    raw.resize(row_start + row_bytes, 0);
    for (int x = 0; x < width_; ++x) {
      if (pixels_[index(x, y)]) {
        raw[row_start + static_cast<std::size_t>(x) / 8] |=
            static_cast<std::uint8_t>(0x80u >> (x % 8));
      }
    }
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  Bytes packed(bound);
  if (compress2(packed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                kZlibLevel) != Z_OK) {
    throw Error(ErrorCode::kIo, "zlib compression failed");
  }
  packed.resize(bound);

  Bytes out(kSignature.begin(), kSignature.end());
  Bytes ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width_));
  put_u32(ihdr, static_cast<std::uint32_t>(height_));
  ihdr.insert(ihdr.end(), {1, 0, 0, 0, 0});  // bit depth 1, grayscale
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", {});
  return out;
}

PngInfo inspect_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSignature.size() ||
      !std::equal(kSignature.begin(), kSignature.end(), bytes.begin())) {
    bad_png("bad signature");
  }
  PngInfo info;
  bool have_ihdr = false, have_iend = false;
  int interlace = 0;
  Bytes idat;
  std::size_t pos = kSignature.size();
  while (pos < bytes.size()) {
    if (have_iend) bad_png("data after IEND");
    if (bytes.size() - pos < 12) bad_png("truncated chunk header");
    std::uint32_t len = get_u32(&bytes[pos]);
    if (len > bytes.size() - pos - 12) bad_png("chunk length exceeds file");
    const std::uint8_t* type = &bytes[pos + 4];
    const std::uint8_t* data = &bytes[pos + 8];
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, type, len + 4);
    if (static_cast<std::uint32_t>(crc) != get_u32(data + len)) bad_png("chunk CRC mismatch");
    std::string name(reinterpret_cast<const char*>(type), 4);
    if (!have_ihdr && name != "IHDR") bad_png("first chunk is not IHDR");
    if (name == "IHDR") {
      if (have_ihdr || len != 13) bad_png("malformed IHDR");
      have_ihdr = true;
      info.width = static_cast<int>(get_u32(data));
      info.height = static_cast<int>(get_u32(data + 4));
      info.bit_depth = data[8];
      info.color_type = data[9];
      interlace = data[12];
      if (info.width <= 0 || info.height <= 0 || channels_for(info.color_type) == 0) {
        bad_png("unsupported IHDR values");
      }
    } else if (name == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (name == "IEND") {
      have_iend = true;
    }
    pos += 12 + len;
  }
  if (!have_iend) bad_png("missing IEND");
  if (idat.empty()) bad_png("missing IDAT");

  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) bad_png("zlib init failed");
  zs.next_in = idat.data();
  zs.avail_in = static_cast<uInt>(idat.size());
  std::array<std::uint8_t, 65536> buf;
  std::size_t total = 0;
  int rc = Z_OK;
  while (rc == Z_OK) {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    total += buf.size() - zs.avail_out;
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
  }
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) bad_png("corrupt image data");
  if (interlace == 0) {
    std::size_t bits = static_cast<std::size_t>(info.width) *
                       static_cast<std::size_t>(channels_for(info.color_type)) *
                       static_cast<std::size_t>(info.bit_depth);
    std::size_t expected = static_cast<std::size_t>(info.height) * ((bits + 7) / 8 + 1);
    if (total != expected) bad_png("image data size does not match dimensions");
  }
  return info;
}

}  // namespace cuaeval::sim
