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

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cuaeval/action.hpp"
#include "cuaeval/sim/app_def.hpp"
#include "cuaeval/sim/state.hpp"

namespace cuaeval::sim {

inline constexpr int kRendererVersion = 1;

// 1-bit canvas. Pixels are 0 (ink) or 1 (paper).
class Canvas {
 public:
  Canvas(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }

  void set(int x, int y, std::uint8_t v);  // clipped
  void fill_rect(int x, int y, int w, int h, std::uint8_t v);
  void outline_rect(int x, int y, int w, int h, std::uint8_t v);
  /// 5x7 bitmap glyphs scaled by `scale`; returns the pen x after the text.
  int draw_text(int x, int y, std::string_view text, int scale, std::uint8_t v);

  static int text_width(std::string_view text, int scale);

  /// Grayscale, bit depth 1, no interlace, fixed zlib level.
  Bytes encode_png() const;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

/// Deterministic frame: focused app title, one `name: value` line per field,
/// region outlines with labels, and the dock. Sidecar is to_sidecar(state).
Screenshot render(const SimDesktopState& state, const AppRegistry& apps);

struct PngInfo {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

/// Checks the signature, chunk CRCs, IHDR and IEND. Throws kParse if the bytes
/// are not a well-formed PNG.
PngInfo inspect_png(std::span<const std::uint8_t> bytes);

/// 5x7 column-major glyph for printable ASCII; '?' for anything else.
const std::uint8_t* glyph(char c);

}  // namespace cuaeval::sim
