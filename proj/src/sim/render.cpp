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

#include "cuaeval/sim/render.hpp"

#include <algorithm>

namespace cuaeval::sim {

namespace {

constexpr std::uint8_t kInk = 0;
constexpr std::uint8_t kPaper = 1;
constexpr int kTitleHeight = 40;
constexpr int kPanelWidth = 360;

std::string fit(std::string_view text, int max_width, int scale) {
  int max_chars = std::max(0, max_width / (6 * scale));
  if (static_cast<int>(text.size()) <= max_chars) return std::string(text);
  if (max_chars <= 2) return std::string(text.substr(0, static_cast<std::size_t>(max_chars)));
  return std::string(text.substr(0, static_cast<std::size_t>(max_chars - 2))) + "..";
}

}  // namespace

Screenshot render(const SimDesktopState& state, const AppRegistry& apps) {
  const int w = state.screen.width;
  const int h = state.screen.height;
  Canvas canvas(w, h);
  const SimAppDef& def = apps.at(state.focused_app);

  canvas.fill_rect(0, 0, w, kTitleHeight, kInk);
  canvas.draw_text(16, 9, fit(def.display_name, w - 32, 3), 3, kPaper);

  for (const auto& r : def.regions) {
    canvas.outline_rect(r.x, r.y, r.w, r.h, kInk);
    if (r.h >= 14) canvas.draw_text(r.x + 4, r.y + 4, fit(r.name, r.w - 8, 1), 1, kInk);
  }

  const int panel_x = std::max(w / 2, w - kPanelWidth);
  const int panel_w = w - panel_x - 16;
  canvas.fill_rect(panel_x - 8, kTitleHeight, 1, h - kTitleHeight - kDockHeight, kInk);
  int y = kTitleHeight + 16;
  const auto& fields = state.app_states.at(state.focused_app);
  for (const auto& [name, value] : fields) {
    if (y + 14 > h - kDockHeight) break;
    canvas.draw_text(panel_x, y, fit(name + ": " + value, panel_w, 2), 2, kInk);
    y += 22;
  }

  canvas.fill_rect(0, h - kDockHeight, w, 1, kInk);
  for (const auto& slot : apps.dock_slots()) {
    bool focused = slot.app_id == state.focused_app;
    if (focused) {
      canvas.fill_rect(slot.x, slot.y, slot.w, slot.h, kInk);
    } else {
      canvas.outline_rect(slot.x, slot.y, slot.w, slot.h, kInk);
    }
    int scale = Canvas::text_width(slot.app_id, 2) <= slot.w - 8 ? 2 : 1;
    canvas.draw_text(slot.x + 4, slot.y + (slot.h - 7 * scale) / 2,
                     fit(slot.app_id, slot.w - 8, scale), scale, focused ? kPaper : kInk);
  }

  Screenshot shot;
  shot.png = canvas.encode_png();
  shot.state_sidecar = to_sidecar(state);
  shot.width = w;
  shot.height = h;
  return shot;
}

}  // namespace cuaeval::sim
