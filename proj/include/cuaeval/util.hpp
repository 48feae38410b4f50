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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cuaeval {

using Bytes = std::vector<std::uint8_t>;

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);

std::string read_file(const std::filesystem::path& path);
Bytes read_file_bytes(const std::filesystem::path& path);

/// Writes `data` to a sibling temp file, fsyncs it and renames it over `path`.
/// A reader sees either the old file or the new one, never a torn write.
/// `before_rename` runs after the temp file is durable; if it throws, the
/// temp file is removed and the previous contents of `path` stay in place.
void write_file_atomic(const std::filesystem::path& path, std::string_view data,
                       const std::function<void()>& before_rename = {});
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> data,
                       const std::function<void()>& before_rename = {});

/// Appends one record to `path` with a single write(2) on an O_APPEND fd.
void append_line(const std::filesystem::path& path, std::string_view line);

/// UTC timestamp, e.g. 2026-10-15T08:30:00.123Z.
std::string now_iso8601();

/// `[a-z0-9_-]+`, the shape of app and task ids.
bool is_slug(std::string_view text);

/// `[A-Za-z0-9_.-]+`, the shape of run, agent and evaluator ids (they end up
/// in paths and URLs).
bool is_safe_id(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);

}  // namespace cuaeval
