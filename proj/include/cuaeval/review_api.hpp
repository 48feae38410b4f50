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

// JSON API over a trajectory store for the review UI.
//
//   GET  /api/runs
//   GET  /api/runs/{run_id}/episodes
//   GET  /api/runs/{run_id}/disagreements?evaluator=...
//   GET  /api/episodes/{episode_id}
//   GET  /api/screenshots/{content_hash}
//   GET  /api/labels?trajectory=...
//   GET  /api/metrics/{run_id}[?truth=oracle|human|judge]
//   POST /api/labels   {"trajectory_id", "label", "annotator_id"}
//
// Errors are {"code", "message"} with a matching HTTP status.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cuaeval/corpus.hpp"
#include "cuaeval/error.hpp"
#include "cuaeval/trajectory_store.hpp"

namespace cuaeval {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

class ReviewApi {
 public:
  /// Labels default to `<store_root>/labels.jsonl`.
  explicit ReviewApi(std::filesystem::path store_root,
                     std::optional<std::filesystem::path> labels_path = std::nullopt);

  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query,
                     const std::string& body) const;

  const TrajectoryStore& store() const { return store_; }
  const std::filesystem::path& labels_path() const { return labels_.path(); }

 private:
  ApiResponse list_runs() const;
  ApiResponse run_episodes(const std::string& run_id) const;
  ApiResponse episode(const std::string& episode_id) const;
  ApiResponse screenshot(const std::string& hash) const;
  ApiResponse labels(const std::map<std::string, std::string>& query) const;
  ApiResponse submit_label(const std::string& body) const;
  ApiResponse metrics(const std::string& run_id,
                      const std::map<std::string, std::string>& query) const;
  ApiResponse disagreements(const std::string& run_id,
                            const std::map<std::string, std::string>& query) const;

  std::optional<std::filesystem::path> find_screenshot(const std::string& hash) const;
  void rebuild_screenshot_index() const;

  TrajectoryStore store_;
  mutable LabelLog labels_;
  mutable std::mutex index_mu_;
  mutable std::map<std::string, std::filesystem::path> screenshot_index_;
};

ApiResponse error_response(int status, const std::string& code, const std::string& message);
int http_status_for(ErrorCode code);

// HTTP front end for a ReviewApi.
class ReviewServer {
 public:
  ReviewServer(std::shared_ptr<const ReviewApi> api,
               std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~ReviewServer();

  /// Binds `host:port` (port 0 picks a free one). Throws kIo on failure.
  void bind(const std::string& host, int port);
  int port() const { return port_; }
  /// Serves on a background thread until stop().
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// Splits "host:port"; a bare port binds 127.0.0.1.
std::pair<std::string, int> parse_bind_address(const std::string& text);

}  // namespace cuaeval
