// Copyright (c) 2026 The groundworld Authors. All Rights Reserved.
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

// Newline-delimited JSON session around one Env. Every request line gets
// exactly one response line. See docs/protocol.md for the schema.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "groundworld/env.hpp"

namespace groundworld::protocol {

using Json = nlohmann::ordered_json;

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws std::invalid_argument on characters outside the alphabet or bad
/// padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Settings carried by a "reset" request.
struct ResetRequest {
  EnvKind kind = EnvKind::D;
  SplitFilter split = SplitFilter::Train;
  int stage = 8;  ///< concept subset size: 2, 4 or 8
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  static ResetRequest from_json(const Json& j);
  EnvConfig env_config() const;
};

/// Observation payload: frame_b64, instruction_onehot, instruction_text.
Json observation_json(const Observation& obs);
Json step_json(const StepResult& r, const EpisodeState& s);
Json spec_json();
Json error_json(std::string_view message);

class Session {
 public:
  /// Handles one request. Never throws for client mistakes; they become
  /// {"ok": false, "error": ...}.
  Json handle(const Json& request);
  /// Parses a line and handles it. Malformed JSON gets an error response.
  std::string handle_line(std::string_view line);
  bool closed() const noexcept { return closed_; }

 private:
  Json dispatch(const Json& request);

  std::unique_ptr<Env> env_;
  std::optional<ResetRequest> config_;
  bool closed_ = false;
};

/// Serves one session over a pair of streams until "close" or EOF.
void serve_stream(std::istream& in, std::ostream& out);

/// Binds `host:port` (port 0 picks a free one), reports the bound port via
/// `on_listen`, and serves each connection on its own thread with its own
/// Session until `stop` becomes true. Throws std::runtime_error on socket
/// failures.
void serve_tcp(const std::string& host, int port, const std::function<void(int)>& on_listen,
               const std::atomic<bool>& stop);

/// Blocking line client over TCP, used by tests and tools.
class LineClient {
 public:
  LineClient(const std::string& host, int port);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  /// Sends one line and returns the response line.
  std::string request(std::string_view line);
  Json request(const Json& j) { return Json::parse(request(std::string_view(j.dump()))); }

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace groundworld::protocol
