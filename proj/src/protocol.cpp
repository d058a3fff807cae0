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

#include "groundworld/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <istream>
#include <list>
#include <ostream>
#include <thread>

#include <fmt/format.h>

namespace groundworld::protocol {

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    for (int s = 18; s >= 0; s -= 6) out += kAlphabet[(v >> s) & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    const std::uint32_t v = (bytes[i] << 16) | (rest == 2 ? bytes[i + 1] << 8 : 0);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
  std::array<int, 256> lut;
  lut.fill(-1);
  for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kAlphabet[i])] = i;
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=' && last && j >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = lut[static_cast<unsigned char>(c)];
      if (d < 0 || pad > 0) throw std::invalid_argument("invalid base64 character");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Messages

ResetRequest ResetRequest::from_json(const Json& j) {
  ResetRequest r;
  for (const auto& [key, value] : j.items())
    if (key != "cmd" && key != "id" && key != "env_kind" && key != "split" && key != "stage" && key != "seed")
      throw std::invalid_argument(fmt::format("unknown field '{}'", key));
  auto text = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_string()) throw std::invalid_argument(fmt::format("'{}' must be a string", key));
    return j[key].get<std::string>();
  };
  if (auto v = text("env_kind")) {
    const auto k = parse_env_kind(*v);
    if (!k) throw std::invalid_argument(fmt::format("unknown env_kind '{}'", *v));
    r.kind = *k;
  }
  if (auto v = text("split")) {
    const auto f = parse_split_filter(*v);
    if (!f) throw std::invalid_argument(fmt::format("unknown split '{}'", *v));
    r.split = *f;
  }
  if (j.contains("stage")) {
    if (!j["stage"].is_number_integer()) throw std::invalid_argument("'stage' must be 2, 4 or 8");
    r.stage = j["stage"].get<int>();
    if (r.stage != 2 && r.stage != 4 && r.stage != 8) throw std::invalid_argument("'stage' must be 2, 4 or 8");
  }
  if (j.contains("seed")) {
    const Json& v = j["seed"];
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw std::invalid_argument("'seed' must be a non-negative integer");
    r.seed = j["seed"].get<std::uint64_t>();
  }
  return r;
}

EnvConfig ResetRequest::env_config() const {
  EnvConfig cfg;
  cfg.grammar.kind = kind;
  cfg.split = split;
  if (kind == EnvKind::D) cfg.grammar.determiners = determiner_subset(stage);
  if (kind == EnvKind::P) cfg.grammar.prepositions = preposition_subset(stage);
  return cfg;
}

Json observation_json(const Observation& obs) {
  Json o;
  o["frame_b64"] = base64_encode(obs.frame.data);
  Json hot = Json::array();
  for (Eigen::Index i = 0; i < obs.instruction.flat.size(); ++i) hot.push_back(obs.instruction.flat[i] != 0.0f ? 1 : 0);
  o["instruction_onehot"] = std::move(hot);
  o["instruction_text"] = obs.text;
  return o;
}

Json step_json(const StepResult& r, const EpisodeState& s) {
  Json j;
  j["ok"] = true;
  j["obs"] = observation_json(r.observation);
  j["reward"] = r.reward;
  j["done"] = r.done;
  j["info"] = {{"step", s.step},
               {"outcome", std::string(name(r.info.outcome))},
               {"hit_wall", r.info.hit_wall},
               {"option", r.info.option},
               {"total_reward", s.total_reward},
               {"seed", s.seed}};
  return j;
}

Json spec_json() {
  Json j;
  j["ok"] = true;
  Json sizes;
  for (EnvKind k : kAllEnvKinds) {
    const VocabLayout v = vocab_sizes(k);
    sizes[std::string(name(k))] = {{"flat", v.flat_size()}, {"slots", v.slot_dims}};
  }
  j["vocab_sizes"] = std::move(sizes);
  Json actions = Json::array();
  for (Action a : kAllActions) actions.push_back({{"id", static_cast<int>(a)}, {"name", std::string(name(a))}});
  j["actions"] = std::move(actions);
  j["frame_shape"] = {3, 128, 128};
  j["rewards"] = {{"target", reward::kTarget},
                  {"wrong_target", reward::kWrongTarget},
                  {"wall", reward::kWall},
                  {"timeout", reward::kTimeout}};
  j["t_max"] = EnvConfig{}.t_max;
  return j;
}

Json error_json(std::string_view message) {
  Json j;
  j["ok"] = false;
  j["error"] = std::string(message);
  return j;
}

// ---------------------------------------------------------------------------
// Session

Json Session::handle(const Json& req) {
  Json resp = dispatch(req);
  if (req.is_object() && req.contains("id")) resp["id"] = req["id"];
  return resp;
}

Json Session::dispatch(const Json& req) {
  if (closed_) return error_json("session_closed");
  if (!req.is_object() || !req.contains("cmd") || !req["cmd"].is_string())
    return error_json("bad_request: expected an object with a string 'cmd'");
  const std::string cmd = req["cmd"].get<std::string>();
  Json resp;
  try {
    if (cmd == "reset") {
      const ResetRequest r = ResetRequest::from_json(req);
      const bool same = config_ && config_->kind == r.kind && config_->split == r.split && config_->stage == r.stage;
      if (!same) env_ = std::make_unique<Env>(r.env_config());
      config_ = r;
      const StepResult result = env_->reset(r.seed);
      resp = step_json(result, env_->state());
    } else if (cmd == "step") {
      if (!env_ || !env_->has_episode()) return error_json("no_episode: send reset first");
      if (env_->state().terminated()) return error_json("episode_done");
      if (!req.contains("action")) return error_json("bad_action: missing 'action'");
      const Json& a = req["action"];
      std::optional<Action> action;
      if (a.is_number_integer()) {
        const auto v = a.get<std::int64_t>();
        if (v >= 0 && v < kActionCount) action = static_cast<Action>(v);
      } else if (a.is_string()) {
        action = parse_action(a.get<std::string>());
      }
      if (!action) return error_json(fmt::format("bad_action: {}", a.dump()));
      const StepResult result = env_->step(*action);
      resp = step_json(result, env_->state());
    } else if (cmd == "spec") {
      resp = spec_json();
    } else if (cmd == "close") {
      closed_ = true;
      resp = {{"ok", true}};
    } else {
      return error_json(fmt::format("unknown_cmd: {}", cmd));
    }
  } catch (const std::invalid_argument& e) {
    return error_json(fmt::format("bad_request: {}", e.what()));
  } catch (const std::exception& e) {
    return error_json(fmt::format("internal: {}", e.what()));
  }
  return resp;
}

std::string Session::handle_line(std::string_view line) {
  Json req;
  try {
    req = Json::parse(line);
  } catch (const Json::parse_error& e) {
    return error_json(fmt::format("malformed_json: {}", e.what())).dump();
  }
  return handle(req).dump();
}

void serve_stream(std::istream& in, std::ostream& out) {
  Session session;
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << session.handle_line(line) << '\n';
    out.flush();
  }
}

// ---------------------------------------------------------------------------
// TCP

namespace {

void send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(fmt::format("send failed: {}", std::strerror(errno)));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

// Reads until a newline; returns false on EOF before one.
bool read_line(int fd, std::string& buffer, std::string& line, const std::atomic<bool>* stop = nullptr) {
  for (;;) {
    if (const auto nl = buffer.find('\n'); nl != std::string::npos) {
      line.assign(buffer, 0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    if (stop) {
      pollfd p{fd, POLLIN, 0};
      const int r = ::poll(&p, 1, 200);
      if (r == 0) {
        if (stop->load()) return false;
        continue;
      }
      if (r < 0 && errno == EINTR) continue;
    }
    char chunk[65536];
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

void serve_connection(int fd, const std::atomic<bool>& stop) {
  Session session;
  std::string buffer, line;
  try {
    while (!session.closed() && read_line(fd, buffer, line, &stop)) {
      if (line.empty()) continue;
      send_all(fd, session.handle_line(line) + "\n");
    }
  } catch (const std::exception&) {
    // Peer went away mid-write; nothing else to clean up.
  }
  ::close(fd);
}

}  // namespace

void serve_tcp(const std::string& host, int port, const std::function<void(int)>& on_listen,
               const std::atomic<bool>& stop) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error(fmt::format("socket: {}", std::strerror(errno)));
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw std::runtime_error(fmt::format("bad IPv4 address '{}'", host));
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd, 16) < 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw std::runtime_error(fmt::format("cannot listen on {}:{}: {}", host, port, err));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listen) on_listen(ntohs(addr.sin_port));

  std::list<std::thread> workers;
  while (!stop.load()) {
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, 200);
    if (r <= 0) continue;
    const int client = ::accept(fd, nullptr, nullptr);
    if (client < 0) continue;
    workers.emplace_back(serve_connection, client, std::cref(stop));
  }
  ::close(fd);
  for (auto& t : workers) t.join();
}

LineClient::LineClient(const std::string& host, int port) {
  addrinfo hints{}, *res = nullptr;
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
    throw std::runtime_error(fmt::format("cannot resolve {}", host));
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const bool ok = fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) == 0;
  ::freeaddrinfo(res);
  if (!ok) {
    const std::string err = std::strerror(errno);
    if (fd_ >= 0) ::close(fd_);
    throw std::runtime_error(fmt::format("cannot connect to {}:{}: {}", host, port, err));
  }
}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::string LineClient::request(std::string_view line) {
  send_all(fd_, std::string(line) + "\n");
  std::string out;
  if (!read_line(fd_, buffer_, out)) throw std::runtime_error("connection closed by server");
  return out;
}

}  // namespace groundworld::protocol
