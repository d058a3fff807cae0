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

#include <doctest.h>

#include <atomic>
#include <sstream>
#include <thread>

#include "groundworld/protocol.hpp"

using namespace groundworld;
using namespace groundworld::protocol;

namespace {

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

std::string error_of(const Json& j) { return j.at("ok") == false ? j.at("error").get<std::string>() : ""; }

// Runs serve_tcp on an ephemeral port for the lifetime of the object.
struct Server {
  std::atomic<bool> stop{false};
  std::atomic<int> port{0};
  std::thread thread;

  Server() {
    thread = std::thread([this] { serve_tcp("127.0.0.1", 0, [this](int p) { port = p; }, stop); });
    while (port == 0) std::this_thread::yield();
  }
  ~Server() {
    stop = true;
    thread.join();
  }
};

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("base64 test vectors") {
    CHECK(base64_encode(bytes("")) == "");
    CHECK(base64_encode(bytes("f")) == "Zg==");
    CHECK(base64_encode(bytes("fo")) == "Zm8=");
    CHECK(base64_encode(bytes("foo")) == "Zm9v");
    CHECK(base64_encode(bytes("foob")) == "Zm9vYg==");
    CHECK(base64_encode(bytes("fooba")) == "Zm9vYmE=");
    CHECK(base64_encode(bytes("foobar")) == "Zm9vYmFy");
    CHECK(base64_decode("Zm9vYmE=") == bytes("fooba"));
    std::vector<std::uint8_t> all(256);
    for (int i = 0; i < 256; ++i) all[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    CHECK(base64_decode(base64_encode(all)) == all);
    CHECK_THROWS(base64_decode("Zm9"));
    CHECK_THROWS(base64_decode("Zm9*"));
  }

  TEST_CASE("spec describes the environments") {
    const Json s = Session().handle({{"cmd", "spec"}});
    CHECK(s["ok"] == true);
    CHECK(s["frame_shape"] == Json::array({3, 128, 128}));
    for (EnvKind k : kAllEnvKinds) CHECK(s["vocab_sizes"][std::string(name(k))]["flat"] == vocab_sizes(k).flat_size());
    CHECK(s["actions"].size() == 4);
    CHECK(s["rewards"]["target"] == 10.0);
    CHECK(s["t_max"] == 500);
  }

  TEST_CASE("reset returns a full observation") {
    Session session;
    const Json r = session.handle({{"cmd", "reset"}, {"env_kind", "p"}, {"split", "test"}, {"seed", 42}, {"id", 7}});
    REQUIRE(r["ok"] == true);
    CHECK(r["id"] == 7);
    CHECK(base64_decode(r["obs"]["frame_b64"].get<std::string>()).size() == 3u * 128 * 128);
    const auto& hot = r["obs"]["instruction_onehot"];
    CHECK(static_cast<int>(hot.size()) == vocab_sizes(EnvKind::P).flat_size());
    int ones = 0;
    for (const auto& v : hot) ones += v.get<int>();
    CHECK(ones == vocab_sizes(EnvKind::P).slot_count());
    CHECK(r["reward"] == 0.0);
    CHECK(r["done"] == false);
    CHECK(r["info"]["step"] == 0);
    CHECK(r["info"]["seed"] == 42);
    CHECK(membership(text_to_instruction(r["obs"]["instruction_text"].get<std::string>(), DistinctnessRule::DifferBoth)) ==
          SplitLabel::Test);
  }

  TEST_CASE("client mistakes become error responses") {
    Session s;
    CHECK(error_of(s.handle({{"cmd", "step"}, {"action", 0}})).rfind("no_episode", 0) == 0);
    CHECK(error_of(s.handle({{"cmd", "fly"}, {"id", "x"}})).rfind("unknown_cmd", 0) == 0);
    CHECK(s.handle({{"cmd", "fly"}, {"id", "x"}})["id"] == "x");
    CHECK(error_of(s.handle(Json::array())).rfind("bad_request", 0) == 0);
    CHECK(error_of(s.handle({{"cmd", "reset"}, {"env_kind", "q"}})).rfind("bad_request", 0) == 0);
    CHECK(error_of(s.handle({{"cmd", "reset"}, {"stage", 3}})).rfind("bad_request", 0) == 0);
    CHECK(error_of(s.handle({{"cmd", "reset"}, {"env", "p"}})) == "bad_request: unknown field 'env'");
    CHECK(error_of(s.handle({{"cmd", "reset"}, {"seed", -4}})).rfind("bad_request", 0) == 0);
    CHECK(Json::parse(s.handle_line("{not json"))["error"].get<std::string>().rfind("malformed_json", 0) == 0);

    REQUIRE(s.handle({{"cmd", "reset"}, {"seed", 1}})["ok"] == true);
    CHECK(error_of(s.handle({{"cmd", "step"}, {"action", 9}})).rfind("bad_action", 0) == 0);
    CHECK(error_of(s.handle({{"cmd", "step"}, {"action", "jump"}})).rfind("bad_action", 0) == 0);
    CHECK(error_of(s.handle({{"cmd", "step"}})).rfind("bad_action", 0) == 0);
    CHECK(s.handle({{"cmd", "step"}, {"action", "turn_left"}})["ok"] == true);

    Json last;
    do last = s.handle({{"cmd", "step"}, {"action", 2}});
    while (last["ok"] == true && last["done"] == false);
    CHECK(last["info"]["outcome"] == "timeout");
    CHECK(last["reward"] == -10.0);
    CHECK(error_of(s.handle({{"cmd", "step"}, {"action", 0}})) == "episode_done");
    CHECK(s.handle({{"cmd", "close"}})["ok"] == true);
    CHECK(error_of(s.handle({{"cmd", "spec"}})) == "session_closed");
  }

  TEST_CASE("stdio stream serves one session") {
    std::istringstream in("{\"cmd\":\"spec\",\"id\":1}\n\n{\"cmd\":\"close\"}\n{\"cmd\":\"spec\"}\n");
    std::ostringstream out;
    serve_stream(in, out);
    std::istringstream lines(out.str());
    std::vector<Json> replies;
    for (std::string l; std::getline(lines, l);) replies.push_back(Json::parse(l));
    REQUIRE(replies.size() == 2);
    CHECK(replies[0]["id"] == 1);
    CHECK(replies[1]["ok"] == true);
  }

  TEST_CASE("TCP responses equal in-process responses") {
    Server server;
    LineClient client("127.0.0.1", server.port);
    Session local;
    const Json reset = {{"cmd", "reset"}, {"env_kind", "dp"}, {"split", "train"}, {"stage", 4}, {"seed", 3}};
    const std::string wire_reset = client.request(std::string_view(reset.dump()));
    CHECK(wire_reset == local.handle(reset).dump());
    std::mt19937_64 rng(1);
    int steps = 0;
    for (int i = 0; i < 100; ++i) {
      const Json req = {{"cmd", "step"}, {"action", static_cast<int>(rng() % 4)}, {"id", i}};
      const std::string wire = client.request(std::string_view(req.dump()));
      const std::string here = local.handle(req).dump();
      CHECK_MESSAGE(wire == here, "step ", i, ": ", here.substr(0, 80));
      const Json j = Json::parse(wire);
      if (j["ok"] == true) {
        ++steps;
        CHECK(base64_decode(j["obs"]["frame_b64"].get<std::string>()).size() == 49152u);
      }
      if (j["ok"] == true && j["done"] == true) {
        CHECK(client.request(std::string_view(reset.dump())) == local.handle(reset).dump());
      }
    }
    CHECK(steps == 100);

    // Seed 7 over the wire against the environment itself.
    const Json r7 = client.request(Json{{"cmd", "reset"}, {"env_kind", "d"}, {"split", "test"}, {"seed", 7}});
    ResetRequest req7;
    req7.split = SplitFilter::Test;
    Env env(req7.env_config());
    const StepResult direct = env.reset(7);
    CHECK(base64_decode(r7["obs"]["frame_b64"].get<std::string>()) == direct.observation.frame.data);
    std::vector<int> hot;
    for (Eigen::Index i = 0; i < direct.observation.instruction.flat.size(); ++i)
      hot.push_back(direct.observation.instruction.flat[i] != 0.0f);
    CHECK(r7["obs"]["instruction_onehot"].get<std::vector<int>>() == hot);
    CHECK(r7["obs"]["instruction_text"] == direct.observation.text);

    // A second connection has its own session.
    LineClient other("127.0.0.1", server.port);
    CHECK(error_of(other.request(Json{{"cmd", "step"}, {"action", 0}})).rfind("no_episode", 0) == 0);
  }
}
