// Copyright 2026 The predrc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "calib/cue_rule.hpp"
#include "calib/session.hpp"
#include "model/params.hpp"
#include "service/config.hpp"

namespace httplib {
class Server;
}

namespace predrc::service {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON document
};

// Session protocol behind the HTTP endpoints. handle() is the whole
// protocol and is usable without a socket; start() serves it over HTTP.
class SessionService {
 public:
  using Clock = std::function<double()>;  // seconds

  SessionService(const World& world, const model::ModelParams<float>& params,
                 calib::ThresholdSet thresholds, ServiceSettings settings, std::string log_dir,
                 std::string config_digest, Clock clock = {});
  ~SessionService();

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  // Binds and serves on a background thread; returns the bound port (port 0
  // picks a free one).
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

  std::size_t live_sessions();
  const std::string& model_digest() const { return model_digest_; }

 private:
  struct Entry {
    std::mutex mu;
    std::unique_ptr<calib::LiveSession> session;
    double threshold_target = 0.0;
    std::uint64_t seed = 0;
    double created_at = 0.0;
    double last_event_at = 0.0;
  };

  HttpResponse create(const std::string& body);
  HttpResponse on_session(const std::string& id, const std::string& action, const std::string& method,
                          const std::string& body);
  std::shared_ptr<Entry> find(const std::string& id);
  void write_log(const std::string& id, const Entry& entry);
  void install_routes();

  const World* world_;
  const model::ModelParams<float>* params_;
  calib::ThresholdSet thresholds_;
  ServiceSettings settings_;
  std::string log_dir_;
  std::string config_digest_;
  std::string model_digest_;
  Clock clock_;

  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  Rng id_rng_;
  std::uint64_t created_ = 0;

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

// Session log: the session in the dataset line format with its per-step cue
// decisions; the header seed is the session seed.
std::string session_log(const calib::LiveSession& session, std::uint64_t seed,
                        const std::string& config_digest);

}  // namespace predrc::service
