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

#include "service/http_service.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "httplib.h"
#include "json.hpp"
#include "model/checkpoint.hpp"

namespace predrc::service {
namespace {

using nlohmann::json;

HttpResponse reply(int status, const json& body) { return {status, body.dump()}; }

HttpResponse error_reply(const Error& e) {
  int status = 500;
  switch (e.code()) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
      status = 400;
      break;
    case ErrorCode::kNotFound:
      status = 404;
      break;
    case ErrorCode::kProtocol:
    case ErrorCode::kState:
      status = 409;
      break;
    default:
      break;
  }
  return reply(status, {{"error", e.what()}});
}

json parse_body(const std::string& body) {
  try {
    json j = body.empty() ? json::object() : json::parse(body);
    if (!j.is_object()) fail(ErrorCode::kParse, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error&) {
    fail(ErrorCode::kParse, "request body is not valid JSON");
  }
}

double steady_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

std::string session_log(const calib::LiveSession& session, std::uint64_t seed,
                        const std::string& config_digest) {
  data::RelianceDataset log;
  log.provenance.seed = seed;
  log.provenance.config_digest = config_digest;
  log.sessions.push_back(session.record());
  return data::to_jsonl(log);
}

SessionService::SessionService(const World& world, const model::ModelParams<float>& params,
                               calib::ThresholdSet thresholds, ServiceSettings settings,
                               std::string log_dir, std::string config_digest, Clock clock)
    : world_(&world),
      params_(&params),
      thresholds_(std::move(thresholds)),
      settings_(std::move(settings)),
      log_dir_(std::move(log_dir)),
      config_digest_(std::move(config_digest)),
      model_digest_(model::checkpoint_digest(params)),
      clock_(clock ? std::move(clock) : Clock(steady_seconds)),
      id_rng_(std::random_device{}() ^ (static_cast<std::uint64_t>(std::random_device{}()) << 32)) {
  require(!thresholds_.entries().empty(), "the service needs at least one threshold");
  require(params.config.x_dim == world.env.x_dim(), "model x_dim does not match the task features");
}

SessionService::~SessionService() { stop(); }

std::size_t SessionService::live_sessions() {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

HttpResponse SessionService::create(const std::string& body) {
  const json j = parse_body(body);
  if (!j.contains("threshold_target") || !j.at("threshold_target").is_number())
    fail(ErrorCode::kInvalidArgument, "threshold_target (number) is required");
  const double target = j.at("threshold_target").get<double>();
  double threshold = 0.0;
  try {
    threshold = thresholds_.threshold_for(target);
  } catch (const Error&) {
    fail(ErrorCode::kInvalidArgument, "threshold_target is not one of the configured targets");
  }
  auto entry = std::make_shared<Entry>();
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = hex64(id_rng_.next_u64()) + hex64(id_rng_.next_u64());
    entry->seed = id_rng_.next_u64();
    ++created_;
  }
  entry->session = std::make_unique<calib::LiveSession>(world_->env, world_->calib, params_,
                                                        calib::CuePolicy::pred_rc(threshold), id,
                                                        entry->seed);
  entry->threshold_target = target;
  entry->created_at = entry->last_event_at = clock_();
  {
    std::lock_guard lock(mu_);
    sessions_[id] = entry;
  }
  return reply(200, {{"session_id", id}});
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) {
  std::lock_guard lock(mu_);
  const double now = clock_();
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    // Entries being used by a request stay; they are checked again next time.
    if (now - it->second->last_event_at > settings_.session_ttl_seconds && it->second.use_count() == 1)
      it = sessions_.erase(it);
    else
      ++it;
  }
  auto it = sessions_.find(id);
  if (it == sessions_.end() || now - it->second->last_event_at > settings_.session_ttl_seconds)
    fail(ErrorCode::kNotFound, "unknown or expired session");
  return it->second;
}

void SessionService::write_log(const std::string& id, const Entry& entry) {
  if (log_dir_.empty()) return;
  std::filesystem::create_directories(log_dir_);
  std::ofstream out(std::filesystem::path(log_dir_) / (id + ".rcd.jsonl"), std::ios::binary);
  out << session_log(*entry.session, entry.seed, config_digest_);
  if (!out) fail(ErrorCode::kIo, "cannot write session log");
}

HttpResponse SessionService::on_session(const std::string& id, const std::string& action,
                                        const std::string& method, const std::string& body) {
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  calib::LiveSession& s = *entry->session;
  entry->last_event_at = clock_();

  if (action == "step" && method == "GET") {
    const calib::IssuedStep& step = s.request_step();
    const auto& cluster = world_->env.clusters()[step.task.cluster];
    return reply(200, {{"index", step.index},
                       {"total", data::kSessionLength},
                       {"render",
                        {{"text", step.task.y_star},
                         {"background", cluster.style.background},
                         {"distortion", cluster.style.distortion}}},
                       {"cue", step.cue ? json(*step.cue) : json(nullptr)}});
  }
  if (action == "decision" && method == "POST") {
    const json j = parse_body(body);
    if (!j.contains("agent") || !j.at("agent").is_string())
      fail(ErrorCode::kInvalidArgument, "agent must be \"AI\" or \"human\"");
    model::Agent agent;
    try {
      agent = model::parse_agent(j.at("agent").get<std::string>());
    } catch (const Error&) {
      fail(ErrorCode::kInvalidArgument, "agent must be \"AI\" or \"human\"");
    }
    const auto answer = s.decide(agent);
    if (answer) return reply(200, {{"ai_answer", *answer}, {"locked", true}});
    return reply(200, {{"ai_answer", nullptr}, {"locked", false}});
  }
  if (action == "submit" && method == "POST") {
    const json j = parse_body(body);
    std::optional<std::string> answer;
    if (j.contains("answer") && !j.at("answer").is_null()) {
      if (!j.at("answer").is_string()) fail(ErrorCode::kInvalidArgument, "answer must be a string");
      answer = j.at("answer").get<std::string>();
    }
    const auto result = s.submit(answer);
    json out{{"correct", result.correct}};
    if (result.next_index) {
      out["next_index"] = *result.next_index;
    } else {
      out["done"] = true;
      write_log(id, *entry);
    }
    return reply(200, out);
  }
  if (action == "summary" && method == "GET") {
    const auto sum = s.summary();
    return reply(200, {{"f1", sum.score.f1},
                       {"precision", sum.score.precision},
                       {"recall", sum.score.recall},
                       {"cues_shown", sum.cues_shown},
                       {"steps", sum.steps}});
  }
  if (action == "log" && method == "GET")
    return {200, session_log(s, entry->seed, config_digest_)};
  fail(ErrorCode::kNotFound, "no such endpoint");
}

HttpResponse SessionService::handle(const std::string& method, const std::string& path,
                                    const std::string& body) {
  try {
    if (path == "/api/health" && method == "GET")
      return reply(200, {{"status", "ok"}, {"model_digest", model_digest_}});
    if (path == "/api/sessions" && method == "POST") return create(body);
    constexpr std::string_view prefix = "/api/sessions/";
    if (path.starts_with(prefix)) {
      const std::string rest = path.substr(prefix.size());
      const auto slash = rest.find('/');
      if (slash != std::string::npos && slash > 0)
        return on_session(rest.substr(0, slash), rest.substr(slash + 1), method, body);
    }
    fail(ErrorCode::kNotFound, "no such endpoint");
  } catch (const Error& e) {
    return error_reply(e);
  } catch (const std::exception& e) {
    return reply(500, {{"error", e.what()}});
  }
}

void SessionService::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    const bool is_log = req.path.ends_with("/log") && r.status == 200;
    res.set_content(r.body, is_log ? "application/x-ndjson" : "application/json");
  };
  const char* pattern = R"(/api/.*)";
  server_->Get(pattern, forward);
  server_->Post(pattern, forward);
}

int SessionService::start(const std::string& host, int port) {
  require(!server_, "service already started");
  install_routes();
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    server_.reset();
    fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void SessionService::run(const std::string& host, int port) {
  require(!server_, "service already started");
  install_routes();
  if (!server_->listen(host, port)) fail(ErrorCode::kIo, "cannot serve on " + host + ":" + std::to_string(port));
}

void SessionService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace predrc::service
