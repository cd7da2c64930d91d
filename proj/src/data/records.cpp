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

#include "data/records.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "env/task_env.hpp"
#include "json.hpp"

namespace predrc::data {
namespace {

using nlohmann::json;

bool valid_answer(const std::string& s) {
  return s.size() == env::kAnswerLength &&
         std::all_of(s.begin(), s.end(),
                     [](char ch) { return env::kAlphabet.find(ch) != std::string_view::npos; });
}

bool unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

json decision_to_json(const CueDecision& c) {
  return json{{"r_with", c.r_with},         {"r_without", c.r_without},
              {"p", c.p},                   {"delta_with", c.delta_with},
              {"delta_without", c.delta_without}, {"threshold", c.threshold},
              {"provide", c.provide}};
}

json step_to_json(const StepRecord& s) {
  json j{{"participant_id", s.participant_id},
         {"step_index", s.step_index},
         {"cluster_id", s.cluster_id},
         {"x", s.x},
         {"y_star", s.y_star},
         {"ai_answer", s.ai_answer},
         {"c_hat", s.c_hat},
         {"cue_provided", s.cue_provided},
         {"c", s.c ? json(*s.c) : json(nullptr)},
         {"p", s.p},
         {"d", model::agent_name(s.d)},
         {"y", s.y},
         {"f", static_cast<int>(s.f)},
         {"ai_correct", s.ai_correct},
         {"human_correct", s.human_correct ? json(*s.human_correct) : json(nullptr)}};
  if (s.decision) j["decision"] = decision_to_json(*s.decision);
  return j;
}

// Field access that reports the missing or mistyped field by name.
class Fields {
 public:
  Fields(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) fail(ErrorCode::kParse, what_ + " is not an object");
  }

  const json& at(const char* name) const {
    auto it = j_.find(name);
    if (it == j_.end()) fail(ErrorCode::kParse, "missing field '" + std::string(name) + "' in " + what_);
    return *it;
  }

  template <typename T>
  T get(const char* name) const {
    try {
      return at(name).template get<T>();
    } catch (const json::exception&) {
      fail(ErrorCode::kParse, "field '" + std::string(name) + "' in " + what_ + " has the wrong type");
    }
  }

  template <typename T>
  std::optional<T> get_nullable(const char* name) const {
    if (at(name).is_null()) return std::nullopt;
    return get<T>(name);
  }

  bool has(const char* name) const { return j_.contains(name); }

 private:
  const json& j_;
  std::string what_;
};

CueDecision decision_from_json(const json& j) {
  Fields f(j, "decision");
  return CueDecision{f.get<double>("r_with"),        f.get<double>("r_without"),
                     f.get<double>("p"),             f.get<double>("delta_with"),
                     f.get<double>("delta_without"), f.get<double>("threshold"),
                     f.get<bool>("provide")};
}

StepRecord step_from_json(const json& j) {
  Fields f(j, "step record");
  StepRecord s;
  s.participant_id = f.get<std::string>("participant_id");
  s.step_index = f.get<std::size_t>("step_index");
  s.cluster_id = f.get<std::string>("cluster_id");
  s.x = f.get<std::vector<double>>("x");
  s.y_star = f.get<std::string>("y_star");
  s.ai_answer = f.get<std::string>("ai_answer");
  s.c_hat = f.get<double>("c_hat");
  s.cue_provided = f.get<bool>("cue_provided");
  s.c = f.get_nullable<double>("c");
  s.p = f.get<double>("p");
  s.d = model::parse_agent(f.get<std::string>("d"));
  s.y = f.get<std::string>("y");
  const int code = f.get<int>("f");
  if (code < 0 || code > 2) fail(ErrorCode::kParse, "field 'f' must be 0, 1 or 2");
  s.f = static_cast<model::Feedback>(code);
  s.ai_correct = f.get<bool>("ai_correct");
  s.human_correct = f.get_nullable<bool>("human_correct");
  if (f.has("decision")) s.decision = decision_from_json(f.at("decision"));
  return s;
}

}  // namespace

void StepRecord::validate() const {
  require(!participant_id.empty(), "step record has an empty participant_id");
  require(step_index < kSessionLength, "step_index outside 0..59");
  require(!x.empty(), "step record has an empty feature vector");
  require(std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }),
          "feature vector is not finite");
  require(valid_answer(y_star), "y_star must be five alphabet characters");
  require(valid_answer(ai_answer), "ai_answer must be five alphabet characters");
  require(valid_answer(y), "y must be five alphabet characters");
  require(unit_interval(c_hat), "c_hat outside [0,1]");
  require(unit_interval(p), "p outside [0,1]");
  if (cue_provided)
    require(c.has_value() && *c == c_hat, "c must equal c_hat when the cue is provided");
  else
    require(!c.has_value(), "c must be null when the cue is not provided");
  require(ai_correct == (ai_answer == y_star), "ai_correct disagrees with ai_answer and y_star");
  require(f == model::feedback_for(d, y == ai_answer), "f disagrees with d, y and ai_answer");
  if (d == model::Agent::kAi) {
    require(y == ai_answer, "y must equal ai_answer when d=AI");
    require(!human_correct.has_value(), "human_correct must be null when d=AI");
  } else {
    require(human_correct.has_value() && *human_correct == (y == y_star),
            "human_correct disagrees with y and y_star");
  }
  if (decision) {
    const CueDecision& k = *decision;
    require(k.provide == cue_provided, "logged cue decision disagrees with cue_provided");
    require(k.p == p, "logged cue decision disagrees with p");
    require(unit_interval(k.delta_with) && unit_interval(k.delta_without),
            "logged discrepancies outside [0,1]");
  }
}

void SessionRecord::validate(bool require_complete) const {
  require(!participant_id.empty(), "session has an empty participant_id");
  if (require_complete) require(steps.size() == kSessionLength, "session must have exactly 60 steps");
  require(steps.size() <= kSessionLength, "session has more than 60 steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    require(steps[i].step_index == i, "step indices must be contiguous from 0");
    require(steps[i].participant_id == participant_id, "step participant_id differs from its session");
    steps[i].validate();
  }
  if (rcc_rate_stratum) {
    const int s = *rcc_rate_stratum;
    require(std::find(kStrata.begin(), kStrata.end(), s) != kStrata.end(),
            "rcc_rate_stratum must be one of 0,20,40,60,80,100");
    require(!require_complete || cues_shown() == static_cast<std::size_t>(s) * kSessionLength / 100,
            "cue count does not match the session's stratum");
  }
}

std::size_t SessionRecord::cues_shown() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const StepRecord& s) { return s.cue_provided; }));
}

void RelianceDataset::validate() const {
  require(provenance.schema == kSchema, "unsupported schema '" + provenance.schema + "'");
  std::set<std::string> ids;
  for (const auto& s : sessions) {
    s.validate();
    require(ids.insert(s.participant_id).second, "duplicate participant_id '" + s.participant_id + "'");
  }
}

std::size_t RelianceDataset::num_steps() const {
  std::size_t n = 0;
  for (const auto& s : sessions) n += s.steps.size();
  return n;
}

void write_jsonl(std::ostream& out, const RelianceDataset& dataset) {
  out << json{{"schema", dataset.provenance.schema},
              {"seed", dataset.provenance.seed},
              {"config_digest", dataset.provenance.config_digest}}
             .dump()
      << '\n';
  for (const auto& s : dataset.sessions) {
    json head{{"participant_id", s.participant_id},
              {"rcc_rate_stratum", s.rcc_rate_stratum ? json(*s.rcc_rate_stratum) : json(nullptr)},
              {"generator_seed", s.generator_seed},
              {"steps", s.steps.size()}};
    out << json{{"session", head}}.dump() << '\n';
    for (const auto& step : s.steps) out << step_to_json(step).dump() << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "failed writing dataset");
}

RelianceDataset read_jsonl(std::istream& in) {
  RelianceDataset ds;
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](bool required) -> std::optional<json> {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        return json::parse(line);
      } catch (const json::parse_error& e) {
        fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": malformed JSON");
      }
    }
    if (required) fail(ErrorCode::kParse, "line " + std::to_string(line_no + 1) + ": unexpected end of file");
    return std::nullopt;
  };
  auto at_line = [&](auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      if (std::string_view(e.what()).starts_with("line ")) throw;
      fail(e.code() == ErrorCode::kInvalidArgument ? ErrorCode::kParse : e.code(),
           "line " + std::to_string(line_no) + ": " + e.what());
    }
  };

  const json header = *next(true);
  at_line([&] {
    Fields f(header, "header");
    ds.provenance.schema = f.get<std::string>("schema");
    if (ds.provenance.schema != kSchema)
      fail(ErrorCode::kParse, "unsupported schema '" + ds.provenance.schema + "'");
    ds.provenance.seed = f.get<std::uint64_t>("seed");
    ds.provenance.config_digest = f.get<std::string>("config_digest");
    return 0;
  });

  std::set<std::string> ids;
  while (auto j = next(false)) {
    SessionRecord s;
    const std::size_t count = at_line([&] {
      Fields top(*j, "session line");
      Fields f(top.at("session"), "session");
      s.participant_id = f.get<std::string>("participant_id");
      s.rcc_rate_stratum = f.get_nullable<int>("rcc_rate_stratum");
      s.generator_seed = f.get<std::uint64_t>("generator_seed");
      return f.get<std::size_t>("steps");
    });
    for (std::size_t i = 0; i < count; ++i) {
      const json step = *next(true);
      at_line([&] {
        s.steps.push_back(step_from_json(step));
        s.steps.back().validate();
        require(s.steps.back().participant_id == s.participant_id,
                "step participant_id differs from its session");
        return 0;
      });
    }
    at_line([&] {
      s.validate(s.rcc_rate_stratum.has_value());
      require(ids.insert(s.participant_id).second, "duplicate participant_id '" + s.participant_id + "'");
      return 0;
    });
    ds.sessions.push_back(std::move(s));
  }
  return ds;
}

void write_jsonl_file(const std::string& path, const RelianceDataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_jsonl(out, dataset);
}

RelianceDataset read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  return read_jsonl(in);
}

std::string to_jsonl(const RelianceDataset& dataset) {
  std::ostringstream out;
  write_jsonl(out, dataset);
  return out.str();
}

RelianceDataset from_jsonl(const std::string& text) {
  std::istringstream in(text);
  return read_jsonl(in);
}

}  // namespace predrc::data
