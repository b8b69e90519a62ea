// SPDX-License-Identifier: Apache-2.0
#include "tcsi/protocol.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <thread>

#include "tcsi/categories.hpp"
#include "tcsi/experts.hpp"

extern char** environ;

namespace tcsi {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// ChildProcess

ChildProcess::ChildProcess(const std::string& command) {
  // A dead child must surface as an error on write, not kill the engine.
  ::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw ExpertError(ExpertError::Kind::SpawnFailure, std::strerror(errno));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ExpertError(ExpertError::Kind::SpawnFailure, std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

  std::string cmd = command;
  char sh[] = "/bin/sh";
  char dash_c[] = "-c";
  char* argv[] = {sh, dash_c, cmd.data(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw ExpertError(ExpertError::Kind::SpawnFailure, "cannot spawn '" + command + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ChildProcess::~ChildProcess() { terminate(); }

void ChildProcess::terminate() {
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (pid_ > 0) {
    // Closing stdin asks a well-behaved server to exit; give it a moment.
    int status = 0;
    bool reaped = false;
    for (int i = 0; i < 20 && !reaped; ++i) {
      reaped = ::waitpid(pid_, &status, WNOHANG) == pid_;
      if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (!reaped) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
    pid_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
}

bool ChildProcess::write_line(const std::string& line) {
  if (to_child_ < 0) return false;
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> ChildProcess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0 || from_child_ < 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (pr < 0) {
      if (errno == EINTR) continue;
      throw ExpertError(ExpertError::Kind::BackendUnavailable, std::strerror(errno));
    }
    if (pr == 0) return std::nullopt;
    char chunk[4096];
    const auto n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ExpertError(ExpertError::Kind::BackendUnavailable, std::strerror(errno));
    }
    if (n == 0) throw ExpertError(ExpertError::Kind::BackendUnavailable, "backend closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

bool ChildProcess::has_pending_output(std::chrono::milliseconds wait) {
  if (!buffer_.empty()) return true;
  if (from_child_ < 0) return false;
  pollfd pfd{from_child_, POLLIN, 0};
  if (::poll(&pfd, 1, static_cast<int>(wait.count())) <= 0) return false;
  char c;
  const auto n = ::read(from_child_, &c, 1);
  if (n == 1) {
    buffer_.push_back(c);
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// ProtocolClient

ProtocolClient::ProtocolClient(const std::string& command, std::chrono::milliseconds timeout)
    : child_(command), timeout_(timeout) {
  if (timeout.count() <= 0) throw std::invalid_argument("protocol timeout must be positive");
}

std::optional<std::string> ProtocolClient::exchange_raw(const std::string& line) {
  std::lock_guard lock(mu_);
  if (!child_.write_line(line)) {
    broken_ = true;
    throw ExpertError(ExpertError::Kind::BackendUnavailable, "backend closed its input");
  }
  try {
    auto resp = child_.read_line(timeout_);
    if (!resp) broken_ = true;
    return resp;
  } catch (...) {
    broken_ = true;
    throw;
  }
}

json ProtocolClient::call(const std::string& op, json fields) {
  if (broken_) throw ExpertError(ExpertError::Kind::BackendUnavailable, "backend session is broken");
  const std::uint64_t id = take_id();
  fields["id"] = id;
  fields["op"] = op;
  auto line = exchange_raw(fields.dump());
  if (!line) {
    throw ExpertError(ExpertError::Kind::Timeout,
                      op + " after " + std::to_string(timeout_.count()) + " ms");
  }
  json resp;
  try {
    resp = json::parse(*line);
  } catch (const json::parse_error&) {
    broken_ = true;
    throw ExpertError(ExpertError::Kind::ProtocolViolation, "response is not JSON: " + line->substr(0, 80));
  }
  if (!resp.is_object() || !resp.contains("id") || !resp["id"].is_number_unsigned() ||
      !resp.contains("ok") || !resp["ok"].is_boolean()) {
    broken_ = true;
    throw ExpertError(ExpertError::Kind::ProtocolViolation, "response lacks id/ok fields");
  }
  if (resp["id"].get<std::uint64_t>() != id) {
    broken_ = true;
    throw ExpertError(ExpertError::Kind::ProtocolViolation,
                      "response id " + resp["id"].dump() + " does not match request id " +
                          std::to_string(id));
  }
  return resp;
}

// ---------------------------------------------------------------------------
// Conformance suite

std::size_t ConformanceReport::violation_count() const {
  std::size_t n = session_violations.size();
  for (const auto& e : exchanges) n += e.violations.size();
  return n;
}

namespace {

enum class Expect { Ok, Error, Either };

struct Script {
  std::string name;
  json request;  // without id
  Expect expect;
};

bool finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

void check_features(const json& resp, std::vector<std::string>& out) {
  auto f = resp.find("features");
  if (f == resp.end() || !f->is_array() || f->empty()) {
    out.push_back("ok encode response lacks a non-empty features array");
    return;
  }
  for (const auto& v : *f) {
    if (!finite_number(v)) {
      out.push_back("features contain a non-finite or non-numeric value");
      return;
    }
  }
}

void check_scores(const json& req, const json& resp, std::vector<std::string>& out) {
  auto s = resp.find("scores");
  if (s == resp.end() || !s->is_object() || s->empty()) {
    out.push_back("ok classify response lacks a scores object");
    return;
  }
  double sum = 0.0;
  for (auto it = s->begin(); it != s->end(); ++it) {
    if (!finite_number(it.value())) {
      out.push_back("score '" + it.key() + "' is not a finite number");
      return;
    }
    const double v = it.value().get<double>();
    if (v < 0.0 || v > 1.0) out.push_back("score '" + it.key() + "' outside [0,1]");
    sum += v;
  }
  if (req.value("task", std::string()) == "Topic") {
    for (auto it = s->begin(); it != s->end(); ++it) {
      auto cat = parse_category(it.key());
      if (!cat || !is_classifiable(*cat)) out.push_back("unknown topic label '" + it.key() + "'");
    }
    if (std::abs(sum - 1.0) > 1e-4) out.push_back("topic scores sum to " + std::to_string(sum));
  } else if (!s->contains("positive")) {
    out.push_back("binary scores lack 'positive'");
  }
}

}  // namespace

ConformanceReport run_conformance(const std::string& command, std::chrono::milliseconds timeout) {
  ConformanceReport report;
  ProtocolClient client(command, timeout);

  std::string long_text;
  for (int i = 0; i < 600; ++i) long_text += (i ? " word" : "Word");
  long_text += ".";

  // Feature vectors captured from earlier exchanges are substituted by name.
  std::vector<Script> script = {
      {"capabilities", {{"op", "capabilities"}}, Expect::Ok},
      {"encode", {{"op", "encode"}, {"text", "We collect your email address."}}, Expect::Ok},
      {"encode-repeat", {{"op", "encode"}, {"text", "We collect your email address."}}, Expect::Ok},
      {"encode-second", {{"op", "encode"}, {"text", "We share location data with partners."}}, Expect::Ok},
      {"classify-importance", {{"op", "classify"}, {"task", "Importance"}, {"features", "$encode"}}, Expect::Ok},
      {"classify-topic", {{"op", "classify"}, {"task", "Topic"}, {"features", "$encode"}}, Expect::Ok},
      {"classify-risk", {{"op", "classify"}, {"task", "Risk"}, {"features", "$encode"}}, Expect::Ok},
      {"classify-sensitivity", {{"op", "classify"}, {"task", "Sensitivity"}, {"features", "$encode"}}, Expect::Ok},
      {"classify-text", {{"op", "classify"}, {"task", "Importance"}, {"text", "We sell your data."}}, Expect::Either},
      {"classify-topic-second", {{"op", "classify"}, {"task", "Topic"}, {"features", "$encode-second"}}, Expect::Ok},
      {"rewrite", {{"op", "rewrite"}, {"text", "We may, at our sole discretion, share data."}}, Expect::Ok},
      {"classify-bad-dim", {{"op", "classify"}, {"task", "Risk"}, {"features", "$bad-dim"}}, Expect::Error},
      {"unknown-op", {{"op", "explode"}}, Expect::Error},
      {"unknown-task", {{"op", "classify"}, {"task", "Weather"}, {"features", "$encode"}}, Expect::Error},
      {"encode-missing-text", {{"op", "encode"}}, Expect::Error},
      {"encode-empty-text", {{"op", "encode"}, {"text", ""}}, Expect::Error},
      {"encode-long", {{"op", "encode"}, {"text", long_text}}, Expect::Ok},
      {"encode-unicode", {{"op", "encode"}, {"text", "Wir erheben Ihre Daten \xE2\x80\x94 d\xC3\xA9j\xC3\xA0 vu."}}, Expect::Ok},
      {"classify-risk-long", {{"op", "classify"}, {"task", "Risk"}, {"features", "$encode-long"}}, Expect::Ok},
      {"capabilities-repeat", {{"op", "capabilities"}}, Expect::Ok},
  };

  std::map<std::string, json> captured;
  std::set<std::string> caps;
  json first_caps;
  std::optional<std::size_t> dim;

  for (auto& step : script) {
    ConformanceExchange ex;
    ex.name = step.name;
    json req = step.request;
    if (auto f = req.find("features"); f != req.end() && f->is_string()) {
      const auto ref = f->get<std::string>().substr(1);
      if (ref == "bad-dim") {
        json bad = json::array();
        for (std::size_t i = 0; i < dim.value_or(4) + 3; ++i) bad.push_back(0.5);
        *f = bad;
      } else if (captured.count(ref)) {
        *f = captured[ref];
      } else {
        *f = json::array({0.0});
      }
    }
    // Rewrite is only expected to succeed when advertised.
    Expect expect = step.expect;
    if (step.name == "rewrite" && !caps.count("Rewrite")) expect = Expect::Error;
    if (step.name.rfind("classify-", 0) == 0 && expect == Expect::Ok && !caps.count(req.value("task", ""))) {
      expect = Expect::Error;
    }

    const std::uint64_t id = client.take_id();
    req["id"] = id;
    ex.request = req;
    std::optional<std::string> line;
    try {
      line = client.exchange_raw(req.dump());
    } catch (const std::exception& e) {
      ex.violations.push_back(std::string("transport failure: ") + e.what());
      report.exchanges.push_back(std::move(ex));
      break;
    }
    if (!line) {
      ex.violations.push_back("no response within " + std::to_string(timeout.count()) + " ms");
      report.exchanges.push_back(std::move(ex));
      break;
    }
    ex.response = *line;
    json resp;
    try {
      resp = json::parse(*line);
    } catch (const json::parse_error&) {
      ex.violations.push_back("response is not valid JSON");
      report.exchanges.push_back(std::move(ex));
      continue;
    }
    auto& v = ex.violations;
    if (!resp.is_object()) {
      v.push_back("response is not a JSON object");
    } else {
      if (!resp.contains("id") || !resp["id"].is_number_unsigned()) {
        v.push_back("response lacks an unsigned id");
      } else if (resp["id"].get<std::uint64_t>() != id) {
        v.push_back("response id " + resp["id"].dump() + " != request id " + std::to_string(id));
      }
      if (!resp.contains("ok") || !resp["ok"].is_boolean()) {
        v.push_back("response lacks boolean ok");
      } else {
        const bool ok = resp["ok"].get<bool>();
        if (expect == Expect::Ok && !ok) v.push_back("expected ok=true, got error: " + resp.value("error", ""));
        if (expect == Expect::Error && ok) v.push_back("expected ok=false for invalid request");
        if (!ok && (!resp.contains("error") || !resp["error"].is_string())) {
          v.push_back("ok=false without an error string");
        }
        if (ok) {
          const auto op = req.value("op", "");
          if (op == "capabilities") {
            if (!resp.contains("capabilities") || !resp["capabilities"].is_array()) {
              v.push_back("capabilities response lacks a capabilities array");
            } else if (first_caps.is_null()) {
              first_caps = resp["capabilities"];
              for (const auto& c : first_caps) {
                if (c.is_string()) caps.insert(c.get<std::string>());
              }
            } else if (resp["capabilities"] != first_caps) {
              v.push_back("capabilities changed within the session");
            }
          } else if (op == "encode") {
            check_features(resp, v);
            if (v.empty()) {
              const auto n = resp["features"].size();
              if (dim && *dim != n) v.push_back("feature dimension changed within the session");
              dim = n;
              captured[step.name] = resp["features"];
            }
          } else if (op == "classify") {
            check_scores(req, resp, v);
          } else if (op == "rewrite") {
            if (!resp.contains("text") || !resp["text"].is_string() || resp["text"].get<std::string>().empty()) {
              v.push_back("rewrite response lacks non-empty text");
            }
          }
        }
      }
    }
    if (step.name == "encode-repeat" && captured.count("encode") && captured.count("encode-repeat") &&
        captured["encode"] != captured["encode-repeat"]) {
      v.push_back("encoding the same sentence twice gave different features");
    }
    report.exchanges.push_back(std::move(ex));
  }

  if (client.process().has_pending_output(std::chrono::milliseconds(100))) {
    report.session_violations.push_back("backend wrote output that answers no request");
  }
  return report;
}

json to_json(const ConformanceReport& r) {
  json out;
  out["passed"] = r.passed();
  out["violation_count"] = r.violation_count();
  json ex = json::array();
  for (const auto& e : r.exchanges) {
    ex.push_back({{"name", e.name}, {"request", e.request}, {"response", e.response},
                  {"violations", e.violations}});
  }
  out["exchanges"] = std::move(ex);
  out["session_violations"] = r.session_violations;
  return out;
}

}  // namespace tcsi
