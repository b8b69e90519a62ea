// SPDX-License-Identifier: Apache-2.0
//
// Newline-delimited JSON request/response channel to a backend child process.
//
//   request:  {"id": u64, "op": "encode"|"classify"|"rewrite"|"capabilities",
//              "task"?: string, "text"?: string, "features"?: [f32]}
//   response: {"id": u64, "ok": bool, "features"?: [f32],
//              "scores"?: {label: f32}, "text"?: string, "error"?: string,
//              "capabilities"?: [string], "dim"?: u32, "tag"?: string}
//
// One response per request, in order, with the request's id.
#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tcsi {

/// A child process run through /bin/sh -c with its stdin/stdout piped.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command);
  ~ChildProcess();
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// Writes `line` plus '\n'. Returns false if the pipe is closed.
  bool write_line(const std::string& line);
  /// Reads one '\n'-terminated line. nullopt on timeout; throws on EOF.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  /// True if output arrives within `wait`.
  bool has_pending_output(std::chrono::milliseconds wait);

  void terminate();
  int pid() const { return pid_; }

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Request/response client with id matching and per-call timeouts. After a
/// timeout or protocol violation the session is considered broken.
class ProtocolClient {
 public:
  ProtocolClient(const std::string& command, std::chrono::milliseconds timeout);

  /// Sends {"id", "op", ...fields} and returns the matching response object.
  /// Throws ExpertError Timeout / ProtocolViolation / BackendUnavailable.
  nlohmann::json call(const std::string& op, nlohmann::json fields = nlohmann::json::object());

  /// Sends a raw request line and returns the raw response line (or nullopt
  /// on timeout). Used by the conformance suite to inspect misbehaviour.
  std::optional<std::string> exchange_raw(const std::string& line);

  std::uint64_t next_id() const { return next_id_; }
  std::uint64_t take_id() { return next_id_++; }
  bool broken() const { return broken_; }
  std::chrono::milliseconds timeout() const { return timeout_; }
  ChildProcess& process() { return child_; }

 private:
  ChildProcess child_;
  std::chrono::milliseconds timeout_;
  std::uint64_t next_id_ = 1;
  bool broken_ = false;
  std::mutex mu_;
};

struct ConformanceExchange {
  std::string name;
  nlohmann::json request;
  std::string response;  // raw line, empty if none arrived
  std::vector<std::string> violations;
};

struct ConformanceReport {
  std::vector<ConformanceExchange> exchanges;
  std::vector<std::string> session_violations;  // e.g. unsolicited output

  std::size_t violation_count() const;
  bool passed() const { return violation_count() == 0; }
};

/// Runs the 20 scripted exchanges against a freshly spawned backend process.
ConformanceReport run_conformance(const std::string& command,
                                  std::chrono::milliseconds timeout = std::chrono::seconds(10));

nlohmann::json to_json(const ConformanceReport& r);

}  // namespace tcsi
