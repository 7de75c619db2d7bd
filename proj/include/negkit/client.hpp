#pragma once

// Model client abstraction used by the dataset pipeline.  Callers build a
// request JSON object, the client returns a response JSON object.  Two
// implementations ship:
//
//   * MockModelClient — resolves each request against a directory of fixture
//     files.  The fixture filename is the 16-hex-digit FNV-1a hash of the
//     canonical (sorted-key, no-whitespace) dump of the request, so any test
//     can precompute exactly which file a given request will load.  Every call
//     is appended to a thread-safe log; a sorted summary can be written out
//     for call-count assertions.
//   * HttpModelClient — POSTs the request to an HTTP endpoint.  The endpoint
//     and API key come from environment variables so no secret ever lands in
//     a config file.
//
// Clients throw Error(ClientError) for transport-level problems (missing
// fixture, connection refused, non-2xx status).  Schema problems in an
// otherwise well-formed response are the caller's business.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "negkit/json.hpp"

namespace negkit {

// Canonical dump used for hashing: sorted keys, minimal separators.  nlohmann
// object keys are already stored sorted, so dump() is canonical up to
// whitespace, which dump(-1) omits.
std::string canonical_dump(const njson& request);

// 16 lowercase hex digits of the FNV-1a 64-bit hash of canonical_dump().
std::string request_hash(const njson& request);

struct CallRecord {
  std::string task;    // request["task"] if present, else ""
  std::string hash;    // fixture hash of the request
  int attempt = 0;     // request["attempt"] if present, else 0
};

class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual njson complete(const njson& request) = 0;
};

class MockModelClient : public ModelClient {
 public:
  explicit MockModelClient(std::string fixtures_dir);

  // Loads <fixtures_dir>/<request_hash(request)>.json.  Missing file or
  // unparsable fixture -> ClientError.
  njson complete(const njson& request) override;

  std::vector<CallRecord> call_log() const;
  std::size_t call_count() const;

  // Calls grouped by task name, insertion-independent (sorted by task).
  std::map<std::string, std::size_t> calls_by_task() const;

  // One line per call, sorted by (task, hash, attempt) for determinism.
  void write_call_summary(const std::string& path) const;

  // Helper for tests and fixture tooling: writes the response a request
  // should receive into the right filename under dir.
  static std::string write_fixture(const std::string& dir, const njson& request,
                                   const njson& response);

 private:
  std::string fixtures_dir_;
  mutable std::mutex mutex_;
  std::vector<CallRecord> log_;
};

class HttpModelClient : public ModelClient {
 public:
  // endpoint_env / api_key_env name environment variables holding the URL and
  // bearer token.  The URL is split into host and path at the first '/' after
  // the scheme.  Missing endpoint variable -> ClientError at construction.
  HttpModelClient(const std::string& endpoint_env, const std::string& api_key_env,
                  int timeout_s);

  njson complete(const njson& request) override;

 private:
  std::string url_;
  std::string api_key_;
  int timeout_s_;
};

}  // namespace negkit
