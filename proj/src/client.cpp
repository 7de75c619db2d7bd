#include "negkit/client.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "negkit/errors.hpp"
#include "negkit/rng.hpp"

namespace negkit {

std::string canonical_dump(const njson& request) {
  // Object keys are stored sorted; dump(-1) emits no whitespace, so equal
  // requests always produce byte-equal dumps.
  return request.dump();
}

std::string request_hash(const njson& request) {
  const std::uint64_t h = fnv1a64(canonical_dump(request));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

MockModelClient::MockModelClient(std::string fixtures_dir)
    : fixtures_dir_(std::move(fixtures_dir)) {}

njson MockModelClient::complete(const njson& request) {
  const std::string hash = request_hash(request);
  CallRecord record;
  record.hash = hash;
  if (request.contains("task") && request["task"].is_string()) {
    record.task = request["task"].get<std::string>();
  }
  if (request.contains("attempt") && request["attempt"].is_number_integer()) {
    record.attempt = request["attempt"].get<int>();
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    log_.push_back(record);
  }

  const std::string path = fixtures_dir_ + "/" + hash + ".json";
  std::ifstream in(path);
  if (!in) {
    fail(ErrKind::ClientError,
         "no fixture for request " + hash + " (task '" + record.task + "') in " +
             fixtures_dir_);
  }
  njson response;
  try {
    in >> response;
  } catch (const njson::exception& e) {
    fail(ErrKind::ClientError, "fixture " + path + " is not valid JSON: " + e.what());
  }
  return response;
}

std::vector<CallRecord> MockModelClient::call_log() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return log_;
}

std::size_t MockModelClient::call_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return log_.size();
}

std::map<std::string, std::size_t> MockModelClient::calls_by_task() const {
  std::map<std::string, std::size_t> counts;
  std::lock_guard<std::mutex> lock(mutex_);
  for (const CallRecord& record : log_) ++counts[record.task];
  return counts;
}

void MockModelClient::write_call_summary(const std::string& path) const {
  std::vector<CallRecord> log = call_log();
  std::sort(log.begin(), log.end(), [](const CallRecord& a, const CallRecord& b) {
    if (a.task != b.task) return a.task < b.task;
    if (a.hash != b.hash) return a.hash < b.hash;
    return a.attempt < b.attempt;
  });
  std::ofstream out(path);
  if (!out) fail(ErrKind::IoError, "cannot write call summary to " + path);
  for (const CallRecord& record : log) {
    out << record.task << " " << record.hash << " " << record.attempt << "\n";
  }
}

std::string MockModelClient::write_fixture(const std::string& dir, const njson& request,
                                           const njson& response) {
  const std::string path = dir + "/" + request_hash(request) + ".json";
  std::ofstream out(path);
  if (!out) fail(ErrKind::IoError, "cannot write fixture " + path);
  out << response.dump(2) << "\n";
  return path;
}

HttpModelClient::HttpModelClient(const std::string& endpoint_env,
                                 const std::string& api_key_env, int timeout_s)
    : timeout_s_(timeout_s) {
  const char* url = std::getenv(endpoint_env.c_str());
  if (!url || !*url) {
    fail(ErrKind::ClientError, "environment variable " + endpoint_env + " is not set");
  }
  url_ = url;
  if (const char* key = std::getenv(api_key_env.c_str()); key && *key) api_key_ = key;
}

njson HttpModelClient::complete(const njson& request) {
  // Split scheme://host[:port]/path.
  std::string host = url_;
  std::string path = "/";
  const auto scheme = host.find("://");
  const auto path_start = host.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start != std::string::npos) {
    path = host.substr(path_start);
    host = host.substr(0, path_start);
  }

  httplib::Client client(host);
  client.set_connection_timeout(timeout_s_, 0);
  client.set_read_timeout(timeout_s_, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto result = client.Post(path, headers, request.dump(), "application/json");
  if (!result) {
    fail(ErrKind::ClientError,
         "request to " + url_ + " failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    fail(ErrKind::ClientError,
         "request to " + url_ + " returned status " + std::to_string(result->status));
  }
  try {
    return njson::parse(result->body);
  } catch (const njson::exception& e) {
    fail(ErrKind::ClientError, std::string("response is not valid JSON: ") + e.what());
  }
}

}  // namespace negkit
