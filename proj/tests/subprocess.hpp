#pragma once

// Minimal subprocess harness for driving the CLI binary from tests.  Runs a
// command with shell redirection into per-call temp files, then reads back
// stdout/stderr and the exit status.  NEGKIT_BIN is injected by the build.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

namespace testutil {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spill(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Fresh pathnames under /tmp for this process.
inline std::string temp_path(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  return "/tmp/negkit_test_" + std::to_string(::getpid()) + "_" + tag + "_" +
         std::to_string(counter++);
}

// Runs `NEGKIT_BIN <args>` with optional stdin payload.
inline RunResult run_cli(const std::string& args, const std::string& stdin_data = "") {
  const std::string in_path = temp_path("in");
  const std::string out_path = temp_path("out");
  const std::string err_path = temp_path("err");
  spill(in_path, stdin_data);

  const std::string command = std::string(NEGKIT_BIN) + " " + args + " < " + in_path +
                              " > " + out_path + " 2> " + err_path;
  const int status = std::system(command.c_str());

  RunResult result;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  if (status == -1) {
    result.exit_code = -1;
  } else {
    result.exit_code = WEXITSTATUS(status);
  }
  std::remove(in_path.c_str());
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return result;
}

}  // namespace testutil
