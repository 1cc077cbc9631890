#include "discount/model.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace discount {

namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - Clock::now())
                        .count();
  return left > 0 ? static_cast<int>(left) : 0;
}

}  // namespace

ExternalModel::ExternalModel(const std::string& command, int timeout_ms)
    : timeout_ms_(timeout_ms) {
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0) {
    throw ExternalModelError("cannot create pipes for external model", -1);
  }
  const pid_t pid = fork();
  if (pid < 0) {
    throw ExternalModelError("cannot fork external model process", -1);
  }
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  child_stdin_ = to_child[1];
  child_stdout_ = from_child[0];
  pid_ = pid;
  // Broken pipes surface as write errors rather than process signals.
  signal(SIGPIPE, SIG_IGN);

  nlohmann::json hello;
  try {
    hello = nlohmann::json::parse(request_line(R"({"op":"hello"})", -1));
  } catch (const nlohmann::json::exception& e) {
    shutdown();
    throw ExternalModelError(std::string("malformed handshake response: ") +
                                 e.what(),
                             -1);
  } catch (...) {
    shutdown();
    throw;
  }
  if (hello.value("protocol", 0) != 1 || !hello.contains("input_dim")) {
    shutdown();
    throw ExternalModelError("external model handshake failed", -1);
  }
  dim_ = hello["input_dim"].get<Index>();
}

ExternalModel::~ExternalModel() { shutdown(); }

void ExternalModel::shutdown() {
  if (child_stdin_ >= 0) {
    close(child_stdin_);
    child_stdin_ = -1;
  }
  if (child_stdout_ >= 0) {
    close(child_stdout_);
    child_stdout_ = -1;
  }
  if (pid_ > 0) {
    const auto pid = static_cast<pid_t>(pid_);
    int status = 0;
    for (int attempt = 0; attempt < 50; ++attempt) {
      if (waitpid(pid, &status, WNOHANG) != 0) {
        pid_ = -1;
        return;
      }
      if (attempt == 0) kill(pid, SIGTERM);
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill(pid, SIGKILL);
    waitpid(pid, &status, 0);
    pid_ = -1;
  }
}

std::string ExternalModel::request_line(const std::string& line,
                                        Index batch) const {
  const auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms_);

  std::string payload = line;
  payload.push_back('\n');
  std::size_t written = 0;
  while (written < payload.size()) {
    pollfd pfd{child_stdin_, POLLOUT, 0};
    const int ready = poll(&pfd, 1, remaining_ms(deadline));
    if (ready <= 0) {
      throw ExternalModelError("timeout writing to external model", batch);
    }
    const ssize_t n =
        write(child_stdin_, payload.data() + written, payload.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ExternalModelError(
          std::string("external model write failed: ") + std::strerror(errno),
          batch);
    }
    written += static_cast<std::size_t>(n);
  }

  for (;;) {
    const auto newline = read_buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string response = read_buffer_.substr(0, newline);
      read_buffer_.erase(0, newline + 1);
      return response;
    }
    pollfd pfd{child_stdout_, POLLIN, 0};
    const int ready = poll(&pfd, 1, remaining_ms(deadline));
    if (ready <= 0) {
      throw ExternalModelError("timeout waiting for external model", batch);
    }
    char chunk[4096];
    const ssize_t n = read(child_stdout_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ExternalModelError(
          std::string("external model read failed: ") + std::strerror(errno),
          batch);
    }
    if (n == 0) {
      throw ExternalModelError("external model process exited", batch);
    }
    read_buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

Vector ExternalModel::predict(const Matrix& x) const {
  check_input(x);
  std::lock_guard<std::mutex> lock(mutex_);
  const Index batch = batch_counter_++;

  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < x.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    rows.push_back(std::move(row));
  }
  const nlohmann::json request{{"op", "predict"}, {"x", std::move(rows)}};

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(request_line(request.dump(), batch));
  } catch (const nlohmann::json::exception& e) {
    throw ExternalModelError(
        std::string("malformed external model response: ") + e.what(), batch);
  }
  if (!response.contains("y") || !response["y"].is_array() ||
      static_cast<Index>(response["y"].size()) != x.rows()) {
    throw ExternalModelError("external model returned wrong output size",
                             batch);
  }
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    out[i] = response["y"][static_cast<std::size_t>(i)].get<double>();
  }
  if (!out.allFinite()) {
    throw ExternalModelError("external model returned non-finite values",
                             batch);
  }
  return out;
}

}  // namespace discount
