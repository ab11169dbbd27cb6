#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "neuromap/estimator.hpp"
#include "neuromap/textio.hpp"

namespace neuromap {

/// Drives an external pose estimator over its standard streams.
///
/// Protocol, one pending request at a time:
///   request   "EST <id> r0 r1 ... r{k-1}\n"
///   response  "POSE <id> nx ny ntheta\n"
///   shutdown  "QUIT\n"
/// Responses are normalised poses; out-of-range values are clamped and flagged.
/// Any protocol failure (exit, malformed line, timeout) raises
/// ErrorKind::kEstimatorUnavailable and leaves the adapter unusable.
class ExternalEstimator final : public Estimator {
 public:
  ExternalEstimator(const std::string& command, EnvBounds bounds, std::optional<std::size_t> dim = std::nullopt,
                    std::chrono::milliseconds timeout = std::chrono::milliseconds(5000))
      : command_(command), bounds_(bounds), dim_(dim), timeout_(timeout) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) unavailable("pipe() failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      unavailable("pipe() failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) unavailable("fork() failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    ::fcntl(in_fd_, F_SETFD, FD_CLOEXEC);
    ::fcntl(out_fd_, F_SETFD, FD_CLOEXEC);
  }

  ExternalEstimator(const ExternalEstimator&) = delete;
  ExternalEstimator& operator=(const ExternalEstimator&) = delete;

  ~ExternalEstimator() override { shutdown(); }

  PoseEstimate estimate(const Frame& frame) override {
    check_dim(frame.observation);
    if (broken_) unavailable("adapter is no longer usable");
    const std::uint64_t id = next_id_++;
    std::string req = "EST " + std::to_string(id);
    char buf[64];
    for (double r : frame.observation.ranges) {
      std::snprintf(buf, sizeof buf, " %.17g", r);
      req += buf;
    }
    req += '\n';
    write_all(req);

    const std::string line = read_line();
    const auto fields = textio::split(textio::trim(line), ' ');
    if (fields.size() != 5 || fields[0] != "POSE") unavailable("malformed response '" + line + "'");
    NormalizedPose n;
    try {
      if (textio::parse_u64(fields[1], "response id") != id) unavailable("response id mismatch in '" + line + "'");
      n = {textio::parse_double(fields[2], "nx"), textio::parse_double(fields[3], "ny"),
           textio::parse_double(fields[4], "ntheta")};
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kEstimatorUnavailable) throw;
      unavailable("malformed response '" + line + "': " + e.what());
    }
    return denormalize(n, bounds_);
  }

  std::string name() const override { return "external"; }
  std::optional<std::size_t> input_dim() const override { return dim_; }

  /// Sends QUIT and reaps the child. Idempotent.
  void shutdown() {
    if (in_fd_ >= 0) {
      const char quit[] = "QUIT\n";
      [[maybe_unused]] auto n = ::write(in_fd_, quit, sizeof quit - 1);
      ::close(in_fd_);
      in_fd_ = -1;
    }
    if (out_fd_ >= 0) {
      ::close(out_fd_);
      out_fd_ = -1;
    }
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) {
          pid_ = -1;
          return;
        }
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

 private:
  [[noreturn]] void unavailable(const std::string& what) {
    broken_ = true;
    fail(ErrorKind::kEstimatorUnavailable, "external estimator '" + command_ + "': " + what);
  }

  void write_all(const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
      const ssize_t n = ::write(in_fd_, data.data() + done, data.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        unavailable("process not accepting input (exited?)");
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
      if (const auto pos = pending_.find('\n'); pos != std::string::npos) {
        std::string line = pending_.substr(0, pos);
        pending_.erase(0, pos + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) unavailable("response timeout");
      pollfd p{out_fd_, POLLIN, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        unavailable("poll() failed");
      }
      if (rc == 0) unavailable("response timeout");
      char buf[4096];
      const ssize_t n = ::read(out_fd_, buf, sizeof buf);
      if (n < 0) {
        if (errno == EINTR) continue;
        unavailable("read failed");
      }
      if (n == 0) unavailable("process exited");
      pending_.append(buf, static_cast<std::size_t>(n));
    }
  }

  std::string command_;
  EnvBounds bounds_;
  std::optional<std::size_t> dim_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string pending_;
  std::uint64_t next_id_ = 0;
  bool broken_ = false;
};

}  // namespace neuromap
