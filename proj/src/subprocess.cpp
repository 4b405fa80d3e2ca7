#include "rtlmut/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

#include "rtlmut/errors.hpp"

namespace rtlmut {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

CommandResult run_shell(const std::string& command, double timeout_seconds) {
  int pipe_fds[2];
  if (pipe(pipe_fds) != 0) throw InfraError(std::string("pipe failed: ") + std::strerror(errno));

  pid_t pid = fork();
  if (pid < 0) {
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    throw InfraError(std::string("fork failed: ") + std::strerror(errno));
  }

  if (pid == 0) {
    setpgid(0, 0);
    dup2(pipe_fds[1], STDOUT_FILENO);
    dup2(pipe_fds[1], STDERR_FILENO);
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  close(pipe_fds[1]);
  setpgid(pid, pid);

  CommandResult result;
  auto start = Clock::now();
  bool killed = false;
  char buffer[4096];
  int fd = pipe_fds[0];
  fcntl(fd, F_SETFL, O_NONBLOCK);

  bool open = true;
  while (open) {
    double remaining = timeout_seconds - seconds_since(start);
    if (remaining <= 0.0 && !killed) {
      kill(-pid, SIGKILL);
      killed = true;
    }
    struct pollfd pfd {fd, POLLIN, 0};
    int timeout_ms = killed ? 100 : static_cast<int>(std::min(remaining, 0.25) * 1000.0) + 1;
    int rc = poll(&pfd, 1, timeout_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc > 0) {
      for (;;) {
        ssize_t n = read(fd, buffer, sizeof(buffer));
        if (n > 0) {
          result.output.append(buffer, static_cast<std::size_t>(n));
          continue;
        }
        if (n == 0) open = false;
        if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) open = false;
        break;
      }
    }
  }
  close(fd);

  int status = 0;
  if (waitpid(pid, &status, 0) < 0)
    throw InfraError(std::string("waitpid failed: ") + std::strerror(errno));

  result.timed_out = killed;
  if (WIFEXITED(status))
    result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    result.exit_code = 128 + WTERMSIG(status);
  if (!killed && result.exit_code == 127 && result.output.empty())
    throw InfraError("command could not be started: " + command);
  return result;
}

}  // namespace rtlmut
