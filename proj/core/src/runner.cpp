#include "puma/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <fstream>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "puma/annotations.hpp"
#include "puma/error.hpp"
#include "puma/mask_io.hpp"

namespace puma {

namespace {

constexpr std::size_t kStderrTailBytes = 4096;

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

void validate_template(const std::string& command_template) {
  if (command_template.find("{input_image}") == std::string::npos ||
      command_template.find("{output_dir}") == std::string::npos)
    fail(errc::invalid_config,
         "command template must contain {input_image} and {output_dir} placeholders");
}

void append_tail(std::string& tail, const char* data, std::size_t length) {
  tail.append(data, length);
  if (tail.size() > kStderrTailBytes) tail.erase(0, tail.size() - kStderrTailBytes);
}

struct ChildResult {
  bool timed_out = false;
  int exit_code = 0;
  std::string stderr_tail;
};

// Run `command` through /bin/sh with stderr piped back. The child leads its
// own process group so a timeout kill reaches grandchildren too.
//
// The pipe is O_CLOEXEC: cases run from a thread pool, and a concurrently
// forked sibling would otherwise inherit this pipe's write end and keep it
// open for its whole lifetime, turning an exited child into a phantom
// timeout. For the same reason EOF is not awaited once the child is reaped;
// whatever is buffered is drained and anything a lingering grandchild might
// write later is dropped.
ChildResult run_child(const std::string& command, double timeout_seconds) {
  int pipe_fds[2];
  if (pipe2(pipe_fds, O_CLOEXEC) != 0) fail(errc::io_error, "pipe2() failed");

  const pid_t pid = fork();
  if (pid < 0) {
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    fail(errc::io_error, "fork() failed");
  }

  if (pid == 0) {
    setpgid(0, 0);
    dup2(pipe_fds[1], STDERR_FILENO);  // dup2 clears CLOEXEC on the new fd
    close(pipe_fds[0]);
    close(pipe_fds[1]);
    const int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) {
      dup2(devnull, STDOUT_FILENO);
      close(devnull);
    }
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  close(pipe_fds[1]);
  fcntl(pipe_fds[0], F_SETFL, O_NONBLOCK);
  ChildResult result;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_seconds);

  char buffer[4096];
  bool pipe_open = true;
  bool child_reaped = false;
  int wait_status = 0;

  // nonblocking: reads until the buffer is empty (EAGAIN) or EOF
  auto drain_available = [&]() {
    while (pipe_open) {
      const ssize_t n = read(pipe_fds[0], buffer, sizeof(buffer));
      if (n > 0) {
        append_tail(result.stderr_tail, buffer, static_cast<std::size_t>(n));
        continue;
      }
      if (n == 0) pipe_open = false;
      if (n < 0 && errno == EINTR) continue;
      break;
    }
  };

  while (true) {
    if (pipe_open) {
      pollfd pfd{pipe_fds[0], POLLIN, 0};
      if (poll(&pfd, 1, 50) > 0) drain_available();
    }

    if (!child_reaped) {
      const pid_t reaped = waitpid(pid, &wait_status, WNOHANG);
      if (reaped == pid) child_reaped = true;
    }
    if (child_reaped) {
      drain_available();
      break;
    }

    if (std::chrono::steady_clock::now() >= deadline) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      while (waitpid(pid, &wait_status, 0) < 0 && errno == EINTR) {
      }
      drain_available();
      break;
    }

    if (!pipe_open) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  close(pipe_fds[0]);

  if (!result.timed_out) {
    if (WIFEXITED(wait_status)) {
      result.exit_code = WEXITSTATUS(wait_status);
    } else if (WIFSIGNALED(wait_status)) {
      result.exit_code = 128 + WTERMSIG(wait_status);
    }
  }
  return result;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

const char* case_status_name(CaseStatus status) {
  switch (status) {
    case CaseStatus::ok: return "ok";
    case CaseStatus::nonzero_exit: return "nonzero_exit";
    case CaseStatus::timeout: return "timeout";
    case CaseStatus::missing_output: return "missing_output";
    case CaseStatus::parse_error: return "parse_error";
  }
  return "unknown";
}

CaseOutcome run_case(const RunnerConfig& config, const RunnerCase& item,
                     const Taxonomy& nuclei_taxonomy) {
  validate_template(config.command_template);
  if (!(config.timeout_seconds > 0.0)) fail(errc::invalid_config, "timeout must be > 0");

  CaseOutcome outcome;
  outcome.case_id = item.case_id;

  const std::filesystem::path output_dir = config.work_dir / item.case_id;
  std::error_code ec;
  std::filesystem::remove_all(output_dir, ec);
  std::filesystem::create_directories(output_dir, ec);
  if (ec) fail(errc::io_error, "cannot create " + output_dir.string());

  std::string command = substitute(config.command_template, "{input_image}",
                                   item.input_image.string());
  command = substitute(command, "{output_dir}", output_dir.string());
  command = substitute(command, "{case_id}", item.case_id);

  const auto started = std::chrono::steady_clock::now();
  const ChildResult child = run_child(command, config.timeout_seconds);
  outcome.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  outcome.stderr_tail = child.stderr_tail;
  outcome.exit_code = child.exit_code;

  if (child.timed_out) {
    outcome.status = CaseStatus::timeout;
    outcome.detail = "killed after " + std::to_string(config.timeout_seconds) + " s";
    return outcome;
  }
  if (child.exit_code != 0) {
    outcome.status = CaseStatus::nonzero_exit;
    outcome.detail = "exit code " + std::to_string(child.exit_code);
    return outcome;
  }

  const std::filesystem::path tissue_path = output_dir / "tissue.png";
  const std::filesystem::path nuclei_path = output_dir / "nuclei.json";
  if ((config.expect_tissue && !std::filesystem::exists(tissue_path)) ||
      (config.expect_nuclei && !std::filesystem::exists(nuclei_path))) {
    outcome.status = CaseStatus::missing_output;
    outcome.detail = "expected outputs missing in " + output_dir.string();
    return outcome;
  }

  try {
    if (config.expect_tissue) outcome.tissue = read_mask_file(tissue_path);
    if (config.expect_nuclei) {
      const AnnotationSet set =
          parse_annotation_file(read_file(nuclei_path), nuclei_taxonomy, AnnotationLayer::nuclei,
                                item.case_id, config.case_width, config.case_height);
      outcome.nuclei = extract_nuclei(set, nuclei_taxonomy);
    }
  } catch (const Error& e) {
    outcome.status = CaseStatus::parse_error;
    outcome.detail = e.what();
    outcome.tissue.reset();
    outcome.nuclei.reset();
    return outcome;
  }

  outcome.status = CaseStatus::ok;
  return outcome;
}

RunSummary run_dataset(const RunnerConfig& config, const std::vector<RunnerCase>& cases,
                       const Taxonomy& nuclei_taxonomy) {
  validate_template(config.command_template);
  if (config.max_parallel < 1) fail(errc::invalid_config, "max_parallel must be >= 1");
  if (!(config.timeout_seconds > 0.0)) fail(errc::invalid_config, "timeout must be > 0");

  RunSummary summary;
  summary.outcomes.resize(cases.size());
  const auto started = std::chrono::steady_clock::now();

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cases.size()) return;
      try {
        summary.outcomes[i] = run_case(config, cases[i], nuclei_taxonomy);
      } catch (const std::exception& e) {
        // harness-side failures stay isolated to their case
        CaseOutcome& outcome = summary.outcomes[i];
        outcome.case_id = cases[i].case_id;
        outcome.status = CaseStatus::parse_error;
        outcome.detail = std::string("harness: ") + e.what();
      }
    }
  };

  const int thread_count =
      std::min<int>(config.max_parallel, static_cast<int>(std::max<std::size_t>(cases.size(), 1)));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(thread_count));
  for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  summary.total_wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  for (const CaseOutcome& outcome : summary.outcomes) {
    if (outcome.status == CaseStatus::ok) {
      ++summary.ok_count;
    } else {
      ++summary.failed_count;
    }
  }
  return summary;
}

}  // namespace puma
