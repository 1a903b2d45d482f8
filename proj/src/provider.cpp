#include "lbk/provider.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include "json.hpp"
#include <sstream>
#include <vector>

#include "lbk/error.hpp"

extern char** environ;

namespace lbk {
namespace {

using nlohmann::json;

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<std::string> split_whitespace(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

// Owns a pipe end.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorKind::kProviderFailure,
                std::string("pipe() failed: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

// Writes everything, tolerating a child that exits without reading. SIGPIPE
// is blocked on this thread for the duration and any pending one discarded.
void write_all_nosigpipe(int fd, const std::string& data) {
  sigset_t pipe_set;
  sigset_t old_set;
  sigemptyset(&pipe_set);
  sigaddset(&pipe_set, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &pipe_set, &old_set);

  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;  // EPIPE: the exit status decides success
    }
    written += static_cast<std::size_t>(n);
  }

  const timespec zero{0, 0};
  while (sigtimedwait(&pipe_set, nullptr, &zero) > 0) {
  }
  pthread_sigmask(SIG_SETMASK, &old_set, nullptr);
}

std::string read_all(int fd) {
  std::string out;
  char buf[4096];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::kProviderFailure,
                  std::string("reading provider output failed: ") +
                      std::strerror(errno));
    }
    if (n == 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace

std::string to_request_json(const ParaphraseRequest& request) {
  const json body = {
      {"task", "paraphrase"},
      {"text", request.text},
      {"l_max", request.params.l_max},
      {"l_min", request.params.l_min},
      {"length_penalty", request.params.length_penalty},
      {"num_beams", request.params.num_beams},
  };
  return body.dump();
}

ProviderBinding ProviderBinding::parse(std::string_view spec) {
  ProviderBinding binding{ProviderKind::kExternalCommand, {}};
  if (spec.starts_with("fixture:")) {
    binding = {ProviderKind::kFixtureFile, std::string(spec.substr(8))};
  } else if (spec.starts_with("command:")) {
    binding = {ProviderKind::kExternalCommand, std::string(spec.substr(8))};
  } else if (ends_with(spec, ".json")) {
    binding = {ProviderKind::kFixtureFile, std::string(spec)};
  } else {
    binding.locator = std::string(spec);
  }
  if (binding.locator.empty()) {
    throw Error(ErrorKind::kProviderUnavailable, "empty provider locator");
  }
  return binding;
}

FixtureParaphraser::FixtureParaphraser(std::string path)
    : path_(std::move(path)) {}

void FixtureParaphraser::load() {
  std::ifstream in(path_);
  if (!in) {
    throw Error(ErrorKind::kProviderUnavailable,
                "fixture provider file '" + path_ + "' cannot be opened");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kProviderFailure,
                "fixture provider file '" + path_ + "' is not valid JSON: " +
                    e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::kProviderFailure,
                "fixture provider file '" + path_ +
                    "' must hold an object mapping input to output text");
  }
  std::unordered_map<std::string, std::string> table;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) {
      throw Error(ErrorKind::kProviderFailure,
                  "fixture entry for '" + key + "' is not a string");
    }
    table.emplace(key, value.get<std::string>());
  }
  table_ = std::move(table);
}

std::string FixtureParaphraser::paraphrase(const ParaphraseRequest& request) {
  if (!table_) load();
  const auto it = table_->find(request.text);
  if (it == table_->end()) {
    throw Error(ErrorKind::kProviderFailure,
                "fixture provider '" + path_ + "' has no entry for \"" +
                    request.text + "\"");
  }
  return it->second;
}

CommandParaphraser::CommandParaphraser(std::string command_line)
    : command_line_(std::move(command_line)) {}

std::string CommandParaphraser::paraphrase(const ParaphraseRequest& request) {
  const std::vector<std::string> args = split_whitespace(command_line_);
  if (args.empty()) {
    throw Error(ErrorKind::kProviderUnavailable, "empty provider command");
  }
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  auto [stdin_read, stdin_write] = make_pipe();
  auto [stdout_read, stdout_write] = make_pipe();

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, stdin_read.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, stdout_write.get(), STDOUT_FILENO);

  pid_t pid = -1;
  const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(),
                              environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw Error(ErrorKind::kProviderUnavailable,
                "cannot run provider command '" + args[0] +
                    "': " + std::strerror(rc));
  }
  stdin_read.reset();
  stdout_write.reset();

  write_all_nosigpipe(stdin_write.get(), to_request_json(request));
  stdin_write.reset();
  std::string output;
  try {
    output = read_all(stdout_read.get());
  } catch (...) {
    int ignored;
    ::waitpid(pid, &ignored, 0);
    throw;
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      throw Error(ErrorKind::kProviderFailure,
                  std::string("waitpid failed: ") + std::strerror(errno));
    }
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const std::string how =
        WIFEXITED(status) ? "exited with status " +
                                std::to_string(WEXITSTATUS(status))
                          : "was terminated by a signal";
    throw Error(ErrorKind::kProviderFailure,
                "provider command '" + args[0] + "' " + how);
  }

  json reply;
  try {
    reply = json::parse(output);
  } catch (const json::exception&) {
    throw Error(ErrorKind::kProviderFailure,
                "provider command '" + args[0] + "' wrote malformed JSON");
  }
  if (!reply.is_object() || !reply.contains("text") ||
      !reply["text"].is_string()) {
    throw Error(ErrorKind::kProviderFailure,
                "provider reply lacks a string \"text\" field");
  }
  return reply["text"].get<std::string>();
}

std::string UnavailableParaphraser::paraphrase(const ParaphraseRequest&) {
  throw Error(ErrorKind::kProviderUnavailable,
              "no paraphrase provider configured");
}

std::unique_ptr<Paraphraser> make_paraphraser(const ProviderBinding& binding) {
  if (binding.kind == ProviderKind::kFixtureFile) {
    return std::make_unique<FixtureParaphraser>(binding.locator);
  }
  return std::make_unique<CommandParaphraser>(binding.locator);
}

}  // namespace lbk
