#include "maire/blackbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <random>

#include "maire/error.hpp"
#include "maire/log.hpp"

namespace maire {

std::vector<int> predict_batch(PredictionProvider& provider, const Matrix& points,
                               std::size_t expected_dims) {
  if (!points.empty() && points.cols() != expected_dims) {
    throw ArgumentError(fmt::format("points have dimension {}, expected {}", points.cols(), expected_dims));
  }
  auto labels = provider.predict(points);
  if (labels.size() != points.rows()) {
    throw ProviderError(fmt::format("{} returned {} labels for {} points", provider.describe(),
                                    labels.size(), points.rows()),
                        std::min(labels.size(), points.rows()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw ProviderError("negative label", i);
  }
  return labels;
}

// --- stored column ---------------------------------------------------------

StoredColumnProvider::StoredColumnProvider(const Matrix& rows, std::vector<int> labels)
    : labels_(std::move(labels)), rows_(rows) {
  if (labels_.size() != rows.rows()) {
    throw ArgumentError(fmt::format("stored labels: {} labels for {} rows", labels_.size(), rows.rows()));
  }
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    if (labels_[i] < 0) throw ArgumentError("stored labels must be non-negative");
    auto r = rows.row(i);
    by_row_.try_emplace(std::vector<double>(r.begin(), r.end()), labels_[i]);
  }
}

std::vector<int> StoredColumnProvider::predict(const Matrix& points) {
  // The table itself keeps its own labels, duplicates included.
  if (points == rows_) return labels_;
  std::vector<int> out(points.rows());
  std::vector<double> key;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    auto r = points.row(i);
    key.assign(r.begin(), r.end());
    auto it = by_row_.find(key);
    if (it == by_row_.end()) throw ProviderError("stored labels: point is not a row of the table", i);
    out[i] = it->second;
  }
  return out;
}

// --- synthetic shapes ------------------------------------------------------

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void validate_rect(const RectangleShape& r) {
  if (r.lower.size() != r.upper.size() || r.lower.empty()) {
    throw ArgumentError("rectangle: lower/upper dimension mismatch");
  }
  for (std::size_t j = 0; j < r.lower.size(); ++j) {
    if (!in_unit(r.lower[j]) || !in_unit(r.upper[j]) || r.lower[j] > r.upper[j]) {
      throw ArgumentError("rectangle: bounds must satisfy 0 <= lower <= upper <= 1");
    }
  }
}

bool rect_contains(const RectangleShape& r, std::span<const double> x) {
  for (std::size_t j = 0; j < r.lower.size(); ++j) {
    if (x[j] < r.lower[j] || x[j] > r.upper[j]) return false;
  }
  return true;
}

RectangleShape rect_from_json(const nlohmann::json& j) {
  return {j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>()};
}

}  // namespace

void SyntheticShape::validate() const {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RectangleShape>) {
          validate_rect(s);
        } else if constexpr (std::is_same_v<T, CircleShape>) {
          if (s.center.empty()) throw ArgumentError("circle: empty center");
          for (double c : s.center) {
            if (!in_unit(c)) throw ArgumentError("circle: center must lie in [0,1]");
          }
          if (!(s.radius > 0.0) || s.radius > 1.0) throw ArgumentError("circle: radius must lie in (0,1]");
        } else if constexpr (std::is_same_v<T, UnionShape>) {
          if (s.parts.empty()) throw ArgumentError("union: no rectangles");
          for (const auto& r : s.parts) validate_rect(r);
        } else {
          for (double v : s.levels) {
            if (!in_unit(v)) throw ArgumentError("discrete strip: levels must lie in [0,1]");
          }
        }
      },
      kind);
}

bool SyntheticShape::contains(std::span<const double> x) const {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RectangleShape>) {
          return rect_contains(s, x);
        } else if constexpr (std::is_same_v<T, CircleShape>) {
          double d2 = 0.0;
          for (std::size_t j = 0; j < s.center.size(); ++j) d2 += (x[j] - s.center[j]) * (x[j] - s.center[j]);
          return d2 <= s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, UnionShape>) {
          for (const auto& r : s.parts) {
            if (rect_contains(r, x)) return true;
          }
          return false;
        } else {
          for (double v : s.levels) {
            if (std::abs(x[s.axis] - v) < 1e-9) return true;
          }
          return false;
        }
      },
      kind);
}

SyntheticShape SyntheticShape::from_json(const nlohmann::json& j) {
  SyntheticShape shape;
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "rectangle") {
      shape.kind = rect_from_json(j);
    } else if (kind == "circle") {
      shape.kind = CircleShape{j.at("center").get<std::vector<double>>(), j.at("radius").get<double>()};
    } else if (kind == "union_of_rectangles") {
      UnionShape u;
      for (const auto& part : j.at("parts")) u.parts.push_back(rect_from_json(part));
      shape.kind = std::move(u);
    } else if (kind == "discrete_strip") {
      shape.kind = DiscreteStripShape{j.at("axis").get<std::size_t>(), j.at("levels").get<std::vector<double>>()};
    } else {
      throw ArgumentError(fmt::format("unknown oracle kind '{}'", kind));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(fmt::format("malformed oracle description: {}", e.what()));
  }
  shape.validate();
  return shape;
}

nlohmann::json SyntheticShape::to_json() const {
  return std::visit(
      [](const auto& s) -> nlohmann::json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, RectangleShape>) {
          return {{"kind", "rectangle"}, {"lower", s.lower}, {"upper", s.upper}};
        } else if constexpr (std::is_same_v<T, CircleShape>) {
          return {{"kind", "circle"}, {"center", s.center}, {"radius", s.radius}};
        } else if constexpr (std::is_same_v<T, UnionShape>) {
          nlohmann::json parts = nlohmann::json::array();
          for (const auto& r : s.parts) parts.push_back({{"lower", r.lower}, {"upper", r.upper}});
          return {{"kind", "union_of_rectangles"}, {"parts", parts}};
        } else {
          return {{"kind", "discrete_strip"}, {"axis", s.axis}, {"levels", s.levels}};
        }
      },
      kind);
}

SyntheticOracle::SyntheticOracle(SyntheticShape shape) : shape_(std::move(shape)) { shape_.validate(); }

std::vector<int> SyntheticOracle::predict(const Matrix& points) {
  std::vector<int> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) out[i] = (*this)(points.row(i));
  return out;
}

// --- external command ------------------------------------------------------

ExternalCommandProvider::ExternalCommandProvider(std::string command, double timeout_seconds)
    : command_(std::move(command)), timeout_seconds_(timeout_seconds) {
  if (command_.empty()) throw ArgumentError("empty predictor command");
  if (!(timeout_seconds_ > 0.0)) throw ArgumentError("predictor timeout must be positive");
}

ExternalCommandProvider::~ExternalCommandProvider() { stop(); }

void ExternalCommandProvider::start() {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    throw ProviderError(fmt::format("pipe: {}", std::strerror(errno)), 0);
  }
  const pid_t pid = fork();
  if (pid < 0) throw ProviderError(fmt::format("fork: {}", std::strerror(errno)), 0);
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  buffer_.clear();
  log().debug("started predictor '{}' as pid {}", command_, pid_);
}

void ExternalCommandProvider::stop() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (waitpid(pid_, &status, WNOHANG) != 0) {
        pid_ = -1;
        return;
      }
      usleep(10'000);
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void ExternalCommandProvider::write_all(const std::string& data, std::size_t point_index) {
  // A child that exits early would otherwise kill us with SIGPIPE.
  struct sigaction ignore {};
  struct sigaction previous {};
  ignore.sa_handler = SIG_IGN;
  sigaction(SIGPIPE, &ignore, &previous);
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      sigaction(SIGPIPE, &previous, nullptr);
      stop();
      throw ProviderError(fmt::format("writing to predictor failed: {}", std::strerror(errno)), point_index);
    }
    off += static_cast<std::size_t>(n);
  }
  sigaction(SIGPIPE, &previous, nullptr);
}

std::string ExternalCommandProvider::read_line(std::size_t point_index) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration<double>(timeout_seconds_);
  char chunk[65536];
  while (true) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (remaining <= 0) {
      stop();
      throw ProviderError(fmt::format("predictor timed out after {} s", timeout_seconds_), point_index);
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = poll(&pfd, 1, static_cast<int>(remaining));
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) continue;
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      int status = 0;
      std::string why = "predictor closed its output";
      if (pid_ > 0 && waitpid(pid_, &status, 0) == pid_) {
        pid_ = -1;
        if (WIFEXITED(status)) why = fmt::format("predictor exited with status {}", WEXITSTATUS(status));
        if (WIFSIGNALED(status)) why = fmt::format("predictor killed by signal {}", WTERMSIG(status));
      }
      stop();
      throw ProviderError(why, point_index);
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::vector<int> ExternalCommandProvider::predict(const Matrix& points) {
  std::vector<int> out;
  out.reserve(points.rows());
  for (std::size_t begin = 0; begin < points.rows(); begin += kChunkSize) {
    const std::size_t end = std::min(points.rows(), begin + kChunkSize);
    if (pid_ < 0) start();
    nlohmann::json request = nlohmann::json::array();
    for (std::size_t i = begin; i < end; ++i) {
      auto r = points.row(i);
      request.push_back(std::vector<double>(r.begin(), r.end()));
    }
    write_all(request.dump() + "\n", begin);
    const std::string line = read_line(begin);
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw ProviderError(fmt::format("malformed predictor reply '{}'", line.substr(0, 80)), begin);
    }
    if (!reply.is_array() || reply.size() != end - begin) {
      throw ProviderError(fmt::format("predictor replied with {} labels for {} points",
                                      reply.is_array() ? reply.size() : 0, end - begin),
                          begin);
    }
    for (std::size_t i = 0; i < reply.size(); ++i) {
      if (!reply[i].is_number_integer() || reply[i].get<long long>() < 0) {
        throw ProviderError("predictor label is not a non-negative integer", begin + i);
      }
      out.push_back(reply[i].get<int>());
    }
  }
  return out;
}

// --- perturbations ---------------------------------------------------------

Matrix sample_perturbations(std::span<const double> base, double flip_prob, std::size_t count,
                            std::uint64_t seed) {
  if (count == 0) throw ArgumentError("perturbation count must be positive");
  if (!(flip_prob >= 0.0 && flip_prob < 1.0)) throw ArgumentError("flip probability must lie in [0, 1)");
  for (double b : base) {
    if (b != 0.0 && b != 1.0) throw ArgumentError("perturbation base must be a 0/1 vector");
  }
  Matrix out(count, base.size());
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(flip_prob);
  for (std::size_t j = 0; j < base.size(); ++j) out(0, j) = base[j];
  for (std::size_t i = 1; i < count; ++i) {
    for (std::size_t j = 0; j < base.size(); ++j) {
      out(i, j) = flip(rng) ? 1.0 - base[j] : base[j];
    }
  }
  return out;
}

BooleanPerturbationProvider::BooleanPerturbationProvider(std::vector<double> base,
                                                         PerturbationConfig config,
                                                         std::shared_ptr<PredictionProvider> inner)
    : base_(std::move(base)), config_(config), inner_(std::move(inner)) {
  if (!inner_) throw ArgumentError("boolean perturbation needs an inner provider");
  if (!(config_.flip_prob > 0.0 && config_.flip_prob < 1.0)) {
    throw ArgumentError("flip probability must lie in (0, 1)");
  }
  if (config_.count == 0) throw ArgumentError("perturbation count must be positive");
}

Matrix BooleanPerturbationProvider::samples() const {
  return sample_perturbations(base_, config_.flip_prob, config_.count, config_.seed);
}

}  // namespace maire
