#include "dta/deployers.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "dta/linmodel.hpp"
#include "dta/rng.hpp"

namespace dta {

const char* to_string(DeployFailure::Kind k) {
  switch (k) {
    case DeployFailure::Kind::kOverflow: return "overflow";
    case DeployFailure::Kind::kProcessFailed: return "process-failed";
    case DeployFailure::Kind::kParseFailed: return "parse-failed";
    case DeployFailure::Kind::kTimeout: return "timeout";
  }
  return "unknown";
}

SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "LIN") return SyntheticKind::kLin;
  if (s == "POLY") return SyntheticKind::kPoly;
  if (s == "EXP") return SyntheticKind::kExp;
  if (s == "EXPABS") return SyntheticKind::kExpAbs;
  if (s == "EXPSQ") return SyntheticKind::kExpSq;
  if (s == "GAUSS") return SyntheticKind::kGauss;
  if (s == "WAVE") return SyntheticKind::kWave;
  if (s == "HAT") return SyntheticKind::kHat;
  throw std::invalid_argument("unknown synthetic function kind: " + s);
}

const char* to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::kLin: return "LIN";
    case SyntheticKind::kPoly: return "POLY";
    case SyntheticKind::kExp: return "EXP";
    case SyntheticKind::kExpAbs: return "EXPABS";
    case SyntheticKind::kExpSq: return "EXPSQ";
    case SyntheticKind::kGauss: return "GAUSS";
    case SyntheticKind::kWave: return "WAVE";
    case SyntheticKind::kHat: return "HAT";
  }
  return "?";
}

double synthetic_gain(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::kLin: return 1.0;
    case SyntheticKind::kPoly: return 1.0;
    case SyntheticKind::kExp: return 6.0;
    case SyntheticKind::kExpAbs: return 6.0;
    case SyntheticKind::kExpSq: return 4.0;
    case SyntheticKind::kGauss: return 150.0;
    case SyntheticKind::kWave: return 10.0;
    case SyntheticKind::kHat: return 200.0;
  }
  return 1.0;
}

SyntheticFunction SyntheticFunction::generate(SyntheticKind kind, std::size_t n_dims,
                                              std::uint64_t seed) {
  if (n_dims == 0) throw std::invalid_argument("SyntheticFunction: zero dimensions");
  SyntheticFunction fn;
  fn.kind = kind;
  Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(kind)));
  const double gain = synthetic_gain(kind);
  fn.coeffs.resize(n_dims);
  for (double& a : fn.coeffs) a = gain * (0.25 + 0.75 * rng.uniform01());
  return fn;
}

SyntheticFunction SyntheticFunction::with_coeffs(SyntheticKind kind, std::vector<double> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("SyntheticFunction: empty coefficient vector");
  return SyntheticFunction{kind, std::move(coeffs)};
}

double SyntheticFunction::f1(const std::vector<double>& u) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * u[i];
  return acc;
}

double SyntheticFunction::f2(const std::vector<double>& u) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * u[i] * u[i];
  return acc;
}

double SyntheticFunction::eval(const std::vector<double>& u) const {
  switch (kind) {
    case SyntheticKind::kLin: return f1(u);
    case SyntheticKind::kPoly: return f2(u);
    case SyntheticKind::kExp: return std::exp(f1(u));
    case SyntheticKind::kExpAbs: return std::exp(std::abs(f1(u)));
    case SyntheticKind::kExpSq: {
      const double v = f1(u);
      return std::exp(-v * v);
    }
    case SyntheticKind::kGauss: return std::exp(-f2(u));
    case SyntheticKind::kWave: {
      const double v = f1(u);
      return std::cos(v) * std::exp(v);
    }
    case SyntheticKind::kHat: {
      const double v = f2(u);
      return v * std::exp(-v);
    }
  }
  throw std::logic_error("SyntheticFunction::eval: bad kind");
}

namespace {

void unit_box_map(const DeploymentSpace& space, std::vector<double>& lo,
                  std::vector<double>& inv_range) {
  lo.resize(space.num_dims());
  inv_range.resize(space.num_dims());
  for (std::size_t i = 0; i < space.num_dims(); ++i) {
    const auto& lv = space.dim(i).levels;
    lo[i] = lv.front();
    const double range = lv.back() - lv.front();
    inv_range[i] = range > 0.0 ? 1.0 / range : 0.0;
  }
}

}  // namespace

SyntheticDeployer::SyntheticDeployer(const DeploymentSpace& space, SyntheticFunction fn)
    : fn_(std::move(fn)) {
  if (fn_.coeffs.size() != space.num_dims())
    throw std::invalid_argument("SyntheticDeployer: coefficient count != dimension count");
  unit_box_map(space, lo_, inv_range_);
}

std::vector<double> SyntheticDeployer::scale_point(const Point& p) const {
  std::vector<double> u(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) u[i] = (p[i] - lo_[i]) * inv_range_[i];
  return u;
}

DeployResult SyntheticDeployer::evaluate(const Point& p) {
  if (p.size() != fn_.coeffs.size())
    return DeployResult::fail(DeployFailure::Kind::kParseFailed, "dimension mismatch");
  const double v = fn_.eval(scale_point(p));
  if (!std::isfinite(v))
    return DeployResult::fail(DeployFailure::Kind::kOverflow,
                              "non-finite synthetic function value");
  return DeployResult::success(v);
}

PlaneBumpDeployer::PlaneBumpDeployer(const DeploymentSpace& space, std::uint64_t seed,
                                     double amplitude, double sigma)
    : amplitude_(amplitude), sigma_(sigma) {
  std::vector<double> inv_range;
  unit_box_map(space, lo_, inv_range);
  range_.resize(space.num_dims());
  for (std::size_t i = 0; i < space.num_dims(); ++i)
    range_[i] = inv_range[i] > 0.0 ? 1.0 / inv_range[i] : 0.0;
  Rng rng(Rng::mix(seed, 0x62756d70ULL));
  center_.resize(space.num_dims());
  for (double& c : center_) c = 0.25 + 0.5 * rng.uniform01();
}

DeployResult PlaneBumpDeployer::evaluate(const Point& p) {
  double plane = 0.0;
  double dist2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double u = range_[i] > 0.0 ? (p[i] - lo_[i]) / range_[i] : 0.0;
    if (i == 0) plane += 0.8 * u;
    if (i == 1) plane += 0.2 * u;
    const double d = u - center_[i];
    dist2 += d * d;
  }
  const double v = plane + amplitude_ * std::exp(-dist2 / (2.0 * sigma_ * sigma_));
  return DeployResult::success(v);
}

std::vector<std::pair<double, double>> PlaneBumpDeployer::bump_box_raw() const {
  std::vector<std::pair<double, double>> box;
  for (std::size_t i = 0; i < center_.size(); ++i) {
    const double lo = lo_[i] + (center_[i] - 3.0 * sigma_) * range_[i];
    const double hi = lo_[i] + (center_[i] + 3.0 * sigma_) * range_[i];
    box.emplace_back(lo, hi);
  }
  return box;
}

// ---------------------------------------------------------------------------
// GridReplay
// ---------------------------------------------------------------------------

GridReplay::GridReplay(DeploymentSpace space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string describe_point(const DeploymentSpace& space, const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s=%.17g", space.dim(i).name.c_str(), p[i]);
    s += buf;
  }
  return s + ")";
}

double parse_double_strict(const std::string& s, bool* ok) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  *ok = end != s.c_str() && *end == '\0' && errno != ERANGE && std::isfinite(v);
  return v;
}

}  // namespace

GridReplay GridReplay::load(const std::string& csv_path, const DeploymentSpace& space) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("replay: cannot open " + csv_path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("replay: empty file " + csv_path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() != space.num_dims() + 1 || header.back() != "metric")
    throw std::runtime_error("replay: header must be the dimension names followed by 'metric'");
  for (std::size_t i = 0; i < space.num_dims(); ++i)
    if (header[i] != space.dim(i).name)
      throw std::runtime_error("replay: header column '" + header[i] + "' does not match dimension '" +
                               space.dim(i).name + "'");

  std::vector<double> values(space.cardinality(), 0.0);
  std::vector<bool> seen(space.cardinality(), false);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != space.num_dims() + 1)
      throw std::runtime_error("replay: wrong column count at line " + std::to_string(line_no));
    Point p(space.num_dims());
    bool ok = false;
    for (std::size_t i = 0; i < space.num_dims(); ++i) {
      p[i] = parse_double_strict(fields[i], &ok);
      if (!ok)
        throw std::runtime_error("replay: bad coordinate at line " + std::to_string(line_no));
    }
    const auto rank = space.try_rank(p);
    if (!rank)
      throw std::runtime_error("replay: off-grid point " + describe_point(space, p) + " at line " +
                               std::to_string(line_no));
    if (seen[*rank])
      throw std::runtime_error("replay: duplicate point " + describe_point(space, p) + " at line " +
                               std::to_string(line_no));
    values[*rank] = parse_double_strict(fields.back(), &ok);
    if (!ok)
      throw std::runtime_error("replay: non-numeric metric at line " + std::to_string(line_no));
    seen[*rank] = true;
  }
  for (std::uint64_t r = 0; r < space.cardinality(); ++r) {
    if (!seen[r])
      throw std::runtime_error("replay: missing grid point " +
                               describe_point(space, space.point_at(r)));
  }
  return GridReplay(space, std::move(values));
}

DeployResult GridReplay::evaluate(const Point& p) {
  const auto rank = space_.try_rank(p);
  if (!rank) return DeployResult::fail(DeployFailure::Kind::kParseFailed, "point not on grid");
  return DeployResult::success(values_[*rank]);
}

std::uint64_t dump_grid_csv(const DeploymentSpace& space, Deployer& deployer,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < space.num_dims(); ++i) out << space.dim(i).name << ',';
  out << "metric\n";
  std::uint64_t rows = 0;
  char buf[64];
  space.for_each_point([&](const Point& p, std::uint64_t) {
    const DeployResult r = deployer.evaluate(p);
    if (!r.ok())
      throw std::runtime_error("dump_grid_csv: deployment failed at " +
                               describe_point(space, p) + ": " + r.failure->message);
    for (double c : p) {
      std::snprintf(buf, sizeof(buf), "%.17g", c);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", *r.value);
    out << buf << '\n';
    ++rows;
  });
  return rows;
}

// ---------------------------------------------------------------------------
// CommandDeployer
// ---------------------------------------------------------------------------

CommandDeployer::CommandDeployer(const DeploymentSpace& space, std::string command_template,
                                 double timeout_secs)
    : timeout_secs_(timeout_secs) {
  for (std::size_t i = 0; i < space.num_dims(); ++i) dim_names_.push_back(space.dim(i).name);
  std::stringstream ss(command_template);
  std::string token;
  while (ss >> token) argv_template_.push_back(token);
  if (argv_template_.empty())
    throw std::invalid_argument("CommandDeployer: empty command template");
  for (const std::string& t : argv_template_) {
    std::size_t pos = 0;
    while ((pos = t.find('{', pos)) != std::string::npos) {
      const std::size_t end = t.find('}', pos);
      if (end == std::string::npos)
        throw std::invalid_argument("CommandDeployer: unterminated placeholder in '" + t + "'");
      const std::string name = t.substr(pos + 1, end - pos - 1);
      if (std::find(dim_names_.begin(), dim_names_.end(), name) == dim_names_.end())
        throw std::invalid_argument("CommandDeployer: unknown dimension '" + name + "' in template");
      pos = end + 1;
    }
  }
}

namespace {

std::string format_value(double v) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[64];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return std::string(buf, len);
}

}  // namespace

DeployResult CommandDeployer::evaluate(const Point& p) {
  std::vector<std::string> argv;
  for (const std::string& t : argv_template_) {
    std::string arg = t;
    for (std::size_t i = 0; i < dim_names_.size(); ++i) {
      const std::string pat = "{" + dim_names_[i] + "}";
      std::size_t pos = 0;
      while ((pos = arg.find(pat, pos)) != std::string::npos) {
        const std::string val = format_value(p[i]);
        arg.replace(pos, pat.size(), val);
        pos += val.size();
      }
    }
    argv.push_back(std::move(arg));
  }

  int fds[2];
  if (pipe(fds) != 0)
    return DeployResult::fail(DeployFailure::Kind::kProcessFailed, "pipe() failed");
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    return DeployResult::fail(DeployFailure::Kind::kProcessFailed, "fork() failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    close(fds[0]);
    dup2(fds[1], STDOUT_FILENO);
    close(fds[1]);
    std::vector<char*> cargv;
    for (std::string& a : argv) cargv.push_back(a.data());
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
  }
  close(fds[1]);

  std::string output;
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_secs_);
  bool timed_out = false;
  char buf[4096];
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const int wait_ms =
        now >= deadline
            ? 0
            : static_cast<int>(
                  std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) +
                  1;
    struct pollfd pfd{fds[0], POLLIN, 0};
    const int pr = poll(&pfd, 1, wait_ms);
    if (pr > 0) {
      const ssize_t n = read(fds[0], buf, sizeof(buf));
      if (n > 0) {
        output.append(buf, static_cast<std::size_t>(n));
        continue;
      }
      break;  // EOF
    }
    if (pr == 0) {
      timed_out = true;
      break;
    }
    if (errno != EINTR) break;
  }
  close(fds[0]);

  if (timed_out) {
    kill(-pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    return DeployResult::fail(DeployFailure::Kind::kTimeout,
                              "command exceeded " + std::to_string(timeout_secs_) + "s");
  }
  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    return DeployResult::fail(DeployFailure::Kind::kProcessFailed,
                              "command exited with status " +
                                  std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));

  // Last non-empty line of stdout is the metric.
  std::string last;
  std::stringstream ss(output);
  std::string line;
  while (std::getline(ss, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) last = line;
  }
  if (last.empty())
    return DeployResult::fail(DeployFailure::Kind::kParseFailed, "no output to parse");
  bool ok = false;
  const double v = parse_double_strict(last, &ok);
  if (!ok)
    return DeployResult::fail(DeployFailure::Kind::kParseFailed,
                              "cannot parse metric from '" + last + "'");
  return DeployResult::success(v);
}

double complexity_r2(const DeploymentSpace& space, Deployer& deployer) {
  std::vector<LabeledSample> samples;
  samples.reserve(space.cardinality());
  space.for_each_point([&](const Point& p, std::uint64_t) {
    const DeployResult r = deployer.evaluate(p);
    if (!r.ok())
      throw std::runtime_error(std::string("complexity_r2: deployment failed: ") +
                               r.failure->message);
    samples.push_back({p, *r.value});
  });
  return r_squared(fit_ols(samples), samples);
}

}  // namespace dta
