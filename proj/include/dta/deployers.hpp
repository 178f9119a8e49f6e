#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dta/space.hpp"

namespace dta {

struct DeployFailure {
  enum class Kind { kOverflow, kProcessFailed, kParseFailed, kTimeout };
  Kind kind = Kind::kProcessFailed;
  std::string message;
};

const char* to_string(DeployFailure::Kind k);

struct DeployResult {
  std::optional<double> value;
  std::optional<DeployFailure> failure;

  bool ok() const { return value.has_value(); }
  static DeployResult success(double v) { return {v, std::nullopt}; }
  static DeployResult fail(DeployFailure::Kind k, std::string msg) {
    return {std::nullopt, DeployFailure{k, std::move(msg)}};
  }
};

/// Black-box evaluation backend: maps a grid point to a measured
/// performance value or a typed failure.
class Deployer {
 public:
  virtual ~Deployer() = default;
  virtual DeployResult evaluate(const Point& p) = 0;
  virtual bool concurrent_safe() const { return true; }
  virtual bool deterministic() const { return true; }
};

// ---------------------------------------------------------------------------
// Synthetic performance functions
// ---------------------------------------------------------------------------

enum class SyntheticKind { kLin, kPoly, kExp, kExpAbs, kExpSq, kGauss, kWave, kHat };

SyntheticKind synthetic_kind_from_string(const std::string& s);
const char* to_string(SyntheticKind k);

/// Coefficient scale applied per kind when generating random coefficients,
/// chosen so each function lands in its intended complexity class on the
/// unit-box coordinates.
double synthetic_gain(SyntheticKind k);

/// The family
///   f1 = sum a_i u_i            f2 = sum a_i u_i^2
///   f3 = e^f1    f4 = e^|f1|    f5 = e^(-f1^2)
///   f6 = e^(-f2) f7 = cos(f1) e^f1          f8 = f2 e^(-f2)
/// evaluated on coordinates scaled to the unit box.
struct SyntheticFunction {
  SyntheticKind kind = SyntheticKind::kLin;
  std::vector<double> coeffs;

  /// Random coefficients a_i = gain(kind) * U[0.25, 1], seeded.
  static SyntheticFunction generate(SyntheticKind kind, std::size_t n_dims, std::uint64_t seed);
  static SyntheticFunction with_coeffs(SyntheticKind kind, std::vector<double> coeffs);

  double f1(const std::vector<double>& u) const;
  double f2(const std::vector<double>& u) const;
  double eval(const std::vector<double>& u) const;
};

/// Deployer evaluating a synthetic function. Raw grid coordinates are
/// mapped affinely to [0,1] per dimension before evaluation; the tree and
/// every caller keep working in raw units.
class SyntheticDeployer : public Deployer {
 public:
  SyntheticDeployer(const DeploymentSpace& space, SyntheticFunction fn);

  DeployResult evaluate(const Point& p) override;

  std::vector<double> scale_point(const Point& p) const;
  const SyntheticFunction& function() const { return fn_; }

 private:
  SyntheticFunction fn_;
  std::vector<double> lo_;
  std::vector<double> inv_range_;
};

/// Linear plane with a localized Gaussian bump, in unit-box coordinates:
///   f(u) = 0.8 u1 + 0.2 u2 + amplitude * exp(-|u - c|^2 / (2 sigma^2)),
/// bump center c drawn per seed inside [0.25, 0.75]^n.
class PlaneBumpDeployer : public Deployer {
 public:
  PlaneBumpDeployer(const DeploymentSpace& space, std::uint64_t seed, double amplitude = 2.0,
                    double sigma = 0.05);

  DeployResult evaluate(const Point& p) override;

  const std::vector<double>& bump_center_scaled() const { return center_; }
  double sigma() const { return sigma_; }
  /// The 3-sigma box around the bump in raw grid units, one (lo,hi) per dim.
  std::vector<std::pair<double, double>> bump_box_raw() const;

 private:
  std::vector<double> center_;
  double amplitude_;
  double sigma_;
  std::vector<double> lo_;
  std::vector<double> range_;
};

// ---------------------------------------------------------------------------
// Ground-truth grid replay
// ---------------------------------------------------------------------------

/// Exhaustively measured ground truth loaded from CSV (columns: dimension
/// names in space order, then `metric`; one row per grid point). Loading
/// fails loudly on coverage gaps, duplicates and unparsable values.
class GridReplay : public Deployer {
 public:
  static GridReplay load(const std::string& csv_path, const DeploymentSpace& space);

  DeployResult evaluate(const Point& p) override;
  std::size_t size() const { return values_.size(); }

 private:
  GridReplay(DeploymentSpace space, std::vector<double> values);
  DeploymentSpace space_;
  std::vector<double> values_;
};

/// Writes the full ground-truth grid of a deployer to CSV (17 significant
/// digits, bitwise round-trip). Returns the number of rows written.
std::uint64_t dump_grid_csv(const DeploymentSpace& space, Deployer& deployer,
                            const std::string& path);

// ---------------------------------------------------------------------------
// External command deployer
// ---------------------------------------------------------------------------

/// Runs a user command per evaluation, substituting {dimension} placeholders
/// argument-by-argument (never through a shell). The last line of standard
/// output is parsed as the metric.
class CommandDeployer : public Deployer {
 public:
  CommandDeployer(const DeploymentSpace& space, std::string command_template,
                  double timeout_secs = 60.0);

  DeployResult evaluate(const Point& p) override;
  bool deterministic() const override { return false; }

 private:
  std::vector<std::string> argv_template_;
  std::vector<std::string> dim_names_;
  double timeout_secs_;
};

/// R-squared of the best full-grid linear fit; classifies the complexity of
/// a deterministic deployer's performance function.
double complexity_r2(const DeploymentSpace& space, Deployer& deployer);

}  // namespace dta
