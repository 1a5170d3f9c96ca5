#pragma once

// Randomly perturbed Euclidean curves: compound-Poisson slipping schedules,
// the translational / in-place / piecewise-linear slip constructions, Brownian
// perturbation of an ODE, and checkers for the jump-measure conditions.

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rollsim/errors.hpp"
#include "rollsim/paths.hpp"
#include "rollsim/rng.hpp"

namespace rollsim {

struct BaseCurve {
  std::string name;
  int dim = 2;
  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;
  double speed_bound = 0.0;                // C with |gamma'| <= C
  std::optional<double> accel_lipschitz;   // Lipschitz constant of gamma'

  Vec at(double t) const { return position(t); }
  Vec vel(double t) const { return velocity(t); }

  /// Constant used by the piecewise-linear bound: dominates both the speed
  /// and the Lipschitz constant of the velocity.
  double pl_constant() const {
    if (!accel_lipschitz) throw ParameterError("curve '" + name + "' has no Lipschitz constant for its velocity");
    return std::max(speed_bound, *accel_lipschitz);
  }

  static BaseCurve line(Vec direction) {
    BaseCurve c;
    c.name = "line";
    c.dim = static_cast<int>(direction.size());
    c.position = [direction](double t) { return Vec(t * direction); };
    c.velocity = [direction](double) { return direction; };
    c.speed_bound = direction.norm();
    c.accel_lipschitz = 0.0;
    return c;
  }

  /// Circle of radius r through the origin, tangent to e_1 there, angular speed w.
  static BaseCurve circle(double r = 1.0, double w = 1.0) {
    if (!(r > 0.0)) throw ParameterError("circle: radius must be positive");
    BaseCurve c;
    c.name = "circle";
    c.position = [r, w](double t) { return Vec{{r * std::sin(w * t), r * (1.0 - std::cos(w * t))}}; };
    c.velocity = [r, w](double t) { return Vec{{r * w * std::cos(w * t), r * w * std::sin(w * t)}}; };
    c.speed_bound = r * std::abs(w);
    c.accel_lipschitz = r * w * w;
    return c;
  }

  /// (a sin(p t), b sin(q t)).
  static BaseCurve lissajous(double a = 1.0, double b = 1.0, double p = 1.0, double q = 2.0) {
    BaseCurve c;
    c.name = "lissajous";
    c.position = [=](double t) { return Vec{{a * std::sin(p * t), b * std::sin(q * t)}}; };
    c.velocity = [=](double t) { return Vec{{a * p * std::cos(p * t), b * q * std::cos(q * t)}}; };
    c.speed_bound = std::hypot(a * p, b * q);
    c.accel_lipschitz = std::hypot(a * p * p, b * q * q);
    return c;
  }

  /// Piecewise-linear interpolation of samples; velocity is the right-hand
  /// segment slope. Extended by a constant beyond the last sample.
  static BaseCurve polyline(Grid t, Mat x) {
    validate_grid(t);
    if (x.rows() != static_cast<Eigen::Index>(t.size()) || x.rows() < 2)
      throw ParameterError("polyline: need at least two samples, one per time");
    auto path = std::make_shared<SampledPath>(t, std::move(x), PathRole::FiniteVariation);
    BaseCurve c;
    c.name = "polyline";
    c.dim = static_cast<int>(path->dim());
    c.position = [path](double s) {
      if (s >= path->end_time()) return path->value(path->nodes() - 1);
      return interpolate(*path, std::max(0.0, s));
    };
    c.velocity = [path](double s) {
      if (s >= path->end_time()) return Vec(Vec::Zero(path->dim()));
      const auto k = static_cast<Eigen::Index>(node_at_or_before(path->grid(), std::max(0.0, s)));
      return Vec((path->value(k + 1) - path->value(k)) / (path->time(k + 1) - path->time(k)));
    };
    for (Eigen::Index k = 1; k < path->nodes(); ++k)
      c.speed_bound = std::max(c.speed_bound, (path->value(k) - path->value(k - 1)).norm() / (path->time(k) - path->time(k - 1)));
    return c;
  }
};

inline SampledPath sample_curve(const BaseCurve& c, const Grid& grid, PathRole role = PathRole::Deterministic) {
  Mat v(static_cast<Eigen::Index>(grid.size()), c.dim);
  for (size_t k = 0; k < grid.size(); ++k) v.row(static_cast<Eigen::Index>(k)) = c.at(grid[k]).transpose();
  return SampledPath(grid, std::move(v), role);
}

/// Max |gamma'| over a sampling grid, for auditing speed_bound.
inline double audited_speed(const BaseCurve& c, double T, int samples = 2000) {
  double s = 0.0;
  for (int i = 0; i <= samples; ++i) s = std::max(s, c.vel(T * i / samples).norm());
  return s;
}

inline constexpr double kMaxRateExponent = 700.0;

/// Levy measure nu^eps of a compound-Poisson subordinator.
struct JumpMeasureSpec {
  std::string name;
  std::function<double(double)> log_rate;  // log lambda(eps), lambda = nu((0,inf))
  std::function<double(double, double)> inverse_cdf;  // (eps, u) -> quantile of mu^eps
  std::function<double(double, double)> density;      // (eps, x) -> nu density, for quadrature
  std::function<double(double)> scale;                // typical jump size, for quadrature
  std::function<double(double)> log_mean_jump;        // closed form log int x nu(dx), optional
  double eps_floor = 0.0;  // below this eps the rate overflows

  double rate(double eps) const {
    const double lr = log_rate(eps);
    if (!(lr <= kMaxRateExponent))
      throw SaturationError(name + ": rate overflows at eps=" + std::to_string(eps), eps_floor);
    return std::exp(lr);
  }

  /// nu(dx) = lambda(eps) * c(eps) exp(-c(eps) x) dx given log lambda and log c.
  static JumpMeasureSpec exponential_family(std::string name, std::function<double(double)> log_lambda,
                                            std::function<double(double)> log_c, double eps_floor = 0.0) {
    JumpMeasureSpec s;
    s.name = std::move(name);
    s.eps_floor = eps_floor;
    s.log_rate = log_lambda;
    s.inverse_cdf = [log_c](double eps, double u) { return -std::log1p(-u) * std::exp(-log_c(eps)); };
    s.density = [log_lambda, log_c](double eps, double x) {
      const double c = std::exp(log_c(eps));
      return std::exp(log_lambda(eps) + log_c(eps) - c * x);
    };
    s.scale = [log_c](double eps) { return std::exp(-log_c(eps)); };
    s.log_mean_jump = [log_lambda, log_c](double eps) { return log_lambda(eps) - log_c(eps); };
    return s;
  }

  /// Rate lambda, exponentially distributed jumps with the given mean.
  static JumpMeasureSpec exponential(double lambda, double mean) {
    if (!(lambda > 0.0) || !(mean > 0.0)) throw ParameterError("exponential measure: rate and mean must be positive");
    const double ll = std::log(lambda), lc = -std::log(mean);
    return exponential_family("exponential", [ll](double) { return ll; }, [lc](double) { return lc; });
  }

  /// nu(dx) = exp(-x exp(kappa eps^-p)) dx: rare jumps, mean jump vanishing
  /// faster than any power of eps.
  static JumpMeasureSpec sparse(double kappa = 1.0, double power = 1.1) {
    if (!(kappa > 0.0) || !(power > 0.0)) throw ParameterError("sparse: kappa and power must be positive");
    const double floor = std::pow(kMaxRateExponent / kappa, -1.0 / power);
    auto lc = [kappa, power](double eps) { return kappa * std::pow(eps, -power); };
    auto s = exponential_family("sparse", [lc](double eps) { return -lc(eps); }, lc, floor);
    // density written directly so the huge c never multiplies a tiny lambda
    s.density = [lc](double eps, double x) { return std::exp(-x * std::exp(lc(eps))); };
    return s;
  }

  /// nu(dx) = exp(-x exp(-kappa eps^-p)) dx.
  static JumpMeasureSpec dense(double kappa = 1.0, double power = 1.1) {
    if (!(kappa > 0.0) || !(power > 0.0)) throw ParameterError("dense: kappa and power must be positive");
    const double floor = std::pow(kMaxRateExponent / kappa, -1.0 / power);
    auto lc = [kappa, power](double eps) { return -kappa * std::pow(eps, -power); };
    auto s = exponential_family("dense", [lc](double eps) { return -lc(eps); }, lc, floor);
    s.density = [lc](double eps, double x) { return std::exp(-x * std::exp(lc(eps))); };
    return s;
  }

  static JumpMeasureSpec by_name(const std::string& n, double lambda = 1.0, double mean = 1.0, double kappa = 1.0,
                                 double power = 1.1) {
    if (n == "sparse") return sparse(kappa, power);
    if (n == "dense") return dense(kappa, power);
    if (n == "exponential") return exponential(lambda, mean);
    throw ParameterError("unknown jump measure '" + n + "'");
  }
};

struct SlippingSchedule {
  std::vector<double> times;      // tau_k, strictly increasing, <= horizon
  std::vector<double> durations;  // e(tau_k) > 0
  double horizon = 0.0;

  size_t size() const { return times.size(); }

  /// S_t = sum of durations of jumps at times <= t.
  double subordinator(double t) const {
    double s = 0.0;
    for (size_t k = 0; k < times.size() && times[k] <= t; ++k) s += durations[k];
    return s;
  }

  /// Jump count N_t.
  size_t count(double t) const {
    return static_cast<size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  }

  /// Start times sigma_k of the slip windows [sigma_k, sigma_k + e_k) on the
  /// output time axis: sigma_1 = tau_1, sigma_{k+1} = sigma_k + e_k + (tau_{k+1} - tau_k).
  std::vector<double> window_starts() const {
    std::vector<double> s(times.size());
    for (size_t k = 0; k < times.size(); ++k) s[k] = k == 0 ? times[0] : s[k - 1] + durations[k - 1] + (times[k] - times[k - 1]);
    return s;
  }

  void validate() const {
    if (times.size() != durations.size()) throw ParameterError("schedule: times and durations differ in length");
    for (size_t k = 0; k < times.size(); ++k) {
      if (!(durations[k] > 0.0)) throw ParameterError("schedule: durations must be positive");
      if (!(times[k] >= 0.0) || times[k] > horizon || (k > 0 && !(times[k] > times[k - 1])))
        throw ParameterError("schedule: times must be strictly increasing within the horizon");
    }
  }
};

inline SlippingSchedule sample_schedule(const JumpMeasureSpec& spec, double eps, double T, std::uint64_t seed) {
  if (!(T > 0.0)) throw ParameterError("sample_schedule: horizon must be positive");
  const double lambda = spec.rate(eps);
  if (!(lambda > 0.0)) throw ParameterError("sample_schedule: rate must be positive");
  if (lambda * T > 1e8)
    throw SaturationError(spec.name + ": expected jump count " + std::to_string(lambda * T) + " too large", spec.eps_floor);
  SlippingSchedule s;
  s.horizon = T;
  Rng rng(seed);
  double t = 0.0;
  for (;;) {
    t += rng.exponential(lambda);
    if (t > T) break;
    if (!s.times.empty() && !(t > s.times.back())) continue;  // rounding tie
    const double e = spec.inverse_cdf(eps, rng.uniform());
    s.times.push_back(t);
    s.durations.push_back(e > 0.0 ? e : std::numeric_limits<double>::min());
  }
  return s;
}

/// Merges breakpoints into a grid, skipping points within 1e-12 T of a node.
inline Grid merge_breakpoints(const Grid& grid, std::vector<double> extra) {
  validate_grid(grid);
  const double T = grid.back();
  const double tol = 1e-12 * std::max(1.0, T);
  Grid out = grid;
  for (double b : extra)
    if (b > 0.0 && b < T) out.push_back(b);
  std::sort(out.begin(), out.end());
  Grid res;
  res.reserve(out.size());
  for (double t : out)
    if (res.empty() || t - res.back() > tol) res.push_back(t);
  if (res.back() != T) res.back() = T;
  return res;
}

enum class SlipMode { None, Translational, InPlace, PiecewiseLinear };

inline SlipMode slip_mode_from_string(const std::string& s) {
  if (s == "none") return SlipMode::None;
  if (s == "translational") return SlipMode::Translational;
  if (s == "inplace" || s == "in-place") return SlipMode::InPlace;
  if (s == "piecewise-linear" || s == "piecewise_linear") return SlipMode::PiecewiseLinear;
  throw ParameterError("unknown slip mode '" + s + "'");
}

inline std::string to_string(SlipMode m) {
  switch (m) {
    case SlipMode::None: return "none";
    case SlipMode::Translational: return "translational";
    case SlipMode::InPlace: return "inplace";
    case SlipMode::PiecewiseLinear: return "piecewise-linear";
  }
  return "?";
}

namespace detail {

inline std::vector<double> window_breakpoints(const SlippingSchedule& s) {
  std::vector<double> b;
  const auto sig = s.window_starts();
  for (size_t k = 0; k < sig.size(); ++k) {
    b.push_back(sig[k]);
    b.push_back(sig[k] + s.durations[k]);
  }
  return b;
}

}  // namespace detail

/// Translational slipping: the curve freezes during each window and the
/// traversed piece gamma[sigma, sigma+e] is cut out afterwards.
inline SampledPath translational_slip(const BaseCurve& c, const SlippingSchedule& s, const Grid& base_grid) {
  s.validate();
  const Grid grid = merge_breakpoints(base_grid, detail::window_breakpoints(s));
  const auto sig = s.window_starts();
  Mat v(static_cast<Eigen::Index>(grid.size()), c.dim);
  for (size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    Vec shift = Vec::Zero(c.dim);
    Vec val;
    bool frozen = false;
    for (size_t j = 0; j < sig.size() && sig[j] <= t; ++j) {
      const double end = sig[j] + s.durations[j];
      if (t < end) {
        val = c.at(sig[j]) - shift;
        frozen = true;
        break;
      }
      shift += c.at(end) - c.at(sig[j]);
    }
    v.row(static_cast<Eigen::Index>(k)) = (frozen ? val : Vec(c.at(t) - shift)).transpose();
  }
  return SampledPath(grid, std::move(v), PathRole::FiniteVariation);
}

/// In-place slipping: during window k the curve runs along the tangent line
/// at gamma(tau_k); afterwards gamma resumes, delayed by the elapsed slip time
/// and shifted by the tangent segments.
inline SampledPath inplace_slip(const BaseCurve& c, const SlippingSchedule& s, const Grid& base_grid) {
  s.validate();
  const Grid grid = merge_breakpoints(base_grid, detail::window_breakpoints(s));
  const auto sig = s.window_starts();
  Mat v(static_cast<Eigen::Index>(grid.size()), c.dim);
  for (size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    Vec shift = Vec::Zero(c.dim);
    double delay = 0.0;
    Vec val;
    bool sliding = false;
    for (size_t j = 0; j < sig.size() && sig[j] <= t; ++j) {
      const double end = sig[j] + s.durations[j];
      const Vec tangent = c.vel(s.times[j]);
      if (t < end) {
        val = c.at(s.times[j]) + shift + (t - sig[j]) * tangent;
        sliding = true;
        break;
      }
      shift += s.durations[j] * tangent;
      delay += s.durations[j];
    }
    v.row(static_cast<Eigen::Index>(k)) = (sliding ? val : Vec(c.at(t - delay) + shift)).transpose();
  }
  return SampledPath(grid, std::move(v), PathRole::FiniteVariation);
}

/// gamma_0 + int_0^t xi, xi = gamma'(tau_k) on [tau_k, tau_{k+1}), tau_0 = 0.
inline SampledPath piecewise_linear_approx(const BaseCurve& c, const SlippingSchedule& s, const Grid& base_grid) {
  s.validate();
  const Grid grid = merge_breakpoints(base_grid, s.times);
  std::vector<double> knots{0.0};
  knots.insert(knots.end(), s.times.begin(), s.times.end());
  Mat v(static_cast<Eigen::Index>(grid.size()), c.dim);
  Vec pos = c.at(0.0);
  size_t seg = 0;
  double t_seg = 0.0;
  Vec xi = c.vel(0.0);
  Vec seg_start = pos;
  for (size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    while (seg + 1 < knots.size() && knots[seg + 1] <= t) {
      seg_start += (knots[seg + 1] - t_seg) * xi;
      ++seg;
      t_seg = knots[seg];
      xi = c.vel(t_seg);
    }
    v.row(static_cast<Eigen::Index>(k)) = (seg_start + (t - t_seg) * xi).transpose();
  }
  return SampledPath(grid, std::move(v), PathRole::FiniteVariation);
}

inline SampledPath apply_slip(SlipMode mode, const BaseCurve& c, const SlippingSchedule& s, const Grid& grid) {
  switch (mode) {
    case SlipMode::Translational: return translational_slip(c, s, grid);
    case SlipMode::InPlace: return inplace_slip(c, s, grid);
    case SlipMode::PiecewiseLinear: return piecewise_linear_approx(c, s, grid);
    case SlipMode::None: break;
  }
  return sample_curve(c, grid, PathRole::FiniteVariation);
}

/// Pathwise deviation and variation of a slipped curve against the bounds
/// of its construction.
struct SlipBoundReport {
  double deviation = 0.0;
  double deviation_bound = 0.0;
  double variation = 0.0;
  double variation_bound = 0.0;
  double variation_bound_alt = std::numeric_limits<double>::infinity();  // C(t + S_t) for in-place
  bool holds() const {
    const double tol = 1e-12;
    return deviation <= deviation_bound * (1 + tol) + tol && variation <= variation_bound * (1 + tol) + tol &&
           variation <= variation_bound_alt * (1 + tol) + tol;
  }
};

inline SlipBoundReport slip_bounds(SlipMode mode, const BaseCurve& c, const SlippingSchedule& s, const SampledPath& slipped) {
  const double T = slipped.end_time();
  const SampledPath ref = sample_curve(c, slipped.grid(), PathRole::FiniteVariation);
  SlipBoundReport r;
  for (Eigen::Index k = 0; k < slipped.nodes(); ++k) r.deviation = std::max(r.deviation, (slipped.value(k) - ref.value(k)).norm());
  r.variation = total_variation(slipped);
  const double C = c.speed_bound;
  const double ST = s.subordinator(T);
  switch (mode) {
    case SlipMode::None:
      r.deviation_bound = 0.0;
      r.variation_bound = total_variation(ref);
      break;
    case SlipMode::Translational:
      r.deviation_bound = C * ST;
      r.variation_bound = total_variation(ref);
      break;
    case SlipMode::InPlace:
      r.deviation_bound = 2.0 * C * ST;
      r.variation_bound = total_variation(ref) + C * ST;
      r.variation_bound_alt = C * (T + ST);
      break;
    case SlipMode::PiecewiseLinear: {
      const double K = c.pl_constant();
      const size_t m = s.count(T);
      if (m == 0) {
        r.deviation_bound = K * T * T;
      } else {
        double gap = T - s.times[m - 1];
        double prev = 0.0;
        for (size_t k = 0; k < m; ++k) {
          gap = std::max(gap, s.times[k] - prev);
          prev = s.times[k];
        }
        r.deviation_bound = K * T * gap;
      }
      r.variation_bound = C * T;
      break;
    }
  }
  return r;
}

struct DriftField {
  int dim = 2;
  std::function<Vec(double, const Vec&)> b;
  double bound = 0.0;
  double lipschitz = 0.0;

  Vec operator()(double t, const Vec& x) const { return b(t, x); }

  static DriftField zero(int d) {
    return {d, [d](double, const Vec&) { return Vec(Vec::Zero(d)); }, 0.0, 0.0};
  }
  static DriftField constant(Vec v) {
    const double n = v.norm();
    const int d = static_cast<int>(v.size());
    return {d, [v](double, const Vec&) { return v; }, n, 0.0};
  }
  /// b(t, x) = gamma'(t).
  static DriftField along(const BaseCurve& c) {
    return {c.dim, [c](double t, const Vec&) { return c.vel(t); }, c.speed_bound, 0.0};
  }
};

/// Euler-Maruyama solution of dY = b(t, Y) dt + sqrt(eps) dB, Y_0 = y0. The
/// A-part (y0 + int b dt) and M-part (sqrt(eps) B) are stored, along with the
/// bracket eps t I.
inline SampledPath brownian_perturb(const DriftField& b, const Vec& y0, double eps, const Grid& grid, std::uint64_t seed) {
  if (!(eps >= 0.0)) throw ParameterError("brownian_perturb: eps must be nonnegative");
  if (y0.size() != b.dim) throw ParameterError("brownian_perturb: start point dimension mismatch");
  const SampledPath w = sample_brownian(b.dim, grid, eps, seed);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Mat a(n, b.dim), y(n, b.dim);
  a.row(0) = y0.transpose();
  y.row(0) = y0.transpose();
  for (Eigen::Index k = 1; k < n; ++k) {
    const double dt = grid[static_cast<size_t>(k)] - grid[static_cast<size_t>(k) - 1];
    const Vec drift = b(grid[static_cast<size_t>(k) - 1], y.row(k - 1).transpose());
    a.row(k) = a.row(k - 1) + dt * drift.transpose();
    y.row(k) = a.row(k) + w.values().row(k);
  }
  std::vector<Mat> bracket;
  bracket.reserve(grid.size());
  for (double t : grid) bracket.push_back(eps * t * Mat::Identity(b.dim, b.dim));
  Decomposition dec{std::move(a), w.values(), std::move(bracket)};
  return SampledPath(grid, std::move(y), PathRole::Semimartingale, std::move(dec));
}

struct ConditionRow {
  double eps = 0.0;
  double value = 0.0;                  // eps log int x nu, or eps lambda
  std::optional<double> quadrature;    // eps log of the quadrature value
};

struct ConditionTable {
  std::string measure;
  std::string quantity;
  std::vector<ConditionRow> rows;
  bool verdict = false;
};

/// log int_0^inf x nu^eps(dx) by exp-sinh quadrature in the scaled variable
/// x = scale * s.
inline double log_mean_jump_quadrature(const JumpMeasureSpec& spec, double eps) {
  if (!spec.density) throw ParameterError(spec.name + ": no density for quadrature");
  const double sc = spec.scale ? spec.scale(eps) : 1.0;
  boost::math::quadrature::exp_sinh<double> q;
  double err = 0.0, l1 = 0.0;
  double val = 0.0;
  try {
    val = q.integrate([&](double s) { return s * spec.density(eps, sc * s); }, 1e-12, &err, &l1);
  } catch (const std::exception& e) {
    throw NonIntegrable(spec.name + ": int x nu(dx) does not converge (" + e.what() + ")");
  }
  if (!std::isfinite(val) || !(val > 0.0) || err > 1e-6 * std::abs(val))
    throw NonIntegrable(spec.name + ": int x nu(dx) does not converge");
  return 2.0 * std::log(sc) + std::log(val);
}

inline ConditionTable check_mean_jump_condition(const JumpMeasureSpec& spec, const std::vector<double>& eps_grid,
                                                bool with_quadrature = true) {
  if (eps_grid.empty()) throw ParameterError("check_mean_jump_condition: empty eps grid");
  ConditionTable t{spec.name, "eps_log_mean_jump", {}, false};
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw ParameterError("eps must be positive");
    ConditionRow r{eps, 0.0, std::nullopt};
    if (with_quadrature || !spec.log_mean_jump) r.quadrature = eps * log_mean_jump_quadrature(spec, eps);
    r.value = spec.log_mean_jump ? eps * spec.log_mean_jump(eps) : *r.quadrature;
    t.rows.push_back(r);
  }
  auto rows = t.rows;
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.eps > b.eps; });
  t.verdict = true;
  for (size_t k = 0; k < rows.size(); ++k) {
    if (!(rows[k].value < 0.0)) t.verdict = false;
    if (k > 0 && !(rows[k].value < rows[k - 1].value)) t.verdict = false;
  }
  if (rows.size() < 2) t.verdict = false;
  return t;
}

inline ConditionTable check_rate_divergence(const JumpMeasureSpec& spec, const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw ParameterError("check_rate_divergence: empty eps grid");
  ConditionTable t{spec.name, "eps_rate", {}, false};
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw ParameterError("eps must be positive");
    t.rows.push_back({eps, eps * spec.rate(eps), std::nullopt});
  }
  auto rows = t.rows;
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.eps > b.eps; });
  t.verdict = rows.size() >= 2;
  for (size_t k = 1; k < rows.size(); ++k)
    if (!(rows[k].value > rows[k - 1].value)) t.verdict = false;
  return t;
}

}  // namespace rollsim
