#pragma once

// Rate functionals, tightness diagnostics and rare-event scans.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rollsim/development.hpp"
#include "rollsim/errors.hpp"
#include "rollsim/geometry.hpp"
#include "rollsim/parallel.hpp"
#include "rollsim/paths.hpp"
#include "rollsim/rng.hpp"
#include "rollsim/rotation.hpp"
#include "rollsim/slipping.hpp"

namespace rollsim {

/// Extended nonnegative real: a finite value or the +inf sentinel.
struct RateValue {
  double value = 0.0;
  bool infinite = false;

  static RateValue inf() { return {0.0, true}; }
  static RateValue finite(double v) { return {v, false}; }
  bool operator<(const RateValue& o) const { return !infinite && (o.infinite || value < o.value); }
};

struct ControlBundle {
  SampledPath y;
  SampledPath f;
  std::optional<MatrixPath> q;  // stored only

  void validate() const {
    if (y.grid() != f.grid()) throw ParameterError("ControlBundle: y and f must share a grid");
    if (f.values().row(0).cwiseAbs().maxCoeff() > 0.0) throw ParameterError("ControlBundle: f(0) must be 0");
  }
};

struct ActionReport {
  RateValue total;
  double drift_part = 0.0;
  double twist_part = 0.0;
  bool feasible = false;
  double residual = 0.0;
  double tolerance = 0.0;
  bool converged = true;
  int evaluations = 0;
  std::optional<double> upper_bound;  // value at the f = 0 candidate
};

/// 1/2 sum |df|^2 / dt.
inline double h1_action(const SampledPath& f) {
  double s = 0.0;
  for (Eigen::Index k = 1; k < f.nodes(); ++k) {
    const double dt = f.time(k) - f.time(k - 1);
    s += (f.values().row(k) - f.values().row(k - 1)).squaredNorm() / dt;
  }
  return 0.5 * s;
}

/// 1/2 sum |dy/dt - b(t_i, y_i)|^2 dt.
inline double drift_action(const SampledPath& y, const DriftField& b) {
  if (y.dim() != b.dim) throw ParameterError("drift_action: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index k = 1; k < y.nodes(); ++k) {
    const double dt = y.time(k) - y.time(k - 1);
    const Vec r = (y.value(k) - y.value(k - 1)) / dt - b(y.time(k - 1), y.value(k - 1));
    s += r.squaredNorm() * dt;
  }
  return 0.5 * s;
}

/// 0 when the discrete derivatives of y and gamma are within tol in L^2[0,T],
/// otherwise +inf.
inline RateValue indicator_rate(const SampledPath& y, const BaseCurve& gamma, double tol) {
  if (!(tol > 0.0)) throw ParameterError("indicator_rate: tol must be positive");
  if (y.dim() != gamma.dim) throw ParameterError("indicator_rate: dimension mismatch");
  double s = 0.0;
  for (Eigen::Index k = 1; k < y.nodes(); ++k) {
    const double dt = y.time(k) - y.time(k - 1);
    const Vec dg = gamma.at(y.time(k)) - gamma.at(y.time(k - 1));
    s += ((y.value(k) - y.value(k - 1)) - dg).squaredNorm() / dt;
  }
  return std::sqrt(s) <= tol ? RateValue::finite(0.0) : RateValue::inf();
}

struct RateOptions {
  int control_nodes = 16;     // K
  int max_evaluations = 500;
  double feasibility_tol = 1e-6;
  double fd_step = 1e-6;
  double gradient_tol = 1e-8;
  std::optional<Vec> y0;      // start of the slipping control, default 0
  LiftOptions lift;
};

namespace detail {

/// Frame coordinates of b relative to a: a^{-1} b as a d x d matrix.
inline Mat relative_rotation(const Manifold& m, const OrthonormalFrame& a, const OrthonormalFrame& b) {
  if (m.extrinsic()) return a.frame.transpose() * b.frame;
  return a.frame.partialPivLu().solve(b.frame);
}

/// Given the horizontal-lift increments eta_k and a rotation path g, the
/// slipping control with dy = (g_k + g_{k+1})/2 ^{-1} eta_k.
inline SampledPath slipping_control(const Grid& grid, const Mat& eta, const RotationPath& g, const Vec& y0) {
  Mat y(eta.rows() + 1, eta.cols());
  y.row(0) = y0.transpose();
  for (Eigen::Index k = 0; k < eta.rows(); ++k) {
    const auto i = static_cast<size_t>(k);
    const Mat gm = 0.5 * (g.values[i] + g.values[i + 1]);
    y.row(k + 1) = y.row(k) + gm.partialPivLu().solve(Vec(eta.row(k).transpose())).transpose();
  }
  return SampledPath(grid, std::move(y), PathRole::FiniteVariation);
}

inline Mat increments(const SampledPath& p) {
  Mat d(p.nodes() - 1, p.dim());
  for (Eigen::Index k = 1; k < p.nodes(); ++k) d.row(k - 1) = p.values().row(k) - p.values().row(k - 1);
  return d;
}

inline double frame_residual(const Manifold& m, const FramePath& a, const FramePath& b) {
  double r = 0.0;
  for (size_t k = 0; k < a.frames.size(); ++k) {
    r = std::max(r, distance(m, a.frames[k].base.coords, b.frames[k].base.coords));
    r = std::max(r, (a.frames[k].frame - b.frames[k].frame).norm());
  }
  return r;
}

}  // namespace detail

/// Rate of a frame path. With u = x~ g, x~ is the horizontal lift of the base
/// trace, so the target fixes g_k = x~_k^{-1} u_k and hence the twisting
/// control f; the slipping control y follows from the lift increments. An
/// optional candidate f is also evaluated and the lower feasible value kept.
inline ActionReport rate_of_frame_path(const Manifold& m, const FramePath& target, const DriftField& b,
                                       const RateOptions& opt = {}, const SampledPath* initial_f = nullptr) {
  if (target.frames.size() < 2) throw ParameterError("rate_of_frame_path: target needs at least two nodes");
  if (b.dim != m.dim()) throw ParameterError("rate_of_frame_path: drift dimension mismatch");
  const OrthonormalFrame& u0 = target.frames.front();
  const SkewBasis basis = so_basis(m.dim());
  const ManifoldPath x = project(target);
  const LiftResult lift = lift_and_antidevelop(m, u0, x, opt.lift);
  const Mat eta = detail::increments(lift.driver);
  const Vec y0 = opt.y0.value_or(Vec::Zero(m.dim()));

  ActionReport best;
  best.total = RateValue::inf();
  best.tolerance = opt.feasibility_tol;
  best.residual = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const RotationPath& g, const SampledPath& f) {
    const SampledPath y = detail::slipping_control(target.grid, eta, g, y0);
    const auto rec = develop_decomposed(m, u0, y, f, opt.lift.develop);
    const double res = detail::frame_residual(m, rec.frames, target);
    ++best.evaluations;
    const double da = drift_action(y, b), ha = h1_action(f);
    const RateValue v = res <= opt.feasibility_tol ? RateValue::finite(da + ha) : RateValue::inf();
    if (v < best.total || (best.total.infinite && res < best.residual)) {
      best.total = v;
      best.drift_part = da;
      best.twist_part = ha;
      best.residual = res;
      best.feasible = !v.infinite;
    }
  };

  RotationPath g{target.grid, {}};
  g.values.reserve(target.frames.size());
  for (size_t k = 0; k < target.frames.size(); ++k) {
    Mat gk = detail::relative_rotation(m, lift.frames.frames[k], target.frames[k]);
    g.values.push_back(detail::polish_orthogonal(gk));
  }
  if (g.values.back().determinant() < 0.0) throw DegenerateFrame("rate_of_frame_path: target frames change orientation");
  const SampledPath f = rotation_driver(g, basis);
  evaluate(integrate_rotation(f, basis), f);
  if (initial_f) {
    if (initial_f->grid() != target.grid) throw ParameterError("rate_of_frame_path: candidate f must share the target grid");
    evaluate(integrate_rotation(*initial_f, basis), *initial_f);
  }
  return best;
}

namespace detail {

/// Piecewise-linear f on the grid from values at K equispaced control nodes
/// (f(0) = 0 implied).
inline SampledPath control_to_path(const Grid& grid, const Mat& theta) {
  const auto K = theta.rows();
  const double T = grid.back();
  Mat v(static_cast<Eigen::Index>(grid.size()), theta.cols());
  for (size_t k = 0; k < grid.size(); ++k) {
    const double s = grid[k] / T * static_cast<double>(K);
    auto j = static_cast<Eigen::Index>(std::floor(s));
    if (j >= K) j = K - 1;
    const double w = s - static_cast<double>(j);
    const Eigen::RowVectorXd lo = j == 0 ? Eigen::RowVectorXd::Zero(theta.cols()) : Eigen::RowVectorXd(theta.row(j - 1));
    v.row(static_cast<Eigen::Index>(k)) = (1.0 - w) * lo + w * theta.row(j);
  }
  return SampledPath(grid, std::move(v), PathRole::FiniteVariation);
}

/// Least-squares fit of K control values to a path (for warm starts).
inline Mat path_to_control(const SampledPath& f, int K) {
  Mat theta(K, f.dim());
  const double T = f.end_time();
  for (int j = 0; j < K; ++j) theta.row(j) = interpolate(f, T * (j + 1) / K).transpose();
  return theta;
}

}  // namespace detail

/// Rate of a base trace: minimizes drift_action(y(f), b) + h1_action(f) over
/// piecewise-linear twisting controls f on K nodes, with y(f) forced by
/// anti-development through the f-twisted frame. Projected finite-difference
/// gradient descent with step halving; best value found is reported.
inline ActionReport rate_of_base_path(const Manifold& m, const ManifoldPath& x, const OrthonormalFrame& u0,
                                      const DriftField& b, const RateOptions& opt = {},
                                      const SampledPath* initial_f = nullptr) {
  if (x.nodes() < 2) throw ParameterError("rate_of_base_path: trace needs at least two nodes");
  if (b.dim != m.dim()) throw ParameterError("rate_of_base_path: drift dimension mismatch");
  if (opt.control_nodes < 1 || opt.max_evaluations < 1) throw ParameterError("rate_of_base_path: bad optimizer budget");
  const SkewBasis basis = so_basis(m.dim());
  const LiftResult lift = lift_and_antidevelop(m, u0, x, opt.lift);
  const Mat eta = detail::increments(lift.driver);
  const Vec y0 = opt.y0.value_or(Vec::Zero(m.dim()));
  const int K = opt.control_nodes;
  const auto D = static_cast<Eigen::Index>(basis.size());

  ActionReport rep;
  rep.tolerance = opt.feasibility_tol;
  struct Eval {
    double value, drift, twist;
  };
  auto J = [&](const Mat& theta) {
    ++rep.evaluations;
    const SampledPath f = detail::control_to_path(x.grid, theta);
    const SampledPath y = detail::slipping_control(x.grid, eta, integrate_rotation(f, basis), y0);
    const double da = drift_action(y, b), ha = h1_action(f);
    return Eval{da + ha, da, ha};
  };

  Mat theta = Mat::Zero(K, D);
  Eval cur = J(theta);
  rep.upper_bound = cur.value;
  if (initial_f) {
    if (initial_f->grid() != x.grid || initial_f->dim() != D) throw ParameterError("rate_of_base_path: bad initial f");
    const Mat t0 = detail::path_to_control(*initial_f, K);
    const Eval e0 = J(t0);
    if (e0.value < cur.value) {
      theta = t0;
      cur = e0;
    }
  }
  double step = 1.0;
  rep.converged = false;
  const Eigen::Index P = K * D;
  while (rep.evaluations + P + 1 <= opt.max_evaluations) {
    Mat grad(K, D);
    for (Eigen::Index i = 0; i < P; ++i) {
      Mat tp = theta;
      const double h = opt.fd_step * std::max(1.0, std::abs(tp(i % K, i / K)));
      tp(i % K, i / K) += h;
      grad(i % K, i / K) = (J(tp).value - cur.value) / h;
    }
    if (grad.norm() <= opt.gradient_tol * (1.0 + cur.value)) {
      rep.converged = true;
      break;
    }
    bool improved = false;
    while (rep.evaluations < opt.max_evaluations && step > 1e-14) {
      const Mat trial = theta - step * grad;
      const Eval e = J(trial);
      if (e.value < cur.value) {
        theta = trial;
        const bool tiny = cur.value - e.value <= 1e-14 * (1.0 + cur.value);
        cur = e;
        improved = !tiny;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      rep.converged = step <= 1e-14 || rep.evaluations < opt.max_evaluations;
      break;
    }
  }
  const SampledPath f = detail::control_to_path(x.grid, theta);
  const SampledPath y = detail::slipping_control(x.grid, eta, integrate_rotation(f, basis), y0);
  const auto rec = develop_decomposed(m, u0, y, f, opt.lift.develop);
  rep.residual = sup_distance(m, project(rec.frames), x);
  rep.feasible = rep.residual <= opt.feasibility_tol;
  rep.drift_part = cur.drift;
  rep.twist_part = cur.twist;
  rep.total = rep.feasible ? RateValue::finite(cur.value) : RateValue::inf();
  return rep;
}

struct WilsonInterval {
  double lo = 0.0, hi = 1.0;
};

inline constexpr double kZ95 = 1.959963984540054;

inline WilsonInterval wilson_interval(long hits, long n, double z = kZ95) {
  if (n < 1) throw ParameterError("wilson_interval: need at least one trial");
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double nn = static_cast<double>(n);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct ScanRow {
  double eps = 0.0;
  long replicas = 0;
  long hits = 0;
  double phat = 0.0;
  WilsonInterval ci;
  double eps_log_phat = 0.0;  // censored at -eps log R when hits == 0
  bool censored = false;
  std::string flag;  // "no-hit", "all-hit" or empty
};

inline ScanRow make_scan_row(double eps, long hits, long R) {
  ScanRow r;
  r.eps = eps;
  r.replicas = R;
  r.hits = hits;
  r.phat = static_cast<double>(hits) / static_cast<double>(R);
  r.ci = wilson_interval(hits, R);
  if (hits == 0) {
    r.censored = true;
    r.eps_log_phat = -eps * std::log(static_cast<double>(R));
    r.flag = "no-hit";
  } else {
    r.eps_log_phat = eps * std::log(r.phat);
    if (hits == R) r.flag = "all-hit";
  }
  return r;
}

struct ScanTable {
  std::vector<ScanRow> rows;
};

enum class Perturbation { Brownian, Slipping, TwistOnly };

inline Perturbation perturbation_from_string(const std::string& s) {
  if (s == "brownian") return Perturbation::Brownian;
  if (s == "slipping") return Perturbation::Slipping;
  if (s == "twist" || s == "twist-only") return Perturbation::TwistOnly;
  throw ParameterError("unknown perturbation '" + s + "'");
}

inline std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::Brownian: return "brownian";
    case Perturbation::Slipping: return "slipping";
    case Perturbation::TwistOnly: return "twist";
  }
  return "?";
}

/// One perturbed rolling run.
struct RollConfig {
  Manifold manifold = Manifold::sphere(2);
  Vec start;                    // base point of u0 (default: standard start)
  BaseCurve curve = BaseCurve::line(Vec::Unit(2, 0));
  double T = 1.0;
  double h = 1e-3;
  Perturbation perturbation = Perturbation::Brownian;
  SlipMode slip = SlipMode::Translational;
  JumpMeasureSpec measure = JumpMeasureSpec::sparse();
  bool twist = false;           // add sqrt(eps) twisting noise
  DevelopOptions develop;
};

inline Vec default_start(const Manifold& m) {
  Vec x = Vec::Zero(m.coord_dim());
  switch (m.kind()) {
    case ManifoldKind::Sphere: x(m.coord_dim() - 1) = 1.0; break;
    case ManifoldKind::HalfPlane: x(1) = 1.0; break;
    default: break;
  }
  return x;
}

inline OrthonormalFrame initial_frame(const RollConfig& c) {
  return standard_frame(c.manifold, c.start.size() ? c.start : default_start(c.manifold));
}

struct RollSample {
  SampledPath curve;     // perturbed Euclidean curve
  std::optional<SlippingSchedule> schedule;
  FramePath frames;
};

/// Perturbed curve and its stochastic development for one (eps, seed).
inline RollSample roll_once(const RollConfig& c, double eps, std::uint64_t seed) {
  const Grid grid = uniform_grid(c.T, c.h);
  const OrthonormalFrame u0 = initial_frame(c);
  RollSample out;
  const std::uint64_t curve_seed = derive_seed(seed, {0}), twist_seed = derive_seed(seed, {1});
  switch (c.perturbation) {
    case Perturbation::Brownian:
      out.curve = brownian_perturb(DriftField::along(c.curve), c.curve.at(0.0), eps, grid, curve_seed);
      break;
    case Perturbation::Slipping: {
      out.schedule = sample_schedule(c.measure, eps, c.T, curve_seed);
      out.curve = apply_slip(c.slip, c.curve, *out.schedule, grid);
      break;
    }
    case Perturbation::TwistOnly: out.curve = sample_curve(c.curve, grid, PathRole::FiniteVariation); break;
  }
  const bool twist = c.twist || c.perturbation == Perturbation::TwistOnly;
  if (twist) {
    const SampledPath w = sample_brownian(so_dim(c.manifold.dim()), out.curve.grid(), eps, twist_seed);
    out.frames = stochastic_develop(c.manifold, u0, out.curve, &w, c.develop);
  } else {
    out.frames = stochastic_develop(c.manifold, u0, out.curve, nullptr, c.develop);
  }
  return out;
}

/// For each node of `base`, the index of the node of `fine` at the same time.
inline std::vector<size_t> embed_grid(const Grid& base, const Grid& fine) {
  std::vector<size_t> idx(base.size());
  const double tol = 1e-11 * std::max(1.0, base.back());
  size_t j = 0;
  for (size_t k = 0; k < base.size(); ++k) {
    while (j + 1 < fine.size() && fine[j] < base[k] - tol) ++j;
    size_t best = j;
    if (j + 1 < fine.size() && std::abs(fine[j + 1] - base[k]) < std::abs(fine[j] - base[k])) best = j + 1;
    if (std::abs(fine[best] - base[k]) > tol) throw ParameterError("embed_grid: grid is not a refinement");
    idx[k] = best;
  }
  return idx;
}

struct ScanConfig {
  RollConfig roll;
  double eta = 0.5;
  std::vector<double> eps_grid{0.4, 0.2, 0.1};
  long replicas = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Limit trace: development of the unperturbed curve.
inline ManifoldPath limit_trace(const RollConfig& c) {
  const Grid grid = uniform_grid(c.T, c.h);
  return project(develop(c.manifold, initial_frame(c), sample_curve(c.curve, grid, PathRole::FiniteVariation), c.develop));
}

/// Sup over base-grid nodes of d(x_t, x^eps_t).
inline double trace_deviation(const Manifold& m, const ManifoldPath& limit, const FramePath& run) {
  const auto idx = embed_grid(limit.grid, run.grid);
  double s = 0.0;
  for (size_t k = 0; k < idx.size(); ++k)
    s = std::max(s, distance(m, limit.point(static_cast<Eigen::Index>(k)), run.frames[idx[k]].base.coords));
  return s;
}

/// Counts, per eps, the replicas whose trace leaves the eta-tube around the
/// limit trace. Replica r at eps index i uses seed derive_seed(seed, {i, r}).
inline ScanTable rare_event_scan(const ScanConfig& c) {
  if (c.replicas < 1) throw ParameterError("rare_event_scan: need at least one replica");
  if (!(c.eta >= 0.0)) throw ParameterError("rare_event_scan: eta must be nonnegative");
  const ManifoldPath limit = limit_trace(c.roll);
  ScanTable table;
  for (size_t i = 0; i < c.eps_grid.size(); ++i) {
    const double eps = c.eps_grid[i];
    if (!(eps > 0.0)) throw ParameterError("rare_event_scan: eps must be positive");
    std::vector<char> hit(static_cast<size_t>(c.replicas), 0);
    parallel_for(hit.size(), c.threads, [&](size_t r) {
      const RollSample s = roll_once(c.roll, eps, derive_seed(c.seed, {i, r}));
      hit[r] = trace_deviation(c.roll.manifold, limit, s.frames) >= c.eta ? 1 : 0;
    });
    long hits = 0;
    for (char h : hit) hits += h;
    table.rows.push_back(make_scan_row(eps, hits, c.replicas));
  }
  return table;
}

enum class TightnessVerdict { Tight, NotTight, Inconclusive };

inline std::string to_string(TightnessVerdict v) {
  switch (v) {
    case TightnessVerdict::Tight: return "tight";
    case TightnessVerdict::NotTight: return "not-tight";
    case TightnessVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct TightnessCell {
  double eps = 0.0;
  std::string criterion;  // "sup" or "modulus"
  double threshold = 0.0;
  long hits = 0;
  long replicas = 0;
  double value = 0.0;  // eps log phat, or the floor -eps log R
  bool censored = false;
};

struct TightnessTable {
  std::vector<TightnessCell> cells;
  TightnessVerdict sup_verdict = TightnessVerdict::Inconclusive;
  TightnessVerdict modulus_verdict = TightnessVerdict::Inconclusive;
};

/// Verdict from the largest threshold of one criterion, comparing the
/// smallest and largest eps: a censored cell at the smallest eps is tight;
/// a certain event there, or censoring only at the largest eps, is not;
/// otherwise the smallest-eps value must be at most half the largest-eps value.
inline TightnessVerdict tightness_verdict(const std::vector<TightnessCell>& cells, const std::string& criterion) {
  double thr = -std::numeric_limits<double>::infinity();
  for (const auto& c : cells)
    if (c.criterion == criterion) thr = std::max(thr, c.threshold);
  const TightnessCell* lo = nullptr;
  const TightnessCell* hi = nullptr;
  for (const auto& c : cells) {
    if (c.criterion != criterion || c.threshold != thr) continue;
    if (!lo || c.eps < lo->eps) lo = &c;
    if (!hi || c.eps > hi->eps) hi = &c;
  }
  if (!lo || !hi || lo == hi) return TightnessVerdict::Inconclusive;
  if (lo->censored) return TightnessVerdict::Tight;
  if (lo->hits == lo->replicas) return TightnessVerdict::NotTight;
  if (hi->censored) return TightnessVerdict::NotTight;
  return lo->value <= 0.5 * hi->value ? TightnessVerdict::Tight : TightnessVerdict::NotTight;
}

using PathSampler = std::function<SampledPath(double eps, long replica)>;

/// Empirical eps log P(||x||_T >= a) and eps log P(w_T(x, rho) >= eta).
inline TightnessTable tightness_diagnostic(const PathSampler& sampler, const std::vector<double>& eps_grid, long R,
                                           double T, const std::vector<double>& a_grid,
                                           const std::vector<double>& eta_grid, double rho, int threads = 1) {
  if (R < 1) throw ParameterError("tightness_diagnostic: need at least one replica");
  if (!(rho > 0.0)) throw ParameterError("tightness_diagnostic: rho must be positive");
  TightnessTable t;
  for (double eps : eps_grid) {
    std::vector<double> sup(static_cast<size_t>(R)), mod(static_cast<size_t>(R));
    parallel_for(static_cast<size_t>(R), threads, [&](size_t r) {
      const SampledPath p = sampler(eps, static_cast<long>(r));
      sup[r] = sup_norm(p, T);
      mod[r] = modulus_of_continuity(p, T, rho);
    });
    auto add = [&](const std::string& crit, const std::vector<double>& stat, double thr) {
      long hits = 0;
      for (double s : stat) hits += s >= thr ? 1 : 0;
      const ScanRow row = make_scan_row(eps, hits, R);
      t.cells.push_back({eps, crit, thr, hits, R, row.eps_log_phat, row.censored});
    };
    for (double a : a_grid) add("sup", sup, a);
    for (double e : eta_grid) add("modulus", mod, e);
  }
  t.sup_verdict = tightness_verdict(t.cells, "sup");
  t.modulus_verdict = tightness_verdict(t.cells, "modulus");
  return t;
}

}  // namespace rollsim
