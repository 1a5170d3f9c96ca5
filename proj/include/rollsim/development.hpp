#pragma once

// Cartan development on the orthonormal frame bundle: rolling a manifold along
// a Euclidean curve, with optional twisting in the fibre, plus the inverse
// operations (horizontal lift and anti-development).
//
// Convention: a frame u maps xi in R^d to the tangent vector E xi, where E is
// the stored frame matrix (columns are the frame vectors). The horizontal
// field is
//   chart:  dx^i = E^i_k xi^k,  dE^i_m = -Gamma^i_{jl} (E xi)^j E^l_m
//   sphere: dx = E xi,          dE_m  = -((E xi) . E_m) x
// and the vertical field of A in so(d) acts by E -> E exp(tA).

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "rollsim/errors.hpp"
#include "rollsim/geometry.hpp"
#include "rollsim/paths.hpp"
#include "rollsim/rotation.hpp"

namespace rollsim {

struct DevelopOptions {
  /// Frames whose orthonormality defect exceeds this after a step are replaced
  /// by their polar projection.
  double reortho_threshold = 1e-12;
  /// Increments longer than this are split into equal RK4 substeps.
  double max_substep = 0.01;
};

struct IntegrationStats {
  double max_defect_before = 0.0;  // largest defect produced by a raw step
  double max_defect_after = 0.0;   // largest defect of a stored frame
  long corrections = 0;

  void merge(const IntegrationStats& o) {
    max_defect_before = std::max(max_defect_before, o.max_defect_before);
    max_defect_after = std::max(max_defect_after, o.max_defect_after);
    corrections += o.corrections;
  }
};

struct FramePath {
  Grid grid;
  std::vector<OrthonormalFrame> frames;
  IntegrationStats stats;
};

/// Base points, one row per node.
struct ManifoldPath {
  Grid grid;
  Mat points;

  Eigen::Index nodes() const { return points.rows(); }
  Vec point(Eigen::Index k) const { return points.row(k).transpose(); }
};

namespace detail {

inline void horizontal_rhs(const Manifold& m, const Vec& x, const Mat& e, const Vec& xi, Vec& dx, Mat& de) {
  dx = e * xi;
  switch (m.kind()) {
    case ManifoldKind::Sphere: de = -x * (dx.transpose() * e); break;
    case ManifoldKind::Flat:
    case ManifoldKind::FlatTorus: de = Mat::Zero(e.rows(), e.cols()); break;
    default: de = -christoffel_contract(christoffel_at(m, x), dx) * e; break;
  }
}

inline void check_stage(const Manifold& m, const Vec& x, double time) {
  if (m.kind() == ManifoldKind::HalfPlane || m.kind() == ManifoldKind::Chart) require_domain(m, x, time);
}

}  // namespace detail

namespace detail {

inline OrthonormalFrame rk4_increment(const Manifold& m, const OrthonormalFrame& u, const Vec& eta, double time) {
  const Vec& x = u.base.coords;
  const Mat& e = u.frame;
  Vec k1x, k2x, k3x, k4x;
  Mat k1e, k2e, k3e, k4e;
  horizontal_rhs(m, x, e, eta, k1x, k1e);
  Vec xs = x + 0.5 * k1x;
  check_stage(m, xs, time);
  horizontal_rhs(m, xs, e + 0.5 * k1e, eta, k2x, k2e);
  xs = x + 0.5 * k2x;
  check_stage(m, xs, time);
  horizontal_rhs(m, xs, e + 0.5 * k2e, eta, k3x, k3e);
  xs = x + k3x;
  check_stage(m, xs, time);
  horizontal_rhs(m, xs, e + k3e, eta, k4x, k4e);
  OrthonormalFrame out{{x + (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0, u.base.chart},
                       e + (k1e + 2.0 * k2e + 2.0 * k3e + k4e) / 6.0};
  if (!in_domain(m, out.base.coords) && m.kind() != ManifoldKind::Sphere)
    throw DomainError(m.name() + ": development left the chart domain" +
                          (time >= 0.0 ? " at t=" + std::to_string(time) : std::string()),
                      time);
  out.base.coords = wrap(m, std::move(out.base.coords));
  return out;
}

}  // namespace detail

/// Polar correction when the frame defect exceeds the threshold.
inline OrthonormalFrame settle_frame(const Manifold& m, OrthonormalFrame u, const DevelopOptions& opt,
                                     IntegrationStats* stats) {
  double def = frame_defect(m, u);
  if (stats) stats->max_defect_before = std::max(stats->max_defect_before, def);
  if (def > opt.reortho_threshold) {
    u = reorthonormalize(m, std::move(u));
    def = frame_defect(m, u);
    if (stats) ++stats->corrections;
  }
  if (stats) stats->max_defect_after = std::max(stats->max_defect_after, def);
  return u;
}

/// Flow of the horizontal field H_eta for unit time, i.e. the development of
/// the straight segment with increment eta: RK4 with ceil(|E eta| / max_substep)
/// substeps, then a polar correction if the frame defect exceeds the
/// threshold. `time` is only used in error messages.
inline OrthonormalFrame flow_increment(const Manifold& m, const OrthonormalFrame& u, const Vec& eta,
                                       const DevelopOptions& opt = {}, IntegrationStats* stats = nullptr,
                                       double time = -1.0) {
  if (eta.size() != m.dim()) throw ParameterError("horizontal step: increment must have the manifold dimension");
  if (eta.isZero(0.0)) return u;
  const double len = eta.norm();  // frame is orthonormal, so this is the metric length
  const int n = opt.max_substep > 0.0 ? std::max(1, static_cast<int>(std::ceil(len / opt.max_substep))) : 1;
  OrthonormalFrame out = u;
  if (n == 1) {
    out = detail::rk4_increment(m, u, eta, time);
  } else {
    const Vec sub = eta / static_cast<double>(n);
    for (int i = 0; i < n; ++i) out = detail::rk4_increment(m, out, sub, time);
  }
  return settle_frame(m, std::move(out), opt, stats);
}

/// One RK4 step of length h along the horizontal field H_xi.
inline OrthonormalFrame horizontal_step(const Manifold& m, const OrthonormalFrame& u, const Vec& xi, double h,
                                        const DevelopOptions& opt = {}, IntegrationStats* stats = nullptr) {
  if (!(h >= 0.0)) throw ParameterError("horizontal_step: h must be nonnegative");
  return flow_increment(m, u, Vec(xi * h), opt, stats);
}

/// Right action of a rotation on the fibre: E -> E g.
inline OrthonormalFrame rotate_frame(const OrthonormalFrame& u, const Mat& g) { return {u.base, u.frame * g}; }

inline void validate_initial_frame(const Manifold& m, const OrthonormalFrame& u0) {
  require_domain(m, u0.base.coords);
  if (u0.frame.rows() != m.coord_dim() || u0.frame.cols() != m.dim())
    throw ParameterError("initial frame has wrong shape");
  if (frame_defect(m, u0) > 1e-9) throw DegenerateFrame("initial frame is not orthonormal");
}

/// Stochastic development du = H_i(u) o dgamma^i + A_alpha^*(u) o dw^alpha by
/// Lie-Trotter splitting: an RK4 horizontal substep with the increment of
/// gamma, then the exact vertical substep E <- E exp(sum A_alpha dw^alpha).
/// `twist` may be empty (no twisting).
inline FramePath stochastic_develop(const Manifold& m, const OrthonormalFrame& u0, const SampledPath& gamma,
                                    const SampledPath* twist, const DevelopOptions& opt = {}) {
  validate_initial_frame(m, u0);
  if (gamma.dim() != m.dim()) throw ParameterError("develop: curve dimension must equal manifold dimension");
  std::optional<SkewBasis> basis;
  if (twist) {
    if (twist->grid() != gamma.grid()) throw ParameterError("stochastic_develop: drivers must share a grid");
    if (m.dim() < 2) throw ParameterError("stochastic_develop: twisting needs dimension >= 2");
    basis = so_basis(m.dim());
    if (twist->dim() != basis->size()) throw ParameterError("stochastic_develop: twisting driver must be so(d)-valued");
  }
  FramePath out{gamma.grid(), {}, {}};
  out.frames.reserve(gamma.grid().size());
  OrthonormalFrame u = u0;
  out.frames.push_back(u);
  for (Eigen::Index k = 1; k < gamma.nodes(); ++k) {
    const Vec dg = (gamma.values().row(k) - gamma.values().row(k - 1)).transpose();
    u = flow_increment(m, u, dg, opt, &out.stats, gamma.time(k));
    if (twist) {
      const Vec dw = (twist->values().row(k) - twist->values().row(k - 1)).transpose();
      if (!dw.isZero(0.0)) u = settle_frame(m, rotate_frame(u, skew_expm(basis->combine(dw))), opt, &out.stats);
    }
    out.frames.push_back(u);
  }
  return out;
}

inline FramePath stochastic_develop(const Manifold& m, const OrthonormalFrame& u0, const SampledPath& gamma,
                                    const SampledPath& twist, const DevelopOptions& opt = {}) {
  return stochastic_develop(m, u0, gamma, &twist, opt);
}

/// Cartan development of a curve of finite variation (no twisting).
inline FramePath develop(const Manifold& m, const OrthonormalFrame& u0, const SampledPath& gamma,
                         const DevelopOptions& opt = {}) {
  if (gamma.role() == PathRole::LocalMartingale || gamma.role() == PathRole::Semimartingale)
    throw WrongIntegralKind("develop: curve has a martingale part; use stochastic_develop");
  return stochastic_develop(m, u0, gamma, nullptr, opt);
}

struct DecomposedDevelopment {
  FramePath lift;     // horizontal lift x~ of the trace, started at u0
  RotationPath twist; // g with u = x~ g
  FramePath frames;   // u
};

/// Development through the factorization u = x~ g: g solves dg = g A o dw and
/// x~ solves dx~ = H_i(x~) g^i_j o dgamma^j (midpoint rule in g).
inline DecomposedDevelopment develop_decomposed(const Manifold& m, const OrthonormalFrame& u0,
                                                const SampledPath& gamma, const SampledPath& twist,
                                                const DevelopOptions& opt = {}) {
  validate_initial_frame(m, u0);
  if (twist.grid() != gamma.grid()) throw ParameterError("develop_decomposed: drivers must share a grid");
  if (gamma.dim() != m.dim()) throw ParameterError("develop: curve dimension must equal manifold dimension");
  const SkewBasis basis = so_basis(m.dim());
  DecomposedDevelopment out;
  out.twist = integrate_rotation(twist, basis);
  out.lift.grid = gamma.grid();
  out.frames.grid = gamma.grid();
  OrthonormalFrame v = u0;
  out.lift.frames.push_back(v);
  out.frames.frames.push_back(rotate_frame(v, out.twist.values[0]));
  for (Eigen::Index k = 1; k < gamma.nodes(); ++k) {
    const auto i = static_cast<size_t>(k);
    const Vec dg = (gamma.values().row(k) - gamma.values().row(k - 1)).transpose();
    const Vec eta = 0.5 * (out.twist.values[i - 1] + out.twist.values[i]) * dg;
    v = flow_increment(m, v, eta, opt, &out.lift.stats, gamma.time(k));
    out.lift.frames.push_back(v);
    out.frames.frames.push_back(settle_frame(m, rotate_frame(v, out.twist.values[i]), opt, &out.frames.stats));
  }
  out.frames.stats.merge(out.lift.stats);
  return out;
}

/// Drops the frames.
inline ManifoldPath project(const FramePath& u) {
  ManifoldPath x{u.grid, Mat(static_cast<Eigen::Index>(u.frames.size()), u.frames.front().base.coords.size())};
  for (size_t k = 0; k < u.frames.size(); ++k) x.points.row(static_cast<Eigen::Index>(k)) = u.frames[k].base.coords.transpose();
  return x;
}

/// Riemannian length of the polygon through the nodes: exact great-circle
/// arcs on the sphere, sqrt(dx^T g(midpoint) dx) on chart backends.
inline double trace_length(const Manifold& m, const ManifoldPath& x) {
  double len = 0.0;
  for (Eigen::Index k = 1; k < x.nodes(); ++k) {
    const Vec a = x.point(k - 1), b = x.point(k);
    if (m.extrinsic()) {
      len += 2.0 * std::asin(std::min(1.0, 0.5 * (b - a).norm()));
    } else {
      const Vec dx = displacement(m, a, b);
      const Vec mid = wrap(m, a + 0.5 * dx);
      len += std::sqrt(std::max(0.0, dx.dot(metric_at(m, mid) * dx)));
    }
  }
  return len;
}

struct LiftOptions {
  DevelopOptions develop;
  int max_iterations = 60;
  double tolerance = 1e-14;
};

namespace detail {

/// Tangent-space solve of E eta = r at a frame (least squares on the sphere).
inline Vec frame_solve(const Manifold& m, const OrthonormalFrame& u, const Vec& r) {
  if (m.extrinsic()) return u.frame.transpose() * r;
  return u.frame.partialPivLu().solve(r);
}

/// Initial guess for the increment carrying u.base to target.
inline Vec initial_increment(const Manifold& m, const OrthonormalFrame& u, const Vec& target) {
  const Vec& x = u.base.coords;
  if (m.extrinsic()) {
    const double th = distance(m, x, target);
    Vec w = target - x.dot(target) * x;
    const double n = w.norm();
    if (n > 0.0) w *= th / n;
    return u.frame.transpose() * w;
  }
  return frame_solve(m, u, displacement(m, x, target));
}

}  // namespace detail

struct LiftResult {
  FramePath frames;
  SampledPath driver;  // anti-development
};

/// Horizontal lift of a trace together with its anti-development. Each step
/// solves for the increment whose one-step development from the current frame
/// lands on the next trace point, so develop(antidevelop(x)) reproduces x on
/// the same grid to solver tolerance.
inline LiftResult lift_and_antidevelop(const Manifold& m, const OrthonormalFrame& u0, const ManifoldPath& x,
                                       const LiftOptions& opt = {}) {
  validate_initial_frame(m, u0);
  if (x.nodes() < 1 || x.points.cols() != m.coord_dim()) throw ParameterError("horizontal_lift: trace has wrong shape");
  if (x.nodes() != static_cast<Eigen::Index>(x.grid.size())) throw ParameterError("horizontal_lift: one point per grid node required");
  const Vec start = x.point(0);
  const double start_gap = m.extrinsic() ? (start - u0.base.coords).norm() : displacement(m, u0.base.coords, start).norm();
  if (start_gap > 1e-9 * std::max(1.0, start.norm())) throw ParameterError("horizontal_lift: trace must start at the base of u0");
  LiftResult out;
  out.frames.grid = x.grid;
  Mat y = Mat::Zero(x.nodes(), m.dim());
  OrthonormalFrame u = u0;
  out.frames.frames.push_back(u);
  for (Eigen::Index k = 1; k < x.nodes(); ++k) {
    const Vec target = x.point(k);
    require_domain(m, target, x.grid[static_cast<size_t>(k)]);
    if (m.extrinsic() && distance(m, u.base.coords, target) > 0.5 * std::numbers::pi)
      throw StepSizeError("horizontal_lift: step too large to invert the development map");
    Vec eta = detail::initial_increment(m, u, target);
    OrthonormalFrame next;
    double scale = std::max(1.0, eta.norm());
    double prev = std::numeric_limits<double>::infinity();
    bool done = false;
    IntegrationStats scratch;
    for (int it = 0; it < opt.max_iterations; ++it) {
      scratch = {};
      next = flow_increment(m, u, eta, opt.develop, &scratch, x.grid[static_cast<size_t>(k)]);
      const Vec r = m.extrinsic() ? Vec(target - next.base.coords) : displacement(m, next.base.coords, target);
      const double rn = r.norm();
      if (rn <= opt.tolerance * scale) {
        done = true;
        break;
      }
      if (it > 3 && rn > prev) break;  // not contracting
      prev = rn;
      eta += detail::frame_solve(m, next, r);
      scale = std::max(1.0, eta.norm());
    }
    if (!done) {
      // Accept a stalled iterate that is at rounding level.
      const Vec r = m.extrinsic() ? Vec(target - next.base.coords) : displacement(m, next.base.coords, target);
      if (r.norm() > 1e-11 * scale)
        throw StepSizeError("horizontal_lift: step too large to invert the development map at t=" +
                            std::to_string(x.grid[static_cast<size_t>(k)]));
    }
    out.frames.stats.merge(scratch);
    u = next;
    out.frames.frames.push_back(u);
    y.row(k) = y.row(k - 1) + eta.transpose();
  }
  out.driver = SampledPath(x.grid, std::move(y), PathRole::FiniteVariation);
  return out;
}

inline FramePath horizontal_lift(const Manifold& m, const OrthonormalFrame& u0, const ManifoldPath& x,
                                 const LiftOptions& opt = {}) {
  return lift_and_antidevelop(m, u0, x, opt).frames;
}

inline SampledPath antidevelop(const Manifold& m, const OrthonormalFrame& u0, const ManifoldPath& x,
                               const LiftOptions& opt = {}) {
  return lift_and_antidevelop(m, u0, x, opt).driver;
}

/// Sup over common nodes of the Riemannian distance between two traces.
inline double sup_distance(const Manifold& m, const ManifoldPath& a, const ManifoldPath& b) {
  if (a.nodes() != b.nodes()) throw ParameterError("sup_distance: traces must have the same nodes");
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.nodes(); ++k) s = std::max(s, distance(m, a.point(k), b.point(k)));
  return s;
}

}  // namespace rollsim
