#pragma once

// Riemannian manifold backends: flat space, the unit sphere embedded in
// ambient space, the hyperbolic half-plane, the flat torus, and user charts.
//
// Chart backends (flat, half-plane, torus, user chart) work in coordinates:
// a frame is a d x d matrix whose columns are the coordinate components of the
// frame vectors. The sphere works extrinsically: points live in R^{d+1} and a
// frame is a (d+1) x d matrix with columns tangent at the base point.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "rollsim/errors.hpp"
#include "rollsim/rng.hpp"

namespace rollsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Christoffel symbols, indexed as gamma[i](j, k) = Gamma^i_{jk}.
using Christoffel = std::vector<Mat>;

namespace backend {

struct Flat {
  int dim;
};

/// Unit sphere S^dim embedded in R^{dim+1}.
struct Sphere {
  int dim;
};

/// Upper half-plane {y > 0} with metric (dx^2 + dy^2) / y^2.
struct HalfPlane {};

/// R^dim / (period Z)^dim with the flat metric.
struct FlatTorus {
  int dim;
  double period = 2.0 * std::numbers::pi;
};

/// User-supplied chart. Gamma is taken as given; consistency with the metric
/// can be audited with audit_christoffel().
struct Chart {
  int dim;
  std::function<Mat(const Vec&)> metric;
  std::function<Christoffel(const Vec&)> christoffel;
  std::function<bool(const Vec&)> domain;  // empty means everywhere valid
  std::string name = "chart";
};

}  // namespace backend

enum class ManifoldKind { Flat, Sphere, HalfPlane, FlatTorus, Chart };

/// Description of a Riemannian manifold backend. Cheap to copy.
class Manifold {
 public:
  using Backend = std::variant<backend::Flat, backend::Sphere, backend::HalfPlane,
                               backend::FlatTorus, backend::Chart>;

  static Manifold flat(int d) {
    if (d < 1) throw ParameterError("flat: dimension must be positive");
    return Manifold(backend::Flat{d});
  }
  static Manifold sphere(int d) {
    if (d < 1) throw ParameterError("sphere: dimension must be positive");
    return Manifold(backend::Sphere{d});
  }
  static Manifold half_plane() { return Manifold(backend::HalfPlane{}); }
  static Manifold torus(int d, double period = 2.0 * std::numbers::pi) {
    if (d < 1) throw ParameterError("torus: dimension must be positive");
    if (!(period > 0.0)) throw ParameterError("torus: period must be positive");
    return Manifold(backend::FlatTorus{d, period});
  }
  static Manifold chart(backend::Chart c) {
    if (c.dim < 1) throw ParameterError("chart: dimension must be positive");
    if (!c.metric || !c.christoffel) throw ParameterError("chart: metric and christoffel callables required");
    return Manifold(std::move(c));
  }

  ManifoldKind kind() const { return static_cast<ManifoldKind>(backend_.index()); }
  const Backend& backend() const { return backend_; }

  /// Intrinsic dimension d.
  int dim() const {
    return std::visit(
        [](const auto& b) -> int {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, backend::HalfPlane>) return 2;
          else return b.dim;
        },
        backend_);
  }
  /// Number of stored coordinates per point (d, or d + 1 for the sphere).
  int coord_dim() const { return kind() == ManifoldKind::Sphere ? dim() + 1 : dim(); }
  bool extrinsic() const { return kind() == ManifoldKind::Sphere; }

  std::string name() const {
    switch (kind()) {
      case ManifoldKind::Flat: return "flat";
      case ManifoldKind::Sphere: return "sphere";
      case ManifoldKind::HalfPlane: return "half-plane";
      case ManifoldKind::FlatTorus: return "torus";
      case ManifoldKind::Chart: return std::get<backend::Chart>(backend_).name;
    }
    return "?";
  }

 private:
  explicit Manifold(Backend b) : backend_(std::move(b)) {}
  Backend backend_;
};

struct ManifoldPoint {
  Vec coords;
  int chart = 0;
};

struct OrthonormalFrame {
  ManifoldPoint base;
  Mat frame;
};

inline constexpr double kUnitSphereTol = 1e-12;

/// True when x lies in the backend's domain.
inline bool in_domain(const Manifold& m, const Vec& x) {
  if (x.size() != m.coord_dim() || !x.allFinite()) return false;
  switch (m.kind()) {
    case ManifoldKind::HalfPlane: return x(1) > 0.0;
    case ManifoldKind::Sphere: return std::abs(x.norm() - 1.0) <= 1e-9;
    case ManifoldKind::Chart: {
      const auto& c = std::get<backend::Chart>(m.backend());
      return !c.domain || c.domain(x);
    }
    default: return true;
  }
}

inline void require_domain(const Manifold& m, const Vec& x, double time = -1.0) {
  if (!in_domain(m, x)) {
    std::string msg = m.name() + ": point outside the valid domain";
    if (time >= 0.0) msg += " at t=" + std::to_string(time);
    throw DomainError(msg, time);
  }
}

/// Reduces torus coordinates into [0, period); identity on other backends.
inline Vec wrap(const Manifold& m, Vec x) {
  if (const auto* t = std::get_if<backend::FlatTorus>(&m.backend())) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x(i) -= t->period * std::floor(x(i) / t->period);
      if (x(i) >= t->period) x(i) = 0.0;
    }
  }
  return x;
}

/// Coordinate displacement from a to b; minimal image on the torus.
inline Vec displacement(const Manifold& m, const Vec& a, const Vec& b) {
  Vec d = b - a;
  if (const auto* t = std::get_if<backend::FlatTorus>(&m.backend())) {
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) -= t->period * std::round(d(i) / t->period);
  }
  return d;
}

/// Metric matrix g_ij at x. Not available on the extrinsic sphere, whose
/// metric is the ambient inner product restricted to the tangent space.
inline Mat metric_at(const Manifold& m, const Vec& x) {
  if (m.extrinsic()) throw UnsupportedBackend("metric_at: sphere backend uses the ambient inner product");
  require_domain(m, x);
  switch (m.kind()) {
    case ManifoldKind::HalfPlane: return Mat::Identity(2, 2) / (x(1) * x(1));
    case ManifoldKind::Chart: return std::get<backend::Chart>(m.backend()).metric(x);
    default: return Mat::Identity(m.dim(), m.dim());
  }
}

inline Mat metric_at(const Manifold& m, const ManifoldPoint& p) { return metric_at(m, p.coords); }

inline Christoffel christoffel_at(const Manifold& m, const Vec& x) {
  if (m.extrinsic()) throw UnsupportedBackend("christoffel_at: not defined on the extrinsic sphere backend");
  require_domain(m, x);
  const int d = m.dim();
  switch (m.kind()) {
    case ManifoldKind::HalfPlane: {
      Christoffel g(2, Mat::Zero(2, 2));
      const double inv = 1.0 / x(1);
      g[0](0, 1) = g[0](1, 0) = -inv;
      g[1](0, 0) = inv;
      g[1](1, 1) = -inv;
      return g;
    }
    case ManifoldKind::Chart: return std::get<backend::Chart>(m.backend()).christoffel(x);
    default: return Christoffel(d, Mat::Zero(d, d));
  }
}

inline Christoffel christoffel_at(const Manifold& m, const ManifoldPoint& p) {
  return christoffel_at(m, p.coords);
}

/// Contraction C(i, l) = Gamma^i_{jl} v^j, so that the covariant correction of
/// a vector w along v is -C w.
inline Mat christoffel_contract(const Christoffel& gamma, const Vec& v) {
  const auto d = static_cast<Eigen::Index>(gamma.size());
  Mat c(d, d);
  for (Eigen::Index i = 0; i < d; ++i) c.row(i) = v.transpose() * gamma[static_cast<size_t>(i)];
  return c;
}

/// Riemannian inner product of tangent vectors v, w at x.
inline double inner(const Manifold& m, const Vec& x, const Vec& v, const Vec& w) {
  if (m.extrinsic()) return v.dot(w);
  return v.dot(metric_at(m, x) * w);
}

inline double tangent_norm(const Manifold& m, const Vec& x, const Vec& v) {
  return std::sqrt(std::max(0.0, inner(m, x, v, v)));
}

/// Point reached at time t by the geodesic with initial point x0 and velocity
/// v0. Closed forms on built-in backends; RK4 with the given step on charts.
inline Vec geodesic(const Manifold& m, const Vec& x0, const Vec& v0, double t, double step = 1e-3) {
  require_domain(m, x0);
  if (v0.size() != m.coord_dim()) throw ParameterError("geodesic: velocity has wrong size");
  switch (m.kind()) {
    case ManifoldKind::Flat: return x0 + t * v0;
    case ManifoldKind::FlatTorus: return wrap(m, x0 + t * v0);
    case ManifoldKind::Sphere: {
      if (std::abs(x0.dot(v0)) > 1e-9 * std::max(1.0, v0.norm()))
        throw ParameterError("geodesic: velocity not tangent to the sphere");
      const double s = v0.norm();
      if (s == 0.0) return x0;
      return std::cos(s * t) * x0 + std::sin(s * t) * (v0 / s);
    }
    case ManifoldKind::HalfPlane: {
      const double x = x0(0), y = x0(1);
      const double speed = v0.norm() / y;
      if (speed == 0.0) return x0;
      Vec out(2);
      if (v0(0) == 0.0) {
        out << x, y * std::exp(std::copysign(speed * t, v0(1)));
        return out;
      }
      // Semicircle centred at (c, 0): (c + R tanh s, R sech s), unit speed in s.
      const double c = x + y * v0(1) / v0(0);
      const double r = std::hypot(x - c, y);
      const double s0 = std::atanh((x - c) / r);
      const double s = s0 + std::copysign(speed * t, v0(0));
      out << c + r * std::tanh(s), r / std::cosh(s);
      return out;
    }
    case ManifoldKind::Chart: {
      if (!(step > 0.0)) throw ParameterError("geodesic: step must be positive");
      const int d = m.dim();
      auto rhs = [&](const Vec& x, const Vec& v, Vec& dx, Vec& dv) {
        const Christoffel g = christoffel_at(m, x);
        dx = v;
        dv.resize(d);
        for (int i = 0; i < d; ++i) dv(i) = -v.dot(g[static_cast<size_t>(i)] * v);
      };
      const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(t) / step)));
      const double h = t / static_cast<double>(n);
      Vec x = x0, v = v0, k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
      for (long i = 0; i < n; ++i) {
        rhs(x, v, k1x, k1v);
        rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v, k2x, k2v);
        rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v, k3x, k3v);
        rhs(x + h * k3x, v + h * k3v, k4x, k4v);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        require_domain(m, x, (static_cast<double>(i) + 1.0) * h);
      }
      return x;
    }
  }
  return x0;
}

inline ManifoldPoint geodesic(const Manifold& m, const ManifoldPoint& x0, const Vec& v0, double t,
                              double step = 1e-3) {
  return {geodesic(m, x0.coords, v0, t, step), x0.chart};
}

/// Riemannian distance. Closed forms only; user charts throw UnsupportedBackend.
inline double distance(const Manifold& m, const Vec& a, const Vec& b) {
  require_domain(m, a);
  require_domain(m, b);
  switch (m.kind()) {
    case ManifoldKind::Flat: return (b - a).norm();
    case ManifoldKind::FlatTorus: return displacement(m, a, b).norm();
    case ManifoldKind::Sphere: {
      // 2 asin(chord / 2) is well conditioned for nearby and antipodal points.
      const double chord = std::min(2.0, (b - a).norm());
      return 2.0 * std::asin(0.5 * chord);
    }
    case ManifoldKind::HalfPlane:
      return 2.0 * std::asinh((b - a).norm() / (2.0 * std::sqrt(a(1) * b(1))));
    case ManifoldKind::Chart:
      throw UnsupportedBackend("distance: no closed form on chart backends; use trace_length of a path");
  }
  return 0.0;
}

inline double distance(const Manifold& m, const ManifoldPoint& a, const ManifoldPoint& b) {
  return distance(m, a.coords, b.coords);
}

/// Largest entry of |E^T G E - I|; on the sphere also the tangency defect
/// max_j |x . E_j| and the base normalization error.
inline double frame_defect(const Manifold& m, const OrthonormalFrame& u) {
  const Mat& e = u.frame;
  const int d = m.dim();
  if (m.extrinsic()) {
    double def = (e.transpose() * e - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
    def = std::max(def, (u.base.coords.transpose() * e).cwiseAbs().maxCoeff());
    return std::max(def, std::abs(u.base.coords.norm() - 1.0));
  }
  const Mat g = metric_at(m, u.base.coords);
  return (e.transpose() * g * e - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
}

namespace detail {

/// Orthogonal polar factor F (F^T F)^{-1/2} of a full-column-rank matrix.
inline Mat polar_factor(const Mat& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(f.transpose() * f);
  if (es.eigenvalues().minCoeff() <= 0.0) throw DegenerateFrame("polar: frame lost rank");
  return f * es.operatorInverseSqrt();
}

}  // namespace detail

/// Nearest orthonormal frame in the metric at the base (polar decomposition).
/// On the sphere the base is renormalized and the columns projected to its
/// tangent space first.
inline OrthonormalFrame reorthonormalize(const Manifold& m, OrthonormalFrame u) {
  if (m.extrinsic()) {
    Vec& x = u.base.coords;
    x /= x.norm();
    const Mat f = u.frame - x * (x.transpose() * u.frame);
    u.frame = detail::polar_factor(f);
    // One more projection removes the O(eps) tangency error of the product.
    u.frame -= x * (x.transpose() * u.frame);
    return u;
  }
  const Mat g = metric_at(m, u.base.coords);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw DomainError("reorthonormalize: metric not positive definite");
  const Mat lt = llt.matrixU();  // g = U^T U
  const Mat q = detail::polar_factor(lt * u.frame);
  u.frame = lt.triangularView<Eigen::Upper>().solve(q);
  return u;
}

/// Orthonormal frame at x obtained by Gram-Schmidt in the metric from the
/// columns of `input` (projected to the tangent space on the sphere).
inline OrthonormalFrame gram_schmidt_frame(const Manifold& m, const Vec& x, const Mat& input) {
  require_domain(m, x);
  const int d = m.dim();
  if (input.rows() != m.coord_dim() || input.cols() != d)
    throw ParameterError("gram_schmidt_frame: input has wrong shape");
  const bool ext = m.extrinsic();
  const Mat g = ext ? Mat::Identity(m.coord_dim(), m.coord_dim()) : metric_at(m, x);
  const Vec xn = ext ? Vec(x / x.norm()) : x;
  Mat e = input;
  for (int j = 0; j < d; ++j) {
    Vec v = e.col(j);
    if (ext) v -= xn * xn.dot(v);
    const double scale = std::sqrt(std::max(0.0, v.dot(g * v)));
    // Two passes of modified Gram-Schmidt keep the result orthonormal to rounding.
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < j; ++k) v -= e.col(k) * e.col(k).dot(g * v);
      if (ext) v -= xn * xn.dot(v);
    }
    const double nrm = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (!(nrm > 1e-12 * std::max(scale, 1e-300)) || nrm == 0.0)
      throw DegenerateFrame("gram_schmidt_frame: input columns are linearly dependent");
    e.col(j) = v / nrm;
  }
  return {{xn, 0}, e};
}

inline OrthonormalFrame gram_schmidt_frame(const Manifold& m, const ManifoldPoint& x, const Mat& input) {
  auto u = gram_schmidt_frame(m, x.coords, input);
  u.base.chart = x.chart;
  return u;
}

/// Random orthonormal frame at x from a seeded Gaussian matrix.
inline OrthonormalFrame gram_schmidt_frame(const Manifold& m, const Vec& x, std::uint64_t seed) {
  Rng rng(seed);
  Mat a(m.coord_dim(), m.dim());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = rng.normal();
  return gram_schmidt_frame(m, x, a);
}

/// The "identity" frame at x: coordinate axes on charts, the first d ambient
/// axes projected to the tangent space on the sphere.
inline OrthonormalFrame standard_frame(const Manifold& m, const Vec& x) {
  if (!m.extrinsic()) return gram_schmidt_frame(m, x, Mat::Identity(m.dim(), m.dim()));
  // Pick the d ambient axes least aligned with x.
  const int n = m.coord_dim();
  Eigen::Index drop = 0;
  x.cwiseAbs().maxCoeff(&drop);
  Mat a(n, m.dim());
  int c = 0;
  for (int i = 0; i < n; ++i)
    if (i != drop) a.col(c++) = Vec::Unit(n, i);
  return gram_schmidt_frame(m, x, a);
}

/// Maximum discrepancy between the supplied Christoffel symbols and those
/// computed from central differences of the metric with step h.
inline double audit_christoffel(const Manifold& m, const Vec& x, double h = 1e-5) {
  if (m.extrinsic()) throw UnsupportedBackend("audit_christoffel: chart backends only");
  const int d = m.dim();
  std::vector<Mat> dg(static_cast<size_t>(d));  // dg[k](i,j) = d_k g_ij
  for (int k = 0; k < d; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    dg[static_cast<size_t>(k)] = (metric_at(m, xp) - metric_at(m, xm)) / (2.0 * h);
  }
  const Mat ginv = metric_at(m, x).inverse();
  const Christoffel given = christoffel_at(m, x);
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int l = 0; l < d; ++l)
          s += ginv(i, l) * (dg[static_cast<size_t>(j)](l, k) + dg[static_cast<size_t>(k)](l, j) -
                             dg[static_cast<size_t>(l)](j, k));
        worst = std::max(worst, std::abs(0.5 * s - given[static_cast<size_t>(i)](j, k)));
      }
  return worst;
}

}  // namespace rollsim
