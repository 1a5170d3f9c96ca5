#pragma once

// Sampled paths on a time grid and the pathwise calculus used throughout:
// variation, quadratic (co)variation, Riemann-Stieltjes and Stratonovich sums,
// uniform norm and modulus of continuity, and the G-process.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rollsim/errors.hpp"
#include "rollsim/rng.hpp"

namespace rollsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Grid = std::vector<double>;

enum class PathRole { FiniteVariation, LocalMartingale, Semimartingale, Deterministic };

inline std::string to_string(PathRole r) {
  switch (r) {
    case PathRole::FiniteVariation: return "finite-variation";
    case PathRole::LocalMartingale: return "local-martingale";
    case PathRole::Semimartingale: return "semimartingale";
    case PathRole::Deterministic: return "deterministic";
  }
  return "?";
}

inline PathRole role_from_string(const std::string& s) {
  if (s == "finite-variation") return PathRole::FiniteVariation;
  if (s == "local-martingale") return PathRole::LocalMartingale;
  if (s == "semimartingale") return PathRole::Semimartingale;
  if (s == "deterministic") return PathRole::Deterministic;
  throw ParameterError("unknown path role '" + s + "'");
}

/// Canonical decomposition Y = A + M stored nodewise. `bracket`, when known
/// in closed form (e.g. <sqrt(eps) B> = eps t I), holds <M, M> per node.
struct Decomposition {
  Mat a_part;
  Mat m_part;
  std::optional<std::vector<Mat>> bracket;
};

inline void validate_grid(const Grid& grid) {
  if (grid.empty()) throw ParameterError("grid must contain at least one node");
  for (size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) throw ParameterError("grid contains a non-finite time");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw ParameterError("grid must be strictly increasing");
  }
}

/// Uniform grid 0 = t_0 < ... < t_n = T with n = ceil(T / h).
inline Grid uniform_grid(double T, double h) {
  if (!(T > 0.0) || !(h > 0.0)) throw ParameterError("uniform_grid: T and h must be positive");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(T / h - 1e-9)));
  Grid g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = T * static_cast<double>(k) / static_cast<double>(n);
  g.back() = T;
  return g;
}

/// Largest step of the grid.
inline double mesh(const Grid& grid) {
  double m = 0.0;
  for (size_t k = 1; k < grid.size(); ++k) m = std::max(m, grid[k] - grid[k - 1]);
  return m;
}

/// Vector-valued path sampled on a grid; one row of `values` per node.
class SampledPath {
 public:
  SampledPath() = default;
  SampledPath(Grid grid, Mat values, PathRole role = PathRole::Deterministic,
              std::optional<Decomposition> dec = std::nullopt)
      : grid_(std::move(grid)), values_(std::move(values)), role_(role), dec_(std::move(dec)) {
    validate_grid(grid_);
    if (values_.rows() != static_cast<Eigen::Index>(grid_.size()))
      throw ParameterError("SampledPath: one value row per grid node required");
    if (dec_) {
      if (dec_->a_part.rows() != values_.rows() || dec_->a_part.cols() != values_.cols() ||
          dec_->m_part.rows() != values_.rows() || dec_->m_part.cols() != values_.cols())
        throw ParameterError("SampledPath: decomposition shape mismatch");
      const double err = (dec_->a_part + dec_->m_part - values_).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
      if (err > 1e-12 * scale) throw ParameterError("SampledPath: value != A-part + M-part");
      if (dec_->bracket && dec_->bracket->size() != grid_.size())
        throw ParameterError("SampledPath: bracket needs one matrix per node");
    }
  }

  const Grid& grid() const { return grid_; }
  const Mat& values() const { return values_; }
  PathRole role() const { return role_; }
  const std::optional<Decomposition>& decomposition() const { return dec_; }

  Eigen::Index nodes() const { return values_.rows(); }
  Eigen::Index dim() const { return values_.cols(); }
  double time(Eigen::Index k) const { return grid_[static_cast<size_t>(k)]; }
  double end_time() const { return grid_.back(); }
  Vec value(Eigen::Index k) const { return values_.row(k).transpose(); }

 private:
  Grid grid_;
  Mat values_;
  PathRole role_ = PathRole::Deterministic;
  std::optional<Decomposition> dec_;
};

/// Matrix-valued path: integrands f(t) in R^{d x n}, brackets, rotations.
struct MatrixPath {
  Grid grid;
  std::vector<Mat> values;

  static MatrixPath constant(const Grid& grid, const Mat& m) { return {grid, std::vector<Mat>(grid.size(), m)}; }
  /// Scalar path f viewed as the matrices f(t) I_n.
  static MatrixPath from_scalar(const SampledPath& p, Eigen::Index n = 1) {
    MatrixPath out{p.grid(), {}};
    out.values.reserve(p.grid().size());
    for (Eigen::Index k = 0; k < p.nodes(); ++k) out.values.push_back(p.values()(k, 0) * Mat::Identity(n, n));
    return out;
  }
};

/// Index of the last node with time <= t (within a relative 1e-12 slack).
inline size_t node_at_or_before(const Grid& grid, double t) {
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  auto it = std::upper_bound(grid.begin(), grid.end(), t + slack);
  if (it == grid.begin()) throw RangeError("time before the start of the grid");
  return static_cast<size_t>(std::distance(grid.begin(), it) - 1);
}

inline void require_within(const Grid& grid, double t, const char* what) {
  if (t > grid.back() * (1.0 + 1e-12) + 1e-12) throw RangeError(std::string(what) + ": time beyond grid end");
  if (t < grid.front()) throw RangeError(std::string(what) + ": time before grid start");
}

/// Linear interpolation of the path at time t.
inline Vec interpolate(const SampledPath& p, double t) {
  require_within(p.grid(), t, "interpolate");
  const size_t k = node_at_or_before(p.grid(), t);
  if (k + 1 >= p.grid().size() || t <= p.grid()[k]) return p.value(static_cast<Eigen::Index>(k));
  const double w = (t - p.grid()[k]) / (p.grid()[k + 1] - p.grid()[k]);
  return (1.0 - w) * p.value(static_cast<Eigen::Index>(k)) + w * p.value(static_cast<Eigen::Index>(k) + 1);
}

/// Brownian motion scaled by sqrt(eps): increments N(0, eps dt I_m).
inline SampledPath sample_brownian(int m, const Grid& grid, double eps, std::uint64_t seed) {
  if (m < 1) throw ParameterError("sample_brownian: dimension must be positive");
  if (!(eps >= 0.0)) throw ParameterError("sample_brownian: eps must be nonnegative");
  validate_grid(grid);
  Mat v = Mat::Zero(static_cast<Eigen::Index>(grid.size()), m);
  if (eps > 0.0) {
    Rng rng(seed);
    for (size_t k = 1; k < grid.size(); ++k) {
      const double sd = std::sqrt(eps * (grid[k] - grid[k - 1]));
      for (int i = 0; i < m; ++i)
        v(static_cast<Eigen::Index>(k), i) = v(static_cast<Eigen::Index>(k) - 1, i) + sd * rng.normal();
    }
  }
  return SampledPath(grid, std::move(v), PathRole::LocalMartingale);
}

/// Cumulative variation V(p)_{t_k} = sum_{i<k} |p_{i+1} - p_i|.
inline std::vector<double> variation_path(const SampledPath& p) {
  std::vector<double> v(p.grid().size(), 0.0);
  for (Eigen::Index k = 1; k < p.nodes(); ++k)
    v[static_cast<size_t>(k)] = v[static_cast<size_t>(k) - 1] + (p.values().row(k) - p.values().row(k - 1)).norm();
  return v;
}

/// Variation of the piecewise-linear interpolant on [0, t].
inline double total_variation(const SampledPath& p, double t) {
  require_within(p.grid(), t, "total_variation");
  const auto v = variation_path(p);
  const size_t k = node_at_or_before(p.grid(), t);
  if (k + 1 >= p.grid().size() || t <= p.grid()[k]) return v[k];
  const double w = (t - p.grid()[k]) / (p.grid()[k + 1] - p.grid()[k]);
  return v[k] + w * (v[k + 1] - v[k]);
}

inline double total_variation(const SampledPath& p) { return variation_path(p).back(); }

/// Maps partition times onto grid indices; every time must be a grid node.
inline std::vector<size_t> partition_indices(const Grid& grid, const Grid& partition) {
  validate_grid(partition);
  std::vector<size_t> idx;
  idx.reserve(partition.size());
  for (double t : partition) {
    require_within(grid, t, "partition");
    const size_t k = node_at_or_before(grid, t);
    if (std::abs(grid[k] - t) > 1e-12 * std::max(1.0, std::abs(t)))
      throw ParameterError("partition time " + std::to_string(t) + " is not a grid node");
    idx.push_back(k);
  }
  return idx;
}

/// Partition sums of increment products sum dX dY^T over a partition of the
/// common grid, cumulative at each partition time.
inline MatrixPath covariation(const SampledPath& x, const SampledPath& y, const Grid& partition) {
  if (x.grid() != y.grid()) throw ParameterError("covariation: paths must share a grid");
  const auto idx = partition_indices(x.grid(), partition);
  MatrixPath out{partition, {}};
  out.values.reserve(idx.size());
  Mat acc = Mat::Zero(x.dim(), y.dim());
  out.values.push_back(acc);
  for (size_t j = 1; j < idx.size(); ++j) {
    const auto a = static_cast<Eigen::Index>(idx[j - 1]), b = static_cast<Eigen::Index>(idx[j]);
    const Vec dx = (x.values().row(b) - x.values().row(a)).transpose();
    const Vec dy = (y.values().row(b) - y.values().row(a)).transpose();
    acc += dx * dy.transpose();
    out.values.push_back(acc);
  }
  return out;
}

inline MatrixPath quadratic_variation(const SampledPath& p, const Grid& partition) {
  return covariation(p, p, partition);
}

inline MatrixPath quadratic_variation(const SampledPath& p) { return covariation(p, p, p.grid()); }

enum class CovariationPair { Independent, Identical, ConstantFirst };

struct CovariationCheck {
  double statistic;  // mean |S^Delta| over replicas
  double bound;      // 3 sqrt(mesh * t)
  int replicas;
};

/// Mean absolute partition sum sum dX dW over R replicas of a pair of
/// one-dimensional Brownian paths on `grid`, with the pair built per `mode`.
inline CovariationCheck covariation_independence_check(int replicas, const Grid& grid, std::uint64_t seed,
                                                       CovariationPair mode = CovariationPair::Independent) {
  if (replicas < 100) throw ParameterError("covariation_independence_check: need at least 100 replicas");
  validate_grid(grid);
  double sum = 0.0;
  for (int r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    double s = 0.0;
    for (size_t k = 1; k < grid.size(); ++k) {
      const double sd = std::sqrt(grid[k] - grid[k - 1]);
      const double dw = sd * rng.normal();
      double dx = 0.0;
      switch (mode) {
        case CovariationPair::Independent: dx = sd * rng.normal(); break;
        case CovariationPair::Identical: dx = dw; break;
        case CovariationPair::ConstantFirst: dx = 0.0; break;
      }
      s += dx * dw;
    }
    sum += std::abs(s);
  }
  const double t = grid.back() - grid.front();
  return {sum / replicas, 3.0 * std::sqrt(mesh(grid) * t), replicas};
}

namespace detail {

inline void require_shared_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b) throw ParameterError(std::string(what) + ": integrand and integrator must share a grid");
}

inline SampledPath integrate(const MatrixPath& f, const SampledPath& y, bool midpoint, PathRole role) {
  if (f.values.size() != y.grid().size()) throw ParameterError("integral: integrand has wrong node count");
  const Eigen::Index rows = f.values.front().rows();
  if (f.values.front().cols() != y.dim()) throw ParameterError("integral: integrand columns != integrator dimension");
  Mat out = Mat::Zero(y.nodes(), rows);
  for (Eigen::Index k = 1; k < y.nodes(); ++k) {
    const Vec dy = (y.values().row(k) - y.values().row(k - 1)).transpose();
    const auto i = static_cast<size_t>(k);
    const Vec inc = midpoint ? Vec(0.5 * (f.values[i - 1] + f.values[i]) * dy) : Vec(f.values[i - 1] * dy);
    out.row(k) = out.row(k - 1) + inc.transpose();
  }
  return SampledPath(y.grid(), std::move(out), role);
}

}  // namespace detail

/// Left-point Riemann-Stieltjes integral (f . y)(t_k) against a path of finite
/// variation. Integrators with a martingale part are rejected.
inline SampledPath stieltjes_integral(const MatrixPath& f, const SampledPath& y) {
  detail::require_shared_grid(f.grid, y.grid(), "stieltjes_integral");
  if (y.role() == PathRole::LocalMartingale || y.role() == PathRole::Semimartingale)
    throw WrongIntegralKind("stieltjes_integral: integrator has a martingale part; use stratonovich_integral");
  return detail::integrate(f, y, false, PathRole::FiniteVariation);
}

/// Scalar integrand variant.
inline SampledPath stieltjes_integral(const SampledPath& f, const SampledPath& y) {
  if (f.dim() != 1) throw ParameterError("stieltjes_integral: scalar integrand expected");
  return stieltjes_integral(MatrixPath::from_scalar(f, y.dim()), y);
}

/// Midpoint (Stratonovich) sums sum 1/2 (f_i + f_{i+1}) dy_i.
inline SampledPath stratonovich_integral(const MatrixPath& f, const SampledPath& y) {
  detail::require_shared_grid(f.grid, y.grid(), "stratonovich_integral");
  const PathRole role = (y.role() == PathRole::FiniteVariation || y.role() == PathRole::Deterministic)
                            ? PathRole::FiniteVariation
                            : PathRole::Semimartingale;
  return detail::integrate(f, y, true, role);
}

inline SampledPath stratonovich_integral(const SampledPath& f, const SampledPath& y) {
  if (f.dim() != 1) throw ParameterError("stratonovich_integral: scalar integrand expected");
  return stratonovich_integral(MatrixPath::from_scalar(f, y.dim()), y);
}

/// sup_{t <= T} |p(t)| over grid nodes.
inline double sup_norm(const SampledPath& p, double T) {
  require_within(p.grid(), T, "sup_norm");
  const size_t last = node_at_or_before(p.grid(), T);
  double s = 0.0;
  for (size_t k = 0; k <= last; ++k) s = std::max(s, p.values().row(static_cast<Eigen::Index>(k)).norm());
  return s;
}

/// sup |p(t) - p(s)| over grid nodes with |t - s| <= rho, s, t <= T.
inline double modulus_of_continuity(const SampledPath& p, double T, double rho) {
  if (!(rho > 0.0)) throw ParameterError("modulus_of_continuity: rho must be positive");
  require_within(p.grid(), T, "modulus_of_continuity");
  const size_t last = node_at_or_before(p.grid(), T);
  const auto& g = p.grid();
  const double slack = 1e-12 * std::max(1.0, T);
  double w = 0.0;
  for (size_t i = 0; i <= last; ++i)
    for (size_t j = i + 1; j <= last && g[j] - g[i] <= rho + slack; ++j)
      w = std::max(w, (p.values().row(static_cast<Eigen::Index>(j)) - p.values().row(static_cast<Eigen::Index>(i))).norm());
  return w;
}

/// Operator (spectral) norm of a matrix.
inline double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

/// Cumulative total variation of a matrix path in the operator norm.
inline std::vector<double> operator_variation(const MatrixPath& q) {
  std::vector<double> v(q.values.size(), 0.0);
  for (size_t k = 1; k < q.values.size(); ++k) v[k] = v[k - 1] + operator_norm(q.values[k] - q.values[k - 1]);
  return v;
}

/// G_t = |V(A)|_t + (1/eps) |<M, M>|_t for a decomposed semimartingale, with
/// |.|_t the operator-norm variation of the bracket. Uses the closed-form
/// bracket when the path carries one, otherwise the realized partition sums
/// on the full grid.
inline SampledPath g_process(const SampledPath& y, double eps) {
  if (!(eps > 0.0)) throw ParameterError("g_process: eps must be positive");
  if (!y.decomposition()) throw ParameterError("g_process: path carries no semimartingale decomposition");
  const auto& dec = *y.decomposition();
  const SampledPath a(y.grid(), dec.a_part, PathRole::FiniteVariation);
  const auto va = variation_path(a);
  MatrixPath bracket;
  if (dec.bracket) {
    bracket = {y.grid(), *dec.bracket};
  } else {
    bracket = quadratic_variation(SampledPath(y.grid(), dec.m_part, PathRole::LocalMartingale));
  }
  const auto vq = operator_variation(bracket);
  Mat g(y.nodes(), 1);
  for (Eigen::Index k = 0; k < y.nodes(); ++k) {
    const auto i = static_cast<size_t>(k);
    g(k, 0) = va[i] + vq[i] / eps;
  }
  return SampledPath(y.grid(), std::move(g), PathRole::FiniteVariation);
}

}  // namespace rollsim
