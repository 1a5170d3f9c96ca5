#pragma once

// Lie algebra so(d) and the twisting process on SO(d).

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

#include "rollsim/errors.hpp"
#include "rollsim/paths.hpp"

namespace rollsim {

/// Basis {a_i^j = e_i (x) e_j^* - e_j (x) e_i^*, i < j} of so(d) in
/// lexicographic (i, j) order: entry (i, j) is +1 and entry (j, i) is -1.
/// Orthonormal for the inner product <A, B> = tr(A^T B) / 2.
struct SkewBasis {
  int dim = 0;
  std::vector<Mat> mats;
  std::vector<std::pair<int, int>> index;  // (i, j) of each element

  int size() const { return static_cast<int>(mats.size()); }

  /// sum_alpha c_alpha A_alpha
  Mat combine(const Vec& c) const {
    Mat a = Mat::Zero(dim, dim);
    for (int k = 0; k < size(); ++k) {
      const auto [i, j] = index[static_cast<size_t>(k)];
      a(i, j) += c(k);
      a(j, i) -= c(k);
    }
    return a;
  }

  /// Coordinates of a skew matrix in the basis.
  Vec coordinates(const Mat& a) const {
    Vec c(size());
    for (int k = 0; k < size(); ++k) {
      const auto [i, j] = index[static_cast<size_t>(k)];
      c(k) = 0.5 * (a(i, j) - a(j, i));
    }
    return c;
  }
};

inline int so_dim(int d) { return d * (d - 1) / 2; }

inline SkewBasis so_basis(int d) {
  if (d < 2) throw ParameterError("so_basis: dimension must be at least 2");
  SkewBasis b;
  b.dim = d;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Mat a = Mat::Zero(d, d);
      a(i, j) = 1.0;
      a(j, i) = -1.0;
      b.mats.push_back(std::move(a));
      b.index.emplace_back(i, j);
    }
  return b;
}

/// Largest entry of |g^T g - I|.
inline double orthogonality_defect(const Mat& g) {
  return (g.transpose() * g - Mat::Identity(g.cols(), g.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

/// One Newton step towards the orthogonal polar factor: (Q + Q^{-T}) / 2.
inline Mat polish_orthogonal(const Mat& q) { return 0.5 * (q + q.inverse().transpose()); }

}  // namespace detail

/// exp(A) for skew-symmetric A. Closed forms for d = 2, 3; scaling and
/// squaring with Pade approximants for larger d.
inline Mat skew_expm(const Mat& a) {
  if (a.rows() != a.cols()) throw ParameterError("skew_expm: square matrix required");
  if ((a + a.transpose()).norm() > 1e-12) throw ParameterError("skew_expm: matrix is not skew-symmetric");
  const Eigen::Index d = a.rows();
  if (d == 1) return Mat::Identity(1, 1);
  if (d == 2) {
    const double th = a(0, 1);
    Mat r(2, 2);
    r << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
    return r;
  }
  const Mat s = 0.5 * (a - a.transpose());
  if (d == 3) {
    const double th = std::sqrt(0.5 * s.squaredNorm());
    double c1, c2;  // sin(th)/th, (1 - cos th)/th^2
    if (th < 1e-4) {
      const double t2 = th * th;
      c1 = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
      c2 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    } else {
      c1 = std::sin(th) / th;
      const double h = std::sin(0.5 * th) / th;
      c2 = 2.0 * h * h;
    }
    return Mat::Identity(3, 3) + c1 * s + c2 * (s * s);
  }
  Mat e = s.exp();
  if (orthogonality_defect(e) > 1e-14) e = detail::polish_orthogonal(e);
  return e;
}

/// Principal logarithm of a rotation close to the identity (angles < pi).
inline Mat rotation_log(const Mat& g) {
  const Eigen::Index d = g.rows();
  if (d == 2) {
    const double th = std::atan2(g(0, 1), g(0, 0));
    Mat a(2, 2);
    a << 0.0, th, -th, 0.0;
    return a;
  }
  if (d == 3) {
    const Mat k = 0.5 * (g - g.transpose());  // sin(th)/th * S
    const double sin_th = std::sqrt(0.5 * k.squaredNorm());
    const double cos_th = std::clamp(0.5 * (g.trace() - 1.0), -1.0, 1.0);
    const double th = std::atan2(sin_th, cos_th);
    const double f = sin_th < 1e-12 ? 1.0 + th * th / 6.0 : th / sin_th;
    return f * k;
  }
  const Mat l = g.log();
  return 0.5 * (l - l.transpose());
}

/// Nodewise SO(d) path.
struct RotationPath {
  Grid grid;
  std::vector<Mat> values;

  double max_orthogonality_defect() const {
    double m = 0.0;
    for (const auto& g : values) m = std::max(m, orthogonality_defect(g));
    return m;
  }
  double max_determinant_error() const {
    double m = 0.0;
    for (const auto& g : values) m = std::max(m, std::abs(g.determinant() - 1.0));
    return m;
  }
};

/// Geometric Euler scheme for dg = g A_alpha o dw^alpha, g_0 = I:
/// g_{k+1} = g_k exp(sum_alpha A_alpha dw^alpha_k).
inline RotationPath integrate_rotation(const SampledPath& driver, const SkewBasis& basis) {
  if (driver.dim() != basis.size())
    throw ParameterError("integrate_rotation: driver dimension must equal so(d) dimension");
  RotationPath out{driver.grid(), {}};
  out.values.reserve(driver.grid().size());
  Mat g = Mat::Identity(basis.dim, basis.dim);
  out.values.push_back(g);
  for (Eigen::Index k = 1; k < driver.nodes(); ++k) {
    const Vec dw = (driver.values().row(k) - driver.values().row(k - 1)).transpose();
    g = g * skew_expm(basis.combine(dw));
    if (orthogonality_defect(g) > 1e-13) g = detail::polish_orthogonal(g);
    out.values.push_back(g);
  }
  return out;
}

/// Driver path w with integrate_rotation(w) reproducing the given rotations;
/// increments are logarithms of g_k^{-1} g_{k+1}.
inline SampledPath rotation_driver(const RotationPath& r, const SkewBasis& basis) {
  Mat w = Mat::Zero(static_cast<Eigen::Index>(r.values.size()), basis.size());
  for (size_t k = 1; k < r.values.size(); ++k) {
    const Mat step = r.values[k - 1].transpose() * r.values[k];
    w.row(static_cast<Eigen::Index>(k)) =
        w.row(static_cast<Eigen::Index>(k) - 1) + basis.coordinates(rotation_log(step)).transpose();
  }
  return SampledPath(r.grid, std::move(w), PathRole::FiniteVariation);
}

}  // namespace rollsim
