#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "rollsim/geometry.hpp"

namespace rollsim::testkit {

/// Independent small RNG for property-test generators.
class Gen {
 public:
  explicit Gen(unsigned seed) : e_(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(e_); }
  double normal() { return std::normal_distribution<double>()(e_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(e_); }
  Vec normal_vec(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  Vec unit_vec(Eigen::Index n) {
    Vec v = normal_vec(n);
    return v / v.norm();
  }
  Mat normal_mat(Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }

 private:
  std::mt19937 e_;
};

/// The half-plane written as a user chart, for comparing the chart code path
/// with the closed-form backend.
inline Manifold half_plane_chart() {
  backend::Chart c;
  c.dim = 2;
  c.name = "half-plane-chart";
  c.metric = [](const Vec& x) { return Mat(Mat::Identity(2, 2) / (x(1) * x(1))); };
  c.christoffel = [](const Vec& x) {
    Christoffel g(2, Mat::Zero(2, 2));
    g[0](0, 1) = g[0](1, 0) = -1.0 / x(1);
    g[1](0, 0) = 1.0 / x(1);
    g[1](1, 1) = -1.0 / x(1);
    return g;
  };
  c.domain = [](const Vec& x) { return x(1) > 0.0; };
  return Manifold::chart(std::move(c));
}

/// Random point in the backend domain.
inline Vec random_point(const Manifold& m, Gen& g) {
  switch (m.kind()) {
    case ManifoldKind::Sphere: return g.unit_vec(m.coord_dim());
    case ManifoldKind::HalfPlane: return Vec{{g.uniform(-2, 2), g.uniform(0.2, 3)}};
    case ManifoldKind::FlatTorus: {
      Vec v(m.dim());
      for (int i = 0; i < m.dim(); ++i) v(i) = g.uniform(0, 2 * std::numbers::pi);
      return v;
    }
    default: return g.normal_vec(m.dim());
  }
}

}  // namespace rollsim::testkit
