#include <gtest/gtest.h>

#include "rollsim/rotation.hpp"
#include "support.hpp"

using namespace rollsim;
using rollsim::testkit::Gen;

namespace {

// plain power series with scaling and squaring, used as an independent reference
Mat series_expm(const Mat& a) {
  int s = 0;
  double n = a.norm();
  while (n > 0.25) {
    n /= 2;
    ++s;
  }
  const Mat b = a / std::pow(2.0, s);
  Mat term = Mat::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * b / k;
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

Mat random_skew(const SkewBasis& b, Gen& g, double scale) { return b.combine(scale * g.normal_vec(b.size())); }

}  // namespace

TEST(SkewBasis, CountAndOrthonormality) {
  for (int d = 2; d <= 6; ++d) {
    const auto b = so_basis(d);
    ASSERT_EQ(b.size(), d * (d - 1) / 2);
    for (int i = 0; i < b.size(); ++i) {
      EXPECT_EQ((b.mats[i] + b.mats[i].transpose()).norm(), 0.0);
      for (int j = 0; j < b.size(); ++j) {
        const double ip = 0.5 * (b.mats[i].transpose() * b.mats[j]).trace();
        EXPECT_EQ(ip, i == j ? 1.0 : 0.0);
      }
    }
  }
  EXPECT_THROW(so_basis(1), ParameterError);
}

TEST(SkewBasis, CombineCoordinatesRoundTrip) {
  Gen g(3);
  for (int d = 2; d <= 5; ++d) {
    const auto b = so_basis(d);
    for (int t = 0; t < 20; ++t) {
      const Vec c = g.normal_vec(b.size());
      EXPECT_LE((b.coordinates(b.combine(c)) - c).norm(), 1e-15);
      Mat ref = Mat::Zero(d, d);
      for (int k = 0; k < b.size(); ++k) ref += c(k) * b.mats[static_cast<size_t>(k)];
      EXPECT_LE((b.combine(c) - ref).norm(), 1e-15);
    }
  }
}

TEST(SkewExpm, PlanarRotationFrozen) {
  const auto b = so_basis(2);
  const Mat g = skew_expm(b.combine(Vec{{1.0}}));
  EXPECT_NEAR(g(0, 0), 0.5403023058681398, 1e-15);
  EXPECT_NEAR(g(0, 1), 0.8414709848078965, 1e-15);
  EXPECT_NEAR(g(1, 0), -0.8414709848078965, 1e-15);
}

TEST(SkewExpm, MatchesSeriesReference) {
  Gen g(5);
  for (int d = 2; d <= 6; ++d) {
    const auto b = so_basis(d);
    for (double scale : {1e-6, 1e-2, 0.5, 2.0}) {
      for (int t = 0; t < 10; ++t) {
        const Mat a = random_skew(b, g, scale);
        EXPECT_LE((skew_expm(a) - series_expm(a)).cwiseAbs().maxCoeff(), 1e-12) << "d=" << d << " scale=" << scale;
      }
    }
  }
}

TEST(SkewExpm, GroupPropertiesProperty) {
  Gen g(6);
  for (int d = 2; d <= 5; ++d) {
    const auto b = so_basis(d);
    for (int t = 0; t < 50; ++t) {
      const Mat a = random_skew(b, g, 1.0);
      const Mat e = skew_expm(a);
      EXPECT_LE(orthogonality_defect(e), 1e-14);
      EXPECT_NEAR(e.determinant(), 1.0, 1e-13);
      EXPECT_LE((e * skew_expm(-a) - Mat::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(SkewExpm, RejectsNonSkew) {
  Mat m = Mat::Identity(3, 3);
  EXPECT_THROW(skew_expm(m), ParameterError);
  EXPECT_THROW(skew_expm(Mat::Zero(2, 3)), ParameterError);
  EXPECT_EQ(skew_expm(Mat::Zero(3, 3)), Mat(Mat::Identity(3, 3)));
}

TEST(RotationLog, InvertsExpProperty) {
  Gen g(7);
  for (int d = 2; d <= 5; ++d) {
    const auto b = so_basis(d);
    for (int t = 0; t < 30; ++t) {
      const Mat a = random_skew(b, g, 0.4);
      EXPECT_LE((rotation_log(skew_expm(a)) - a).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  EXPECT_LE(rotation_log(Mat::Identity(3, 3)).norm(), 0.0);
}

TEST(IntegrateRotation, ConstantDirectionIsExponential) {
  for (int d = 2; d <= 4; ++d) {
    const auto b = so_basis(d);
    Gen g(static_cast<std::uint32_t>(d));
    const Vec c = g.normal_vec(b.size());
    const Grid grid = uniform_grid(1.0, 0.01);
    Mat w(static_cast<Eigen::Index>(grid.size()), b.size());
    for (size_t k = 0; k < grid.size(); ++k) w.row(static_cast<Eigen::Index>(k)) = grid[k] * c.transpose();
    const auto r = integrate_rotation(SampledPath(grid, w, PathRole::FiniteVariation), b);
    EXPECT_LE((r.values.back() - series_expm(b.combine(c))).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(r.values.front(), Mat(Mat::Identity(d, d)));
  }
}

TEST(IntegrateRotation, BrownianStaysInGroup) {
  for (int d : {2, 3, 4}) {
    const auto b = so_basis(d);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto r = integrate_rotation(sample_brownian(b.size(), uniform_grid(5.0, 1e-3), 1.0, s), b);
      EXPECT_LE(r.max_orthogonality_defect(), 1e-12);
      EXPECT_LE(r.max_determinant_error(), 1e-12);
    }
  }
}

TEST(IntegrateRotation, MeanOfBrownianRotationIsHeatDecay) {
  // E[g_t] = exp(t/2 sum A_a^2) = exp(-(d-1) t / 2) I
  const auto b = so_basis(3);
  const Grid grid = uniform_grid(1.0, 0.01);
  const int R = 20000;
  Mat mean = Mat::Zero(3, 3);
  for (int r = 0; r < R; ++r) mean += integrate_rotation(sample_brownian(3, grid, 1.0, static_cast<std::uint64_t>(r)), b).values.back();
  mean /= R;
  const double expected = std::exp(-1.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(mean(i, j), i == j ? expected : 0.0, 3.0 / std::sqrt(R) + 0.005);
}

TEST(RotationDriver, RoundTrip) {
  const auto b = so_basis(3);
  const auto r = integrate_rotation(sample_brownian(3, uniform_grid(2.0, 1e-2), 1.0, 99), b);
  const auto w = rotation_driver(r, b);
  const auto r2 = integrate_rotation(w, b);
  for (size_t k = 0; k < r.values.size(); ++k) EXPECT_LE((r.values[k] - r2.values[k]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(IntegrateRotation, DimensionMismatch) {
  EXPECT_THROW(integrate_rotation(sample_brownian(2, uniform_grid(1, 0.1), 1.0, 1), so_basis(3)), ParameterError);
}
