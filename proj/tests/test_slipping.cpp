#include <gtest/gtest.h>

#include "rollsim/slipping.hpp"
#include "support.hpp"

using namespace rollsim;
using rollsim::testkit::Gen;

namespace {

const double kPi = std::numbers::pi;

// composite Simpson on [0, L] with n (even) panels
double simpson(const std::function<double(double)>& f, double L, int n) {
  const double h = L / n;
  double s = f(0) + f(L);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

SlippingSchedule hand_schedule() {
  SlippingSchedule s;
  s.times = {1.0, 2.0};
  s.durations = {0.5, 0.25};
  s.horizon = 4.0;
  return s;
}

Vec value_at(const SampledPath& p, double t) {
  for (Eigen::Index k = 0; k < p.nodes(); ++k)
    if (std::abs(p.time(k) - t) < 1e-12) return p.value(k);
  ADD_FAILURE() << "time " << t << " not on grid";
  return Vec();
}

}  // namespace

TEST(BaseCurve, VelocityMatchesFiniteDifferences) {
  for (const auto& c : {BaseCurve::circle(1.5, 2.0), BaseCurve::lissajous(1.0, 0.5, 1.0, 3.0), BaseCurve::line(Vec{{0.6, 0.8}})}) {
    for (double t : {0.1, 0.7, 2.3}) {
      const double h = 1e-6;
      EXPECT_LE(((c.at(t + h) - c.at(t - h)) / (2 * h) - c.vel(t)).norm(), 1e-8) << c.name;
    }
    EXPECT_LE(audited_speed(c, 10.0), c.speed_bound * (1 + 1e-12)) << c.name;
  }
  const auto circ = BaseCurve::circle();
  EXPECT_EQ(circ.at(0.0), Vec(Vec::Zero(2)));
  EXPECT_NEAR((circ.at(kPi) - Vec{{0.0, 2.0}}).norm(), 0.0, 1e-15);
  EXPECT_THROW(BaseCurve::circle(-1.0), ParameterError);
}

TEST(BaseCurve, Polyline) {
  Mat x(3, 2);
  x << 0, 0, 1, 0, 1, 2;
  const auto c = BaseCurve::polyline({0.0, 1.0, 2.0}, x);
  EXPECT_DOUBLE_EQ(c.speed_bound, 2.0);
  EXPECT_EQ(c.at(1.5), Vec((Vec(2) << 1.0, 1.0).finished()));
  EXPECT_EQ(c.vel(0.5), Vec((Vec(2) << 1.0, 0.0).finished()));
  EXPECT_EQ(c.at(5.0), Vec((Vec(2) << 1.0, 2.0).finished()));
  EXPECT_THROW(c.pl_constant(), ParameterError);
}

TEST(Schedule, HandComputedQuantities) {
  const auto s = hand_schedule();
  EXPECT_EQ(s.count(0.5), 0u);
  EXPECT_EQ(s.count(1.0), 1u);
  EXPECT_EQ(s.count(3.0), 2u);
  EXPECT_DOUBLE_EQ(s.subordinator(1.5), 0.5);
  EXPECT_DOUBLE_EQ(s.subordinator(4.0), 0.75);
  const auto sig = s.window_starts();
  EXPECT_DOUBLE_EQ(sig[0], 1.0);
  EXPECT_DOUBLE_EQ(sig[1], 2.5);
}

TEST(Schedule, Validation) {
  auto s = hand_schedule();
  s.durations[1] = 0.0;
  EXPECT_THROW(s.validate(), ParameterError);
  s = hand_schedule();
  s.times = {2.0, 1.0};
  EXPECT_THROW(s.validate(), ParameterError);
  s = hand_schedule();
  s.times[1] = 5.0;
  EXPECT_THROW(s.validate(), ParameterError);
}

TEST(Schedule, CompoundPoissonLaw) {
  const auto spec = JumpMeasureSpec::exponential(5.0, 0.1);
  const int R = 20000;
  const double T = 2.0;
  double n1 = 0, n2 = 0, st = 0, dur = 0;
  long jumps = 0;
  for (int r = 0; r < R; ++r) {
    const auto s = sample_schedule(spec, 0.5, T, static_cast<std::uint64_t>(r));
    s.validate();
    const double n = static_cast<double>(s.size());
    n1 += n;
    n2 += n * n;
    st += s.subordinator(T);
    for (double e : s.durations) dur += e;
    jumps += static_cast<long>(s.size());
  }
  const double mean = n1 / R, var = n2 / R - mean * mean;
  EXPECT_NEAR(mean, 10.0, 4 * std::sqrt(10.0 / R));
  EXPECT_NEAR(var, 10.0, 0.5);
  EXPECT_NEAR(st / R, 1.0, 4 * std::sqrt(2 * 10.0 * 0.01 / R));
  EXPECT_NEAR(dur / jumps, 0.1, 4 * 0.1 / std::sqrt(static_cast<double>(jumps)));
}

TEST(Schedule, SeedDeterminism) {
  const auto spec = JumpMeasureSpec::exponential(3.0, 0.2);
  const auto a = sample_schedule(spec, 0.1, 5.0, 77), b = sample_schedule(spec, 0.1, 5.0, 77);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.durations, b.durations);
}

TEST(Schedule, Saturation) {
  EXPECT_THROW(sample_schedule(JumpMeasureSpec::exponential(1e9, 1.0), 0.1, 1.0, 1), SaturationError);
  const auto dense = JumpMeasureSpec::dense();
  try {
    (void)dense.rate(1e-3);
    FAIL() << "expected saturation";
  } catch (const SaturationError& e) {
    EXPECT_NEAR(e.eps_floor(), std::pow(700.0, -1.0 / 1.1), 1e-15);
  }
  EXPECT_NO_THROW((void)dense.rate(0.1));
}

TEST(MergeBreakpoints, InsertsAndDeduplicates) {
  const Grid g{0.0, 1.0, 2.0};
  const auto m = merge_breakpoints(g, {0.5, 1.0 + 1e-15, 3.0, -1.0, 1.5});
  EXPECT_EQ(m, (Grid{0.0, 0.5, 1.0, 1.5, 2.0}));
}

TEST(TranslationalSlip, HandExampleOnLine) {
  const Vec d{{0.6, 0.8}};
  const auto c = BaseCurve::line(d);
  const auto p = translational_slip(c, hand_schedule(), uniform_grid(4.0, 0.1));
  EXPECT_LE((value_at(p, 1.2) - d).norm(), 1e-14);          // frozen at gamma(1)
  EXPECT_LE((value_at(p, 2.0) - 1.5 * d).norm(), 1e-14);    // gamma(2) - (gamma(1.5) - gamma(1))
  EXPECT_LE((value_at(p, 2.6) - 2.0 * d).norm(), 1e-14);    // frozen at gamma(2.5) - 0.5 d
  EXPECT_LE((value_at(p, 4.0) - 3.25 * d).norm(), 1e-14);   // 4 - 0.75
}

TEST(InPlaceSlip, LineIsUnchanged) {
  const auto c = BaseCurve::line(Vec{{1.0, -2.0}});
  const auto p = inplace_slip(c, hand_schedule(), uniform_grid(4.0, 0.1));
  for (Eigen::Index k = 0; k < p.nodes(); ++k) EXPECT_LE((p.value(k) - c.at(p.time(k))).norm(), 1e-13);
}

TEST(InPlaceSlip, HandExampleOnCircle) {
  const auto c = BaseCurve::circle();
  SlippingSchedule s;
  s.times = {1.0};
  s.durations = {0.5};
  s.horizon = 3.0;
  const auto p = inplace_slip(c, s, uniform_grid(3.0, 0.1));
  const Vec tan = Vec{{std::cos(1.0), std::sin(1.0)}};
  EXPECT_LE((value_at(p, 1.3) - (c.at(1.0) + 0.3 * tan)).norm(), 1e-14);
  EXPECT_LE((value_at(p, 2.5) - (c.at(2.0) + 0.5 * tan)).norm(), 1e-14);
}

TEST(PiecewiseLinear, HandExampleOnCircle) {
  const auto c = BaseCurve::circle();
  const auto p = piecewise_linear_approx(c, hand_schedule(), uniform_grid(4.0, 0.1));
  // velocity (1, 0) on [0, 1), gamma'(1) on [1, 2), gamma'(2) after
  const Vec v1{{std::cos(1.0), std::sin(1.0)}}, v2{{std::cos(2.0), std::sin(2.0)}};
  EXPECT_LE((value_at(p, 0.5) - Vec{{0.5, 0.0}}).norm(), 1e-14);
  EXPECT_LE((value_at(p, 1.5) - (Vec{{1.0, 0.0}} + 0.5 * v1)).norm(), 1e-14);
  EXPECT_LE((value_at(p, 3.0) - (Vec{{1.0, 0.0}} + v1 + v2)).norm(), 1e-14);
}

TEST(Slip, EmptyScheduleIsIdentity) {
  const auto c = BaseCurve::lissajous();
  SlippingSchedule s;
  s.horizon = 2.0;
  const Grid g = uniform_grid(2.0, 0.05);
  for (auto mode : {SlipMode::Translational, SlipMode::InPlace}) {
    const auto p = apply_slip(mode, c, s, g);
    for (Eigen::Index k = 0; k < p.nodes(); ++k) EXPECT_LE((p.value(k) - c.at(p.time(k))).norm(), 1e-15);
  }
}

TEST(Slip, BoundsHoldProperty) {
  Gen gen(41);
  const std::vector<BaseCurve> curves{BaseCurve::circle(), BaseCurve::circle(0.5, 3.0), BaseCurve::lissajous(),
                                      BaseCurve::line(Vec{{1.0, 1.0}})};
  for (int trial = 0; trial < 60; ++trial) {
    const auto& c = curves[static_cast<size_t>(gen.integer(0, 3))];
    const double T = gen.uniform(0.5, 6.0);
    const auto spec = JumpMeasureSpec::exponential(gen.uniform(0.5, 10.0), gen.uniform(0.01, 0.5));
    const auto s = sample_schedule(spec, 0.1, T, static_cast<std::uint64_t>(trial));
    for (auto mode : {SlipMode::Translational, SlipMode::InPlace, SlipMode::PiecewiseLinear}) {
      const auto p = apply_slip(mode, c, s, uniform_grid(T, 1e-2));
      const auto r = slip_bounds(mode, c, s, p);
      EXPECT_TRUE(r.holds()) << to_string(mode) << " " << c.name << " dev " << r.deviation << "/" << r.deviation_bound
                             << " var " << r.variation << "/" << r.variation_bound;
      EXPECT_EQ(p.grid().back(), T);
    }
  }
}

TEST(Slip, DeviationShrinksWithEps) {
  const auto spec = JumpMeasureSpec::sparse(0.2);
  const auto c = BaseCurve::circle();
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.3, 0.1, 0.03}) {
    double acc = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto sched = sample_schedule(spec, eps, 2 * kPi, s);
      acc += slip_bounds(SlipMode::Translational, c, sched, translational_slip(c, sched, uniform_grid(2 * kPi, 1e-2))).deviation;
    }
    EXPECT_LE(acc, prev);
    prev = acc;
  }
}

TEST(SlipMode, StringRoundTrip) {
  for (auto m : {SlipMode::None, SlipMode::Translational, SlipMode::InPlace, SlipMode::PiecewiseLinear})
    EXPECT_EQ(slip_mode_from_string(to_string(m)), m);
  EXPECT_THROW(slip_mode_from_string("sideways"), ParameterError);
}

TEST(JumpMeasure, QuadratureMatchesClosedFormAndSimpson) {
  for (const auto& spec : {JumpMeasureSpec::sparse(), JumpMeasureSpec::dense(), JumpMeasureSpec::exponential(2.0, 0.3)}) {
    for (double eps : {0.5, 0.3, 0.2, 0.1}) {
      const double closed = spec.log_mean_jump(eps);
      const double quad = log_mean_jump_quadrature(spec, eps);
      EXPECT_NEAR(quad, closed, 1e-8 * std::max(1.0, std::abs(closed))) << spec.name << " eps " << eps;
      const double sc = spec.scale(eps);
      const double simp = simpson([&](double s) { return s * spec.density(eps, sc * s); }, 60.0, 6000);
      EXPECT_NEAR(2 * std::log(sc) + std::log(simp), closed, 1e-8 * std::max(1.0, std::abs(closed)));
    }
  }
}

TEST(JumpMeasure, MeanJumpConditionFrozenValues) {
  // eps log int x nu = -2 eps^{-0.1} for the standard example
  const auto t = check_mean_jump_condition(JumpMeasureSpec::sparse(), {0.3, 0.2, 0.1});
  const double expected[] = {-2.2558897460109986, -2.349237886176038, -2.5178508235883346};
  for (size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(t.rows[k].value, -2.0 * std::pow(t.rows[k].eps, -0.1), 1e-12);
    EXPECT_NEAR(t.rows[k].value, expected[k], 1e-12);
    ASSERT_TRUE(t.rows[k].quadrature.has_value());
    EXPECT_NEAR(*t.rows[k].quadrature, t.rows[k].value, 1e-8);
  }
  EXPECT_TRUE(t.verdict);
}

TEST(JumpMeasure, RateDivergence) {
  EXPECT_FALSE(check_rate_divergence(JumpMeasureSpec::sparse(), {0.3, 0.2, 0.1}).verdict);
  const auto dense = check_rate_divergence(JumpMeasureSpec::dense(), {0.3, 0.2, 0.1});
  EXPECT_TRUE(dense.verdict);
  EXPECT_NEAR(dense.rows[2].value, 0.1 * std::exp(std::pow(0.1, -1.1)), 1e-9 * dense.rows[2].value);
  EXPECT_FALSE(check_rate_divergence(JumpMeasureSpec::exponential(1.0, 1.0), {0.3, 0.2}).verdict);
  EXPECT_FALSE(check_mean_jump_condition(JumpMeasureSpec::exponential(1.0, 1.0), {0.3, 0.2}).verdict);
}

TEST(JumpMeasure, NonIntegrableDensity) {
  JumpMeasureSpec s;
  s.name = "heavy";
  s.log_rate = [](double) { return 0.0; };
  s.density = [](double, double x) { return 1.0 / ((1.0 + x) * (1.0 + x)); };
  s.scale = [](double) { return 1.0; };
  EXPECT_THROW(log_mean_jump_quadrature(s, 0.1), NonIntegrable);
  EXPECT_THROW(check_mean_jump_condition(s, {0.1}), NonIntegrable);
}

TEST(JumpMeasure, ByName) {
  EXPECT_EQ(JumpMeasureSpec::by_name("sparse").name, "sparse");
  EXPECT_THROW(JumpMeasureSpec::by_name("cauchy"), ParameterError);
  EXPECT_THROW(JumpMeasureSpec::exponential(0.0, 1.0), ParameterError);
}

TEST(BrownianPerturb, ZeroNoiseFollowsCurve) {
  const auto c = BaseCurve::circle();
  const Grid g = uniform_grid(2.0, 1e-4);
  const auto y = brownian_perturb(DriftField::along(c), c.at(0.0), 0.0, g, 1);
  double err = 0.0;
  for (Eigen::Index k = 0; k < y.nodes(); ++k) err = std::max(err, (y.value(k) - c.at(y.time(k))).norm());
  EXPECT_LE(err, 2.0 * 1e-4);
}

TEST(BrownianPerturb, OrnsteinUhlenbeckMoments) {
  DriftField ou{1, [](double, const Vec& x) { return Vec(-x); }, 0.0, 1.0};
  const double eps = 0.5;
  const Grid g = uniform_grid(1.0, 1e-3);
  const int R = 10000;
  double s1 = 0, s2 = 0;
  for (int r = 0; r < R; ++r) {
    const double v = brownian_perturb(ou, Vec{{1.0}}, eps, g, static_cast<std::uint64_t>(r)).values()(g.size() - 1, 0);
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / R, var = s2 / R - mean * mean;
  const double vexp = eps * (1 - std::exp(-2.0)) / 2;
  EXPECT_NEAR(mean, std::exp(-1.0), 4 * std::sqrt(vexp / R) + 1e-3);
  EXPECT_NEAR(var, vexp, 4 * vexp * std::sqrt(2.0 / R) + 1e-3);
}

TEST(BrownianPerturb, DecompositionAndErrors) {
  const auto y = brownian_perturb(DriftField::constant(Vec{{1.0, 2.0}}), Vec{{0.5, 0.5}}, 0.1, uniform_grid(1, 0.01), 3);
  ASSERT_TRUE(y.decomposition().has_value());
  EXPECT_EQ(y.role(), PathRole::Semimartingale);
  EXPECT_NEAR((*y.decomposition()->bracket).back()(0, 0), 0.1, 1e-15);
  EXPECT_THROW(brownian_perturb(DriftField::zero(2), Vec::Zero(3), 0.1, uniform_grid(1, 0.1), 1), ParameterError);
  EXPECT_THROW(brownian_perturb(DriftField::zero(2), Vec::Zero(2), -0.1, uniform_grid(1, 0.1), 1), ParameterError);
}
