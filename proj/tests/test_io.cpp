#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "rollsim/config.hpp"
#include "rollsim/io.hpp"
#include "support.hpp"

using namespace rollsim;
using rollsim::testkit::Gen;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("rollsim_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                         ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string config_error(const fs::path& p) {
  try {
    (void)load_config(p);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Numbers, FormatParseBitExactProperty) {
  Gen gen(71);
  std::vector<double> xs{0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-310, 5e-324, 1.7976931348623157e308, -2.5e-17, std::numbers::pi};
  for (int i = 0; i < 2000; ++i) xs.push_back(gen.normal() * std::pow(10.0, gen.integer(-300, 300)));
  for (double x : xs) EXPECT_TRUE(same_bits(parse_double(format_double(x)), x)) << format_double(x);
  EXPECT_TRUE(std::isinf(parse_double(format_double(std::numeric_limits<double>::infinity()))));
  EXPECT_TRUE(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()))));
  EXPECT_THROW(parse_double("1.5x"), ConfigError);
  EXPECT_THROW(parse_double(""), ConfigError);
  EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), json("inf"));
  EXPECT_EQ(json_number(std::numeric_limits<double>::quiet_NaN()), json("nan"));
  EXPECT_EQ(to_json(RateValue::inf()), json("inf"));
}

TEST(Csv, PathRoundTripIsBitExact) {
  TempDir dir;
  const auto p = sample_brownian(3, uniform_grid(1.0, 1e-2), 0.7, 5);
  write_path_csv(dir / "p.csv", p);
  const auto q = read_path_csv(dir / "p.csv");
  ASSERT_EQ(q.grid().size(), p.grid().size());
  for (size_t k = 0; k < p.grid().size(); ++k) EXPECT_TRUE(same_bits(q.grid()[k], p.grid()[k]));
  for (Eigen::Index k = 0; k < p.nodes(); ++k)
    for (Eigen::Index i = 0; i < p.dim(); ++i) EXPECT_TRUE(same_bits(q.values()(k, i), p.values()(k, i)));
  const auto t = read_csv(dir / "p.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "v_1", "v_2", "v_3"}));
}

TEST(Csv, MalformedInput) {
  TempDir dir;
  write_text(dir / "bad.csv", "t,v_1\n0,1\n1,abc\n");
  try {
    (void)read_csv(dir / "bad.csv");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  write_text(dir / "short.csv", "t,v_1\n0\n");
  EXPECT_THROW(read_csv(dir / "short.csv"), ConfigError);
  write_text(dir / "empty.csv", "");
  EXPECT_THROW(read_csv(dir / "empty.csv"), ConfigError);
  EXPECT_THROW(read_csv(dir / "missing.csv"), ConfigError);
}

TEST(Csv, FrameAndTraceFiles) {
  TempDir dir;
  const auto m = Manifold::sphere(2);
  Mat v(3, 2);
  v << 0, 0, 0.1, 0, 0.2, 0.05;
  const auto u = develop(m, standard_frame(m, Vec{{0.0, 0.0, 1.0}}), SampledPath({0.0, 0.5, 1.0}, v, PathRole::FiniteVariation));
  write_frame_path_csv(dir / "f.csv", u);
  write_manifold_path_csv(dir / "x.csv", project(u));
  const auto f = read_csv(dir / "f.csv");
  const auto x = read_csv(dir / "x.csv");
  EXPECT_EQ(f.header.size(), 1u + 3u + 3u * 2u);
  EXPECT_EQ(x.header, (std::vector<std::string>{"t", "x", "y", "z"}));
  ASSERT_EQ(x.rows.size(), 3u);
  EXPECT_TRUE(same_bits(x.rows[2][3], u.frames[2].base.coords(2)));
}

TEST(Csv, ScanRoundTrip) {
  TempDir dir;
  ScanTable t;
  t.rows = {make_scan_row(0.4, 310, 1000), make_scan_row(0.1, 0, 1000)};
  write_scan_csv(dir / "scan.csv", t);
  const auto back = read_scan_csv(dir / "scan.csv");
  ASSERT_EQ(back.rows.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.rows[i].hits, t.rows[i].hits);
    EXPECT_TRUE(same_bits(back.rows[i].eps_log_phat, t.rows[i].eps_log_phat));
    EXPECT_TRUE(same_bits(back.rows[i].ci.hi, t.rows[i].ci.hi));
  }
  EXPECT_TRUE(back.rows[1].censored);
}

TEST(Json, PathWithDecompositionRoundTrip) {
  const auto y = brownian_perturb(DriftField::constant(Vec{{1.0, 0.0}}), Vec{{0.1, 0.2}}, 0.3, uniform_grid(0.5, 0.1), 9);
  const json j = json::parse(to_json(y).dump());
  const auto z = path_from_json(j);
  EXPECT_EQ(z.values(), y.values());
  EXPECT_EQ(z.role(), y.role());
  ASSERT_TRUE(z.decomposition() && z.decomposition()->bracket);
  EXPECT_EQ(z.decomposition()->m_part, y.decomposition()->m_part);
  EXPECT_EQ(z.decomposition()->bracket->back(), y.decomposition()->bracket->back());
}

TEST(Json, ManifoldRoundTrip) {
  for (const auto& m : {Manifold::flat(3), Manifold::sphere(2), Manifold::sphere(3), Manifold::half_plane(), Manifold::torus(2, 3.0)}) {
    const auto back = manifold_from_json(to_json(m));
    EXPECT_EQ(back.name(), m.name());
    EXPECT_EQ(back.dim(), m.dim());
    EXPECT_EQ(back.coord_dim(), m.coord_dim());
  }
  EXPECT_THROW(manifold_from_json(json{{"kind", "klein"}}), ConfigError);
  EXPECT_THROW(manifold_from_json(json{{"kind", "half-plane"}, {"dim", 3}}), ConfigError);
}

TEST(Config, LoadsAllFields) {
  TempDir dir;
  write_text(dir / "c.json", R"({
  "manifold": {"kind": "sphere", "dim": 2},
  "curve": {"kind": "circle", "radius": 2.0},
  "T": 3.0, "h": 0.01, "seed": 99, "threads": 2,
  "perturbation": "slipping", "slip": "inplace",
  "measure": {"name": "sparse", "kappa": 0.5},
  "eps_grid": [0.3, 0.1], "replicas": 50, "eta": 0.25, "twist": true
})");
  const auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.curve.name, "circle");
  EXPECT_DOUBLE_EQ(c.curve.speed_bound, 2.0);
  EXPECT_EQ(c.T, 3.0);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.perturbation, Perturbation::Slipping);
  EXPECT_EQ(c.slip, SlipMode::InPlace);
  EXPECT_NEAR(c.measure.log_mean_jump(0.5), -2 * 0.5 * std::pow(0.5, -1.1), 1e-12);
  EXPECT_EQ(c.eps_grid, (std::vector<double>{0.3, 0.1}));
  EXPECT_TRUE(c.twist);
}

TEST(Config, ErrorsNameTheLine) {
  TempDir dir;
  write_text(dir / "a.json", "{\n  \"T\": 1.0,\n  \"h\": -1\n}\n");
  EXPECT_NE(config_error(dir / "a.json").find("a.json:3:"), std::string::npos) << config_error(dir / "a.json");
  write_text(dir / "b.json", "{\n  \"T\": 1.0,\n  \"colour\": \"red\"\n}\n");
  EXPECT_NE(config_error(dir / "b.json").find(":3:"), std::string::npos);
  write_text(dir / "c.json", "{\n  \"T\": 1.0,\n  \"h\": \n}\n");
  EXPECT_NE(config_error(dir / "c.json").find("JSON syntax error"), std::string::npos);
  write_text(dir / "d.json", "{\n\n  \"slip\": \"sideways\"\n}\n");
  EXPECT_NE(config_error(dir / "d.json").find(":3:"), std::string::npos);
  write_text(dir / "e.json", "{\"T\": \"long\"}");
  EXPECT_FALSE(config_error(dir / "e.json").empty());
  write_text(dir / "f.json", "{\"manifold\": {\"kind\": \"sphere\", \"dim\": 2}, \"start\": [1, 1, 0]}");
  EXPECT_FALSE(config_error(dir / "f.json").empty());
  write_text(dir / "g.json", "{\"manifold\": {\"kind\": \"sphere\", \"dim\": 3}}");
  EXPECT_NE(config_error(dir / "g.json").find("curve"), std::string::npos);
  EXPECT_FALSE(config_error(dir / "nope.json").empty());
}

TEST(Config, CsvCurveRelativeToConfig) {
  TempDir dir;
  write_text(dir / "curve.csv", "t,v_1,v_2\n0,0,0\n1,1,0\n2,1,1\n");
  write_text(dir / "c.json", R"({"manifold": {"kind": "flat", "dim": 2}, "curve": {"kind": "csv", "path": "curve.csv"}, "T": 2})");
  const auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.curve.name, "polyline");
  EXPECT_EQ(c.curve.at(1.5), Vec((Vec(2) << 1.0, 0.5).finished()));
}
