#pragma once

// Subcommands of the rollsim tool. Each returns an exit code: 0 on success,
// 1 when an asserted numerical invariant fails. Configuration and I/O
// problems are thrown as ConfigError (exit code 2).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "rollsim/config.hpp"
#include "rollsim/development.hpp"
#include "rollsim/io.hpp"
#include "rollsim/ldp.hpp"
#include "rollsim/slipping.hpp"

namespace rollsim {

inline constexpr double kFrameTolerance = 1e-12;

inline std::filesystem::path output_dir(const RunConfig& c) {
  std::error_code ec;
  if (!std::filesystem::is_directory(c.out_dir, ec))
    throw ConfigError("output directory '" + c.out_dir.string() + "' does not exist");
  return c.out_dir;
}

inline std::string eps_label(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return std::string("eps") + buf;
}

inline json point_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v(i)));
  return a;
}

inline json stats_json(const IntegrationStats& s) {
  return {{"max_defect_before", json_number(s.max_defect_before)},
          {"max_defect_after", json_number(s.max_defect_after)},
          {"corrections", s.corrections}};
}

inline int report_failures(const std::vector<std::string>& failures) {
  for (const auto& f : failures) std::cerr << "invariant failed: " << f << '\n';
  return failures.empty() ? 0 : 1;
}

/// Deterministic rolling along the base curve.
inline int cmd_develop(const RunConfig& c) {
  const auto dir = output_dir(c);
  const RollConfig rc = c.roll();
  const Grid grid = uniform_grid(c.T, c.h);
  const SampledPath gamma = sample_curve(c.curve, grid, PathRole::FiniteVariation);
  const OrthonormalFrame u0 = initial_frame(rc);
  const FramePath u = develop(c.manifold, u0, gamma, c.develop);
  const ManifoldPath x = project(u);
  write_path_csv(dir / "curve.csv", gamma);
  write_manifold_path_csv(dir / "trace.csv", x);
  write_frame_path_csv(dir / "frames.csv", u);
  const Vec end = x.point(x.nodes() - 1);
  json s{{"manifold", to_json(c.manifold)},
         {"T", c.T},
         {"h", c.h},
         {"nodes", x.nodes()},
         {"trace_length", json_number(trace_length(c.manifold, x))},
         {"total_variation", json_number(total_variation(gamma))},
         {"start", point_json(u0.base.coords)},
         {"endpoint", point_json(end)},
         {"endpoint_distance_to_start", json_number(distance(c.manifold, u0.base.coords, end))},
         {"frames", stats_json(u.stats)}};
  write_json(dir / "summary.json", s);
  std::vector<std::string> fail;
  if (u.stats.max_defect_after > kFrameTolerance) fail.push_back("frame orthonormality defect above 1e-12");
  return report_failures(fail);
}

/// Perturbed rollings for every eps of the grid, alongside the unperturbed one.
inline int cmd_roll(const RunConfig& c) {
  const auto dir = output_dir(c);
  const RollConfig rc = c.roll();
  const Grid grid = uniform_grid(c.T, c.h);
  const SampledPath gamma = sample_curve(c.curve, grid, PathRole::FiniteVariation);
  write_path_csv(dir / "curve_original.csv", gamma);
  const ManifoldPath limit = limit_trace(rc);
  write_manifold_path_csv(dir / "trace_original.csv", limit);
  json runs = json::array();
  std::vector<std::string> fail;
  for (size_t i = 0; i < c.eps_grid.size(); ++i) {
    const double eps = c.eps_grid[i];
    const std::string tag = eps_label(eps);
    const RollSample s = roll_once(rc, eps, derive_seed(c.seed, {i}));
    write_path_csv(dir / ("curve_" + tag + ".csv"), s.curve);
    write_manifold_path_csv(dir / ("trace_" + tag + ".csv"), project(s.frames));
    json r{{"eps", eps},
           {"curve_file", "curve_" + tag + ".csv"},
           {"trace_file", "trace_" + tag + ".csv"},
           {"trace_deviation", json_number(trace_deviation(c.manifold, limit, s.frames))},
           {"frames", stats_json(s.frames.stats)}};
    double dev = 0.0;
    const SampledPath ref = sample_curve(c.curve, s.curve.grid());
    for (Eigen::Index k = 0; k < s.curve.nodes(); ++k) dev = std::max(dev, (s.curve.value(k) - ref.value(k)).norm());
    r["planar_deviation"] = json_number(dev);
    if (s.schedule) {
      write_json(dir / ("schedule_" + tag + ".json"), to_json(*s.schedule));
      r["schedule_file"] = "schedule_" + tag + ".json";
      r["S_T"] = json_number(s.schedule->subordinator(c.T));
      r["jumps"] = s.schedule->size();
      const SlipBoundReport b = slip_bounds(c.slip, c.curve, *s.schedule, s.curve);
      r["bounds"] = {{"deviation", json_number(b.deviation)},
                     {"deviation_bound", json_number(b.deviation_bound)},
                     {"variation", json_number(b.variation)},
                     {"variation_bound", json_number(b.variation_bound)},
                     {"holds", b.holds()}};
      if (!b.holds()) fail.push_back("slipping bound violated at " + tag);
    }
    if (s.frames.stats.max_defect_after > kFrameTolerance) fail.push_back("frame defect above 1e-12 at " + tag);
    runs.push_back(r);
  }
  json summary{{"manifold", to_json(c.manifold)},
               {"curve", c.curve.name},
               {"perturbation", to_string(c.perturbation)},
               {"slip", to_string(c.slip)},
               {"measure", c.measure.name},
               {"twist", c.twist},
               {"seed", c.seed},
               {"runs", runs}};
  write_json(dir / "summary.json", summary);
  return report_failures(fail);
}

namespace detail {

inline DriftField drift_from_json(const json& j, const RunConfig& c) {
  const std::string kind = j.value("kind", "curve");
  if (kind == "curve") return DriftField::along(c.curve);
  if (kind == "zero") return DriftField::zero(c.manifold.dim());
  if (kind == "constant") {
    const auto v = j.at("value").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != c.manifold.dim()) throw ConfigError("rate.drift.value has the wrong dimension");
    return DriftField::constant(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  throw ConfigError("unknown drift kind '" + kind + "'");
}

/// RK4 solution of y' = b(t, y) on the grid.
inline SampledPath solve_drift(const DriftField& b, const Vec& y0, const Grid& grid) {
  Mat y(static_cast<Eigen::Index>(grid.size()), b.dim);
  Vec cur = y0;
  y.row(0) = cur.transpose();
  for (size_t k = 1; k < grid.size(); ++k) {
    const double t = grid[k - 1], h = grid[k] - grid[k - 1];
    const Vec k1 = b(t, cur), k2 = b(t + h / 2, cur + h / 2 * k1), k3 = b(t + h / 2, cur + h / 2 * k2),
              k4 = b(t + h, cur + h * k3);
    cur += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    y.row(static_cast<Eigen::Index>(k)) = cur.transpose();
  }
  return SampledPath(grid, std::move(y), PathRole::FiniteVariation);
}

inline SampledPath slip_control_from_json(const json& j, const RunConfig& c, const DriftField& b, const Grid& grid) {
  const std::string kind = j.value("kind", "ode");
  if (kind == "ode") return solve_drift(b, Vec::Zero(c.manifold.dim()), grid);
  if (kind == "curve") {
    SampledPath g = sample_curve(c.curve, grid, PathRole::FiniteVariation);
    return g;
  }
  if (kind == "reversed") {
    Mat v(static_cast<Eigen::Index>(grid.size()), c.manifold.dim());
    const Vec end = c.curve.at(c.T);
    for (size_t k = 0; k < grid.size(); ++k) v.row(static_cast<Eigen::Index>(k)) = (c.curve.at(c.T - grid[k]) - end).transpose();
    return SampledPath(grid, std::move(v), PathRole::FiniteVariation);
  }
  throw ConfigError("unknown rate.y kind '" + kind + "'");
}

inline SampledPath twist_control_from_json(const json& j, int D, const Grid& grid) {
  const std::string kind = j.value("kind", "zero");
  Mat v = Mat::Zero(static_cast<Eigen::Index>(grid.size()), D);
  if (kind == "zero") return SampledPath(grid, std::move(v), PathRole::FiniteVariation);
  if (kind == "linear") {
    const auto vel = j.at("velocity").get<std::vector<double>>();
    if (static_cast<int>(vel.size()) != D) throw ConfigError("rate.f.velocity must have d(d-1)/2 entries");
    for (size_t k = 0; k < grid.size(); ++k)
      for (int a = 0; a < D; ++a) v(static_cast<Eigen::Index>(k), a) = vel[static_cast<size_t>(a)] * grid[k];
    return SampledPath(grid, std::move(v), PathRole::FiniteVariation);
  }
  throw ConfigError("unknown rate.f kind '" + kind + "'");
}

}  // namespace detail

/// Rate of a frame or base path generated from controls (y, f).
inline int cmd_rate(const RunConfig& c) {
  const auto dir = output_dir(c);
  const json sec = c.doc.value("rate", json::object());
  const Grid grid = uniform_grid(c.T, c.h);
  const RollConfig rc = c.roll();
  const OrthonormalFrame u0 = initial_frame(rc);
  DriftField b = DriftField::zero(c.manifold.dim());
  SampledPath y, f;
  RateOptions opt;
  std::string target;
  try {
    b = detail::drift_from_json(sec.value("drift", json::object()), c);
    y = detail::slip_control_from_json(sec.value("y", json::object()), c, b, grid);
    f = detail::twist_control_from_json(sec.value("f", json::object()), so_dim(c.manifold.dim()), grid);
    target = sec.value("target", "frame");
    opt.control_nodes = sec.value("control_nodes", opt.control_nodes);
    opt.max_evaluations = sec.value("max_evaluations", opt.max_evaluations);
    opt.feasibility_tol = sec.value("feasibility_tol", opt.feasibility_tol);
  } catch (const json::exception& e) {
    throw ConfigError(c.source_name + ": bad 'rate' section (" + e.what() + ")");
  }
  if (target != "frame" && target != "base") throw ConfigError("rate.target must be 'frame' or 'base'");
  const auto gen = develop_decomposed(c.manifold, u0, y, f, c.develop);
  const ActionReport rep = target == "frame" ? rate_of_frame_path(c.manifold, gen.frames, b, opt)
                                             : rate_of_base_path(c.manifold, project(gen.frames), u0, b, opt);
  json j = to_json(rep);
  j["target"] = target;
  j["generating_action"] = json_number(drift_action(y, b) + h1_action(f));
  write_json(dir / "rate.json", j);
  std::vector<std::string> fail;
  if (target == "frame" && !rep.feasible) fail.push_back("generated frame path reported infeasible");
  return report_failures(fail);
}

inline ScanConfig scan_config(const RunConfig& c) {
  ScanConfig s;
  s.roll = c.roll();
  s.eta = c.eta;
  s.eps_grid = c.eps_grid;
  s.replicas = c.replicas;
  s.seed = c.seed;
  s.threads = resolve_threads(c.threads);
  return s;
}

/// Rare-event scan over the eps grid.
inline int cmd_scan(const RunConfig& c) {
  const auto dir = output_dir(c);
  const ScanTable t = rare_event_scan(scan_config(c));
  write_scan_csv(dir / "scan.csv", t);
  for (const auto& r : t.rows)
    if (!r.flag.empty()) std::cerr << "eps=" << format_double(r.eps) << ": " << r.flag << '\n';
  return 0;
}

/// Deviation of the perturbed Euclidean curve from the base curve.
inline SampledPath deviation_sample(const RollConfig& rc, double eps, std::uint64_t seed) {
  const Grid grid = uniform_grid(rc.T, rc.h);
  SampledPath p;
  switch (rc.perturbation) {
    case Perturbation::Brownian:
      p = brownian_perturb(DriftField::along(rc.curve), rc.curve.at(0.0), eps, grid, seed);
      break;
    case Perturbation::Slipping:
      p = apply_slip(rc.slip, rc.curve, sample_schedule(rc.measure, eps, rc.T, seed), grid);
      break;
    case Perturbation::TwistOnly: p = sample_curve(rc.curve, grid); break;
  }
  Mat d = p.values();
  for (Eigen::Index k = 0; k < p.nodes(); ++k) d.row(k) -= rc.curve.at(p.time(k)).transpose();
  return SampledPath(p.grid(), std::move(d), PathRole::FiniteVariation);
}

/// Condition tables for the jump measure and, optionally, tightness diagnostics.
inline int cmd_check(const RunConfig& c) {
  const auto dir = output_dir(c);
  const json sec = c.doc.value("check", json::object());
  std::vector<std::string> fail;
  json summary{{"measure", c.measure.name}};
  std::vector<double> eps_grid = c.eps_grid;
  try {
    if (sec.contains("eps_grid")) eps_grid = sec["eps_grid"].get<std::vector<double>>();
  } catch (const json::exception&) {
    throw ConfigError(c.source_name + ": check.eps_grid must be an array of numbers");
  }
  for (double e : eps_grid)
    if (!(e > 0.0)) throw ConfigError(c.source_name + ": check.eps_grid entries must be > 0");

  const ConditionTable mj = check_mean_jump_condition(c.measure, eps_grid);
  write_condition_csv(dir / "check_mean_jump.csv", mj);
  double worst = 0.0;
  for (const auto& r : mj.rows)
    if (r.quadrature) worst = std::max(worst, std::abs(*r.quadrature - r.value) / std::max(1e-300, std::abs(r.value)));
  if (worst > 0.01) fail.push_back("mean-jump quadrature differs from the closed form by more than 1%");
  summary["mean_jump"] = {{"verdict", mj.verdict}, {"quadrature_rel_diff", json_number(worst)}};

  try {
    const ConditionTable rd = check_rate_divergence(c.measure, eps_grid);
    write_condition_csv(dir / "check_rate_divergence.csv", rd);
    summary["rate_divergence"] = {{"verdict", rd.verdict}};
  } catch (const SaturationError& e) {
    summary["rate_divergence"] = {{"error", e.what()}, {"eps_floor", e.eps_floor()}};
    fail.push_back(std::string("rate divergence: ") + e.what());
  }

  if (sec.contains("tightness")) {
    const json& tj = sec["tightness"];
    const RollConfig rc = c.roll();
    long R = 1000;
    std::vector<double> a, eta;
    double rho = 0.1;
    try {
      R = tj.value("replicas", R);
      a = tj.value("a", std::vector<double>{1.0});
      eta = tj.value("eta", std::vector<double>{0.5});
      rho = tj.value("rho", rho);
    } catch (const json::exception& e) {
      throw ConfigError(c.source_name + ": bad check.tightness section (" + e.what() + ")");
    }
    const PathSampler sampler = [&](double eps, long r) {
      size_t ei = 0;
      while (ei < eps_grid.size() && eps_grid[ei] != eps) ++ei;
      return deviation_sample(rc, eps, derive_seed(c.seed, {1000 + ei, static_cast<std::uint64_t>(r)}));
    };
    const TightnessTable tt = tightness_diagnostic(sampler, eps_grid, R, c.T, a, eta, rho, resolve_threads(c.threads));
    write_tightness_csv(dir / "check_tightness.csv", tt);
    summary["tightness"] = {{"sup", to_string(tt.sup_verdict)}, {"modulus", to_string(tt.modulus_verdict)}};
  }

  if (sec.contains("expect")) {
    const json& ex = sec["expect"];
    auto expect = [&](const char* key, const json& got) {
      if (ex.contains(key) && ex[key] != got) fail.push_back(std::string("expected ") + key + " = " + ex[key].dump() + ", got " + got.dump());
    };
    expect("mean_jump", summary["mean_jump"]["verdict"]);
    if (summary["rate_divergence"].contains("verdict")) expect("rate_divergence", summary["rate_divergence"]["verdict"]);
    if (summary.contains("tightness")) {
      expect("tightness_sup", summary["tightness"]["sup"]);
      expect("tightness_modulus", summary["tightness"]["modulus"]);
    }
  }
  summary["passed"] = fail.empty();
  write_json(dir / "check.json", summary);
  return report_failures(fail);
}

}  // namespace rollsim
