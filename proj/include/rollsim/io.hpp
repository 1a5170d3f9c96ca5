#pragma once

// CSV and JSON serialization. Floats are written with 17 significant digits
// so that CSV round trips are bit exact; +inf / nan become "inf" / "nan".

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rollsim/development.hpp"
#include "rollsim/errors.hpp"
#include "rollsim/geometry.hpp"
#include "rollsim/ldp.hpp"
#include "rollsim/paths.hpp"
#include "rollsim/rotation.hpp"
#include "rollsim/slipping.hpp"

namespace rollsim {

using json = nlohmann::json;

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("not a number: '" + s + "'");
  return v;
}

/// JSON number, or the strings "inf" / "nan" for non-finite values.
inline json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

inline json to_json(const RateValue& v) { return v.infinite ? json("inf") : json(v.value); }

inline std::vector<std::string> numbered(const std::string& stem, Eigen::Index n) {
  std::vector<std::string> h;
  for (Eigen::Index i = 1; i <= n; ++i) h.push_back(stem + std::to_string(i));
  return h;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw ConfigError("cannot open '" + path.string() + "' for writing");
    row_strings(header);
  }
  void row(const std::vector<double>& v) {
    for (size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << format_double(v[i]);
    out_ << '\n';
  }
  void row_strings(const std::vector<std::string>& v) {
    for (size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
    out_ << '\n';
  }
  ~CsvWriter() = default;
  void close() {
    out_.close();
    if (!out_) throw ConfigError("write to '" + path_.string() + "' failed");
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  size_t lineno = 0;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    std::vector<double> r;
    try {
      for (const auto& c : split(line)) r.push_back(parse_double(c));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (r.size() != t.header.size()) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    t.rows.push_back(std::move(r));
  }
  if (t.header.empty()) throw ConfigError("'" + path.string() + "' is empty");
  return t;
}

/// Columns t, v_1..v_m.
inline void write_path_csv(const std::filesystem::path& path, const SampledPath& p) {
  std::vector<std::string> h{"t"};
  for (auto& s : numbered("v_", p.dim())) h.push_back(s);
  CsvWriter w(path, h);
  std::vector<double> row(static_cast<size_t>(p.dim()) + 1);
  for (Eigen::Index k = 0; k < p.nodes(); ++k) {
    row[0] = p.time(k);
    for (Eigen::Index i = 0; i < p.dim(); ++i) row[static_cast<size_t>(i) + 1] = p.values()(k, i);
    w.row(row);
  }
  w.close();
}

inline SampledPath read_path_csv(const std::filesystem::path& path, PathRole role = PathRole::Deterministic) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header[0] != "t") throw ConfigError("'" + path.string() + "': expected columns t,v_1,...");
  Grid g;
  Mat v(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()) - 1);
  for (size_t k = 0; k < t.rows.size(); ++k) {
    g.push_back(t.rows[k][0]);
    for (size_t i = 1; i < t.rows[k].size(); ++i) v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i) - 1) = t.rows[k][i];
  }
  try {
    return SampledPath(std::move(g), std::move(v), role);
  } catch (const Error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

inline std::vector<std::string> coordinate_names(Eigen::Index n) {
  if (n == 2) return {"x", "y"};
  if (n == 3) return {"x", "y", "z"};
  return numbered("x_", n);
}

inline void write_manifold_path_csv(const std::filesystem::path& path, const ManifoldPath& x) {
  std::vector<std::string> h{"t"};
  for (auto& s : coordinate_names(x.points.cols())) h.push_back(s);
  CsvWriter w(path, h);
  std::vector<double> row(static_cast<size_t>(x.points.cols()) + 1);
  for (Eigen::Index k = 0; k < x.nodes(); ++k) {
    row[0] = x.grid[static_cast<size_t>(k)];
    for (Eigen::Index i = 0; i < x.points.cols(); ++i) row[static_cast<size_t>(i) + 1] = x.points(k, i);
    w.row(row);
  }
  w.close();
}

/// Columns t, base coordinates, then e_<row>_<col> for the frame matrix.
inline void write_frame_path_csv(const std::filesystem::path& path, const FramePath& u) {
  const auto n = u.frames.front().base.coords.size();
  const auto r = u.frames.front().frame.rows(), c = u.frames.front().frame.cols();
  std::vector<std::string> h{"t"};
  for (auto& s : coordinate_names(n)) h.push_back(s);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) h.push_back("e_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  CsvWriter w(path, h);
  std::vector<double> row;
  for (size_t k = 0; k < u.frames.size(); ++k) {
    row.assign(1, u.grid[k]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(u.frames[k].base.coords(i));
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) row.push_back(u.frames[k].frame(i, j));
    w.row(row);
  }
  w.close();
}

inline void write_rotation_path_csv(const std::filesystem::path& path, const RotationPath& g) {
  const auto d = g.values.front().rows();
  std::vector<std::string> h{"t"};
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) h.push_back("g_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  CsvWriter w(path, h);
  std::vector<double> row;
  for (size_t k = 0; k < g.values.size(); ++k) {
    row.assign(1, g.grid[k]);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) row.push_back(g.values[k](i, j));
    w.row(row);
  }
  w.close();
}

inline json matrix_rows(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(json_number(m(i, j)));
    a.push_back(r);
  }
  return a;
}

inline Mat matrix_from_rows(const json& a, Eigen::Index cols) {
  Mat m(static_cast<Eigen::Index>(a.size()), cols);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != static_cast<size_t>(cols)) throw ConfigError("ragged matrix in JSON");
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& x = a[i][static_cast<size_t>(j)];
      m(static_cast<Eigen::Index>(i), j) = x.is_string() ? parse_double(x.get<std::string>()) : x.get<double>();
    }
  }
  return m;
}

/// JSON envelope with role tag and decomposition.
inline json to_json(const SampledPath& p) {
  json j{{"role", to_string(p.role())}, {"grid", p.grid()}, {"values", matrix_rows(p.values())}};
  if (const auto& d = p.decomposition()) {
    json dj{{"a_part", matrix_rows(d->a_part)}, {"m_part", matrix_rows(d->m_part)}};
    if (d->bracket) {
      json b = json::array();
      for (const auto& m : *d->bracket) b.push_back(matrix_rows(m));
      dj["bracket"] = b;
    }
    j["decomposition"] = dj;
  }
  return j;
}

inline SampledPath path_from_json(const json& j) {
  const Grid g = j.at("grid").get<Grid>();
  const auto cols = j.at("values").empty() ? 0 : static_cast<Eigen::Index>(j.at("values")[0].size());
  Mat v = matrix_from_rows(j.at("values"), cols);
  std::optional<Decomposition> dec;
  if (j.contains("decomposition")) {
    const auto& dj = j["decomposition"];
    Decomposition d{matrix_from_rows(dj.at("a_part"), cols), matrix_from_rows(dj.at("m_part"), cols), std::nullopt};
    if (dj.contains("bracket")) {
      std::vector<Mat> b;
      for (const auto& m : dj["bracket"]) b.push_back(matrix_from_rows(m, cols));
      d.bracket = std::move(b);
    }
    dec = std::move(d);
  }
  return SampledPath(g, std::move(v), role_from_string(j.at("role").get<std::string>()), std::move(dec));
}

inline json to_json(const Manifold& m) {
  json j{{"kind", m.name()}, {"dim", m.dim()}};
  if (const auto* t = std::get_if<backend::FlatTorus>(&m.backend())) j["period"] = t->period;
  return j;
}

/// {"kind": "flat"|"sphere"|"half-plane"|"torus", "dim": d, "period": p}.
/// The sphere's dim is intrinsic (dim 2 is the unit sphere in R^3).
inline Manifold manifold_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int dim = j.value("dim", 2);
  if (kind == "flat") return Manifold::flat(dim);
  if (kind == "sphere") return Manifold::sphere(dim);
  if (kind == "half-plane" || kind == "hyperbolic") {
    if (dim != 2) throw ConfigError("half-plane has dimension 2");
    return Manifold::half_plane();
  }
  if (kind == "torus") return Manifold::torus(dim, j.value("period", 2.0 * std::numbers::pi));
  throw ConfigError("unknown manifold kind '" + kind + "' (charts are constructed programmatically)");
}

inline json to_json(const SlippingSchedule& s) {
  return {{"horizon", s.horizon}, {"times", s.times}, {"durations", s.durations}, {"S_T", s.subordinator(s.horizon)}};
}

inline json to_json(const ActionReport& r) {
  json j{{"total", to_json(r.total)},
         {"drift_part", json_number(r.drift_part)},
         {"twist_part", json_number(r.twist_part)},
         {"feasible", r.feasible},
         {"residual", json_number(r.residual)},
         {"tolerance", json_number(r.tolerance)},
         {"converged", r.converged},
         {"evaluations", r.evaluations}};
  if (r.upper_bound) j["upper_bound"] = json_number(*r.upper_bound);
  return j;
}

inline void write_scan_csv(const std::filesystem::path& path, const ScanTable& t) {
  CsvWriter w(path, {"eps", "R", "hits", "phat", "ci_lo", "ci_hi", "eps_log_phat"});
  for (const auto& r : t.rows)
    w.row_strings({format_double(r.eps), std::to_string(r.replicas), std::to_string(r.hits), format_double(r.phat),
                   format_double(r.ci.lo), format_double(r.ci.hi), format_double(r.eps_log_phat)});
  w.close();
}

inline ScanTable read_scan_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  ScanTable s;
  for (const auto& r : t.rows) {
    ScanRow row = make_scan_row(r[0], static_cast<long>(r[2]), static_cast<long>(r[1]));
    s.rows.push_back(row);
  }
  return s;
}

inline void write_condition_csv(const std::filesystem::path& path, const ConditionTable& t) {
  std::vector<std::string> h{"eps", t.quantity};
  const bool quad = !t.rows.empty() && t.rows.front().quadrature.has_value();
  if (quad) h.push_back(t.quantity + "_quadrature");
  CsvWriter w(path, h);
  for (const auto& r : t.rows) {
    std::vector<double> row{r.eps, r.value};
    if (quad) row.push_back(r.quadrature.value_or(std::numeric_limits<double>::quiet_NaN()));
    w.row(row);
  }
  w.close();
}

inline void write_tightness_csv(const std::filesystem::path& path, const TightnessTable& t) {
  CsvWriter w(path, {"eps", "criterion", "threshold", "R", "hits", "eps_log_phat", "censored"});
  for (const auto& c : t.cells)
    w.row_strings({format_double(c.eps), c.criterion, format_double(c.threshold), std::to_string(c.replicas),
                   std::to_string(c.hits), format_double(c.value), c.censored ? "1" : "0"});
  w.close();
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

}  // namespace rollsim
