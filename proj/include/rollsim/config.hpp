#pragma once

// Run configuration: a single JSON document, with command-line flags taking
// precedence over its fields.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rollsim/errors.hpp"
#include "rollsim/io.hpp"
#include "rollsim/ldp.hpp"
#include "rollsim/slipping.hpp"

namespace rollsim {

struct RunConfig {
  json doc = json::object();  // raw document, for command-specific sections
  std::string source;         // text the document was parsed from
  std::string source_name = "<defaults>";

  Manifold manifold = Manifold::sphere(2);
  std::optional<Vec> start;
  BaseCurve curve = BaseCurve::line(Vec::Unit(2, 0));
  double T = 1.0;
  double h = 1e-3;
  std::uint64_t seed = 1;
  int threads = 0;
  std::filesystem::path out_dir = ".";

  Perturbation perturbation = Perturbation::Brownian;
  SlipMode slip = SlipMode::Translational;
  JumpMeasureSpec measure = JumpMeasureSpec::sparse();
  bool twist = false;
  std::vector<double> eps_grid{0.1};
  long replicas = 1000;
  double eta = 0.5;
  DevelopOptions develop;

  RollConfig roll() const {
    RollConfig r;
    r.manifold = manifold;
    r.start = start.value_or(Vec());
    r.curve = curve;
    r.T = T;
    r.h = h;
    r.perturbation = perturbation;
    r.slip = slip;
    r.measure = measure;
    r.twist = twist;
    r.develop = develop;
    return r;
  }
};

/// 1-based line of the first occurrence of "key" in the text, or 0.
inline size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

namespace detail {

class ConfigReader {
 public:
  ConfigReader(const RunConfig& c) : c_(c) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const size_t line = line_of_key(c_.source, key);
    throw ConfigError(c_.source_name + (line ? ":" + std::to_string(line) : std::string()) + ": '" + key + "' " + msg);
  }

  template <class T>
  T get(const json& obj, const std::string& key, T fallback) const {
    if (!obj.contains(key)) return fallback;
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      fail(key, "has the wrong type");
    }
  }

  Vec vec(const json& obj, const std::string& key) const {
    try {
      const auto v = obj.at(key).get<std::vector<double>>();
      return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    } catch (const json::exception&) {
      fail(key, "must be an array of numbers");
    }
  }

 private:
  const RunConfig& c_;
};

}  // namespace detail

inline BaseCurve curve_from_json(const json& j, const detail::ConfigReader& r, const std::filesystem::path& base_dir) {
  const std::string kind = r.get<std::string>(j, "kind", "line");
  if (kind == "line") return BaseCurve::line(j.contains("direction") ? r.vec(j, "direction") : Vec(Vec::Unit(2, 0)));
  if (kind == "circle") return BaseCurve::circle(r.get(j, "radius", 1.0), r.get(j, "omega", 1.0));
  if (kind == "lissajous")
    return BaseCurve::lissajous(r.get(j, "a", 1.0), r.get(j, "b", 1.0), r.get(j, "p", 1.0), r.get(j, "q", 2.0));
  if (kind == "csv") {
    std::filesystem::path p = r.get<std::string>(j, "path", "");
    if (p.empty()) r.fail("path", "is required for csv curves");
    if (p.is_relative()) p = base_dir / p;
    const SampledPath s = read_path_csv(p);
    return BaseCurve::polyline(s.grid(), s.values());
  }
  r.fail("kind", "names an unknown curve '" + kind + "'");
}

/// Parses the document into `c`. Unknown top-level keys are rejected.
inline void apply_json(RunConfig& c, const json& doc, const std::filesystem::path& base_dir = ".") {
  static const std::vector<std::string> known{"manifold", "start", "curve", "T", "h", "seed", "threads", "out_dir",
                                              "perturbation", "slip", "measure", "twist", "eps", "eps_grid",
                                              "replicas", "eta", "reortho_threshold", "rate", "check", "comment"};
  detail::ConfigReader r(c);
  if (!doc.is_object()) throw ConfigError(c.source_name + ": top level must be a JSON object");
  for (const auto& [k, v] : doc.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) r.fail(k, "is not a recognised setting");
  c.doc = doc;
  try {
    if (doc.contains("manifold")) c.manifold = manifold_from_json(doc["manifold"]);
  } catch (const json::exception&) {
    r.fail("manifold", "must be an object with 'kind' and 'dim'");
  } catch (const Error& e) {
    r.fail("manifold", e.what());
  }
  if (doc.contains("start")) c.start = r.vec(doc, "start");
  if (doc.contains("curve")) {
    try {
      c.curve = curve_from_json(doc["curve"], r, base_dir);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      r.fail("curve", e.what());
    }
  }
  c.T = r.get(doc, "T", c.T);
  c.h = r.get(doc, "h", c.h);
  if (!(c.T > 0.0)) r.fail("T", "must be > 0");
  if (!(c.h > 0.0)) r.fail("h", "must be > 0");
  if (doc.contains("seed")) c.seed = r.get<std::uint64_t>(doc, "seed", c.seed);
  c.threads = r.get(doc, "threads", c.threads);
  if (doc.contains("out_dir")) c.out_dir = r.get<std::string>(doc, "out_dir", ".");
  try {
    if (doc.contains("perturbation")) c.perturbation = perturbation_from_string(r.get<std::string>(doc, "perturbation", ""));
  } catch (const ParameterError& e) {
    r.fail("perturbation", e.what());
  }
  try {
    if (doc.contains("slip")) c.slip = slip_mode_from_string(r.get<std::string>(doc, "slip", ""));
  } catch (const ParameterError& e) {
    r.fail("slip", e.what());
  }
  if (doc.contains("measure")) {
    const json& m = doc["measure"];
    const std::string name = m.is_string() ? m.get<std::string>() : r.get<std::string>(m, "name", "");
    try {
      const json o = m.is_object() ? m : json::object();
      c.measure = JumpMeasureSpec::by_name(name, r.get(o, "rate", 1.0), r.get(o, "mean", 1.0), r.get(o, "kappa", 1.0),
                                           r.get(o, "power", 1.1));
    } catch (const ParameterError& e) {
      r.fail("measure", e.what());
    }
  }
  c.twist = r.get(doc, "twist", c.twist);
  if (doc.contains("eps")) c.eps_grid = {r.get(doc, "eps", 0.1)};
  if (doc.contains("eps_grid")) c.eps_grid = r.get<std::vector<double>>(doc, "eps_grid", {});
  if (c.eps_grid.empty()) r.fail("eps_grid", "must not be empty");
  for (double e : c.eps_grid)
    if (!(e >= 0.0)) r.fail(doc.contains("eps_grid") ? "eps_grid" : "eps", "must be >= 0");
  c.replicas = r.get(doc, "replicas", c.replicas);
  if (c.replicas < 1) r.fail("replicas", "must be >= 1");
  c.eta = r.get(doc, "eta", c.eta);
  if (!(c.eta >= 0.0)) r.fail("eta", "must be >= 0");
  c.develop.reortho_threshold = r.get(doc, "reortho_threshold", c.develop.reortho_threshold);
  if (c.start && c.start->size() != c.manifold.coord_dim()) r.fail("start", "has the wrong number of coordinates");
  if (c.start && !in_domain(c.manifold, *c.start)) r.fail("start", "lies outside the manifold");
  if (c.curve.dim != c.manifold.dim()) r.fail("curve", "dimension differs from the manifold dimension");
}

inline RunConfig load_config(const std::filesystem::path& path) {
  RunConfig c;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  c.source = ss.str();
  c.source_name = path.string();
  json doc;
  try {
    doc = json::parse(c.source);
  } catch (const json::parse_error& e) {
    const auto byte = std::min(e.byte, c.source.size());
    const size_t line = 1 + static_cast<size_t>(std::count(c.source.begin(), c.source.begin() + static_cast<long>(byte), '\n'));
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": JSON syntax error");
  }
  apply_json(c, doc, path.parent_path());
  return c;
}

}  // namespace rollsim
