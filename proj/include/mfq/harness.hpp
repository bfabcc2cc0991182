#pragma once

#include "mfq/boundary.hpp"
#include "mfq/fourier.hpp"
#include "mfq/integrators.hpp"
#include "mfq/io.hpp"
#include "mfq/level_set.hpp"
#include "mfq/parallel.hpp"
#include "mfq/sampling.hpp"
#include "mfq/voronoi.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mfq {

inline constexpr double kGenusTwoArea = 46.6189676876957;
inline constexpr double kGenusTwoMeanX2 = 2.45884;
inline constexpr double kParaboloidPotential = -0.634060518;

inline const std::string kResultsHeader =
    "experiment,n_points,seed,estimate,reference,rel_error,h_max,order_est,wall_ms";
inline const std::string kResultsSchema = "# mfq-results v1";

/// One convergence study. Fields after `output_path` are optional knobs with
/// per-experiment defaults.
struct ExperimentConfig {
  std::string experiment;
  std::string surface;
  std::vector<std::size_t> n_points;
  double q = 4.0;
  double T = 10.0;
  BoxDomain box;
  int modes_per_axis = 10;
  WeightMode weight_mode = WeightMode::joint;
  SolvePath solver = SolvePath::v_path;
  std::uint64_t seed = 1;
  SamplingMode sampling = SamplingMode::farthest_point;
  std::string output_path;

  int candidates_per_point = 25;
  LbVariant lb_variant = LbVariant::with_curvature;
  /// planar split: boundary node count; singular: trapezoid node count
  std::size_t boundary_nodes = 2000;
  Vec3 plane_normal = Vec3::UnitZ();
  double plane_offset = 0.0;
  /// "planar" or "voronoi" (area experiments)
  std::string decomposition = "planar";
  std::size_t voronoi_seeds = 0;
  double boundary_density = 100.0;
  bool augmented = true;
  Vec3 x0 = Vec3::Zero();
  /// h_max probes per cloud point
  std::size_t probe_factor = 100;
  std::optional<double> reference;
  double rank_tolerance = kDefaultRankTolerance;
};

struct ConvergenceRow {
  std::size_t n_points = 0;
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double reference = 0.0;
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  double h_max = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> order_estimate;
  std::int64_t wall_ms = 0;
  /// Point-cloud average of f (avg_x2 only).
  std::optional<double> baseline;
  std::string error;

  bool failed() const { return !error.empty(); }
};

inline const std::vector<std::string> &experiment_names() {
  static const std::vector<std::string> names{"avg_x2",      "voronoi_area",        "planar_area",
                                              "disk_log",    "paraboloid_singular", "sphere_sanity"};
  return names;
}

/// Default parameters of each experiment.
inline ExperimentConfig default_config(const std::string &experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.output_path = experiment + ".csv";
  if (experiment == "avg_x2") {
    c.surface = "genus_two";
    c.n_points = {400, 800, 1600};
    c.q = 10.0 / 3.0;
    c.T = 12.0;
    c.box = BoxDomain::cube(3, -5.0, 5.0);
    c.modes_per_axis = 80;
    c.weight_mode = WeightMode::separable;
    c.solver = SolvePath::phi_path;
    c.lb_variant = LbVariant::neumann_pair;
  } else if (experiment == "voronoi_area") {
    c.surface = "genus_two";
    c.n_points = {4000, 8000};
    c.q = 5.0;
    c.T = 5.0;
    c.box = BoxDomain::cube(3, -0.5, 0.5);
    c.modes_per_axis = 11;
    c.decomposition = "voronoi";
    c.voronoi_seeds = 100;
  } else if (experiment == "planar_area") {
    c.surface = "genus_two";
    c.n_points = {640, 1280, 2560, 5120};
    c.q = 5.0;
    c.T = 10.0;
    c.box.dim = 3;
    c.box.side_lengths = Vec3(10.0, 6.0, 2.0);
    c.modes_per_axis = 13;
  } else if (experiment == "disk_log") {
    c.surface = "disk";
    c.n_points = {250, 500, 1000, 2000};
    c.box = BoxDomain::cube(2, -2.0, 2.0);
    c.modes_per_axis = 30;
    c.boundary_nodes = 1000;
  } else if (experiment == "paraboloid_singular") {
    c.surface = "paraboloid";
    c.n_points = {320, 640, 1280};
    c.box = BoxDomain::cube(3, -2.0, 2.0);
    c.modes_per_axis = 11;
    c.boundary_nodes = 1000;
    c.x0 = Vec3(0.0, 0.0, 1.0);
  } else if (experiment == "sphere_sanity") {
    c.surface = "sphere";
    c.n_points = {250, 500, 1000};
    c.q = 6.0;
    c.T = 10.0;
    c.box = BoxDomain::cube(3, -2.0, 2.0);
    c.modes_per_axis = 11;
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

inline void validate(const ExperimentConfig &c) {
  const auto &names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    throw ConfigError("unknown experiment '" + c.experiment + "'");
  if (c.n_points.empty()) throw ConfigError("n_points is empty");
  for (std::size_t i = 0; i < c.n_points.size(); ++i) {
    if (c.n_points[i] == 0) throw ConfigError("n_points entries must be positive");
    if (i > 0 && c.n_points[i] <= c.n_points[i - 1])
      throw ConfigError("n_points must be strictly increasing");
  }
  if (!(c.q > 0.0) || !(c.T > 0.0)) throw ConfigError("q and T must be positive");
  if (c.modes_per_axis < 0) throw ConfigError("modes_per_axis must be non-negative");
  (void)FourierBasis(c.box, c.modes_per_axis, c.q, c.T, c.weight_mode);
  if (c.candidates_per_point < 1) throw ConfigError("candidates_per_point must be positive");
  if (c.probe_factor < 1) throw ConfigError("probe_factor must be positive");

  const bool disk = c.experiment == "disk_log";
  if (disk != (c.surface == "disk")) throw ConfigError("disk_log runs on surface 'disk' only");
  if (!disk) (void)surface_by_name(c.surface);
  if (c.box.dim != (disk ? 2 : 3)) throw ConfigError("box dimension does not match the experiment");
  if (c.experiment == "paraboloid_singular" && c.surface != "paraboloid")
    throw ConfigError("paraboloid_singular runs on surface 'paraboloid' only");
  const bool singular = disk || c.experiment == "paraboloid_singular";
  if (singular && c.boundary_nodes < 3) throw ConfigError("boundary_nodes too small");
  if (c.experiment != "avg_x2" && c.solver == SolvePath::phi_path)
    throw ConfigError("only avg_x2 supports the phi_path solver");
  if (c.decomposition != "planar" && c.decomposition != "voronoi")
    throw ConfigError("decomposition must be 'planar' or 'voronoi'");
  if (c.decomposition == "voronoi" && c.voronoi_seeds < 1)
    throw ConfigError("voronoi decomposition needs voronoi_seeds >= 1");
  if (!(c.boundary_density > 0.0)) throw ConfigError("boundary_density must be positive");
  if (!(c.plane_normal.norm() > 0.0)) throw ConfigError("plane_normal must be nonzero");

  // Dense V (rows x modes, doubled when augmented) must fit in memory.
  if (c.solver == SolvePath::v_path) {
    const FourierBasis b(c.box, c.modes_per_axis, c.q, c.T, c.weight_mode);
    const double cols = static_cast<double>(b.mode_count()) * (singular && c.augmented ? 2 : 1);
    const double rows = static_cast<double>(c.n_points.back()) * (c.lb_variant == LbVariant::neumann_pair ? 2 : 1);
    if (2.0 * rows * cols * 8.0 > 16e9)
      throw ConfigError("constraint matrix too large for the V path; reduce modes or use phi_path");
  }
}

namespace detail {

using nlohmann::json;

inline Vec3 vec3_from(const json &j, const std::string &key) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(key + " must be a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace detail

/// Parses a JSON config; missing keys take the experiment's defaults and
/// unknown keys are rejected.
inline ExperimentConfig parse_config(const std::string &text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw ConfigError("config needs an 'experiment' string");
  ExperimentConfig c = default_config(j["experiment"].get<std::string>());

  static const std::set<std::string> known{
      "experiment",     "surface",         "n_points",       "q",
      "T",              "box",             "modes_per_axis", "weight_mode",
      "solver",         "seed",            "sampling",       "output_path",
      "candidates_per_point", "lb_variant", "boundary_nodes", "plane_normal",
      "plane_offset",   "decomposition",   "voronoi_seeds",  "boundary_density",
      "augmented",      "x0",              "probe_factor",   "reference",
      "rank_tolerance"};
  for (const auto &[key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  try {
    if (j.contains("surface")) c.surface = j["surface"].get<std::string>();
    if (j.contains("n_points")) c.n_points = j["n_points"].get<std::vector<std::size_t>>();
    if (j.contains("q")) c.q = j["q"].get<double>();
    if (j.contains("T")) c.T = j["T"].get<double>();
    if (j.contains("box")) {
      const json &b = j["box"];
      if (!b.is_object()) throw ConfigError("box must be an object");
      for (const auto &[key, value] : b.items())
        if (key != "dim" && key != "center" && key != "side_lengths")
          throw ConfigError("unknown box key '" + key + "'");
      if (b.contains("dim")) c.box.dim = b["dim"].get<int>();
      if (b.contains("center")) c.box.center = detail::vec3_from(b["center"], "box.center");
      if (b.contains("side_lengths"))
        c.box.side_lengths = detail::vec3_from(b["side_lengths"], "box.side_lengths");
    }
    if (j.contains("modes_per_axis")) c.modes_per_axis = j["modes_per_axis"].get<int>();
    if (j.contains("weight_mode")) {
      const auto s = j["weight_mode"].get<std::string>();
      if (s == "separable") c.weight_mode = WeightMode::separable;
      else if (s == "joint") c.weight_mode = WeightMode::joint;
      else throw ConfigError("weight_mode must be 'separable' or 'joint'");
    }
    if (j.contains("solver")) {
      const auto s = j["solver"].get<std::string>();
      if (s == "v_path") c.solver = SolvePath::v_path;
      else if (s == "phi_path") c.solver = SolvePath::phi_path;
      else throw ConfigError("solver must be 'v_path' or 'phi_path'");
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("sampling")) c.sampling = sampling_mode_from_string(j["sampling"].get<std::string>());
    if (j.contains("output_path")) c.output_path = j["output_path"].get<std::string>();
    if (j.contains("candidates_per_point")) c.candidates_per_point = j["candidates_per_point"].get<int>();
    if (j.contains("lb_variant")) {
      const auto s = j["lb_variant"].get<std::string>();
      if (s == "with_curvature") c.lb_variant = LbVariant::with_curvature;
      else if (s == "neumann_pair") c.lb_variant = LbVariant::neumann_pair;
      else throw ConfigError("lb_variant must be 'with_curvature' or 'neumann_pair'");
    }
    if (j.contains("boundary_nodes")) c.boundary_nodes = j["boundary_nodes"].get<std::size_t>();
    if (j.contains("plane_normal")) c.plane_normal = detail::vec3_from(j["plane_normal"], "plane_normal");
    if (j.contains("plane_offset")) c.plane_offset = j["plane_offset"].get<double>();
    if (j.contains("decomposition")) c.decomposition = j["decomposition"].get<std::string>();
    if (j.contains("voronoi_seeds")) c.voronoi_seeds = j["voronoi_seeds"].get<std::size_t>();
    if (j.contains("boundary_density")) c.boundary_density = j["boundary_density"].get<double>();
    if (j.contains("augmented")) c.augmented = j["augmented"].get<bool>();
    if (j.contains("x0")) c.x0 = detail::vec3_from(j["x0"], "x0");
    if (j.contains("probe_factor")) c.probe_factor = j["probe_factor"].get<std::size_t>();
    if (j.contains("reference")) c.reference = j["reference"].get<double>();
    if (j.contains("rank_tolerance")) c.rank_tolerance = j["rank_tolerance"].get<double>();
  } catch (const detail::json::exception &e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (c.decomposition == "voronoi" && c.voronoi_seeds == 0) c.voronoi_seeds = 10;
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

/// p_k = ln(e_{k-1}/e_k) / ln(h_{k-1}/h_k); absent for the first entry and
/// wherever an error or h is not positive.
inline std::vector<std::optional<double>> estimate_order(const std::vector<double> &errors,
                                                         const std::vector<double> &h_values) {
  if (errors.size() != h_values.size()) throw ConfigError("errors and h_values differ in length");
  std::vector<std::optional<double>> p(errors.size());
  const auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  for (std::size_t k = 1; k < errors.size(); ++k) {
    if (!ok(errors[k - 1]) || !ok(errors[k]) || !ok(h_values[k - 1]) || !ok(h_values[k])) continue;
    if (h_values[k - 1] == h_values[k]) continue;
    p[k] = std::log(errors[k - 1] / errors[k]) / std::log(h_values[k - 1] / h_values[k]);
  }
  return p;
}

/// Least-squares slope of log(error) against log(h) over the valid rows.
inline std::optional<double> fitted_order(const std::vector<double> &errors,
                                          const std::vector<double> &h_values) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!(errors[k] > 0.0) || !(h_values[k] > 0.0) || !std::isfinite(errors[k])) continue;
    const double x = std::log(h_values[k]), y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

inline double reference_value(const ExperimentConfig &c) {
  if (c.reference) return *c.reference;
  if (c.experiment == "avg_x2") {
    if (c.surface == "genus_two") return kGenusTwoMeanX2;
    if (c.surface == "sphere") return 1.0 / 3.0;
  } else if (c.experiment == "disk_log") {
    return singular_reference(SingularDomain::unit_disk, c.x0);
  } else if (c.experiment == "paraboloid_singular") {
    return singular_reference(SingularDomain::paraboloid_cap, c.x0);
  } else {
    if (c.surface == "genus_two") return kGenusTwoArea;
    if (c.surface == "sphere") return 4.0 * std::numbers::pi;
  }
  throw ConfigError("no reference value for " + c.experiment + " on '" + c.surface + "'");
}

namespace detail {

struct RowOutput {
  double estimate;
  double h_max;
  std::optional<double> baseline;
};

inline RowOutput run_row(const ExperimentConfig &c, std::size_t n, int threads) {
  const FourierBasis basis(c.box, c.modes_per_axis, c.q, c.T, c.weight_mode);
  SamplingOptions so;
  so.mode = c.sampling;
  so.candidates_per_point = c.candidates_per_point;
  so.seed = c.seed;
  const std::size_t probes = c.probe_factor * n;
  const std::uint64_t probe_seed = c.seed + 0x9e3779b97f4a7c15ULL;
  RowOutput out{};

  if (c.experiment == "disk_log") {
    const DiskDomain disk(1.0, Vec3::Zero());
    const PointCloud cloud = sample_points(disk, n, so);
    out.h_max = fill_distance_estimate(cloud.positions(), disk, probes, probe_seed);
    std::optional<SingularAugmentation> aug;
    if (c.augmented) aug = augmentations::log2d(c.x0);
    out.estimate = singular_integral(SingularDomain::unit_disk, cloud, c.x0, aug, basis,
                                     c.boundary_nodes, c.rank_tolerance)
                       .integral;
    return out;
  }

  const LevelSetSurface surface = surface_by_name(c.surface);
  const PointCloud cloud = sample_points(SurfaceDomain(surface), n, so);
  out.h_max = fill_distance_estimate(cloud.positions(), SurfaceDomain(surface), probes, probe_seed);

  if (c.experiment == "paraboloid_singular") {
    std::optional<SingularAugmentation> aug;
    if (c.augmented) aug = augmentations::inv_r(c.x0);
    out.estimate = singular_integral(SingularDomain::paraboloid_cap, cloud, c.x0, aug, basis,
                                     c.boundary_nodes, c.rank_tolerance)
                       .integral;
  } else if (c.experiment == "avg_x2") {
    Eigen::VectorXd f(static_cast<Eigen::Index>(n)), g = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) f(static_cast<Eigen::Index>(i)) = std::pow(cloud.points[i].position.x(), 2);
    Method1Options mo;
    mo.path = c.solver;
    mo.rank_tolerance = c.rank_tolerance;
    out.estimate = method1_ratio(cloud, f, g, c.lb_variant, basis, std::nullopt, mo).ratio;
    out.baseline = f.mean();
  } else {
    const auto one = [](const Vec3 &) { return 1.0; };
    std::vector<Subdomain> parts;
    if (c.decomposition == "voronoi") {
      SamplingOptions seed_opt = so;
      seed_opt.mode = SamplingMode::farthest_point;
      seed_opt.seed = c.seed + 1000;
      std::vector<Vec3> seeds = sample_points(SurfaceDomain(surface), c.voronoi_seeds, seed_opt).positions();
      const VoronoiPartition part = voronoi_partition(cloud, seeds, surface, c.boundary_density);
      parts = voronoi_subdomains(cloud, part);
    } else {
      const Vec3 p = c.plane_normal.normalized();
      const double off = c.plane_offset / c.plane_normal.norm();
      const BoundaryQuadrature b = planar_split_boundary(surface, p, off, c.boundary_nodes, c.seed + 7,
                                                         c.candidates_per_point);
      parts = planar_split_subdomains(cloud, p, off, b);
    }
    Method2Options mo;
    mo.threads = threads;
    mo.rank_tolerance = c.rank_tolerance;
    out.estimate = method2_integral(parts, one, c.lb_variant, basis, mo).integral;
  }
  return out;
}

} // namespace detail

/// One row per n_points entry. A failing row keeps its error message and the
/// remaining rows still run. Rows run on up to `threads` workers.
inline std::vector<ConvergenceRow> run_convergence(const ExperimentConfig &config, int threads = 1) {
  validate(config);
  const double ref = reference_value(config);
  std::vector<ConvergenceRow> rows(config.n_points.size());
  const int row_threads = std::max(1, threads);
  const int inner = row_threads >= static_cast<int>(rows.size()) ? 1 : row_threads;
  parallel_for(rows.size(), row_threads, [&](std::size_t k) {
    ConvergenceRow &r = rows[k];
    r.n_points = config.n_points[k];
    r.reference = ref;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const detail::RowOutput o = detail::run_row(config, r.n_points, inner);
      r.estimate = o.estimate;
      r.h_max = o.h_max;
      r.baseline = o.baseline;
      r.rel_error = std::abs(r.estimate - ref) / std::abs(ref);
      if (!std::isfinite(r.estimate)) r.error = "non-finite estimate";
    } catch (const std::exception &e) {
      r.error = e.what();
    }
    r.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  });
  std::vector<double> e, h;
  for (const ConvergenceRow &r : rows) {
    e.push_back(r.failed() ? std::numeric_limits<double>::quiet_NaN() : r.rel_error);
    h.push_back(r.h_max);
  }
  const auto p = estimate_order(e, h);
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k].order_estimate = p[k];
  return rows;
}

/// Results CSV: schema line, header, one line per row; failed rows carry nan
/// values followed by a `# error` comment line.
inline void write_results(std::ostream &os, const ExperimentConfig &c, const std::vector<ConvergenceRow> &rows) {
  os << kResultsSchema << '\n' << kResultsHeader << '\n';
  for (const ConvergenceRow &r : rows) {
    os << c.experiment << ',' << r.n_points << ',' << c.seed << ',' << io::real(r.estimate) << ','
       << io::real(r.reference) << ',' << io::real(r.rel_error) << ',' << io::real(r.h_max) << ','
       << (r.order_estimate ? io::real(*r.order_estimate) : "") << ',' << r.wall_ms << '\n';
    if (r.failed()) os << "# error n_points=" << r.n_points << ": " << r.error << '\n';
  }
}

/// Companion file for the point-cloud average baseline.
inline void write_baseline(std::ostream &os, const ExperimentConfig &c, const std::vector<ConvergenceRow> &rows) {
  os << "experiment,n_points,seed,baseline_estimate,reference,baseline_rel_error\n";
  for (const ConvergenceRow &r : rows) {
    const double b = r.baseline.value_or(std::numeric_limits<double>::quiet_NaN());
    os << c.experiment << ',' << r.n_points << ',' << c.seed << ',' << io::real(b) << ','
       << io::real(r.reference) << ',' << io::real(std::abs(b - r.reference) / std::abs(r.reference)) << '\n';
  }
}

/// Parsed results file; throws ConfigError on any schema violation.
struct ResultsFile {
  struct Row {
    std::string experiment;
    std::size_t n_points;
    std::uint64_t seed;
    double estimate, reference, rel_error, h_max;
    std::optional<double> order_est;
    std::int64_t wall_ms;
  };
  std::vector<Row> rows;
  std::vector<std::string> errors;
};

inline ResultsFile read_results(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line != kResultsSchema) throw ConfigError("missing results schema line");
  if (!std::getline(is, line) || line != kResultsHeader) throw ConfigError("unexpected results header");
  ResultsFile f;
  while (std::getline(is, line)) {
    if (line.rfind("# error", 0) == 0) {
      f.errors.push_back(line);
      continue;
    }
    const auto cells = io::split(line);
    if (cells.size() != 9) throw ConfigError("results row has " + std::to_string(cells.size()) + " columns");
    ResultsFile::Row r;
    try {
      r.experiment = cells[0];
      r.n_points = std::stoull(cells[1]);
      r.seed = std::stoull(cells[2]);
      r.estimate = io::parse_real(cells[3]);
      r.reference = io::parse_real(cells[4]);
      r.rel_error = io::parse_real(cells[5]);
      r.h_max = io::parse_real(cells[6]);
      if (!cells[7].empty()) r.order_est = io::parse_real(cells[7]);
      r.wall_ms = std::stoll(cells[8]);
    } catch (const std::logic_error &) {
      throw ConfigError("malformed results row: " + line);
    }
    f.rows.push_back(r);
  }
  return f;
}

/// Output file of a config, optionally redirected into `dir`.
inline std::filesystem::path output_file(const ExperimentConfig &c, const std::string &dir = "") {
  std::filesystem::path p = c.output_path.empty() ? c.experiment + ".csv" : c.output_path;
  if (!dir.empty()) p = std::filesystem::path(dir) / p.filename();
  return p;
}

} // namespace mfq
