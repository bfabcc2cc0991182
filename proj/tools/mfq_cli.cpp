// mfq: run convergence studies, export Method 1 weights, sample surfaces.

#include "mfq/mfq.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

enum Exit { kOk = 0, kRowFailure = 1, kConfigError = 2 };

int run(const std::string &config_path, const std::string &out_dir, int threads) {
  const mfq::ExperimentConfig cfg = mfq::load_config(config_path);
  const auto rows = mfq::run_convergence(cfg, threads);
  const std::filesystem::path out = mfq::output_file(cfg, out_dir);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  mfq::io::write_file(out.string(), [&](std::ostream &os) { mfq::write_results(os, cfg, rows); });
  if (cfg.experiment == "avg_x2") {
    std::filesystem::path b = out;
    b.replace_extension(".baseline.csv");
    mfq::io::write_file(b.string(), [&](std::ostream &os) { mfq::write_baseline(os, cfg, rows); });
  }

  bool failed = false;
  std::printf("%-20s %8s %22s %11s %11s %8s %9s\n", "experiment", "n", "estimate", "rel_error", "h_max",
              "order", "ms");
  for (const auto &r : rows) {
    std::printf("%-20s %8zu %22.15g %11.4e %11.4e %8s %9lld\n", cfg.experiment.c_str(), r.n_points,
                r.estimate, r.rel_error, r.h_max,
                r.order_estimate ? std::to_string(*r.order_estimate).substr(0, 7).c_str() : "-",
                static_cast<long long>(r.wall_ms));
    if (r.failed()) {
      std::fprintf(stderr, "row n=%zu failed: %s\n", r.n_points, r.error.c_str());
      failed = true;
    }
  }
  std::printf("wrote %s\n", out.string().c_str());
  return failed ? kRowFailure : kOk;
}

int weights(const std::string &surface_name, const std::string &cloud_path, double g_integral,
            const std::string &out, double q, double T, int modes) {
  const mfq::LevelSetSurface surface = mfq::surface_by_name(surface_name);
  if (surface.region || surface_name == "plane") throw mfq::ConfigError("weights needs a closed surface");
  const mfq::PointCloud cloud = mfq::io::read_point_cloud(cloud_path);
  if (cloud.size() == 0) throw mfq::ConfigError("empty point cloud");
  const mfq::Vec3 extent = surface.upper - surface.lower;
  mfq::BoxDomain box;
  box.dim = 3;
  box.center = 0.5 * (surface.lower + surface.upper);
  box.side_lengths = mfq::Vec3::Constant(1.5 * extent.maxCoeff());
  const mfq::FourierBasis basis(box, modes, q, T, mfq::WeightMode::separable);
  const Eigen::VectorXd g = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cloud.size()));
  const auto res = mfq::method1_ratio(cloud, g, g, mfq::LbVariant::neumann_pair, basis, g_integral);
  mfq::io::write_file(out, [&](std::ostream &os) { mfq::io::write_weights(os, cloud, *res.weights); });
  std::printf("%zu weights, sum %.17g, min %.6g, max %.6g\n", cloud.size(), res.weights->sum(),
              res.weights->minCoeff(), res.weights->maxCoeff());
  return kOk;
}

int sample(const std::string &surface_name, std::size_t n, const std::string &mode, std::uint64_t seed,
           int candidates, const std::string &out) {
  const mfq::LevelSetSurface surface = mfq::surface_by_name(surface_name);
  if (n == 0) throw mfq::ConfigError("--n must be positive");
  const mfq::PointCloud cloud =
      mfq::sample_surface(surface, n, mfq::sampling_mode_from_string(mode), candidates, seed);
  mfq::io::write_file(out, [&](std::ostream &os) { mfq::io::write_point_cloud(os, cloud); });
  std::printf("wrote %zu points to %s\n", cloud.size(), out.c_str());
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Meshfree surface integration benchmarks"};
  app.require_subcommand(1);

  std::string config, out_dir;
  int threads = 1;
  auto *run_cmd = app.add_subcommand("run", "Run a convergence study from a JSON config");
  run_cmd->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Directory for the results CSV");
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string surface, cloud, out;
  double g_integral = 0.0, q = 10.0 / 3.0, T = 12.0;
  int modes = 40;
  auto *w_cmd = app.add_subcommand("weights", "Export Method 1 weights for a point cloud");
  w_cmd->add_option("--surface", surface, "Built-in closed surface")->required();
  w_cmd->add_option("--cloud", cloud, "Point-cloud CSV (x,y,z,nx,ny,nz[,kappa])")->required();
  w_cmd->add_option("--g-integral", g_integral, "Integral of g = 1 (surface area)")->required();
  w_cmd->add_option("--out", out, "Weights CSV")->required();
  w_cmd->add_option("--q", q, "Smoothness parameter q");
  w_cmd->add_option("--T", T, "Smoothness parameter T");
  w_cmd->add_option("--modes", modes, "Modes per axis N (2N+1 frequencies)");

  std::size_t n = 0;
  std::string mode = "farthest_point";
  std::uint64_t seed = 1;
  int candidates = 25;
  auto *s_cmd = app.add_subcommand("sample", "Sample a built-in surface");
  s_cmd->add_option("--surface", surface, "Built-in surface")->required();
  s_cmd->add_option("--n", n, "Point count")->required();
  s_cmd->add_option("--mode", mode, "farthest_point | random | irregular")->required();
  s_cmd->add_option("--seed", seed, "RNG seed")->required();
  s_cmd->add_option("--out", out, "Point-cloud CSV")->required();
  s_cmd->add_option("--candidates", candidates, "Candidates per point (farthest_point)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return run(config, out_dir, threads);
    if (*w_cmd) return weights(surface, cloud, g_integral, out, q, T, modes);
    return sample(surface, n, mode, seed, candidates, out);
  } catch (const mfq::ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRowFailure;
  }
}
