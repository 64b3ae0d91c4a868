// Command-line driver: paths, mc-table, limit-sample, boot-coverage, estimate, simulate.
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uar/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> replicates;
  std::optional<std::string> scale;
};

struct SubFlags {
  // paths / simulate / estimate
  std::optional<std::size_t> n;
  std::optional<double> alpha;
  std::optional<std::size_t> count;
  std::optional<std::string> input;
  std::optional<std::size_t> order;
  std::optional<std::string> loss;
  // grids
  std::vector<std::size_t> n_list;
  std::vector<double> alpha_list;
  std::vector<std::string> estimators;
  std::vector<std::string> m_rules;
  std::optional<std::size_t> boot_b;
  std::optional<std::size_t> outer;
  // limit-sample
  std::optional<std::string> limit_case;
  std::optional<std::size_t> draws;
  std::optional<std::size_t> mesh;
  std::optional<std::size_t> truncation;
  std::optional<double> theta;
};

uar::ExperimentConfig build_config(const CommonFlags& common) {
  uar::ExperimentConfig config = common.config.empty() ? uar::ExperimentConfig{} : uar::load_config(common.config);
  if (common.scale) uar::apply_scale(config, uar::parse_scale(*common.scale));
  if (common.seed) config.seed = *common.seed;
  if (common.out_dir) config.out_dir = *common.out_dir;
  if (common.jobs) config.jobs = *common.jobs;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unstable AR(p) M-estimation under heavy-tailed innovations: simulation, limit laws, bootstrap"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags common;
  app.add_option("--config", common.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "master seed");
  app.add_option("--out-dir", common.out_dir, "output directory");
  app.add_option("--jobs", common.jobs, "worker threads (0 = all cores)");
  app.add_option("--replicates", common.replicates,
                 "Monte Carlo replicates (mc-table), outer replicates (boot-coverage), draws (limit-sample), "
                 "paths (paths)");
  app.add_option("--scale", common.scale, "replicate preset")->check(CLI::IsMember({"desk", "paper"}));

  SubFlags f;
  auto* paths = app.add_subcommand("paths", "sample paths of the model, one file per path");
  paths->add_option("--n", f.n, "sample size");
  paths->add_option("--alpha", f.alpha, "tail index");
  paths->add_option("--count", f.count, "number of paths");

  auto* mc = app.add_subcommand("mc-table", "median and 90% IPR of |phi_hat - phi| over an (n, alpha, estimator) grid");
  mc->add_option("--n", f.n_list, "sample sizes");
  mc->add_option("--alpha", f.alpha_list, "tail indices");
  mc->add_option("--estimators", f.estimators, "estimators, e.g. M:5 LS");

  auto* lim = app.add_subcommand("limit-sample", "draws from a limiting law of the normalized estimate");
  lim->add_option("--case", f.limit_case, "i, ii, iii, iv, plus:r, minus:s or complex:theta:d");
  lim->add_option("--alpha", f.alpha, "tail index");
  lim->add_option("--draws", f.draws, "number of draws");
  lim->add_option("--mesh", f.mesh, "time steps of the discretized integrals");
  lim->add_option("--truncation", f.truncation, "LePage terms kept");
  lim->add_option("--theta", f.theta, "angle for case i");
  lim->add_option("--loss", f.loss, "huber:c, smooth-huber:c or quadratic");

  auto* boot = app.add_subcommand("boot-coverage", "coverage of the naive m-out-of-n bootstrap interval");
  boot->add_option("--n", f.n_list, "sample sizes");
  boot->add_option("--alpha", f.alpha_list, "tail indices");
  boot->add_option("--m-rule", f.m_rules, "resample rules: n/loglog, n^0.9, n^0.95");
  boot->add_option("--B", f.boot_b, "bootstrap replicates per interval");
  boot->add_option("--outer", f.outer, "outer replicates (same as --replicates)");

  auto* est = app.add_subcommand("estimate", "fit one series (CSV with t,x columns, or a simulated one)");
  est->add_option("--input", f.input, "series file")->check(CLI::ExistingFile);
  est->add_option("--order", f.order, "AR order (default: model order)");
  est->add_option("--loss", f.loss, "huber:c, smooth-huber:c or LS");
  est->add_option("--n", f.n, "sample size when simulating");
  est->add_option("--alpha", f.alpha, "tail index when simulating");

  auto* sim = app.add_subcommand("simulate", "emit one series with its innovations");
  sim->add_option("--n", f.n, "sample size");
  sim->add_option("--alpha", f.alpha, "tail index");

  CLI11_PARSE(app, argc, argv);

  try {
    uar::ExperimentConfig config = build_config(common);
    std::vector<std::filesystem::path> written;
    if (paths->parsed()) {
      if (f.n) config.paths.n = *f.n;
      if (f.alpha) config.paths.alpha = *f.alpha;
      if (f.count) config.paths.count = *f.count;
      if (common.replicates) config.paths.count = *common.replicates;
      written = uar::cmd_paths(config);
    } else if (mc->parsed()) {
      if (!f.n_list.empty()) config.n_list = f.n_list;
      if (!f.alpha_list.empty()) config.alpha_list = f.alpha_list;
      if (!f.estimators.empty()) config.estimators = f.estimators;
      if (common.replicates) config.replicates = *common.replicates;
      written.push_back(uar::cmd_mc_table(config));
      written.push_back(config.out_dir / "mc_failures.csv");
    } else if (lim->parsed()) {
      if (f.limit_case) config.limit.kind = *f.limit_case;
      if (f.alpha) config.limit.alpha = *f.alpha;
      if (f.draws) config.limit.draws = *f.draws;
      if (common.replicates) config.limit.draws = *common.replicates;
      if (f.mesh) config.limit.mesh = *f.mesh;
      if (f.truncation) config.limit.truncation = *f.truncation;
      if (f.theta) config.limit.theta = *f.theta;
      if (f.loss) config.limit.loss = *f.loss;
      written.push_back(uar::cmd_limit_sample(config));
    } else if (boot->parsed()) {
      if (!f.n_list.empty()) config.boot.n_list = f.n_list;
      if (!f.alpha_list.empty()) config.boot.alpha_list = f.alpha_list;
      if (!f.m_rules.empty()) config.boot.m_rules = f.m_rules;
      if (f.boot_b) config.boot.replicates = *f.boot_b;
      if (common.replicates) config.boot.outer = *common.replicates;
      if (f.outer) config.boot.outer = *f.outer;
      written.push_back(uar::cmd_boot_coverage(config));
    } else if (est->parsed()) {
      if (f.input) config.single.input = *f.input;
      if (f.order) config.single.order = *f.order;
      if (f.loss) config.single.loss = *f.loss;
      if (f.n) config.single.n = *f.n;
      if (f.alpha) config.single.alpha = *f.alpha;
      uar::EstimationResult fit;
      written.push_back(uar::cmd_estimate(config, &fit));
      std::cout << fit.to_text();
      if (!fit.converged) {
        std::cerr << "error: solver did not converge: " << fit.diagnostic << '\n';
        return 2;
      }
    } else if (sim->parsed()) {
      if (f.n) config.single.n = *f.n;
      if (f.alpha) config.single.alpha = *f.alpha;
      written.push_back(uar::cmd_simulate(config));
    }
    for (const auto& path : written) std::cout << "wrote " << path.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
