#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uar/ar_model.hpp"
#include "uar/asymptotics.hpp"
#include "uar/bootstrap.hpp"
#include "uar/estimation.hpp"
#include "uar/stable.hpp"

namespace uar {

enum class Scale { Desk, Paper };
Scale parse_scale(const std::string& text);

/// Settings shared by all subcommands. Sections of the INI file map onto the
/// nested structs; see README for the key list.
struct ExperimentConfig {
  // [model]: explicit phi wins over the root structure
  RootSpec roots{0, 0, {{0.7853981633974483, 1}}};
  std::vector<double> phi;
  // [innovations]
  InnovationFamily family = InnovationFamily::ExactSaS;
  double scale = 1.0;
  // [experiment]
  std::vector<std::size_t> n_list{10, 50};
  std::vector<double> alpha_list{0.5, 1.3, 2.0};
  std::size_t replicates = 2000;
  std::vector<std::string> estimators{"M:5", "LS"};
  std::size_t coefficient = 1;  ///< 1-based index of the reported coefficient
  std::uint64_t seed = 20240611;
  std::size_t jobs = 1;
  std::filesystem::path out_dir = "out";

  struct Paths {
    std::size_t count = 4;
    std::size_t n = 500;
    double alpha = 1.3;
  } paths;

  struct Limit {
    std::string kind = "i";  ///< i, ii, iii, iv, or plus:r / minus:s / complex:theta:d
    double alpha = 2.0;
    double theta = 0.7853981633974483;
    std::size_t draws = 1000;
    std::size_t mesh = 1000;
    std::size_t truncation = kDefaultTruncation;
    std::string loss = "huber:5";
  } limit;

  struct Boot {
    std::vector<std::size_t> n_list{50, 100};
    std::vector<double> alpha_list{1.3, 1.7};
    std::vector<std::string> m_rules{"n/loglog", "n^0.9", "n^0.95"};
    std::size_t replicates = 500;  ///< B
    std::size_t outer = 500;
    double level = 0.95;
    std::string loss = "huber:5";
  } boot;

  struct Single {
    std::size_t n = 200;
    double alpha = 1.3;
    std::string loss = "huber:5";
    std::optional<std::filesystem::path> input;
    std::size_t order = 0;  ///< 0 = model order
  } single;

  /// X_t = 2 cos(theta) X_{t-1} - X_{t-2} + e_t with theta = pi/4 unless configured otherwise.
  ARModel model() const;
  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Flat key-value text with [sections]; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Replicate counts: desk = 2000 / B 500 / outer 500, paper = 10^4 / 3000 / 10^4.
void apply_scale(ExperimentConfig& config, Scale scale);

/// Per-cell stream derived from (seed, n, alpha, label); independent of scheduling.
RandomStream cell_stream(std::uint64_t seed, std::size_t n, double alpha, const std::string& label);

/// n - p shocks after p zeros, X_1..X_n.
TimeSeries simulate_sample(const ARModel& model, const InnovationSpec& spec, std::size_t n,
                           RandomStream& rng);

InnovationSpec innovation_spec(const ExperimentConfig& config, double alpha);

// ---- paths -------------------------------------------------------------------

/// Writes count files path_<k>.csv ("t,x" for t = 0..n); returns their paths.
std::vector<std::filesystem::path> cmd_paths(const ExperimentConfig& config);

// ---- mc-table -----------------------------------------------------------------

struct SummaryRow {
  std::size_t n = 0;
  double alpha = 0.0;
  std::string estimator;
  double median = 0.0;  ///< median of |phi_hat_k - phi_k|
  double ipr90 = 0.0;
  std::size_t replicates = 0;
  std::size_t failures = 0;
};

struct FailureRecord {
  std::size_t n = 0;
  double alpha = 0.0;
  std::string estimator;
  std::size_t replicate = 0;
  std::string diagnostic;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
  std::vector<FailureRecord> failures;
  /// Absolute errors of every kept replicate, aligned with rows.
  std::vector<std::vector<double>> errors;

  std::string to_csv() const;
  std::string failures_csv() const;
};

/// Estimator labels: "M:c" / "M" (Huber, c = 5), any parse_loss() text, or "LS"
/// (returns nullopt). Throws std::invalid_argument for unknown labels.
std::optional<LossFunction> estimator_loss(const std::string& estimator);
EstimationResult fit_with(const std::string& estimator, const TimeSeries& series, std::size_t p);

SummaryTable mc_table(const ExperimentConfig& config);
/// Writes mc_table.csv and mc_failures.csv.
std::filesystem::path cmd_mc_table(const ExperimentConfig& config);

// ---- limit-sample -------------------------------------------------------------

struct LimitDraw {
  std::vector<LimitLawSample> blocks;
};

/// Case labels: i (complex theta, d = 1), ii (root +1 twice), iii (root -1 twice),
/// iv (roots +1 and -1); or plus:r, minus:s, complex:theta:d.
std::vector<LimitDraw> limit_draws(const ExperimentConfig& config);
/// "draw,block,component,value" rows.
std::string limit_draws_csv(const std::vector<LimitDraw>& draws);
std::filesystem::path cmd_limit_sample(const ExperimentConfig& config);

// ---- boot-coverage ------------------------------------------------------------

struct CoverageRow {
  std::size_t n = 0;
  double alpha = 0.0;
  std::string m_rule;
  CoverageResult result;
};

std::vector<CoverageRow> boot_coverage(const ExperimentConfig& config);
std::string coverage_csv(const std::vector<CoverageRow>& rows);
std::filesystem::path cmd_boot_coverage(const ExperimentConfig& config);

// ---- estimate / simulate ------------------------------------------------------

/// Fits config.single.input (or a simulated series) and writes estimate.csv.
std::filesystem::path cmd_estimate(const ExperimentConfig& config, EstimationResult* result = nullptr);
/// Writes series.csv ("t,x,eps").
std::filesystem::path cmd_simulate(const ExperimentConfig& config);

/// Writes text to a file, creating parent directories; errors name the path.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace uar
