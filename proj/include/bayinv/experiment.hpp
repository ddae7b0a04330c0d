#pragma once

#include "bayinv/baselines.hpp"
#include "bayinv/bo.hpp"
#include "bayinv/inversion.hpp"
#include "bayinv/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bayinv {

struct InversionSettings
{
  bool enabled = true;
  /// Exactly one of observed / observed_at is set; observed_at derives the
  /// observation from the exact benchmark at that point.
  std::optional<double> observed;
  std::optional<Vector> observed_at;
  double obs_variance = 0.01;
  double threshold = 0.95;
  std::size_t n_starts = 16;
  int max_iter = 400;
  std::size_t grid_resolution = 2001;
  double credible_level = 0.95;
  /// Gaussian prior when set, uniform over the bounds otherwise.
  std::optional<GaussianPrior> prior;
};

struct McmcSettings
{
  bool enabled = false;
  McmcConfig sampler;
  std::size_t kde_points = 1001;
  std::size_t grid_resolution = 2001;
};

struct ComparisonSettings
{
  bool enabled = false;
  std::vector<std::string> benchmarks;
  std::size_t samples = 14;
  /// Length scale shared by both GP families; the signal variance is fitted.
  std::optional<double> length_scale = 1.0;
};

struct ExperimentConfig
{
  std::string name = "custom";
  std::string description;
  std::string benchmark = "mixed1d";
  std::uint64_t seed = 0;
  std::string output_dir;
  BoConfig bo;
  InversionSettings inversion;
  McmcSettings mcmc;
  ComparisonSettings comparison;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment; keys use dotted
/// sections (bo.kappa, inversion.observed, ...). Unknown, duplicate or
/// malformed entries raise ConfigError with the line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& config);

/// Every key with its canonical value, for the manifest.
std::map<std::string, std::string> config_entries(const ExperimentConfig& config);

struct Preset
{
  std::string name;
  std::string description;
  ExperimentConfig config;
};

const std::vector<Preset>& presets();
/// Unknown names raise ConfigError.
const Preset& find_preset(const std::string& name);

struct ComparisonRow
{
  std::string benchmark;
  std::string family;
  std::size_t n_samples = 0;
  double mse = 0.0;
};

/// Appendix-style surrogate comparison on one benchmark: a BO run collects
/// `samples` points, GP families (Matern 5/2, RBF) and the deterministic
/// baselines are fitted to that same point set, and each is scored by MSE on
/// n_val seeded validation points.
std::vector<ComparisonRow> compare_surrogates(const std::string& benchmark, std::size_t samples,
                                              const BoConfig& bo,
                                              std::optional<double> length_scale,
                                              std::uint64_t seed);

/// Everything an experiment produces, held in memory until written.
struct ExperimentResult
{
  ExperimentConfig config;
  std::map<std::string, double> derived;
  std::map<std::string, std::uint64_t> seeds;
  std::optional<BoTrace> trace;
  std::optional<InverseProblem> problem;
  std::optional<PosteriorSummary> posterior;
  std::optional<ProfileGrid> profiles;
  std::vector<ChainResult> chains;
  std::vector<double> kde_grid;
  std::vector<std::vector<double>> kdes;
  std::optional<GridPosterior> grid;
  std::vector<ComparisonRow> comparison;
};

/// Runs the configured pipeline in memory. Library errors propagate.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes every artifact of a finished run into dir (created if needed) and
/// returns the list of relative file names written.
std::vector<std::string> write_artifacts(const ExperimentResult& result,
                                         const std::filesystem::path& dir);

/// Run plus write. On a library error only manifest.json is written, holding
/// the configuration and a structured error report; the return value is the
/// process exit code.
int run_experiment_to(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Output directory precedence: explicit argument, then the BAYINV_OUT_DIR
/// environment variable, then config.output_dir, then results/<name>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::optional<std::string>& explicit_dir);

} // namespace bayinv
