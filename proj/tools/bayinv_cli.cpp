#include "bayinv/errors.hpp"
#include "bayinv/experiment.hpp"
#include "bayinv/report.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

int report_error(const bayinv::Error& e)
{
  std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
  return static_cast<int>(e.exit_code());
}

int run_command(const std::optional<std::string>& preset, const std::optional<std::string>& config_path,
                const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out)
{
  bayinv::ExperimentConfig config;
  try {
    if (preset.has_value() == config_path.has_value())
      throw bayinv::ConfigError("run needs exactly one of --preset and --config");
    config = preset ? bayinv::find_preset(*preset).config : bayinv::load_config(*config_path);
    if (seed) {
      config.seed = *seed;
      config.bo.seed = *seed;
      config.mcmc.sampler.seed = *seed;
    }
    config.validate();
  } catch (const bayinv::Error& e) {
    // nothing is written for a configuration that does not load
    return report_error(e);
  }

  const std::filesystem::path dir = bayinv::resolve_output_dir(config, out);
  const int code = bayinv::run_experiment_to(config, dir);
  if (code == 0)
    std::cout << "wrote " << dir.string() << "\n";
  else
    std::cerr << "run failed with exit code " << code << "; see "
              << (dir / "manifest.json").string() << "\n";
  return code;
}

int list_presets_command()
{
  for (const auto& p : bayinv::presets())
    std::cout << p.name << "\t" << p.description << "\n";
  return 0;
}

int compare_command(const std::string& benchmark, std::size_t samples, std::uint64_t seed,
                    const std::optional<std::string>& out)
{
  try {
    const auto& base = bayinv::find_preset("surrogate-comparison").config;
    const auto rows = bayinv::compare_surrogates(benchmark, samples, base.bo,
                                                 base.comparison.length_scale, seed);
    const std::string csv = bayinv::comparison_csv(rows);
    if (out) {
      std::filesystem::create_directories(*out);
      std::ofstream(std::filesystem::path(*out) / "comparison.csv", std::ios::binary) << csv;
    }
    std::cout << csv;
    return 0;
  } catch (const bayinv::Error& e) {
    return report_error(e);
  }
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Bayesian inversion with GP surrogates built by Bayesian optimization"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a preset or a config file and write artifacts");
  std::optional<std::string> preset, config_path, out;
  std::optional<std::uint64_t> seed;
  run->add_option("--preset", preset, "Preset name (see list-presets)");
  run->add_option("--config", config_path, "Config file with key = value lines")
    ->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out, "Output directory (else BAYINV_OUT_DIR, config, results/<name>)");

  auto* list = app.add_subcommand("list-presets", "List presets with the figures they reproduce");

  auto* compare = app.add_subcommand("compare-surrogates",
                                     "GP against deterministic baselines on one 1D benchmark");
  std::string benchmark;
  std::size_t samples = 14;
  std::uint64_t compare_seed = 0;
  std::optional<std::string> compare_out;
  compare->add_option("--benchmark", benchmark, "Benchmark name")->required();
  compare->add_option("--samples", samples, "Shared sample count")->check(CLI::Range(2, 1000));
  compare->add_option("--seed", compare_seed, "Seed");
  compare->add_option("--out", compare_out, "Also write comparison.csv here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(bayinv::ExitCode::config_error);
  }

  try {
    if (*run)
      return run_command(preset, config_path, seed, out);
    if (*list)
      return list_presets_command();
    return compare_command(benchmark, samples, compare_seed, compare_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(bayinv::ExitCode::numerical_failure);
  }
}
