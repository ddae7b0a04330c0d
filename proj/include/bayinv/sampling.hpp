#pragma once

#include "bayinv/exec.hpp"
#include "bayinv/inversion.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace bayinv {

struct McmcConfig
{
  std::size_t n_chains = 10;
  std::size_t n_steps = 20000;
  std::size_t burn_in = 2000;
  /// Proposal standard deviation as a fraction of each domain width.
  double proposal_scale = 0.1;
  /// Keep every thin-th post-burn-in state.
  std::size_t thin = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ChainResult
{
  std::size_t chain_index = 0;
  Vector initial_state;
  /// Kept post-burn-in states, in step order.
  std::vector<Vector> samples;
  /// Step number of each kept state and whether that step's proposal was accepted.
  std::vector<std::size_t> steps;
  std::vector<bool> accepted;
  /// Tally over every post-burn-in step, kept or thinned away.
  std::size_t n_proposed = 0;
  std::size_t n_accepted = 0;
  double acceptance_rate = 0.0;
};

/// Random-walk Metropolis on NLS(x) 1[x in bounds] (times the Gaussian prior
/// when one is set). Each chain starts at a uniform point with nonzero
/// density and draws from its own stream of the seed, so chain i's result
/// does not depend on the other chains.
std::vector<ChainResult> run_mcmc(const InverseProblem& problem, const McmcConfig& config,
                                  Exec exec = Exec::parallel);

/// One chain; run_mcmc is this applied to indices 0..n_chains-1.
ChainResult run_chain(const InverseProblem& problem, const McmcConfig& config,
                      std::size_t chain_index);

/// 1.06 std n^(-1/5), with the n-1 sample standard deviation. Throws
/// DegenerateDataError when all samples coincide.
double silverman_bandwidth(const std::vector<double>& samples);

/// Gaussian kernel density estimate on `grid`. With no bandwidth the
/// Silverman rule is used.
std::vector<double> kde_estimate(const std::vector<double>& samples,
                                 std::optional<double> bandwidth,
                                 const std::vector<double>& grid, Exec exec = Exec::parallel);

struct GridPosterior
{
  std::size_t resolution = 0;
  std::vector<Vector> points;
  /// Normalized so the trapezoidal integral over the grid is 1.
  std::vector<double> density;
  /// Grid indices of strict local maxima above 5% of the peak, highest first.
  std::vector<std::size_t> modes;
};

/// Trapezoidal weights of an inclusive tensor grid (first coordinate slowest).
std::vector<double> trapezoid_weights(const Box& box, std::size_t resolution);

GridPosterior grid_posterior(const InverseProblem& problem, std::size_t resolution,
                             Exec exec = Exec::parallel);

} // namespace bayinv
