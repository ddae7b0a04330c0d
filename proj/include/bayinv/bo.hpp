#pragma once

#include "bayinv/benchmarks.hpp"
#include "bayinv/exec.hpp"
#include "bayinv/gp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bayinv {

enum class AcquisitionFamily
{
  ei,
  ucb
};

std::string to_string(AcquisitionFamily family);
AcquisitionFamily parse_acquisition_family(const std::string& name);

struct AcquisitionSpec
{
  AcquisitionFamily family = AcquisitionFamily::ucb;
  /// Exploration weight for UCB.
  double kappa = 200.0;
  /// EI incumbent; when empty the best observed training output is used.
  std::optional<double> incumbent;

  void validate() const;
};

/// Closed-form expected improvement over `best` for a Gaussian N(mu, sigma^2).
/// With sigma == 0 this is max(mu - best, 0).
double expected_improvement(double mu, double sigma, double best);

double upper_confidence_bound(double mu, double sigma, double kappa);

/// Acquisition score at x. Throws DomainError outside the model's bounds.
double acquisition_value(const GpModel& model, const AcquisitionSpec& spec, const Vector& x);

struct AcquisitionOptions
{
  std::size_t local_starts = 64;
  std::size_t probe_points_1d = 1024;
  std::size_t probe_side_2d = 64;
  /// Pending-point exclusion radius, as a fraction of each domain width.
  double exclusion_fraction = 0.01;
  /// Local ascent runs on the box shrunk by this fraction of each width so
  /// acquired points stay strictly inside the bounds.
  double boundary_inset = 1e-4;
  Exec exec = Exec::parallel;
};

/// Greedy batch maximization of the acquisition. After each pick the
/// predictive standard deviation is set to zero within the exclusion radius
/// of every picked point and the landscape is maximized again.
std::vector<Vector> acquire_batch(const GpModel& model, const AcquisitionSpec& spec,
                                  const Box& bounds, std::size_t n_acq, std::uint64_t seed,
                                  const AcquisitionOptions& options = {});

/// n_val points drawn uniformly in hf's box from the given seed.
std::vector<Vector> validation_points(const HighFidelityModel& hf, std::size_t n_val,
                                      std::uint64_t seed);

/// Mean squared error between the surrogate mean and the exact model over
/// seeded uniform validation points.
double validation_mse(const GpModel& model, const HighFidelityModel& hf, std::size_t n_val,
                      std::uint64_t seed, Exec exec = Exec::parallel);

/// Same, on explicit points.
double validation_mse(const GpModel& model, const HighFidelityModel& hf,
                      const std::vector<Vector>& points, Exec exec = Exec::parallel);

struct BoConfig
{
  std::size_t n_init = 5;
  /// Points acquired per iteration.
  std::size_t n_acq = 1;
  /// Total high-fidelity evaluation budget, initial design included.
  std::size_t max_evaluations = 25;
  double mse_threshold = 1e-3;
  std::size_t n_val = 1000;
  KernelFamily kernel = KernelFamily::matern52;
  double noise_variance = 1e-6;
  AcquisitionSpec acquisition;
  std::size_t hyper_restarts = 8;
  std::optional<double> fixed_length_scale;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BoIteration
{
  std::size_t iteration = 0;
  std::size_t n_samples = 0;
  std::vector<Vector> acquired;
  double mse = 0.0;
  KernelSpec kernel;
  double jitter = 0.0;
  double log_marginal_likelihood = 0.0;
};

struct BoTrace
{
  std::vector<BoIteration> iterations;
  Dataset data;
  std::optional<GpModel> model;
  std::vector<Vector> validation_points;
  bool converged = false;
  /// The evaluation budget ran out before the threshold was met.
  bool budget_exhausted = false;

  const GpModel& final_model() const;
  double final_mse() const;
};

/// Fit, acquire, evaluate, update, validate until the MSE drops below the
/// threshold or the budget is spent.
BoTrace run_bo(const HighFidelityModel& hf, const BoConfig& config);

/// Hyperparameter refit used by run_bo, exposed for reuse on fixed datasets.
GpModel fit_surrogate(const Dataset& data, const BoConfig& config, std::uint64_t seed);

} // namespace bayinv
