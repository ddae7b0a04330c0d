#pragma once

#include "bayinv/exec.hpp"
#include "bayinv/gp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bayinv {

struct GaussianPrior
{
  Vector mean;
  Matrix covariance;
};

/// Scalar inverse problem: find x in bounds with forward(x) close to the
/// observed value, under Gaussian observation noise of variance obs_variance.
struct InverseProblem
{
  std::function<double(const Vector&)> forward;
  double observed = 0.0;
  double obs_variance = 1.0;
  Box bounds;
  /// Uniform prior over bounds when empty.
  std::optional<GaussianPrior> prior;

  /// The forward map is the surrogate's predictive mean; the problem keeps
  /// its own shared copy of the model.
  static InverseProblem from_surrogate(const GpModel& model, double observed,
                                       double obs_variance);

  /// Throws ConfigError on a non-positive variance, a missing forward map or
  /// a prior whose covariance is not symmetric positive definite.
  void validate() const;
};

/// (observed - forward(x))^2. Throws DomainError outside the bounds.
double ls_functional(const InverseProblem& problem, const Vector& x);

/// exp(-LS(x) / (2 obs_variance)).
double nls_profile(const InverseProblem& problem, const Vector& x);

/// LS and NLS evaluated on an inclusive tensor grid of `resolution` points
/// per dimension (first coordinate slowest).
struct ProfileGrid
{
  std::size_t resolution = 0;
  std::vector<Vector> points;
  std::vector<double> ls;
  std::vector<double> nls;
  /// NLS divided by its grid maximum, computed in log space.
  std::vector<double> nls_normalized;
};

ProfileGrid profile_grid(const InverseProblem& problem, std::size_t resolution,
                         Exec exec = Exec::parallel);

struct MapCluster
{
  Vector x;
  double ls_residual = 0.0;
  /// Minimized objective: LS for a uniform prior, the regularized negative
  /// log-posterior for a Gaussian prior.
  double objective = 0.0;
  /// Number of converged starts merged into this cluster.
  std::size_t members = 0;
  bool on_bound = false;
  /// Infinity norm of the central-difference LS gradient at x.
  double gradient_norm = 0.0;
};

struct LaplaceResult
{
  bool valid = false;
  /// Why no intervals were produced when valid is false.
  std::string diagnostic;
  Matrix hessian;
  Matrix covariance;
  double level = 0.95;
  std::vector<Interval> intervals;
  /// Set when other comparable modes exist, so the intervals only describe
  /// the neighbourhood of this one.
  bool local_only = false;
};

struct StartDiagnostic
{
  Vector start;
  Vector end;
  double value = 0.0;
  bool converged = false;
  std::string status;
};

struct PosteriorSummary
{
  std::vector<MapCluster> map_clusters;
  bool multimodal = false;
  std::optional<LaplaceResult> laplace;
  double hp_threshold = 0.0;
  std::vector<Box> hp_regions;
  std::vector<StartDiagnostic> starts;
};

struct MultistartOptions
{
  std::size_t n_starts = 16;
  int max_iter = 400;
  std::uint64_t seed = 0;
  /// Endpoints closer than this fraction of each width are merge candidates.
  double merge_fraction = 0.01;
  /// Residual ratio allowed inside one cluster.
  double merge_ratio = 2.0;
  /// Clusters within this ratio of the best residual count as competing modes.
  double multimodal_ratio = 10.0;
  /// Explicit starting points. When nonempty they replace the n_starts seeded
  /// uniform starts.
  std::vector<Vector> starts;
  Exec exec = Exec::parallel;
};

/// Residuals below this value are treated as equal when clustering and
/// ranking: (1e-4 max(1, |observed|))^2.
double residual_floor(const InverseProblem& problem);

/// Multistart bounded quasi-Newton minimization of LS from seeded uniform
/// starts, followed by clustering of converged endpoints. Clusters are sorted
/// by floored residual, then by member count (larger first), then by
/// coordinates.
PosteriorSummary map_multistart(const InverseProblem& problem, const MultistartOptions& options);

/// Same protocol on (1 / 2 obs_variance) LS + 1/2 (x - m)^T G^{-1} (x - m).
/// Requires a Gaussian prior.
PosteriorSummary map_gaussian_prior(const InverseProblem& problem,
                                    const MultistartOptions& options);

/// Gaussian approximation at x_map from a central-difference Hessian of the
/// negative log-posterior (step 1e-4 of each width). Returns valid == false
/// with a diagnostic when x_map is not stationary, too close to a bound for
/// the stencil, or the Hessian is not positive definite.
LaplaceResult laplace_approximation(const InverseProblem& problem, const Vector& x_map,
                                    double level = 0.95);

/// Connected sets of grid points whose normalized NLS is at least threshold.
/// 1D: maximal runs, returned as intervals. 2D: 4-connected components,
/// returned as bounding boxes.
std::vector<Box> high_probability_region(const InverseProblem& problem, double threshold,
                                         std::size_t grid_resolution,
                                         Exec exec = Exec::parallel);

/// Region extraction from an already computed grid.
std::vector<Box> high_probability_region(const ProfileGrid& grid, double threshold);

} // namespace bayinv
