#pragma once

#include "bayinv/exec.hpp"
#include "bayinv/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bayinv {

enum class KernelFamily
{
  rbf,
  matern52
};

std::string to_string(KernelFamily family);
/// Accepts "rbf" and "matern52"; anything else raises ConfigError.
KernelFamily parse_kernel_family(const std::string& name);

/// Isotropic stationary covariance. Matern52 uses the closed form of the
/// nu = 5/2 member of the Matern family.
struct KernelSpec
{
  KernelFamily family = KernelFamily::matern52;
  double length_scale = 1.0;
  double signal_variance = 1.0;

  /// 5/2 for Matern52, +infinity for RBF (its smooth limit).
  double smoothness() const;
  /// Throws ConfigError unless length_scale > 0 and signal_variance > 0.
  void validate() const;
};

/// k(x, x2) for the given spec. Throws ShapeError on dimension mismatch.
double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& x2);

struct Prediction
{
  double mean = 0.0;
  /// Latent-function variance, clamped to [0, signal_variance + noise].
  double variance = 0.0;

  double stddev() const;
};

/// Zero-mean GP conditioned on a dataset. Immutable after construction; all
/// queries are const and safe to call concurrently.
class GpModel
{
public:
  GpModel(Dataset data, KernelSpec spec, double noise_variance);

  const KernelSpec& kernel() const { return spec_; }
  double noise_variance() const { return noise_; }
  /// Extra diagonal actually added to make the factorization succeed.
  double jitter() const { return jitter_; }
  const Dataset& training_data() const { return data_; }
  const Box& bounds() const { return data_.bounds; }
  std::size_t dim() const { return data_.dim(); }

  /// Lower Cholesky factor L with L L^T = K + (noise + jitter) I.
  const Matrix& factor() const { return chol_; }
  /// (K + (noise + jitter) I)^{-1} y.
  const Vector& weights() const { return alpha_; }

  Prediction predict(const Vector& x) const;
  double predict_mean(const Vector& x) const;

  /// log p(y | X, theta) from the stored factorization.
  double log_marginal_likelihood() const;

private:
  Dataset data_;
  KernelSpec spec_;
  double noise_;
  double jitter_ = 0.0;
  Matrix inputs_;
  Matrix chol_;
  Vector alpha_;
};

/// Exact GP conditioning. Jitter escalates 1e-10, 1e-9, ..., 1e-4 only when
/// the plain factorization fails.
GpModel gp_fit(const Dataset& data, const KernelSpec& spec, double noise_variance);

Prediction gp_predict(const GpModel& model, const Vector& x);

/// Predictions at many points; element i always corresponds to points[i].
std::vector<Prediction> gp_predict_batch(const GpModel& model, const std::vector<Vector>& points,
                                         Exec exec = Exec::parallel);
std::vector<double> gp_predict_mean_batch(const GpModel& model, const std::vector<Vector>& points,
                                          Exec exec = Exec::parallel);

double log_marginal_likelihood(const GpModel& model);

/// Gram matrix K(X, X) without noise.
Matrix gram_matrix(const KernelSpec& spec, const Dataset& data);

struct HyperparameterSearch
{
  std::size_t restarts = 8;
  std::uint64_t seed = 0;
  /// When set, the length scale is held at this value and only the signal
  /// variance is searched.
  std::optional<double> fixed_length_scale;
  int max_evaluations_per_restart = 300;
};

/// Bounds of the (log length scale, log signal variance) search box.
struct HyperparameterBounds
{
  Interval length_scale;
  Interval signal_variance;
};

/// length_scale in [1e-2 w, 10 w] with w the widest domain side; signal
/// variance in [1e-6, 1e3 var(y) + 1e-6].
HyperparameterBounds hyperparameter_bounds(const Dataset& data);

/// Multistart bounded Nelder-Mead on the log-marginal likelihood in log space.
/// Restarts are independent streams of the seed and the reduction keeps the
/// highest likelihood, ties going to the lowest restart index.
GpModel gp_optimize_hyperparameters(const Dataset& data, KernelFamily family,
                                    double noise_variance, const HyperparameterSearch& search);

} // namespace bayinv
