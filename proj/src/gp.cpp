#include "bayinv/gp.hpp"

#include "bayinv/errors.hpp"
#include "bayinv/exec.hpp"
#include "bayinv/optimize.hpp"
#include "bayinv/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace bayinv {

std::string to_string(KernelFamily family)
{
  return family == KernelFamily::rbf ? "rbf" : "matern52";
}

KernelFamily parse_kernel_family(const std::string& name)
{
  if (name == "rbf")
    return KernelFamily::rbf;
  if (name == "matern52")
    return KernelFamily::matern52;
  throw ConfigError("unknown kernel family '" + name + "' (expected rbf or matern52)");
}

double KernelSpec::smoothness() const
{
  return family == KernelFamily::matern52 ? 2.5 : std::numeric_limits<double>::infinity();
}

void KernelSpec::validate() const
{
  if (!(length_scale > 0.0) || !std::isfinite(length_scale))
    throw ConfigError("kernel length scale must be positive and finite");
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
    throw ConfigError("kernel signal variance must be positive and finite");
}

namespace {

double kernel_from_sq_distance(const KernelSpec& spec, double r2)
{
  const double l = spec.length_scale;
  if (spec.family == KernelFamily::rbf)
    return spec.signal_variance * std::exp(-0.5 * r2 / (l * l));
  const double t = std::sqrt(5.0 * r2) / l;
  return spec.signal_variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
}

template <class A, class B>
double sq_distance(const A& a, const B& b)
{
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

} // namespace

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& x2)
{
  if (x.size() != x2.size())
    throw ShapeError("kernel arguments have dimensions " + std::to_string(x.size()) + " and " +
                     std::to_string(x2.size()));
  return kernel_from_sq_distance(spec, sq_distance(x, x2));
}

double Prediction::stddev() const
{
  return std::sqrt(variance);
}

Matrix gram_matrix(const KernelSpec& spec, const Dataset& data)
{
  const auto n = static_cast<Eigen::Index>(data.size());
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = spec.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel_from_sq_distance(
        spec, sq_distance(data.inputs[static_cast<std::size_t>(i)],
                          data.inputs[static_cast<std::size_t>(j)]));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

GpModel::GpModel(Dataset data, KernelSpec spec, double noise_variance)
  : data_(std::move(data)), spec_(spec), noise_(noise_variance)
{
  spec_.validate();
  if (!(noise_ >= 0.0) || !std::isfinite(noise_))
    throw ConfigError("noise variance must be nonnegative and finite");
  if (data_.empty())
    throw DegenerateDataError("GP fit needs at least one training point");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (static_cast<std::size_t>(data_.inputs[i].size()) != data_.dim())
      throw ShapeError("training input " + std::to_string(i) + " has wrong dimension");
    if (!std::isfinite(data_.outputs[i]))
      throw DegenerateDataError("training output " + std::to_string(i) + " is not finite");
  }
  if (noise_ == 0.0) {
    for (std::size_t i = 0; i < data_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (std::sqrt(sq_distance(data_.inputs[i], data_.inputs[j])) <= 1e-12)
          throw DegenerateDataError("training inputs " + std::to_string(j) + " and " +
                                    std::to_string(i) + " coincide with zero noise");
  }

  inputs_ = data_.input_matrix();
  const Matrix k = gram_matrix(spec_, data_);
  const auto n = k.rows();

  auto attempt = [&](double jitter) {
    Matrix a = k;
    a.diagonal().array() += noise_ + jitter;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success)
      return false;
    Matrix l = llt.matrixL();
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i)))
        return false;
    chol_ = std::move(l);
    jitter_ = jitter;
    return true;
  };

  bool ok = attempt(0.0);
  for (double jitter = 1e-10; !ok && jitter <= 1e-4 * (1.0 + 1e-9); jitter *= 10.0)
    ok = attempt(jitter);
  if (!ok) {
    Matrix a = k;
    a.diagonal().array() += noise_;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    std::ostringstream msg;
    msg << "covariance factorization failed up to jitter 1e-4 (condition estimate "
        << (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()) << ")";
    throw NumericalError(msg.str());
  }

  alpha_ = chol_.triangularView<Eigen::Lower>().solve(data_.output_vector());
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

Prediction GpModel::predict(const Vector& x) const
{
  if (static_cast<std::size_t>(x.size()) != dim())
    throw ShapeError("query has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(dim()));
  const auto n = inputs_.rows();
  Vector ks(n);
  for (Eigen::Index i = 0; i < n; ++i)
    ks[i] = kernel_from_sq_distance(spec_, sq_distance(inputs_.row(i), x));

  Prediction p;
  // same summation order as predict_mean so both paths agree bit for bit
  for (Eigen::Index i = 0; i < n; ++i)
    p.mean += ks[i] * alpha_[i];
  const Vector v = chol_.triangularView<Eigen::Lower>().solve(ks);
  const double var = spec_.signal_variance - v.squaredNorm();
  p.variance = std::clamp(var, 0.0, spec_.signal_variance + noise_);
  return p;
}

double GpModel::predict_mean(const Vector& x) const
{
  if (static_cast<std::size_t>(x.size()) != dim())
    throw ShapeError("query has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(dim()));
  double m = 0.0;
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i)
    m += kernel_from_sq_distance(spec_, sq_distance(inputs_.row(i), x)) * alpha_[i];
  return m;
}

double GpModel::log_marginal_likelihood() const
{
  const auto n = static_cast<double>(data_.size());
  const double quad = data_.output_vector().dot(alpha_);
  const double logdet_half = chol_.diagonal().array().log().sum();
  return -0.5 * quad - logdet_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

GpModel gp_fit(const Dataset& data, const KernelSpec& spec, double noise_variance)
{
  return GpModel(data, spec, noise_variance);
}

Prediction gp_predict(const GpModel& model, const Vector& x)
{
  return model.predict(x);
}

std::vector<Prediction> gp_predict_batch(const GpModel& model, const std::vector<Vector>& points,
                                         Exec exec)
{
  std::vector<Prediction> out(points.size());
  for_each_index(exec, points.size(), [&](std::size_t i) { out[i] = model.predict(points[i]); });
  return out;
}

std::vector<double> gp_predict_mean_batch(const GpModel& model, const std::vector<Vector>& points,
                                          Exec exec)
{
  std::vector<double> out(points.size());
  for_each_index(exec, points.size(),
                 [&](std::size_t i) { out[i] = model.predict_mean(points[i]); });
  return out;
}

double log_marginal_likelihood(const GpModel& model)
{
  return model.log_marginal_likelihood();
}

HyperparameterBounds hyperparameter_bounds(const Dataset& data)
{
  const double w = data.bounds.max_width();
  const Vector y = data.output_vector();
  const double mean = y.mean();
  const double var = (y.array() - mean).square().mean();
  return {{1e-2 * w, 10.0 * w}, {1e-6, 1e3 * var + 1e-6}};
}

GpModel gp_optimize_hyperparameters(const Dataset& data, KernelFamily family,
                                    double noise_variance, const HyperparameterSearch& search)
{
  if (data.size() < 2)
    throw DegenerateDataError("hyperparameter search needs at least two training points");
  if (search.restarts == 0)
    throw ConfigError("hyperparameter search needs at least one restart");

  const HyperparameterBounds hb = hyperparameter_bounds(data);
  const bool fixed = search.fixed_length_scale.has_value();
  if (fixed && !(*search.fixed_length_scale > 0.0))
    throw ConfigError("fixed length scale must be positive");

  // a collapsed interval (constant outputs make var(y) = 0) pins that parameter
  const bool fit_ell = !fixed;
  const bool fit_var = hb.signal_variance.lower < hb.signal_variance.upper;
  auto make_spec = [&](const Vector& p) {
    KernelSpec s;
    s.family = family;
    s.length_scale = fit_ell ? std::exp(p[0]) : *search.fixed_length_scale;
    s.signal_variance = fit_var ? std::exp(p[fit_ell ? 1 : 0]) : hb.signal_variance.lower;
    return s;
  };
  auto objective = [&](const Vector& p) {
    try {
      return -GpModel(data, make_spec(p), noise_variance).log_marginal_likelihood();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<Interval> dims;
  if (fit_ell)
    dims.push_back({std::log(hb.length_scale.lower), std::log(hb.length_scale.upper)});
  if (fit_var)
    dims.push_back({std::log(hb.signal_variance.lower), std::log(hb.signal_variance.upper)});
  if (dims.empty())
    return GpModel(data, make_spec(Vector()), noise_variance);
  const Box search_box(dims);

  NelderMeadOptions nm;
  nm.max_evaluations = search.max_evaluations_per_restart;
  std::vector<MinimizeResult> results(search.restarts);
  for_each_index(Exec::parallel, search.restarts, [&](std::size_t r) {
    Rng rng = Rng::stream(search.seed, r);
    results[r] = minimize_nelder_mead(objective, rng.uniform(search_box), search_box, nm);
  });

  std::size_t best = results.size();
  for (std::size_t r = 0; r < results.size(); ++r) {
    if (!std::isfinite(results[r].value))
      continue;
    if (best == results.size() || results[r].value < results[best].value)
      best = r;
  }
  if (best == results.size())
    throw NumericalError("every hyperparameter restart failed to factorize the covariance");
  return GpModel(data, make_spec(results[best].x), noise_variance);
}

} // namespace bayinv
