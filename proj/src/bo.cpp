#include "bayinv/bo.hpp"

#include "bayinv/errors.hpp"
#include "bayinv/grid.hpp"
#include "bayinv/optimize.hpp"
#include "bayinv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bayinv {

std::string to_string(AcquisitionFamily family)
{
  return family == AcquisitionFamily::ei ? "ei" : "ucb";
}

AcquisitionFamily parse_acquisition_family(const std::string& name)
{
  if (name == "ei")
    return AcquisitionFamily::ei;
  if (name == "ucb")
    return AcquisitionFamily::ucb;
  throw ConfigError("unknown acquisition family '" + name + "' (expected ei or ucb)");
}

void AcquisitionSpec::validate() const
{
  if (family == AcquisitionFamily::ucb && !(kappa >= 0.0 && std::isfinite(kappa)))
    throw ConfigError("UCB kappa must be finite and nonnegative");
}

double expected_improvement(double mu, double sigma, double best)
{
  const double diff = mu - best;
  if (!(sigma > 0.0))
    return std::max(diff, 0.0);
  const double z = diff / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(diff * cdf + sigma * pdf, 0.0);
}

double upper_confidence_bound(double mu, double sigma, double kappa)
{
  return mu + kappa * sigma;
}

namespace {

double incumbent_of(const GpModel& model, const AcquisitionSpec& spec)
{
  if (spec.incumbent)
    return *spec.incumbent;
  const auto& y = model.training_data().outputs;
  return *std::max_element(y.begin(), y.end());
}

double score(AcquisitionFamily family, double kappa, double best, double mu, double sigma)
{
  return family == AcquisitionFamily::ei ? expected_improvement(mu, sigma, best)
                                         : upper_confidence_bound(mu, sigma, kappa);
}

bool lex_less(const Vector& a, const Vector& b)
{
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

struct Candidate
{
  Vector x;
  double value = -std::numeric_limits<double>::infinity();
};

// higher value wins; exact ties go to the lexicographically lowest point
bool better(const Candidate& a, const Candidate& b)
{
  if (a.value != b.value)
    return a.value > b.value;
  return lex_less(a.x, b.x);
}

} // namespace

double acquisition_value(const GpModel& model, const AcquisitionSpec& spec, const Vector& x)
{
  model.bounds().check(x, "acquisition query");
  const Prediction p = model.predict(x);
  return score(spec.family, spec.kappa, incumbent_of(model, spec), p.mean, p.stddev());
}

std::vector<Vector> acquire_batch(const GpModel& model, const AcquisitionSpec& spec,
                                  const Box& bounds, std::size_t n_acq, std::uint64_t seed,
                                  const AcquisitionOptions& options)
{
  spec.validate();
  if (n_acq == 0)
    throw ConfigError("acquisition batch size must be at least 1");
  if (bounds.dim() == 0)
    throw ConfigError("acquisition bounds are empty");
  for (std::size_t k = 0; k < bounds.dim(); ++k)
    if (!(bounds[k].width() > 0.0))
      throw ConfigError("acquisition bounds have zero width in dimension " + std::to_string(k));
  if (bounds.dim() != model.dim())
    throw ShapeError("acquisition bounds dimension does not match the model");

  const double best = incumbent_of(model, spec);
  const Vector widths = bounds.widths();
  std::vector<Interval> inner;
  for (std::size_t k = 0; k < bounds.dim(); ++k) {
    const double pad = options.boundary_inset * bounds[k].width();
    inner.push_back({bounds[k].lower + pad, bounds[k].upper - pad});
  }
  const Box inner_box(inner);

  const std::size_t per_dim =
    bounds.dim() == 1 ? options.probe_points_1d : options.probe_side_2d;
  const std::vector<Vector> probes = tensor_grid(bounds, per_dim, true);

  std::vector<Vector> starts(options.local_starts);
  {
    Rng rng(seed);
    for (auto& s : starts)
      s = rng.uniform(inner_box);
  }

  std::vector<Vector> picked;
  picked.reserve(n_acq);
  auto penalized = [&](const Vector& x) {
    const Prediction p = model.predict(x);
    double sigma = p.stddev();
    for (const Vector& q : picked) {
      if ((x - q).cwiseQuotient(widths).norm() <= options.exclusion_fraction) {
        sigma = 0.0;
        break;
      }
    }
    return score(spec.family, spec.kappa, best, p.mean, sigma);
  };

  for (std::size_t b = 0; b < n_acq; ++b) {
    std::vector<Candidate> probe_scores(probes.size());
    for_each_index(options.exec, probes.size(), [&](std::size_t i) {
      probe_scores[i] = {probes[i], penalized(probes[i])};
    });

    std::vector<Candidate> local(starts.size());
    const Objective neg = [&](const Vector& x) { return -penalized(x); };
    for_each_index(options.exec, starts.size(), [&](std::size_t i) {
      QuasiNewtonOptions qn;
      qn.max_iter = 200;
      qn.gtol = 1e-12;
      const MinimizeResult r = minimize_box_bfgs(neg, starts[i], inner_box, qn);
      local[i] = {r.x, -r.value};
    });

    Candidate winner;
    bool have = false;
    for (const auto* set : {&probe_scores, &local}) {
      for (const Candidate& c : *set) {
        if (!std::isfinite(c.value))
          continue;
        if (!have || better(c, winner)) {
          winner = c;
          have = true;
        }
      }
    }
    if (!have)
      throw NumericalError("acquisition is non-finite at every candidate");
    picked.push_back(winner.x);
  }
  return picked;
}

std::vector<Vector> validation_points(const HighFidelityModel& hf, std::size_t n_val,
                                      std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<Vector> pts(n_val);
  for (auto& p : pts)
    p = rng.uniform(hf.bounds);
  return pts;
}

double validation_mse(const GpModel& model, const HighFidelityModel& hf,
                      const std::vector<Vector>& points, Exec exec)
{
  if (points.empty())
    throw ConfigError("validation needs at least one point");
  std::vector<double> sq(points.size());
  for_each_index(exec, points.size(), [&](std::size_t i) {
    const double e = model.predict_mean(points[i]) - eval_benchmark(hf, points[i]);
    sq[i] = e * e;
  });
  double sum = 0.0;
  for (double v : sq)
    sum += v;
  return sum / static_cast<double>(points.size());
}

double validation_mse(const GpModel& model, const HighFidelityModel& hf, std::size_t n_val,
                      std::uint64_t seed, Exec exec)
{
  return validation_mse(model, hf, validation_points(hf, n_val, seed), exec);
}

void BoConfig::validate() const
{
  if (n_init < 2)
    throw ConfigError("bo.n_init must be at least 2");
  if (n_acq < 1)
    throw ConfigError("bo.n_acq must be at least 1");
  if (max_evaluations < n_init)
    throw ConfigError("bo.max_evaluations must be at least bo.n_init");
  if (!(mse_threshold > 0.0))
    throw ConfigError("bo.mse_threshold must be positive");
  if (n_val < 100)
    throw ConfigError("bo.n_val must be at least 100");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw ConfigError("bo.noise_variance must be finite and nonnegative");
  if (hyper_restarts < 1)
    throw ConfigError("bo.hyper_restarts must be at least 1");
  if (fixed_length_scale && !(*fixed_length_scale > 0.0))
    throw ConfigError("bo.length_scale must be positive when fixed");
  acquisition.validate();
}

const GpModel& BoTrace::final_model() const
{
  if (!model)
    throw InferenceError("BO trace holds no fitted model");
  return *model;
}

double BoTrace::final_mse() const
{
  if (iterations.empty())
    throw InferenceError("BO trace is empty");
  return iterations.back().mse;
}

GpModel fit_surrogate(const Dataset& data, const BoConfig& config, std::uint64_t seed)
{
  HyperparameterSearch search;
  search.restarts = config.hyper_restarts;
  search.seed = seed;
  search.fixed_length_scale = config.fixed_length_scale;
  return gp_optimize_hyperparameters(data, config.kernel, config.noise_variance, search);
}

namespace {

// independent sub-streams of the run seed
enum Stream : std::uint64_t
{
  design_stream = 1,
  validation_stream = 2,
  hyper_stream = 3,
  acquisition_stream = 4
};

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t iteration)
{
  Rng r = Rng::stream(seed, stream * 1000003ULL + iteration);
  return static_cast<std::uint64_t>(r.uniform() * 0x1.0p53);
}

} // namespace

BoTrace run_bo(const HighFidelityModel& hf, const BoConfig& config)
{
  config.validate();
  BoTrace trace;
  trace.data = sample_initial_design(hf, config.n_init, sub_seed(config.seed, design_stream, 0));
  trace.validation_points =
    validation_points(hf, config.n_val, sub_seed(config.seed, validation_stream, 0));

  std::vector<Vector> acquired;
  for (std::size_t it = 0;; ++it) {
    try {
      trace.model.emplace(fit_surrogate(trace.data, config, sub_seed(config.seed, hyper_stream, it)));
    } catch (const Error& e) {
      e.rethrow_as("BO iteration " + std::to_string(it) + " (" +
                   std::to_string(trace.data.size()) + " samples): " + e.what());
    }
    const GpModel& model = *trace.model;

    BoIteration rec;
    rec.iteration = it;
    rec.n_samples = trace.data.size();
    rec.acquired = acquired;
    rec.mse = validation_mse(model, hf, trace.validation_points);
    rec.kernel = model.kernel();
    rec.jitter = model.jitter();
    rec.log_marginal_likelihood = model.log_marginal_likelihood();
    trace.iterations.push_back(rec);

    if (rec.mse < config.mse_threshold) {
      trace.converged = true;
      break;
    }
    if (trace.data.size() >= config.max_evaluations) {
      trace.budget_exhausted = true;
      break;
    }

    const std::size_t batch = std::min(config.n_acq, config.max_evaluations - trace.data.size());
    acquired = acquire_batch(model, config.acquisition, hf.bounds, batch,
                             sub_seed(config.seed, acquisition_stream, it));
    std::vector<double> values(acquired.size());
    for_each_index(Exec::parallel, acquired.size(),
                   [&](std::size_t i) { values[i] = eval_benchmark(hf, acquired[i]); });
    for (std::size_t i = 0; i < acquired.size(); ++i)
      trace.data.add(acquired[i], values[i]);
  }
  return trace;
}

} // namespace bayinv
