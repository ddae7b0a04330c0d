#include "bayinv/sampling.hpp"

#include "bayinv/errors.hpp"
#include "bayinv/grid.hpp"
#include "bayinv/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace bayinv {

void McmcConfig::validate() const
{
  if (n_chains < 1)
    throw ConfigError("mcmc.n_chains must be at least 1");
  if (n_steps < 1)
    throw ConfigError("mcmc.n_steps must be at least 1");
  if (burn_in >= n_steps)
    throw ConfigError("mcmc.burn_in must be smaller than mcmc.n_steps");
  if (!(proposal_scale > 0.0 && proposal_scale <= 1.0))
    throw ConfigError("mcmc.proposal_scale must lie in (0, 1]");
  if (thin < 1)
    throw ConfigError("mcmc.thin must be at least 1");
}

namespace {

struct LogTarget
{
  const InverseProblem& problem;
  std::optional<Matrix> precision;

  explicit LogTarget(const InverseProblem& p) : problem(p)
  {
    if (p.prior)
      precision = p.prior->covariance.llt().solve(
        Matrix::Identity(p.prior->covariance.rows(), p.prior->covariance.cols()));
  }

  double operator()(const Vector& x) const
  {
    double v = -ls_functional(problem, x) / (2.0 * problem.obs_variance);
    if (precision) {
      const Vector dx = x - problem.prior->mean;
      v -= 0.5 * dx.dot(*precision * dx);
    }
    return v;
  }
};

} // namespace

ChainResult run_chain(const InverseProblem& problem, const McmcConfig& config,
                      std::size_t chain_index)
{
  const LogTarget log_target(problem);
  const Box& box = problem.bounds;
  const Vector step_sd = box.widths() * config.proposal_scale;
  Rng rng = Rng::stream(config.seed, chain_index);

  ChainResult out;
  out.chain_index = chain_index;

  Vector x;
  double lp = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (int attempt = 0; attempt < 100 && !found; ++attempt) {
    x = rng.uniform(box);
    lp = log_target(x);
    // zero density in double precision counts as a failed start
    found = std::isfinite(lp) && std::exp(lp) > 0.0;
  }
  if (!found)
    throw InferenceError("chain " + std::to_string(chain_index) +
                         ": zero target density at 100 random initial states");
  out.initial_state = x;

  const std::size_t kept = (config.n_steps - config.burn_in + config.thin - 1) / config.thin;
  out.samples.reserve(kept);
  out.steps.reserve(kept);
  out.accepted.reserve(kept);

  Vector prop(x.size());
  for (std::size_t step = 0; step < config.n_steps; ++step) {
    for (Eigen::Index k = 0; k < x.size(); ++k)
      prop[k] = x[k] + step_sd[k] * rng.normal();
    const double u = rng.uniform();
    bool accept = false;
    if (box.contains(prop)) {
      const double lp_new = log_target(prop);
      if (std::isfinite(lp_new) && std::log(u) < lp_new - lp) {
        x = prop;
        lp = lp_new;
        accept = true;
      }
    }
    if (step < config.burn_in)
      continue;
    ++out.n_proposed;
    if (accept)
      ++out.n_accepted;
    if ((step - config.burn_in) % config.thin == 0) {
      out.samples.push_back(x);
      out.steps.push_back(step);
      out.accepted.push_back(accept);
    }
  }
  out.acceptance_rate =
    static_cast<double>(out.n_accepted) / static_cast<double>(out.n_proposed);
  return out;
}

std::vector<ChainResult> run_mcmc(const InverseProblem& problem, const McmcConfig& config,
                                  Exec exec)
{
  problem.validate();
  config.validate();
  std::vector<ChainResult> chains(config.n_chains);
  for_each_index(exec, config.n_chains,
                 [&](std::size_t c) { chains[c] = run_chain(problem, config, c); });
  return chains;
}

double silverman_bandwidth(const std::vector<double>& samples)
{
  if (samples.size() < 2)
    throw DegenerateDataError("bandwidth selection needs at least 2 samples");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : samples)
    ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0))
    throw DegenerateDataError("all samples are identical; Silverman bandwidth is zero");
  return 1.06 * sd * std::pow(n, -0.2);
}

std::vector<double> kde_estimate(const std::vector<double>& samples,
                                 std::optional<double> bandwidth,
                                 const std::vector<double>& grid, Exec exec)
{
  if (samples.size() < 2)
    throw DegenerateDataError("kernel density estimate needs at least 2 samples");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  if (!(h > 0.0) || !std::isfinite(h))
    throw ConfigError("KDE bandwidth must be positive and finite");

  const double norm = 1.0 / (static_cast<double>(samples.size()) * h *
                             std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size());
  for_each_index(exec, grid.size(), [&](std::size_t i) {
    double acc = 0.0;
    for (double s : samples) {
      const double z = (grid[i] - s) / h;
      acc += std::exp(-0.5 * z * z);
    }
    out[i] = acc * norm;
  });
  return out;
}

std::vector<double> trapezoid_weights(const Box& box, std::size_t resolution)
{
  if (resolution < 2)
    throw ConfigError("trapezoidal rule needs at least 2 points per dimension");
  std::vector<double> w(1, 1.0);
  for (std::size_t k = 0; k < box.dim(); ++k) {
    const double h = box[k].width() / static_cast<double>(resolution - 1);
    std::vector<double> axis(resolution, h);
    axis.front() = axis.back() = 0.5 * h;
    std::vector<double> next;
    next.reserve(w.size() * resolution);
    for (double a : w)
      for (double b : axis)
        next.push_back(a * b);
    w = std::move(next);
  }
  return w;
}

GridPosterior grid_posterior(const InverseProblem& problem, std::size_t resolution, Exec exec)
{
  if (resolution < 64)
    throw ConfigError("grid posterior resolution must be at least 64");
  if (problem.bounds.dim() > 2)
    throw ShapeError("grid posterior supports 1D and 2D problems only");

  const ProfileGrid g = profile_grid(problem, resolution, exec);
  const std::vector<double> w = trapezoid_weights(problem.bounds, resolution);

  GridPosterior out;
  out.resolution = resolution;
  out.points = g.points;
  double integral = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    integral += w[i] * g.nls_normalized[i];
  out.density.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    out.density[i] = g.nls_normalized[i] / integral;

  const double peak = *std::max_element(out.density.begin(), out.density.end());
  const std::size_t n = resolution;
  const bool two_d = problem.bounds.dim() == 2;
  for (std::size_t i = 0; i < out.density.size(); ++i) {
    const double v = out.density[i];
    if (!(v > 0.05 * peak))
      continue;
    bool strict = true;
    if (!two_d) {
      if (i > 0 && !(v > out.density[i - 1]))
        strict = false;
      if (i + 1 < n && !(v > out.density[i + 1]))
        strict = false;
    } else {
      const auto r = static_cast<long>(i / n);
      const auto c = static_cast<long>(i % n);
      const auto sn = static_cast<long>(n);
      for (long dr = -1; dr <= 1 && strict; ++dr)
        for (long dc = -1; dc <= 1 && strict; ++dc) {
          if (dr == 0 && dc == 0)
            continue;
          const long rr = r + dr;
          const long cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= sn || cc >= sn)
            continue;
          if (!(v > out.density[static_cast<std::size_t>(rr * sn + cc)]))
            strict = false;
        }
    }
    if (strict)
      out.modes.push_back(i);
  }
  std::stable_sort(out.modes.begin(), out.modes.end(), [&](std::size_t a, std::size_t b) {
    return out.density[a] > out.density[b];
  });
  return out;
}

} // namespace bayinv
