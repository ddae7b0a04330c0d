#include "bayinv/inversion.hpp"

#include "bayinv/errors.hpp"
#include "bayinv/grid.hpp"
#include "bayinv/optimize.hpp"
#include "bayinv/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>

namespace bayinv {

InverseProblem InverseProblem::from_surrogate(const GpModel& model, double observed,
                                              double obs_variance)
{
  InverseProblem p;
  auto m = std::make_shared<const GpModel>(model);
  p.forward = [m](const Vector& x) { return m->predict_mean(x); };
  p.observed = observed;
  p.obs_variance = obs_variance;
  p.bounds = model.bounds();
  return p;
}

void InverseProblem::validate() const
{
  if (!forward)
    throw ConfigError("inverse problem has no forward map");
  if (!(obs_variance > 0.0) || !std::isfinite(obs_variance))
    throw ConfigError("observation variance must be positive and finite");
  if (!std::isfinite(observed))
    throw ConfigError("observed value must be finite");
  if (bounds.dim() == 0)
    throw ConfigError("inverse problem has empty bounds");
  if (prior) {
    const auto d = static_cast<Eigen::Index>(bounds.dim());
    if (prior->mean.size() != d || prior->covariance.rows() != d || prior->covariance.cols() != d)
      throw ShapeError("Gaussian prior dimensions do not match the parameter bounds");
    if (!prior->covariance.isApprox(prior->covariance.transpose(), 1e-12))
      throw ConfigError("Gaussian prior covariance is not symmetric");
    Eigen::LLT<Matrix> llt(prior->covariance);
    if (llt.info() != Eigen::Success)
      throw ConfigError("Gaussian prior covariance is not positive definite");
  }
}

double ls_functional(const InverseProblem& problem, const Vector& x)
{
  problem.bounds.check(x, "parameter");
  const double r = problem.observed - problem.forward(x);
  return r * r;
}

double nls_profile(const InverseProblem& problem, const Vector& x)
{
  return std::exp(-ls_functional(problem, x) / (2.0 * problem.obs_variance));
}

ProfileGrid profile_grid(const InverseProblem& problem, std::size_t resolution, Exec exec)
{
  problem.validate();
  if (resolution < 2)
    throw ConfigError("profile grid needs at least 2 points per dimension");
  ProfileGrid g;
  g.resolution = resolution;
  g.points = tensor_grid(problem.bounds, resolution, false);
  const std::size_t n = g.points.size();
  g.ls.resize(n);
  g.nls.resize(n);
  g.nls_normalized.resize(n);
  for_each_index(exec, n, [&](std::size_t i) { g.ls[i] = ls_functional(problem, g.points[i]); });
  const double ls_min = *std::min_element(g.ls.begin(), g.ls.end());
  const double scale = 2.0 * problem.obs_variance;
  for (std::size_t i = 0; i < n; ++i) {
    g.nls[i] = std::exp(-g.ls[i] / scale);
    g.nls_normalized[i] = std::exp(-(g.ls[i] - ls_min) / scale);
  }
  return g;
}

double residual_floor(const InverseProblem& problem)
{
  const double t = 1e-4 * std::max(1.0, std::abs(problem.observed));
  return t * t;
}

namespace {

bool lex_less(const Vector& a, const Vector& b)
{
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

struct Endpoint
{
  Vector x;
  double objective = 0.0;
  double ls = 0.0;
  bool on_bound = false;
};

PosteriorSummary run_multistart(const InverseProblem& problem, const Objective& objective,
                                double floor, const MultistartOptions& options)
{
  if (options.n_starts < 1 && options.starts.empty())
    throw ConfigError("map estimation needs at least one start");
  if (options.max_iter < 1)
    throw ConfigError("map estimation needs max_iter >= 1");

  const Box& box = problem.bounds;
  std::vector<Vector> starts = options.starts;
  if (starts.empty()) {
    starts.resize(options.n_starts);
    for (std::size_t i = 0; i < starts.size(); ++i) {
      Rng rng = Rng::stream(options.seed, i);
      starts[i] = rng.uniform(box);
    }
  }
  for (const Vector& s : starts)
    box.check(s, "MAP start");

  QuasiNewtonOptions qn;
  qn.max_iter = options.max_iter;
  std::vector<MinimizeResult> results(starts.size());
  for_each_index(options.exec, starts.size(), [&](std::size_t i) {
    results[i] = minimize_box_bfgs(objective, starts[i], box, qn);
  });

  PosteriorSummary summary;
  std::vector<Endpoint> ends;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    summary.starts.push_back({starts[i], r.x, r.value, r.converged, r.status});
    if (r.converged && std::isfinite(r.value))
      ends.push_back({r.x, r.value, ls_functional(problem, r.x), r.on_bound});
  }
  if (ends.empty()) {
    std::ostringstream msg;
    msg << "no MAP start converged (" << results.size() << " starts):";
    for (std::size_t i = 0; i < results.size(); ++i)
      msg << " [" << i << "] " << results[i].status << " f=" << results[i].value << ";";
    throw InferenceError(msg.str());
  }

  auto floored = [floor](double v) { return std::max(v, floor); };
  // order-independent clustering: visit endpoints best first
  std::sort(ends.begin(), ends.end(), [&](const Endpoint& a, const Endpoint& b) {
    if (floored(a.objective) != floored(b.objective))
      return floored(a.objective) < floored(b.objective);
    if (a.objective != b.objective)
      return a.objective < b.objective;
    return lex_less(a.x, b.x);
  });

  const Vector widths = box.widths();
  std::vector<MapCluster> clusters;
  for (const Endpoint& e : ends) {
    bool merged = false;
    for (MapCluster& c : clusters) {
      const bool close =
        ((e.x - c.x).cwiseAbs().array() <= options.merge_fraction * widths.array()).all();
      const double a = floored(e.objective);
      const double b = floored(c.objective);
      if (close && std::max(a, b) <= options.merge_ratio * std::min(a, b)) {
        ++c.members;
        merged = true;
        break;
      }
    }
    if (!merged) {
      MapCluster c;
      c.x = e.x;
      c.ls_residual = e.ls;
      c.objective = e.objective;
      c.members = 1;
      c.on_bound = e.on_bound;
      clusters.push_back(c);
    }
  }

  std::stable_sort(clusters.begin(), clusters.end(), [&](const MapCluster& a, const MapCluster& b) {
    if (floored(a.objective) != floored(b.objective))
      return floored(a.objective) < floored(b.objective);
    if (a.members != b.members)
      return a.members > b.members;
    return lex_less(a.x, b.x);
  });

  const Objective ls = [&](const Vector& x) { return ls_functional(problem, x); };
  const Vector step = Vector::Constant(static_cast<Eigen::Index>(box.dim()), 1e-5);
  for (MapCluster& c : clusters)
    c.gradient_norm = fd_gradient(ls, c.x, box, step).lpNorm<Eigen::Infinity>();

  const double best = floored(clusters.front().objective);
  std::size_t competing = 0;
  for (const MapCluster& c : clusters)
    if (floored(c.objective) <= options.multimodal_ratio * best)
      ++competing;
  summary.multimodal = competing >= 2;
  summary.map_clusters = std::move(clusters);
  return summary;
}

} // namespace

PosteriorSummary map_multistart(const InverseProblem& problem, const MultistartOptions& options)
{
  problem.validate();
  const Objective ls = [&](const Vector& x) { return ls_functional(problem, x); };
  return run_multistart(problem, ls, residual_floor(problem), options);
}

namespace {

Matrix prior_precision(const GaussianPrior& prior)
{
  Eigen::LLT<Matrix> llt(prior.covariance);
  if (llt.info() != Eigen::Success)
    throw ConfigError("Gaussian prior covariance is singular");
  return llt.solve(Matrix::Identity(prior.covariance.rows(), prior.covariance.cols()));
}

} // namespace

PosteriorSummary map_gaussian_prior(const InverseProblem& problem,
                                    const MultistartOptions& options)
{
  problem.validate();
  if (!problem.prior)
    throw ConfigError("map_gaussian_prior needs a Gaussian prior");
  const Matrix precision = prior_precision(*problem.prior);
  const Vector mean = problem.prior->mean;
  const double scale = 1.0 / (2.0 * problem.obs_variance);
  const Objective objective = [&](const Vector& x) {
    const Vector dx = x - mean;
    return scale * ls_functional(problem, x) + 0.5 * dx.dot(precision * dx);
  };
  return run_multistart(problem, objective, scale * residual_floor(problem), options);
}

namespace {

double normal_quantile(double p)
{
  // bisection on the CDF; only used for interval multipliers
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

LaplaceResult laplace_approximation(const InverseProblem& problem, const Vector& x_map,
                                    double level)
{
  problem.validate();
  problem.bounds.check(x_map, "MAP estimate");
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("credible level must lie in (0, 1)");

  LaplaceResult res;
  res.level = level;
  const Box& box = problem.bounds;
  const double scale = 1.0 / (2.0 * problem.obs_variance);
  std::optional<Matrix> precision;
  if (problem.prior)
    precision = prior_precision(*problem.prior);

  const Objective neg_log_post = [&](const Vector& x) {
    double v = scale * ls_functional(problem, x);
    if (precision) {
      const Vector dx = x - problem.prior->mean;
      v += 0.5 * dx.dot(*precision * dx);
    }
    return v;
  };
  const Objective ls = [&](const Vector& x) { return ls_functional(problem, x); };

  const Vector hstep = box.widths() * 1e-4;
  for (std::size_t k = 0; k < box.dim(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (x_map[i] - hstep[i] < box[k].lower || x_map[i] + hstep[i] > box[k].upper) {
      res.diagnostic = "MAP estimate is on or next to a bound; no interior Hessian";
      return res;
    }
  }
  const Vector gstep = Vector::Constant(x_map.size(), 1e-5);
  const double gnorm = fd_gradient(ls, x_map, box, gstep).norm();
  if (!problem.prior && !(gnorm < 1e-4)) {
    std::ostringstream msg;
    msg << "MAP estimate is not stationary (LS gradient norm " << gnorm << ")";
    res.diagnostic = msg.str();
    return res;
  }

  res.hessian = fd_hessian(neg_log_post, x_map, box, hstep);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(res.hessian, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || !(lmin > 1e-6 * lmax) || !std::isfinite(lmax)) {
    std::ostringstream msg;
    msg << "Hessian is not positive definite (eigenvalues " << lmin << " .. " << lmax
        << "); the posterior is degenerate or multimodal at this point";
    res.diagnostic = msg.str();
    return res;
  }

  res.covariance = res.hessian.llt().solve(Matrix::Identity(res.hessian.rows(), res.hessian.cols()));
  res.covariance = 0.5 * (res.covariance + res.covariance.transpose());
  const double z = normal_quantile(0.5 + 0.5 * level);
  for (std::size_t k = 0; k < box.dim(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double half = z * std::sqrt(res.covariance(i, i));
    res.intervals.push_back({std::max(box[k].lower, x_map[i] - half),
                             std::min(box[k].upper, x_map[i] + half)});
  }
  res.valid = true;
  return res;
}

namespace {

// Box needs lower < upper, so a lone grid point becomes a one-ulp interval.
double widen(double lo, double hi)
{
  return hi > lo ? hi : std::nextafter(lo, std::numeric_limits<double>::infinity());
}

} // namespace

std::vector<Box> high_probability_region(const ProfileGrid& grid, double threshold)
{
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("high-probability threshold must lie in (0, 1)");
  const std::size_t n = grid.resolution;
  const std::size_t total = grid.points.size();
  const std::size_t d = total == n ? 1 : 2;
  if (d == 2 && n * n != total)
    throw ShapeError("high-probability regions support 1D and 2D grids only");

  std::vector<Box> regions;
  if (d == 1) {
    std::size_t i = 0;
    while (i < n) {
      if (grid.nls_normalized[i] < threshold) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < n && grid.nls_normalized[j + 1] >= threshold)
        ++j;
      const double lo = grid.points[i][0];
      const double hi = grid.points[j][0];
      regions.push_back(Box(std::vector<Interval>{{lo, widen(lo, hi)}}));
      i = j + 1;
    }
    return regions;
  }

  std::vector<int> label(total, -1);
  std::vector<std::size_t> stack;
  int next = 0;
  for (std::size_t s = 0; s < total; ++s) {
    if (label[s] >= 0 || grid.nls_normalized[s] < threshold)
      continue;
    Vector lo = grid.points[s];
    Vector hi = grid.points[s];
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      lo = lo.cwiseMin(grid.points[c]);
      hi = hi.cwiseMax(grid.points[c]);
      const std::size_t r = c / n;
      const std::size_t q = c % n;
      const std::size_t nbr[4] = {r > 0 ? c - n : total, r + 1 < n ? c + n : total,
                                  q > 0 ? c - 1 : total, q + 1 < n ? c + 1 : total};
      for (std::size_t m : nbr) {
        if (m < total && label[m] < 0 && grid.nls_normalized[m] >= threshold) {
          label[m] = next;
          stack.push_back(m);
        }
      }
    }
    std::vector<Interval> dims;
    for (Eigen::Index k = 0; k < 2; ++k)
      dims.push_back({lo[k], widen(lo[k], hi[k])});
    regions.push_back(Box(dims));
    ++next;
  }
  return regions;
}

std::vector<Box> high_probability_region(const InverseProblem& problem, double threshold,
                                         std::size_t grid_resolution, Exec exec)
{
  if (grid_resolution < 64)
    throw ConfigError("high-probability grid resolution must be at least 64");
  return high_probability_region(profile_grid(problem, grid_resolution, exec), threshold);
}

} // namespace bayinv
