#include "bayinv/errors.hpp"
#include "bayinv/grid.hpp"
#include "bayinv/rng.hpp"
#include "bayinv/sampling.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace bayinv;

namespace {

InverseProblem gaussian_target(double mu, double sd)
{
  InverseProblem p;
  p.forward = [](const Vector& x) { return x[0]; };
  p.observed = mu;
  p.obs_variance = sd * sd;
  p.bounds = Box{{mu - 10.0 * sd, mu + 10.0 * sd}};
  return p;
}

std::vector<double> first_coordinate(const std::vector<ChainResult>& chains)
{
  std::vector<double> out;
  for (const auto& c : chains)
    for (const auto& s : c.samples)
      out.push_back(s[0]);
  return out;
}

double ks_statistic(std::vector<double> xs, double mu, double sd)
{
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = oracle::normal_cdf((xs[i] - mu) / sd);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n),
                  std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

} // namespace

TEST_CASE("MCMC configuration checks")
{
  McmcConfig c;
  CHECK_NOTHROW(c.validate());
  c.burn_in = c.n_steps;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = McmcConfig{};
  c.proposal_scale = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = McmcConfig{};
  c.n_chains = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = McmcConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("flat target: high acceptance and a centred mean")
{
  InverseProblem p;
  p.forward = [](const Vector& x) { return x[0]; };
  p.observed = 0.0;
  p.obs_variance = 1e12;
  p.bounds = Box{{2.0, 12.0}};
  McmcConfig c;
  c.n_chains = 10;
  c.n_steps = 10000;
  c.burn_in = 0;
  c.proposal_scale = 0.05;
  c.seed = 4;
  const auto chains = run_mcmc(p, c);
  for (const auto& ch : chains) {
    CHECK(ch.acceptance_rate >= 0.95);
    CHECK(ch.samples.size() == 10000);
  }
  const auto xs = first_coordinate(chains);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  CHECK(std::abs(mean - 7.0) <= 0.02 * 10.0);
}

TEST_CASE("Gaussian target moments and KS distance")
{
  const double mu = 1.5;
  const double sd = 0.3;
  const InverseProblem p = gaussian_target(mu, sd);
  McmcConfig c;
  c.n_chains = 1;
  c.n_steps = 1000 + 10000 * 20;
  c.burn_in = 1000;
  c.thin = 20;
  c.proposal_scale = 0.12;
  c.seed = 1;
  const auto chains = run_mcmc(p, c);
  const auto xs = first_coordinate(chains);
  REQUIRE(xs.size() == 10000);

  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs)
    ss += (x - mean) * (x - mean);
  const double s = std::sqrt(ss / (n - 1.0));
  CHECK(std::abs(mean - mu) <= 3.0 * sd / std::sqrt(n));
  CHECK(std::abs(s - sd) <= 0.1 * sd);
  CHECK(ks_statistic(xs, mu, sd) < 0.03);
}

TEST_CASE("chains are reproducible and independent of execution mode")
{
  const InverseProblem p = gaussian_target(0.0, 1.0);
  McmcConfig c;
  c.n_chains = 4;
  c.n_steps = 3000;
  c.burn_in = 500;
  c.thin = 3;
  c.seed = 12;
  const auto par = run_mcmc(p, c, Exec::parallel);
  const auto ser = run_mcmc(p, c, Exec::serial);
  REQUIRE(par.size() == 4);
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].chain_index == i);
    CHECK(par[i].samples == ser[i].samples);
    CHECK(par[i].n_accepted == ser[i].n_accepted);
    CHECK(par[i].n_proposed == 2500);
    CHECK(par[i].samples.size() == (2500 + 2) / 3);
    CHECK(par[i].steps.front() == 500);
    const ChainResult alone = run_chain(p, c, i);
    CHECK(alone.samples == par[i].samples);
    CHECK(alone.initial_state == par[i].initial_state);
  }
  CHECK(par[0].samples != par[1].samples);
}

TEST_CASE("zero-density initialisation fails")
{
  InverseProblem p;
  p.forward = [](const Vector& x) { return x[0]; };
  p.observed = 100.0;
  p.obs_variance = 1e-6;
  p.bounds = Box{{0.0, 1.0}};
  McmcConfig c;
  c.n_chains = 1;
  c.n_steps = 10;
  c.burn_in = 0;
  CHECK_THROWS_AS(run_mcmc(p, c), InferenceError);
}

TEST_CASE("Silverman bandwidth")
{
  const std::vector<double> xs = {1.0, 2.0, 4.0, 7.0, 11.0};
  const double mean = 5.0;
  double ss = 0.0;
  for (double x : xs)
    ss += (x - mean) * (x - mean);
  const double expected = 1.06 * std::sqrt(ss / 4.0) * std::pow(5.0, -0.2);
  CHECK(silverman_bandwidth(xs) == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(silverman_bandwidth({1.0}), DegenerateDataError);
  CHECK_THROWS_AS(silverman_bandwidth({2.0, 2.0, 2.0}), DegenerateDataError);
}

TEST_CASE("KDE values")
{
  const double c = 0.7;
  const double h = 0.05;
  const std::vector<double> tight(20, c);
  const auto grid = linspace(-1.0, 3.0, 4001);
  const auto dens = kde_estimate(tight, h, grid);
  const auto peak = std::max_element(dens.begin(), dens.end()) - dens.begin();
  CHECK(grid[static_cast<std::size_t>(peak)] == doctest::Approx(c).epsilon(1e-9));
  CHECK(dens[static_cast<std::size_t>(peak)] ==
        doctest::Approx(1.0 / (h * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-9));

  Rng rng(17);
  std::vector<double> normal(10000);
  for (double& x : normal)
    x = rng.normal();
  const auto wide = linspace(-8.0, 8.0, 3201);
  const auto est = kde_estimate(normal, std::nullopt, wide);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < wide.size(); ++i)
    integral += 0.5 * (est[i] + est[i + 1]) * (wide[i + 1] - wide[i]);
  CHECK(std::abs(integral - 1.0) <= 0.02);
  const double at0 = kde_estimate(normal, std::nullopt, {0.0})[0];
  CHECK(std::abs(at0 - 1.0 / std::sqrt(2.0 * std::numbers::pi)) <= 0.1 / std::sqrt(2.0 * std::numbers::pi));

  CHECK(kde_estimate(normal, std::nullopt, wide, Exec::serial) == est);
  CHECK_THROWS_AS(kde_estimate(normal, -1.0, wide), ConfigError);
}

TEST_CASE("trapezoid weights")
{
  const auto w1 = trapezoid_weights(Box{{0.0, 2.0}}, 5);
  CHECK(w1 == std::vector<double>{0.25, 0.5, 0.5, 0.5, 0.25});
  const auto w2 = trapezoid_weights(Box{{0.0, 1.0}, {0.0, 3.0}}, 65);
  CHECK(std::accumulate(w2.begin(), w2.end(), 0.0) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("grid posterior normalisation and modes")
{
  const InverseProblem g = gaussian_target(0.4, 0.2);
  const GridPosterior gp = grid_posterior(g, 1001);
  const auto w = trapezoid_weights(g.bounds, 1001);
  double integral = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    integral += w[i] * gp.density[i];
  CHECK(std::abs(integral - 1.0) <= 1e-10);
  REQUIRE(gp.modes.size() == 1);
  const double cell = g.bounds[0].width() / 1000.0;
  CHECK(std::abs(gp.points[gp.modes[0]][0] - 0.4) <= cell);

  InverseProblem two;
  two.forward = [](const Vector& x) { return x[0] * x[0] + x[1] * x[1]; };
  two.observed = 0.0;
  two.obs_variance = 0.5;
  two.bounds = Box{{-2.0, 3.0}, {-1.0, 1.0}};
  const GridPosterior gp2 = grid_posterior(two, 101);
  const auto w2 = trapezoid_weights(two.bounds, 101);
  double i2 = 0.0;
  for (std::size_t i = 0; i < w2.size(); ++i)
    i2 += w2[i] * gp2.density[i];
  CHECK(std::abs(i2 - 1.0) <= 1e-10);
  REQUIRE(gp2.modes.size() == 1);
  CHECK(gp2.points[gp2.modes[0]].norm() < 0.06);

  InverseProblem bimodal;
  bimodal.forward = [](const Vector& x) { return x[0] * x[0]; };
  bimodal.observed = 1.0;
  bimodal.obs_variance = 0.01;
  bimodal.bounds = Box{{-2.0, 2.5}};
  const GridPosterior gb = grid_posterior(bimodal, 901);
  REQUIRE(gb.modes.size() == 2);
  CHECK(gb.density[gb.modes[0]] >= gb.density[gb.modes[1]]);

  CHECK_THROWS_AS(grid_posterior(g, 32), ConfigError);
}

TEST_CASE("grid posterior is proportional to NLS")
{
  InverseProblem p;
  p.forward = [](const Vector& x) { return std::sin(x[0]) * x[0]; };
  p.observed = 0.5;
  p.obs_variance = 0.2;
  p.bounds = Box{{-4.0, 4.0}};
  const GridPosterior g = grid_posterior(p, 801);
  std::vector<double> nls;
  for (const auto& x : g.points)
    nls.push_back(nls_profile(p, x));
  const double n = static_cast<double>(nls.size());
  const double ma = std::accumulate(g.density.begin(), g.density.end(), 0.0) / n;
  const double mb = std::accumulate(nls.begin(), nls.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < nls.size(); ++i) {
    sab += (g.density[i] - ma) * (nls[i] - mb);
    saa += (g.density[i] - ma) * (g.density[i] - ma);
    sbb += (nls[i] - mb) * (nls[i] - mb);
  }
  CHECK(std::abs(sab / std::sqrt(saa * sbb) - 1.0) <= 1e-12);
}
