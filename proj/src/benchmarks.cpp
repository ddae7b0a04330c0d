#include "bayinv/benchmarks.hpp"

#include "bayinv/errors.hpp"
#include "bayinv/rng.hpp"

#include <cmath>
#include <numbers>

namespace bayinv {

namespace formulas {

double mixed_1d(const Vector& v)
{
  const double x = v[0];
  return std::exp(-(x - 2.0) * (x - 2.0) / 2.0) +
         0.9 * std::exp(-(x + 5.0) * (x + 5.0) / 20.0) - 0.1 * std::cos(2.0 * x);
}

double levy_1d(const Vector& v)
{
  constexpr double pi = std::numbers::pi;
  const double w = 1.0 + (v[0] - 1.0) / 4.0;
  const double s1 = std::sin(pi * w);
  const double s2 = std::sin(pi * w + 1.0);
  const double s3 = std::sin(2.0 * pi * w);
  const double d = w - 1.0;
  return s1 * s1 + d * d * (1.0 + 10.0 * s2 * s2) + d * d * d * d * s3 * s3;
}

double griewank_1d(const Vector& v)
{
  const double x = v[0];
  return x * x / 4000.0 - std::cos(x) + 1.0;
}

double forrester_1d(const Vector& v)
{
  const double x = v[0];
  const double a = 6.0 * x - 2.0;
  return a * a * std::sin(12.0 * x - 4.0);
}

double mixed_2d(const Vector& v)
{
  const double x = v[0];
  const double y = v[1];
  return std::exp(-((x - 2.0) * (x - 2.0) + (y - 2.0) * (y - 2.0)) / 2.0) +
         0.2 * std::cos(3.0 * x) * std::sin(3.0 * y) + 0.1 * std::sin(5.0 * x + 5.0 * y);
}

double rosenbrock_2d(const Vector& v)
{
  const double x = v[0];
  const double y = v[1];
  return (1.0 - x) * (1.0 - x) + 100.0 * (y - x * x) * (y - x * x);
}

} // namespace formulas

namespace {

std::vector<HighFidelityModel> make_registry()
{
  return {
    {"mixed1d", "Mixed Gaussian-Periodic 1D on [-10, 10]", Box{{-10.0, 10.0}},
     &formulas::mixed_1d},
    {"levy1d", "Levy 1D on [-6, 6]", Box{{-6.0, 6.0}}, &formulas::levy_1d},
    {"griewank1d", "Griewank 1D on [-15, 15]", Box{{-15.0, 15.0}}, &formulas::griewank_1d},
    {"forrester1d", "Forrester 1D on [0, 1]", Box{{0.0, 1.0}}, &formulas::forrester_1d},
    {"mixed2d", "Mixed Gaussian-Periodic 2D on [-1, 2] x [0, 3]",
     Box{{-1.0, 2.0}, {0.0, 3.0}}, &formulas::mixed_2d},
    {"rosenbrock2d", "Rosenbrock 2D on [-2, 2] x [-1, 2]", Box{{-2.0, 2.0}, {-1.0, 2.0}},
     &formulas::rosenbrock_2d},
  };
}

const std::vector<HighFidelityModel>& registry()
{
  static const std::vector<HighFidelityModel> models = make_registry();
  return models;
}

} // namespace

double eval_benchmark(const HighFidelityModel& model, const Vector& x)
{
  model.bounds.check(x, model.name + " input");
  return model.evaluator(x);
}

const std::vector<std::string>& benchmark_names()
{
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& m : registry())
      out.push_back(m.name);
    return out;
  }();
  return names;
}

const HighFidelityModel& find_benchmark(std::string_view name)
{
  for (const auto& m : registry())
    if (m.name == name)
      return m;
  throw ConfigError("unknown benchmark '" + std::string(name) + "'");
}

Dataset sample_initial_design(const HighFidelityModel& model, std::size_t n_init,
                              std::uint64_t seed)
{
  if (n_init < 2)
    throw ConfigError("initial design needs n_init >= 2, got " + std::to_string(n_init));

  Rng rng(seed);
  const std::size_t d = model.dim();
  std::vector<std::vector<std::size_t>> strata(d);
  for (std::size_t k = 0; k < d; ++k) {
    strata[k].resize(n_init);
    for (std::size_t i = 0; i < n_init; ++i)
      strata[k][i] = i;
    rng.shuffle(strata[k]);
  }

  Dataset data;
  data.bounds = model.bounds;
  for (std::size_t i = 0; i < n_init; ++i) {
    Vector x(d);
    for (std::size_t k = 0; k < d; ++k) {
      const Interval& iv = model.bounds[k];
      const double u = (static_cast<double>(strata[k][i]) + rng.uniform()) /
                       static_cast<double>(n_init);
      x[k] = std::min(iv.upper, iv.lower + u * iv.width());
    }
    data.add(x, eval_benchmark(model, x));
  }
  return data;
}

} // namespace bayinv
