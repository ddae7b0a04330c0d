#pragma once

#include "bayinv/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bayinv {

/// Analytical high-fidelity model: the ground truth f(x) on a box.
struct HighFidelityModel
{
  using Evaluator = double (*)(const Vector&);

  std::string name;
  std::string description;
  Box bounds;
  Evaluator evaluator = nullptr;

  std::size_t dim() const { return bounds.dim(); }
};

/// Exact value of the benchmark at x. Throws ShapeError / DomainError.
double eval_benchmark(const HighFidelityModel& model, const Vector& x);

/// Registered names: mixed1d, levy1d, griewank1d, forrester1d, mixed2d,
/// rosenbrock2d.
const std::vector<std::string>& benchmark_names();

/// Registry lookup; unknown names raise ConfigError.
const HighFidelityModel& find_benchmark(std::string_view name);

/// Stratified (Latin-hypercube style) initial design: each dimension is cut
/// into n_init equal strata, every stratum gets exactly one jittered point,
/// and strata are paired across dimensions by seeded permutations.
Dataset sample_initial_design(const HighFidelityModel& model, std::size_t n_init,
                              std::uint64_t seed);

namespace formulas {
double mixed_1d(const Vector& x);
double levy_1d(const Vector& x);
double griewank_1d(const Vector& x);
double forrester_1d(const Vector& x);
double mixed_2d(const Vector& x);
double rosenbrock_2d(const Vector& x);
} // namespace formulas

} // namespace bayinv
