#include "bayinv/benchmarks.hpp"
#include "bayinv/errors.hpp"

#include "doctest.h"

#include <cmath>
#include <set>

using namespace bayinv;

namespace {

Vector v1(double x)
{
  return Vector::Constant(1, x);
}

Vector v2(double x, double y)
{
  Vector v(2);
  v << x, y;
  return v;
}

} // namespace

TEST_CASE("benchmark values at known points")
{
  CHECK(eval_benchmark(find_benchmark("rosenbrock2d"), v2(1.0, 1.0)) == 0.0);
  // sin(pi) is not exactly zero in floating point
  CHECK(std::abs(eval_benchmark(find_benchmark("levy1d"), v1(1.0))) < 1e-30);
  CHECK(eval_benchmark(find_benchmark("griewank1d"), v1(0.0)) == 0.0);

  const double mixed_at_2 = 1.0 + 0.9 * std::exp(-2.45) - 0.1 * std::cos(4.0);
  CHECK(eval_benchmark(find_benchmark("mixed1d"), v1(2.0)) == doctest::Approx(mixed_at_2).epsilon(1e-15));
  CHECK(mixed_at_2 == doctest::Approx(1.1430285899357946).epsilon(1e-15));

  // (6x - 2)^2 sin(12x - 4) vanishes at x = 1/3
  CHECK(std::abs(eval_benchmark(find_benchmark("forrester1d"), v1(1.0 / 3.0))) < 1e-15);
  // at (2, 2) the Gaussian term is 1 and the periodic terms are explicit
  const double mixed2d_at_22 = 1.0 + 0.2 * std::cos(6.0) * std::sin(6.0) + 0.1 * std::sin(20.0);
  CHECK(eval_benchmark(find_benchmark("mixed2d"), v2(2.0, 2.0)) == doctest::Approx(mixed2d_at_22).epsilon(1e-14));
}

TEST_CASE("benchmark registry and domains")
{
  const auto& names = benchmark_names();
  CHECK(names.size() == 6);
  for (const auto& n : names) {
    const auto& hf = find_benchmark(n);
    CHECK(hf.name == n);
    CHECK((hf.dim() == 1 || hf.dim() == 2));
    for (const auto& iv : hf.bounds.intervals())
      CHECK(iv.lower < iv.upper);
  }
  CHECK(find_benchmark("mixed1d").bounds[0].lower == -10.0);
  CHECK(find_benchmark("rosenbrock2d").bounds[1].upper == 2.0);
  CHECK_THROWS_AS(find_benchmark("nope"), ConfigError);
}

TEST_CASE("benchmark input validation")
{
  const auto& hf = find_benchmark("forrester1d");
  CHECK_THROWS_AS(eval_benchmark(hf, v1(1.5)), DomainError);
  CHECK_THROWS_AS(eval_benchmark(hf, v2(0.5, 0.5)), ShapeError);
  try {
    eval_benchmark(find_benchmark("rosenbrock2d"), v2(0.0, 5.0));
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("benchmarks are deterministic and finite on the closed box")
{
  for (const auto& n : benchmark_names()) {
    const auto& hf = find_benchmark(n);
    const Vector lo = hf.bounds.lower();
    const Vector hi = hf.bounds.upper();
    CHECK(std::isfinite(eval_benchmark(hf, lo)));
    CHECK(std::isfinite(eval_benchmark(hf, hi)));
    const Vector mid = hf.bounds.midpoint();
    CHECK(eval_benchmark(hf, mid) == eval_benchmark(hf, mid));
  }
}

TEST_CASE("initial design")
{
  const auto& hf = find_benchmark("mixed1d");
  const Dataset d = sample_initial_design(hf, 5, 0);
  REQUIRE(d.size() == 5);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(hf.bounds.contains(d.inputs[i]));
    CHECK(d.outputs[i] == eval_benchmark(hf, d.inputs[i]));
  }

  const Dataset two = sample_initial_design(find_benchmark("mixed2d"), 2, 7);
  REQUIRE(two.size() == 2);
  CHECK((two.inputs[0] - two.inputs[1]).norm() > 0.0);

  const Dataset again = sample_initial_design(hf, 5, 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d.inputs[i] == again.inputs[i]);
    CHECK(d.outputs[i] == again.outputs[i]);
  }

  CHECK_THROWS_AS(sample_initial_design(hf, 1, 0), ConfigError);
}

TEST_CASE("initial design covers every stratum")
{
  const auto& hf = find_benchmark("levy1d");
  const Dataset d = sample_initial_design(hf, 8, 3);
  std::set<int> strata;
  for (const auto& x : d.inputs)
    strata.insert(static_cast<int>(std::floor((x[0] + 6.0) / 12.0 * 8.0)));
  CHECK(strata.size() == 8);
}
