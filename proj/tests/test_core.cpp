#include "bayinv/errors.hpp"
#include "bayinv/exec.hpp"
#include "bayinv/grid.hpp"
#include "bayinv/optimize.hpp"
#include "bayinv/rng.hpp"
#include "bayinv/types.hpp"

#include "doctest.h"

#include <cmath>
#include <stdexcept>

using namespace bayinv;

TEST_CASE("box basics")
{
  const Box b{{-1.0, 1.0}, {2.0, 5.0}};
  CHECK(b.dim() == 2);
  CHECK(b.widths() == Vector((Vector(2) << 2.0, 3.0).finished()));
  CHECK(b.max_width() == 3.0);
  Vector inside(2);
  inside << 0.0, 2.0;
  CHECK(b.contains(inside));
  Vector outside(2);
  outside << 1.5, 6.0;
  CHECK(!b.contains(outside));
  CHECK(b.project(outside) == Vector((Vector(2) << 1.0, 5.0).finished()));
  CHECK_THROWS_AS(b.check(outside), DomainError);
  CHECK_THROWS_AS(b.check(Vector::Zero(3)), ShapeError);
  CHECK_THROWS_AS((Box{{1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS((Box{{2.0, 1.0}}), ConfigError);
}

TEST_CASE("error types carry exit codes")
{
  CHECK(ConfigError("x").exit_code() == ExitCode::config_error);
  CHECK(DomainError("x").exit_code() == ExitCode::config_error);
  CHECK(NumericalError("x").exit_code() == ExitCode::numerical_failure);
  CHECK(DegenerateDataError("x").exit_code() == ExitCode::numerical_failure);
  CHECK(InferenceError("x").exit_code() == ExitCode::inference_failure);
  try {
    NumericalError("cholesky failed").rethrow_as("iteration 3: cholesky failed");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()) == "iteration 3: cholesky failed");
  }
}

TEST_CASE("random streams")
{
  Rng a = Rng::stream(5, 1);
  Rng b = Rng::stream(5, 1);
  Rng c = Rng::stream(5, 2);
  const double x = a.uniform();
  CHECK(x == b.uniform());
  CHECK(x != c.uniform());
  CHECK(Rng::derive_seed(1, 2) != Rng::derive_seed(2, 1));
  Rng r(0);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("grids")
{
  const auto l = linspace(-1.0, 1.0, 5);
  CHECK(l == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  const Box b{{0.0, 1.0}, {10.0, 12.0}};
  const auto g = tensor_grid(b, 3, false);
  REQUIRE(g.size() == 9);
  CHECK(g[1][0] == 0.0);
  CHECK(g[1][1] == 11.0);
  CHECK(g[3][0] == 0.5);
  const auto cc = tensor_grid(Box{{0.0, 1.0}}, 4, true);
  CHECK(cc.front()[0] == 0.125);
  CHECK(cc.back()[0] == 0.875);
}

TEST_CASE("parallel loop rethrows the lowest failing index")
{
  std::vector<int> hits(100, 0);
  for_each_index(Exec::parallel, 100, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits)
    CHECK(h == 1);
  try {
    for_each_index(Exec::parallel, 100, [](std::size_t i) {
      if (i == 17 || i == 60)
        throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
  CHECK(worker_threads() >= 1);
}

TEST_CASE("finite differences")
{
  const Objective f = [](const Vector& x) { return x[0] * x[0] * x[1] + std::sin(x[1]); };
  const Box box{{-2.0, 2.0}, {-2.0, 2.0}};
  Vector x(2);
  x << 0.7, -0.4;
  const Vector h = Vector::Constant(2, 1e-5);
  const Vector g = fd_gradient(f, x, box, h);
  CHECK(g[0] == doctest::Approx(2.0 * 0.7 * -0.4).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(0.49 + std::cos(-0.4)).epsilon(1e-8));
  const Matrix hess = fd_hessian(f, x, box, Vector::Constant(2, 1e-4));
  CHECK(hess(0, 0) == doctest::Approx(-0.8).epsilon(1e-5));
  CHECK(hess(0, 1) == doctest::Approx(1.4).epsilon(1e-5));
  CHECK(hess(1, 0) == hess(0, 1));
  CHECK(hess(1, 1) == doctest::Approx(-std::sin(-0.4)).epsilon(1e-4));
  Vector edge(2);
  edge << 2.0, 0.0;
  CHECK_THROWS_AS(fd_hessian(f, edge, box, Vector::Constant(2, 1e-4)), DomainError);
}

TEST_CASE("box-constrained minimisation")
{
  const Objective rosen = [](const Vector& x) {
    return (1.0 - x[0]) * (1.0 - x[0]) + 100.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]);
  };
  const Box box{{-2.0, 2.0}, {-1.0, 3.0}};
  Vector x0(2);
  x0 << -1.2, 1.0;
  const MinimizeResult r = minimize_box_bfgs(rosen, x0, box);
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 1.0) < 1e-4);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-4);
  CHECK(!r.on_bound);

  // unconstrained minimum at (3, -2) lies outside; the solution sits on the corner
  const Objective bowl = [](const Vector& x) {
    return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 2.0) * (x[1] + 2.0);
  };
  const MinimizeResult c = minimize_box_bfgs(bowl, Vector::Zero(2), box);
  CHECK(c.x[0] == doctest::Approx(2.0));
  CHECK(c.x[1] == doctest::Approx(-1.0));
  CHECK(c.on_bound);

  const MinimizeResult nm = minimize_nelder_mead(bowl, Vector::Zero(2), box);
  CHECK(std::abs(nm.x[0] - 2.0) < 1e-4);
  CHECK(std::abs(nm.x[1] + 1.0) < 1e-4);
  Vector inner(2);
  inner << 0.5, 0.5;
  const Objective quad = [](const Vector& x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + 2.0 * (x[1] - 0.6) * (x[1] - 0.6);
  };
  const MinimizeResult q = minimize_nelder_mead(quad, inner, Box{{0.0, 1.0}, {0.0, 1.0}});
  CHECK(std::abs(q.x[0] - 0.3) < 1e-4);
  CHECK(std::abs(q.x[1] - 0.6) < 1e-4);
}
