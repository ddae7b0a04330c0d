#include "bayinv/errors.hpp"
#include "bayinv/gp.hpp"
#include "bayinv/rng.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace bayinv;

namespace {

Vector v1(double x)
{
  return Vector::Constant(1, x);
}

Dataset dataset_1d(Box box, std::initializer_list<std::pair<double, double>> pts)
{
  Dataset d;
  d.bounds = std::move(box);
  for (const auto& [x, y] : pts)
    d.add(v1(x), y);
  return d;
}

Dataset random_dataset(Rng& rng, const Box& box, std::size_t n)
{
  Dataset d;
  d.bounds = box;
  for (std::size_t i = 0; i < n; ++i)
    d.add(rng.uniform(box), rng.uniform(-2.0, 2.0));
  return d;
}

oracle::Mat dense_covariance(const KernelSpec& spec, const Dataset& d, double diag)
{
  const std::size_t n = d.size();
  oracle::Mat a(n, oracle::Vec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double r2 = (d.inputs[i] - d.inputs[j]).squaredNorm();
      a[i][j] = spec.family == KernelFamily::rbf
                  ? oracle::rbf(r2, spec.length_scale, spec.signal_variance)
                  : oracle::matern52(r2, spec.length_scale, spec.signal_variance);
      if (i == j)
        a[i][j] += diag;
    }
  return a;
}

} // namespace

TEST_CASE("kernel values")
{
  KernelSpec rbf{KernelFamily::rbf, 1.0, 1.0};
  KernelSpec mat{KernelFamily::matern52, 1.0, 2.5};
  const Vector a = Vector::Zero(2);
  Vector b(2);
  b << 1.0, 1.0;

  CHECK(kernel_eval(rbf, a, a) == 1.0);
  CHECK(kernel_eval(mat, b, b) == 2.5);
  CHECK(kernel_eval(rbf, a, b) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(std::exp(-1.0) == doctest::Approx(0.367879).epsilon(1e-6));

  for (double ell : {0.3, 1.0, 4.0})
    for (double r : {0.0, 0.2, 1.0, 3.7}) {
      KernelSpec m{KernelFamily::matern52, ell, 1.7};
      KernelSpec g{KernelFamily::rbf, ell, 1.7};
      const Vector x = v1(0.5);
      const Vector y = v1(0.5 + r);
      CHECK(kernel_eval(m, x, y) == doctest::Approx(oracle::matern52(r * r, ell, 1.7)).epsilon(1e-14));
      CHECK(kernel_eval(g, x, y) == doctest::Approx(oracle::rbf(r * r, ell, 1.7)).epsilon(1e-14));
    }

  CHECK(mat.smoothness() == 2.5);
  CHECK_THROWS_AS((KernelSpec{KernelFamily::rbf, 0.0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((KernelSpec{KernelFamily::rbf, 1.0, -1.0}.validate()), ConfigError);
  CHECK_THROWS_AS(kernel_eval(rbf, a, v1(0.0)), ShapeError);
  CHECK(parse_kernel_family("rbf") == KernelFamily::rbf);
  CHECK(to_string(KernelFamily::matern52) == "matern52");
  CHECK_THROWS_AS(parse_kernel_family("linear"), ConfigError);
}

TEST_CASE("property: kernels are symmetric and Gram matrices are PSD")
{
  Rng rng(11);
  const Box box{{-3.0, 3.0}, {-3.0, 3.0}};
  for (int trial = 0; trial < 100; ++trial) {
    const Dataset d = random_dataset(rng, box, 10);
    for (KernelFamily f : {KernelFamily::rbf, KernelFamily::matern52}) {
      const KernelSpec spec{f, rng.uniform(0.1, 3.0), rng.uniform(0.1, 5.0)};
      const Matrix k = gram_matrix(spec, d);
      CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(k).eigenvalues().minCoeff();
      CHECK(lmin >= -1e-8);
    }
  }
}

TEST_CASE("fit and predict on small data")
{
  const KernelSpec rbf{KernelFamily::rbf, 1.0, 1.0};
  const Dataset two = dataset_1d(Box{{-1.0, 2.0}}, {{0.0, 0.0}, {1.0, 1.0}});
  const GpModel m = gp_fit(two, rbf, 1e-6);
  CHECK(std::abs(m.predict_mean(v1(0.0))) < 1e-4);

  // conditioning system at x = 0.5 solved by elimination
  const auto a = dense_covariance(rbf, two, 1e-6 + m.jitter());
  const oracle::Vec alpha = oracle::solve(a, {0.0, 1.0});
  const oracle::Vec ks = {oracle::rbf(0.25, 1.0, 1.0), oracle::rbf(0.25, 1.0, 1.0)};
  const oracle::Vec w = oracle::solve(a, ks);
  const Prediction p = gp_predict(m, v1(0.5));
  CHECK(p.mean == doctest::Approx(oracle::dot(ks, alpha)).epsilon(1e-10));
  CHECK(p.variance == doctest::Approx(1.0 - oracle::dot(ks, w)).epsilon(1e-8));

  const Dataset one = dataset_1d(Box{{-1.0, 1.0}}, {{0.0, 3.0}});
  CHECK(gp_fit(one, rbf, 1e-6).predict_mean(v1(0.0)) == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("prediction at training inputs and far away")
{
  const KernelSpec spec{KernelFamily::matern52, 0.5, 2.0};
  const Dataset d =
    dataset_1d(Box{{-20.0, 20.0}}, {{-1.0, 0.3}, {0.0, -0.7}, {0.8, 1.1}, {1.5, 0.2}});
  const GpModel m = gp_fit(d, spec, 1e-6);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Prediction p = m.predict(d.inputs[i]);
    CHECK(std::abs(p.mean - d.outputs[i]) < 1e-3);
    CHECK(p.variance <= 1e-4);
    CHECK(p.variance >= 0.0);
  }
  const Prediction far = m.predict(v1(19.0));
  CHECK(std::abs(far.mean) < 1e-6);
  CHECK(std::abs(far.variance - 2.0) < 1e-6);
  CHECK(far.stddev() == doctest::Approx(std::sqrt(far.variance)));
  CHECK_THROWS_AS(m.predict(Vector::Zero(2)), ShapeError);
}

TEST_CASE("property: predictions match a dense-solve oracle")
{
  Rng rng(5);
  const Box box{{0.0, 4.0}, {0.0, 4.0}};
  for (int trial = 0; trial < 50; ++trial) {
    const Dataset d = random_dataset(rng, box, 5);
    const KernelFamily f = trial % 2 ? KernelFamily::rbf : KernelFamily::matern52;
    const KernelSpec spec{f, rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    const GpModel m = gp_fit(d, spec, 1e-6);
    const auto a = dense_covariance(spec, d, 1e-6 + m.jitter());
    const oracle::Vec alpha = oracle::solve(a, oracle::Vec(d.outputs.begin(), d.outputs.end()));
    const Vector q = rng.uniform(box);
    oracle::Vec ks(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double r2 = (q - d.inputs[i]).squaredNorm();
      ks[i] = f == KernelFamily::rbf ? oracle::rbf(r2, spec.length_scale, spec.signal_variance)
                                     : oracle::matern52(r2, spec.length_scale, spec.signal_variance);
    }
    const double mean = oracle::dot(ks, alpha);
    const double var = spec.signal_variance - oracle::dot(ks, oracle::solve(a, ks));
    const Prediction p = m.predict(q);
    CHECK(std::abs(p.mean - mean) <= 1e-8 * std::max(1.0, std::abs(mean)));
    CHECK(std::abs(p.variance - std::max(var, 0.0)) <= 1e-8 * std::max(1.0, std::abs(var)));
  }
}

TEST_CASE("batch prediction agrees with pointwise prediction in both modes")
{
  Rng rng(3);
  const Box box{{0.0, 1.0}};
  const Dataset d = random_dataset(rng, box, 8);
  const GpModel m = gp_fit(d, KernelSpec{KernelFamily::matern52, 0.2, 1.0}, 1e-6);
  std::vector<Vector> q;
  for (int i = 0; i < 300; ++i)
    q.push_back(rng.uniform(box));
  const auto serial = gp_predict_batch(m, q, Exec::serial);
  const auto parallel = gp_predict_batch(m, q, Exec::parallel);
  const auto means = gp_predict_mean_batch(m, q, Exec::parallel);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Prediction p = m.predict(q[i]);
    CHECK(serial[i].mean == p.mean);
    CHECK(parallel[i].mean == p.mean);
    CHECK(parallel[i].variance == p.variance);
    CHECK(means[i] == p.mean);
  }
}

TEST_CASE("log marginal likelihood")
{
  const KernelSpec spec{KernelFamily::rbf, 1.0, 1.0 - 1e-6};
  const Dataset single = dataset_1d(Box{{-1.0, 1.0}}, {{0.0, 0.0}});
  CHECK(gp_fit(single, spec, 1e-6).log_marginal_likelihood() ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-12));

  const Dataset d = dataset_1d(Box{{0.0, 3.0}}, {{0.0, 0.5}, {1.0, -0.4}, {2.0, 0.9}});
  Dataset d2 = d;
  for (auto& y : d2.outputs)
    y *= 2.0;
  CHECK(gp_fit(d2, spec, 1e-6).log_marginal_likelihood() <
        gp_fit(d, spec, 1e-6).log_marginal_likelihood());

  Rng rng(21);
  const Box box{{0.0, 3.0}, {0.0, 3.0}};
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset r = random_dataset(rng, box, 4);
    const KernelSpec s{KernelFamily::matern52, rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
    const GpModel m = gp_fit(r, s, 1e-4);
    const auto a = dense_covariance(s, r, 1e-4 + m.jitter());
    const oracle::Vec y(r.outputs.begin(), r.outputs.end());
    const double expected = -0.5 * oracle::dot(y, oracle::solve(a, y)) - 0.5 * oracle::log_det(a) -
                            2.0 * std::log(2.0 * std::numbers::pi);
    CHECK(log_marginal_likelihood(m) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("degenerate data")
{
  const KernelSpec spec;
  Dataset empty;
  empty.bounds = Box{{0.0, 1.0}};
  CHECK_THROWS_AS(gp_fit(empty, spec, 1e-6), DegenerateDataError);

  const Dataset dup = dataset_1d(Box{{0.0, 1.0}}, {{0.5, 1.0}, {0.5, 2.0}});
  CHECK_THROWS_AS(gp_fit(dup, spec, 0.0), DegenerateDataError);
  // with noise the duplicate pair is a legal regression problem
  const GpModel noisy = gp_fit(dup, spec, 1e-2);
  CHECK(noisy.predict_mean(v1(0.5)) == doctest::Approx(1.5).epsilon(1e-2));

  CHECK_THROWS_AS(gp_fit(dup, spec, -1.0), ConfigError);
}

TEST_CASE("nearly coincident inputs trigger jitter instead of failure")
{
  const KernelSpec spec{KernelFamily::rbf, 1.0, 1.0};
  const Dataset d = dataset_1d(Box{{0.0, 1.0}}, {{0.5, 1.0}, {0.5 + 1e-9, 1.0}, {0.7, 0.2}});
  const GpModel m = gp_fit(d, spec, 0.0);
  CHECK(m.jitter() > 0.0);
  CHECK(m.jitter() <= 1e-4);
  CHECK(std::isfinite(m.predict_mean(v1(0.6))));
}

TEST_CASE("hyperparameter bounds")
{
  const Dataset d = dataset_1d(Box{{-10.0, 10.0}}, {{-5.0, 1.0}, {0.0, 3.0}, {5.0, 2.0}});
  const auto b = hyperparameter_bounds(d);
  CHECK(b.length_scale.lower == doctest::Approx(0.2));
  CHECK(b.length_scale.upper == doctest::Approx(200.0));
  const double var = 2.0 / 3.0;
  CHECK(b.signal_variance.lower == doctest::Approx(1e-6));
  CHECK(b.signal_variance.upper == doctest::Approx(1e3 * var + 1e-6));
}

TEST_CASE("hyperparameter recovery from a GP draw")
{
  Rng rng(2024);
  const Box box{{0.0, 10.0}};
  Dataset d;
  d.bounds = box;
  for (int i = 0; i < 40; ++i)
    d.inputs.push_back(v1(10.0 * (i + rng.uniform()) / 40.0));
  const KernelSpec truth{KernelFamily::rbf, 1.0, 1.0};
  Matrix k = Matrix::Zero(40, 40);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j)
      k(i, j) = kernel_eval(truth, d.inputs[i], d.inputs[j]) + (i == j ? 1e-8 : 0.0);
  const Matrix l = k.llt().matrixL();
  Vector z(40);
  for (int i = 0; i < 40; ++i)
    z[i] = rng.normal();
  const Vector y = l * z;
  d.outputs.assign(y.data(), y.data() + 40);

  HyperparameterSearch search;
  search.seed = 1;
  const GpModel m = gp_optimize_hyperparameters(d, KernelFamily::rbf, 1e-6, search);
  CHECK(m.kernel().length_scale > 0.5);
  CHECK(m.kernel().length_scale < 2.0);

  HyperparameterSearch one;
  one.restarts = 1;
  one.seed = 9;
  const GpModel a = gp_optimize_hyperparameters(d, KernelFamily::matern52, 1e-6, one);
  const GpModel b = gp_optimize_hyperparameters(d, KernelFamily::matern52, 1e-6, one);
  CHECK(a.kernel().length_scale == b.kernel().length_scale);
  CHECK(a.kernel().signal_variance == b.kernel().signal_variance);

  HyperparameterSearch fixed;
  fixed.fixed_length_scale = 1.0;
  CHECK(gp_optimize_hyperparameters(d, KernelFamily::rbf, 1e-6, fixed).kernel().length_scale == 1.0);
}

TEST_CASE("constant outputs push the signal variance to its lower bound")
{
  const Dataset d =
    dataset_1d(Box{{0.0, 1.0}}, {{0.0, 2.0}, {0.3, 2.0}, {0.6, 2.0}, {0.9, 2.0}});
  HyperparameterSearch search;
  const GpModel m = gp_optimize_hyperparameters(d, KernelFamily::matern52, 1e-6, search);
  const auto b = hyperparameter_bounds(d);
  // var(y) = 0 collapses the interval onto its lower end
  CHECK(b.signal_variance.upper == b.signal_variance.lower);
  CHECK(m.kernel().signal_variance == b.signal_variance.lower);
  CHECK(std::isfinite(m.log_marginal_likelihood()));
}
