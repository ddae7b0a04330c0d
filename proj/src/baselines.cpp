#include "bayinv/baselines.hpp"

#include "bayinv/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace bayinv {

std::string to_string(BaselineFamily family)
{
  switch (family) {
  case BaselineFamily::lagrange:
    return "lagrange";
  case BaselineFamily::legendre:
    return "legendre";
  case BaselineFamily::cubic_spline:
    return "cubic_spline";
  }
  return "unknown";
}

BaselineFamily parse_baseline_family(const std::string& name)
{
  if (name == "lagrange")
    return BaselineFamily::lagrange;
  if (name == "legendre")
    return BaselineFamily::legendre;
  if (name == "cubic_spline")
    return BaselineFamily::cubic_spline;
  throw ConfigError("unknown baseline family '" + name + "'");
}

int DeterministicSurrogate::degree() const
{
  switch (family) {
  case BaselineFamily::lagrange:
    return static_cast<int>(nodes.size()) - 1;
  case BaselineFamily::legendre:
    return static_cast<int>(coefficients.size()) - 1;
  case BaselineFamily::cubic_spline:
    return 3;
  }
  return -1;
}

namespace {

constexpr int max_legendre_degree = 30;

double to_unit(const Interval& dom, double x)
{
  return 2.0 * (x - dom.lower) / dom.width() - 1.0;
}

// P_0..P_m at t by the three-term recurrence.
void legendre_row(double t, int m, double* out)
{
  out[0] = 1.0;
  if (m >= 1)
    out[1] = t;
  for (int k = 1; k < m; ++k)
    out[k + 1] = ((2.0 * k + 1.0) * t * out[k] - k * out[k - 1]) / (k + 1.0);
}

Vector barycentric_weights(const Interval& dom, const Vector& nodes)
{
  // computed on the [-1, 1] map; a common scale factor cancels in the formula
  const auto n = nodes.size();
  Vector w = Vector::Ones(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double tj = to_unit(dom, nodes[j]);
    for (Eigen::Index k = 0; k < n; ++k)
      if (k != j)
        w[j] /= (tj - to_unit(dom, nodes[k]));
  }
  return w;
}

Vector natural_spline_moments(const Vector& x, const Vector& y)
{
  const auto n = x.size();
  Vector m = Vector::Zero(n);
  if (n < 3)
    return m;
  // Thomas algorithm on the (n-2) interior equations
  const auto k = n - 2;
  std::vector<double> sub(k), diag(k), sup(k), rhs(k);
  for (Eigen::Index i = 1; i <= k; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    sub[i - 1] = h0;
    diag[i - 1] = 2.0 * (h0 + h1);
    sup[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  for (Eigen::Index i = 1; i < k; ++i) {
    const double f = sub[i] / diag[i - 1];
    diag[i] -= f * sup[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  m[k] = rhs[k - 1] / diag[k - 1];
  for (Eigen::Index i = k - 2; i >= 0; --i)
    m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
  return m;
}

} // namespace

DeterministicSurrogate fit_deterministic(BaselineFamily family, const Dataset& data)
{
  if (data.dim() != 1)
    throw ShapeError("deterministic baselines support 1D data only, got dimension " +
                     std::to_string(data.dim()));
  const std::size_t n = data.size();
  const std::size_t need = family == BaselineFamily::cubic_spline ? 2 : 1;
  if (n < need)
    throw DegenerateDataError(to_string(family) + " needs at least " + std::to_string(need) +
                              " points, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return data.inputs[a][0] < data.inputs[b][0];
  });

  DeterministicSurrogate s;
  s.family = family;
  s.domain = data.bounds[0];
  s.nodes.resize(static_cast<Eigen::Index>(n));
  s.values.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    s.nodes[static_cast<Eigen::Index>(i)] = data.inputs[order[i]][0];
    s.values[static_cast<Eigen::Index>(i)] = data.outputs[order[i]];
  }
  for (Eigen::Index i = 1; i < s.nodes.size(); ++i) {
    if (!(s.nodes[i] > s.nodes[i - 1])) {
      std::ostringstream msg;
      msg << "duplicate node at x = " << s.nodes[i];
      throw DegenerateDataError(msg.str());
    }
  }

  switch (family) {
  case BaselineFamily::lagrange:
    s.coefficients = barycentric_weights(s.domain, s.nodes);
    break;
  case BaselineFamily::legendre: {
    const int m = std::min(static_cast<int>(n) - 1, max_legendre_degree);
    Matrix v(static_cast<Eigen::Index>(n), m + 1);
    std::vector<double> row(static_cast<std::size_t>(m + 1));
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      legendre_row(to_unit(s.domain, s.nodes[i]), m, row.data());
      for (int k = 0; k <= m; ++k)
        v(i, k) = row[static_cast<std::size_t>(k)];
    }
    s.coefficients = v.colPivHouseholderQr().solve(s.values);
    break;
  }
  case BaselineFamily::cubic_spline:
    s.coefficients = natural_spline_moments(s.nodes, s.values);
    break;
  }
  return s;
}

double eval_deterministic(const DeterministicSurrogate& s, double x)
{
  if (!s.domain.contains(x)) {
    std::ostringstream msg;
    msg << "baseline query x = " << x << " outside [" << s.domain.lower << ", "
        << s.domain.upper << "]";
    throw DomainError(msg.str());
  }
  const auto n = s.nodes.size();

  switch (s.family) {
  case BaselineFamily::lagrange: {
    const double t = to_unit(s.domain, x);
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double diff = t - to_unit(s.domain, s.nodes[j]);
      if (diff == 0.0)
        return s.values[j];
      const double c = s.coefficients[j] / diff;
      num += c * s.values[j];
      den += c;
    }
    return num / den;
  }
  case BaselineFamily::legendre: {
    const int m = static_cast<int>(s.coefficients.size()) - 1;
    std::vector<double> row(static_cast<std::size_t>(m + 1));
    legendre_row(to_unit(s.domain, x), m, row.data());
    double v = 0.0;
    for (int k = 0; k <= m; ++k)
      v += s.coefficients[k] * row[static_cast<std::size_t>(k)];
    return v;
  }
  case BaselineFamily::cubic_spline: {
    // a natural spline continues linearly past its end nodes
    const auto last = n - 1;
    if (x < s.nodes[0]) {
      const double h = s.nodes[1] - s.nodes[0];
      const double slope = (s.values[1] - s.values[0]) / h -
                           h * (2.0 * s.coefficients[0] + s.coefficients[1]) / 6.0;
      return s.values[0] + slope * (x - s.nodes[0]);
    }
    if (x > s.nodes[last]) {
      const double h = s.nodes[last] - s.nodes[last - 1];
      const double slope = (s.values[last] - s.values[last - 1]) / h +
                           h * (s.coefficients[last - 1] + 2.0 * s.coefficients[last]) / 6.0;
      return s.values[last] + slope * (x - s.nodes[last]);
    }
    const double* begin = s.nodes.data();
    const double* it = std::upper_bound(begin, begin + n, x);
    Eigen::Index i = std::clamp<Eigen::Index>((it - begin) - 1, 0, n - 2);
    const double h = s.nodes[i + 1] - s.nodes[i];
    const double a = (s.nodes[i + 1] - x) / h;
    const double b = (x - s.nodes[i]) / h;
    const double mi = s.coefficients[i];
    const double mj = s.coefficients[i + 1];
    return a * s.values[i] + b * s.values[i + 1] +
           ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
  }
  }
  return 0.0;
}

} // namespace bayinv
