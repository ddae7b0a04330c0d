#include "bayinv/grid.hpp"

#include "bayinv/errors.hpp"

namespace bayinv {

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
  if (n == 0)
    throw ConfigError("linspace needs at least one point");
  if (n == 1)
    return {0.5 * (lo + hi)};
  std::vector<double> v(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + step * static_cast<double>(i);
  v.back() = hi;
  return v;
}

std::vector<Vector> tensor_grid(const Box& box, std::size_t n, bool cell_centred)
{
  const std::size_t d = box.dim();
  std::vector<std::vector<double>> axes(d);
  for (std::size_t k = 0; k < d; ++k) {
    const Interval& iv = box[k];
    if (cell_centred) {
      axes[k].resize(n);
      for (std::size_t i = 0; i < n; ++i)
        axes[k][i] = iv.lower + iv.width() * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    } else {
      axes[k] = linspace(iv.lower, iv.upper, n);
    }
  }

  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k)
    total *= n;
  std::vector<Vector> pts(total, Vector(static_cast<Eigen::Index>(d)));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t k = d; k-- > 0;) {
      pts[idx][static_cast<Eigen::Index>(k)] = axes[k][rem % n];
      rem /= n;
    }
  }
  return pts;
}

} // namespace bayinv
