#include "bayinv/optimize.hpp"

#include "bayinv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace bayinv {

Vector fd_gradient(const Objective& f, const Vector& x, const Box& box, const Vector& step)
{
  const Eigen::Index d = x.size();
  Vector g(d);
  Vector xp = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = step[i];
    const double lo = box[static_cast<std::size_t>(i)].lower;
    const double hi = box[static_cast<std::size_t>(i)].upper;
    const double xi = x[i];
    if (xi - h >= lo && xi + h <= hi) {
      xp[i] = xi + h;
      const double fp = f(xp);
      xp[i] = xi - h;
      const double fm = f(xp);
      g[i] = (fp - fm) / (2.0 * h);
    } else if (xi + h <= hi) {
      const double f0 = f(x);
      xp[i] = xi + h;
      g[i] = (f(xp) - f0) / h;
    } else {
      const double f0 = f(x);
      xp[i] = xi - h;
      g[i] = (f0 - f(xp)) / h;
    }
    xp[i] = xi;
  }
  return g;
}

Matrix fd_hessian(const Objective& f, const Vector& x, const Box& box, const Vector& step)
{
  const Eigen::Index d = x.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& iv = box[static_cast<std::size_t>(i)];
    if (x[i] - step[i] < iv.lower || x[i] + step[i] > iv.upper)
      throw DomainError("finite-difference Hessian stencil leaves the box in dimension " +
                        std::to_string(i));
  }

  Matrix h(d, d);
  const double f0 = f(x);
  Vector xp = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    xp[i] = x[i] + step[i];
    const double fp = f(xp);
    xp[i] = x[i] - step[i];
    const double fm = f(xp);
    xp[i] = x[i];
    h(i, i) = (fp - 2.0 * f0 + fm) / (step[i] * step[i]);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      auto eval = [&](double si, double sj) {
        xp[i] = x[i] + si * step[i];
        xp[j] = x[j] + sj * step[j];
        const double v = f(xp);
        xp[i] = x[i];
        xp[j] = x[j];
        return v;
      };
      const double mixed =
        (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * step[i] * step[j]);
      h(i, j) = mixed;
      h(j, i) = mixed;
    }
  }
  return 0.5 * (h + h.transpose());
}

namespace {

bool at_lower(const Box& box, const Vector& x, Eigen::Index i)
{
  return x[i] <= box[static_cast<std::size_t>(i)].lower;
}

bool at_upper(const Box& box, const Vector& x, Eigen::Index i)
{
  return x[i] >= box[static_cast<std::size_t>(i)].upper;
}

bool touches_bound(const Box& box, const Vector& x)
{
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (at_lower(box, x, i) || at_upper(box, x, i))
      return true;
  return false;
}

} // namespace

MinimizeResult minimize_box_bfgs(const Objective& f, const Vector& x0, const Box& box,
                                 const QuasiNewtonOptions& options)
{
  const Eigen::Index d = x0.size();
  if (static_cast<std::size_t>(d) != box.dim())
    throw ShapeError("start point dimension does not match the box");

  MinimizeResult res;
  int evaluations = 0;
  auto counted = [&](const Vector& p) {
    ++evaluations;
    return f(p);
  };
  const Vector step = box.widths() * options.fd_relative_step;
  auto gradient = [&](const Vector& p) {
    evaluations += static_cast<int>(2 * d);
    return fd_gradient(f, p, box, step);
  };

  Vector x = box.project(x0);
  double fx = counted(x);
  if (!std::isfinite(fx)) {
    res.x = x;
    res.value = fx;
    res.evaluations = evaluations;
    res.status = "non-finite objective at start";
    return res;
  }
  Vector g = gradient(x);
  Matrix hinv = Matrix::Identity(d, d);
  bool identity_h = true;
  bool scaled = false;
  std::vector<bool> prev_free(static_cast<std::size_t>(d), true);

  int it = 0;
  for (; it < options.max_iter; ++it) {
    std::vector<bool> free(static_cast<std::size_t>(d));
    Vector pg = g;
    for (Eigen::Index i = 0; i < d; ++i) {
      const bool active = (at_lower(box, x, i) && g[i] > 0.0) || (at_upper(box, x, i) && g[i] < 0.0);
      free[static_cast<std::size_t>(i)] = !active;
      if (active)
        pg[i] = 0.0;
    }
    if (!g.allFinite()) {
      res.status = "non-finite gradient";
      break;
    }
    if (pg.lpNorm<Eigen::Infinity>() <= options.gtol) {
      res.converged = true;
      res.status = "projected gradient below tolerance";
      break;
    }
    if (fx <= options.f_target) {
      res.converged = true;
      res.status = "objective reached target";
      break;
    }
    if (free != prev_free) {
      hinv.setIdentity();
      identity_h = true;
      scaled = false;
    }
    prev_free = free;

    bool accepted = false;
    Vector xt;
    double ft = 0.0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Vector dir = -(hinv * pg);
      for (Eigen::Index i = 0; i < d; ++i)
        if (!free[static_cast<std::size_t>(i)])
          dir[i] = 0.0;
      if (g.dot(dir) >= 0.0) {
        hinv.setIdentity();
        identity_h = true;
        scaled = false;
        dir = -pg;
      }
      if (identity_h && !scaled) {
        // first steepest-descent step: limit the move to a tenth of the box
        Vector rel = dir.cwiseAbs().cwiseQuotient(box.widths());
        const double m = rel.maxCoeff();
        if (m > 0.1)
          dir *= 0.1 / m;
      }

      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        xt = box.project(x + alpha * dir);
        if ((xt - x).lpNorm<Eigen::Infinity>() == 0.0)
          break;
        ft = counted(xt);
        if (std::isfinite(ft) && ft <= fx + 1e-4 * g.dot(xt - x)) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (identity_h)
          break;
        hinv.setIdentity();
        identity_h = true;
        scaled = false;
      }
    }
    if (!accepted) {
      // no representable decrease left along the projected path
      res.converged = true;
      res.status = "line search stalled";
      break;
    }

    const Vector s = xt - x;
    const Vector gt = gradient(xt);
    const Vector y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (!scaled) {
        hinv = Matrix::Identity(d, d) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix id = Matrix::Identity(d, d);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) +
             rho * s * s.transpose();
      identity_h = false;
    }
    x = xt;
    fx = ft;
    g = gt;
  }
  if (it == options.max_iter)
    res.status = "iteration limit";

  res.x = x;
  res.value = fx;
  res.iterations = it;
  res.evaluations = evaluations;
  res.on_bound = touches_bound(box, x);
  return res;
}

MinimizeResult minimize_nelder_mead(const Objective& f, const Vector& x0, const Box& box,
                                    const NelderMeadOptions& options)
{
  const Eigen::Index d = x0.size();
  if (static_cast<std::size_t>(d) != box.dim())
    throw ShapeError("start point dimension does not match the box");
  const Vector widths = box.widths();

  int evaluations = 0;
  auto eval = [&](const Vector& p) {
    ++evaluations;
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> pts;
  std::vector<double> vals;
  Vector start = box.project(x0);
  pts.push_back(start);
  vals.push_back(eval(start));
  for (Eigen::Index i = 0; i < d; ++i) {
    Vector p = start;
    const double h = options.initial_step * widths[i];
    p[i] = (p[i] + h <= box[static_cast<std::size_t>(i)].upper) ? p[i] + h : p[i] - h;
    p = box.project(p);
    pts.push_back(p);
    vals.push_back(eval(p));
  }

  const auto n = static_cast<std::size_t>(d + 1);
  std::vector<std::size_t> order(n);
  MinimizeResult res;
  int it = 0;
  while (evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 2];

    double spread = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      spread = std::max(spread, (pts[k] - pts[best]).cwiseQuotient(widths).lpNorm<Eigen::Infinity>());
    const double fspread = vals[worst] - vals[best];
    if (spread <= options.xtol ||
        (std::isfinite(fspread) && fspread <= options.ftol * (std::abs(vals[best]) + options.ftol))) {
      res.converged = true;
      res.status = "simplex converged";
      break;
    }
    ++it;

    Vector centroid = Vector::Zero(d);
    for (std::size_t k = 0; k < n; ++k)
      if (k != worst)
        centroid += pts[k];
    centroid /= static_cast<double>(d);

    const Vector xr = box.project(centroid + (centroid - pts[worst]));
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const Vector xe = box.project(centroid + 2.0 * (centroid - pts[worst]));
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Vector xc = outside ? box.project(centroid + 0.5 * (xr - centroid))
                              : box.project(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (k == best)
        continue;
      pts[k] = box.project(pts[best] + 0.5 * (pts[k] - pts[best]));
      vals[k] = eval(pts[k]);
    }
  }
  if (!res.converged)
    res.status = "evaluation limit";

  const auto best_it = std::min_element(vals.begin(), vals.end());
  const auto bi = static_cast<std::size_t>(best_it - vals.begin());
  res.x = pts[bi];
  res.value = vals[bi];
  res.iterations = it;
  res.evaluations = evaluations;
  res.on_bound = touches_bound(box, res.x);
  return res;
}

} // namespace bayinv
