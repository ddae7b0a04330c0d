#pragma once

#include "bayinv/types.hpp"

#include <functional>
#include <limits>
#include <string>

namespace bayinv {

using Objective = std::function<double(const Vector&)>;

/// Central-difference gradient with per-dimension step h_i; the stencil is
/// switched to one-sided differences where a central stencil would leave the
/// box, so f is never evaluated outside it.
Vector fd_gradient(const Objective& f, const Vector& x, const Box& box, const Vector& step);

/// Central-difference Hessian, symmetrized. Requires the full stencil
/// x +/- h_i +/- h_j to lie inside the box (throws DomainError otherwise).
Matrix fd_hessian(const Objective& f, const Vector& x, const Box& box, const Vector& step);

struct MinimizeResult
{
  Vector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  /// At least one coordinate sits on a bound face at termination.
  bool on_bound = false;
  std::string status;
};

struct QuasiNewtonOptions
{
  int max_iter = 400;
  /// Projected-gradient infinity-norm tolerance.
  double gtol = 1e-10;
  /// Stop when f <= target (e.g. an exact zero of a least-squares functional).
  double f_target = -std::numeric_limits<double>::infinity();
  /// Finite-difference step as a fraction of each box width.
  double fd_relative_step = 1e-7;
};

/// Bounded quasi-Newton minimization: BFGS inverse-Hessian updates on the free
/// variables, projection onto the box, and an Armijo backtracking search along
/// the projected path. Gradients are finite differences of f.
MinimizeResult minimize_box_bfgs(const Objective& f, const Vector& x0, const Box& box,
                                 const QuasiNewtonOptions& options = {});

struct NelderMeadOptions
{
  int max_evaluations = 400;
  /// Initial simplex edge as a fraction of each box width.
  double initial_step = 0.15;
  double xtol = 1e-7;
  double ftol = 1e-10;
};

/// Derivative-free Nelder-Mead with every trial point clamped into the box.
/// Non-finite objective values are treated as +infinity.
MinimizeResult minimize_nelder_mead(const Objective& f, const Vector& x0, const Box& box,
                                    const NelderMeadOptions& options = {});

} // namespace bayinv
