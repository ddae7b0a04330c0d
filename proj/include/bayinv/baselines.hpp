#pragma once

#include "bayinv/types.hpp"

#include <string>

namespace bayinv {

enum class BaselineFamily
{
  lagrange,
  legendre,
  cubic_spline
};

std::string to_string(BaselineFamily family);
BaselineFamily parse_baseline_family(const std::string& name);

/// One-dimensional deterministic interpolant or regressor fitted to a dataset.
struct DeterministicSurrogate
{
  BaselineFamily family = BaselineFamily::lagrange;
  /// Strictly increasing node abscissae and their outputs.
  Vector nodes;
  Vector values;
  /// Lagrange: barycentric weights. Legendre: expansion coefficients on the
  /// affine map of the domain to [-1, 1]. Spline: second derivatives at nodes.
  Vector coefficients;
  Interval domain;

  int degree() const;
};

/// Fits a baseline on 1D data. Throws ShapeError for d != 1 and
/// DegenerateDataError for duplicate nodes or too few points.
DeterministicSurrogate fit_deterministic(BaselineFamily family, const Dataset& data);

/// Throws DomainError outside the surrogate's domain.
double eval_deterministic(const DeterministicSurrogate& s, double x);

} // namespace bayinv
