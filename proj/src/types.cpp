#include "bayinv/types.hpp"

#include "bayinv/errors.hpp"

#include <algorithm>
#include <sstream>

namespace bayinv {

Box::Box(std::initializer_list<Interval> dims) : Box(std::vector<Interval>(dims)) {}

Box::Box(std::vector<Interval> dims) : dims_(std::move(dims))
{
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (!(dims_[i].lower < dims_[i].upper)) {
      std::ostringstream msg;
      msg << "box dimension " << i << " has lower >= upper (" << dims_[i].lower
          << ", " << dims_[i].upper << ")";
      throw ConfigError(msg.str());
    }
  }
}

Vector Box::lower() const
{
  Vector v(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    v[i] = dims_[i].lower;
  return v;
}

Vector Box::upper() const
{
  Vector v(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    v[i] = dims_[i].upper;
  return v;
}

Vector Box::widths() const
{
  Vector v(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    v[i] = dims_[i].width();
  return v;
}

Vector Box::midpoint() const
{
  Vector v(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    v[i] = dims_[i].midpoint();
  return v;
}

double Box::max_width() const
{
  double w = 0.0;
  for (const auto& d : dims_)
    w = std::max(w, d.width());
  return w;
}

bool Box::contains(const Vector& x) const
{
  if (static_cast<std::size_t>(x.size()) != dim())
    return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (!dims_[i].contains(x[i]))
      return false;
  return true;
}

Vector Box::project(const Vector& x) const
{
  Vector p = x;
  for (std::size_t i = 0; i < dim(); ++i)
    p[i] = std::clamp(p[i], dims_[i].lower, dims_[i].upper);
  return p;
}

void Box::check(const Vector& x, const std::string& what) const
{
  if (static_cast<std::size_t>(x.size()) != dim()) {
    std::ostringstream msg;
    msg << what << " has dimension " << x.size() << ", expected " << dim();
    throw ShapeError(msg.str());
  }
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!dims_[i].contains(x[i])) {
      std::ostringstream msg;
      msg.precision(17);
      msg << what << " coordinate " << i << " = " << x[i] << " outside ["
          << dims_[i].lower << ", " << dims_[i].upper << "]";
      throw DomainError(msg.str());
    }
  }
}

void Dataset::add(Vector x, double y)
{
  inputs.push_back(std::move(x));
  outputs.push_back(y);
}

Matrix Dataset::input_matrix() const
{
  Matrix m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = inputs[i].transpose();
  return m;
}

Vector Dataset::output_vector() const
{
  return Eigen::Map<const Vector>(outputs.data(), static_cast<Eigen::Index>(outputs.size()));
}

} // namespace bayinv
