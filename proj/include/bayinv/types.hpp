#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace bayinv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Closed interval [lower, upper].
struct Interval
{
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  double midpoint() const { return 0.5 * (lower + upper); }
  bool contains(double x) const { return x >= lower && x <= upper; }
};

/// Axis-aligned box, one interval per dimension.
class Box
{
public:
  Box() = default;
  Box(std::initializer_list<Interval> dims);
  explicit Box(std::vector<Interval> dims);

  std::size_t dim() const { return dims_.size(); }
  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  const std::vector<Interval>& intervals() const { return dims_; }

  Vector lower() const;
  Vector upper() const;
  Vector widths() const;
  Vector midpoint() const;
  double max_width() const;

  bool contains(const Vector& x) const;
  /// Clamp x into the box, coordinate-wise.
  Vector project(const Vector& x) const;
  /// Throws ShapeError on length mismatch and DomainError naming the first
  /// violated dimension.
  void check(const Vector& x, const std::string& what = "point") const;

private:
  std::vector<Interval> dims_;
};

/// Ordered (input, output) pairs on a bounded domain.
struct Dataset
{
  Box bounds;
  std::vector<Vector> inputs;
  std::vector<double> outputs;

  std::size_t size() const { return inputs.size(); }
  std::size_t dim() const { return bounds.dim(); }
  bool empty() const { return inputs.empty(); }

  void add(Vector x, double y);
  /// Inputs packed row-wise into an n x d matrix.
  Matrix input_matrix() const;
  Vector output_vector() const;
};

} // namespace bayinv
