#pragma once

#include <vector>

namespace heis {

/// Element (x, y, tau) of the Heisenberg group H_n.
struct GroupPoint {
  std::vector<double> x;
  std::vector<double> y;
  double tau = 0.0;

  GroupPoint() = default;
  GroupPoint(std::vector<double> x_, std::vector<double> y_, double tau_);

  /// The identity of H_n.
  static GroupPoint identity(int n);
  /// Convenience constructor for H_1.
  static GroupPoint h1(double x, double y, double tau);

  int dim() const { return static_cast<int>(x.size()); }
  bool operator==(const GroupPoint&) const = default;
};

struct GroupParams {
  int n = 1;

  explicit GroupParams(int n_);
  int homogeneous_dimension() const { return 2 * n + 2; }
};

GroupPoint compose(const GroupPoint& a, const GroupPoint& b);
GroupPoint inverse(const GroupPoint& a);

/// Homogeneous gauge ((|x|^2+|y|^2)^2 + tau^2)^{1/4}.
double gauge(const GroupPoint& a);
/// Squared horizontal norm |x|^2 + |y|^2.
double horizontal_norm2(const GroupPoint& a);

/// Left-invariant distance d(a, b) = |b^{-1} o a|.
double distance(const GroupPoint& a, const GroupPoint& b);

/// Anisotropic dilation (rx, ry, r^2 tau).
GroupPoint dilate(double r, const GroupPoint& a);

/// 1 + 2/Q.
double fujita_exponent(const GroupParams& params);

}  // namespace heis
