#include "heislab/group.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heislab/error.hpp"

namespace heis {

namespace {

void check_finite(const GroupPoint& a) {
  bool ok = std::isfinite(a.tau);
  for (double v : a.x) ok = ok && std::isfinite(v);
  for (double v : a.y) ok = ok && std::isfinite(v);
  if (!ok) throw InvalidArgument("group point has non-finite components");
}

void check_same_dim(const GroupPoint& a, const GroupPoint& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("dimension mismatch: n=" + std::to_string(a.dim()) +
                          " vs n=" + std::to_string(b.dim()));
  }
}

}  // namespace

GroupPoint::GroupPoint(std::vector<double> x_, std::vector<double> y_, double tau_)
    : x(std::move(x_)), y(std::move(y_)), tau(tau_) {
  if (x.size() != y.size() || x.empty()) {
    throw InvalidArgument("group point needs x and y of equal length n >= 1");
  }
  check_finite(*this);
}

GroupPoint GroupPoint::identity(int n) {
  if (n < 1) throw InvalidArgument("Heisenberg index n must be >= 1");
  return GroupPoint(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0.0);
}

GroupPoint GroupPoint::h1(double x, double y, double tau) { return GroupPoint({x}, {y}, tau); }

GroupParams::GroupParams(int n_) : n(n_) {
  if (n < 1) throw InvalidArgument("Heisenberg index n must be >= 1");
}

GroupPoint compose(const GroupPoint& a, const GroupPoint& b) {
  check_same_dim(a, b);
  const int n = a.dim();
  GroupPoint r;
  r.x.resize(n);
  r.y.resize(n);
  double twist = 0.0;
  for (int j = 0; j < n; ++j) {
    r.x[j] = a.x[j] + b.x[j];
    r.y[j] = a.y[j] + b.y[j];
    twist += a.x[j] * b.y[j] - b.x[j] * a.y[j];
  }
  r.tau = a.tau + b.tau + 2.0 * twist;
  return r;
}

GroupPoint inverse(const GroupPoint& a) {
  GroupPoint r = a;
  for (double& v : r.x) v = -v;
  for (double& v : r.y) v = -v;
  r.tau = -r.tau;
  return r;
}

double horizontal_norm2(const GroupPoint& a) {
  double s = 0.0;
  for (int j = 0; j < a.dim(); ++j) s += a.x[j] * a.x[j] + a.y[j] * a.y[j];
  return s;
}

double gauge(const GroupPoint& a) {
  check_finite(a);
  // Scale by a homogeneous magnitude first so tiny or huge points neither underflow nor overflow.
  double s = std::sqrt(std::abs(a.tau));
  for (int j = 0; j < a.dim(); ++j) s = std::max({s, std::abs(a.x[j]), std::abs(a.y[j])});
  if (s == 0.0) return 0.0;
  double r2 = 0.0;
  for (int j = 0; j < a.dim(); ++j) {
    const double x = a.x[j] / s, y = a.y[j] / s;
    r2 += x * x + y * y;
  }
  const double t = a.tau / s / s;
  return s * std::pow(r2 * r2 + t * t, 0.25);
}

double distance(const GroupPoint& a, const GroupPoint& b) {
  check_same_dim(a, b);
  return gauge(compose(inverse(b), a));
}

GroupPoint dilate(double r, const GroupPoint& a) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw InvalidArgument("dilation factor must be a positive finite number");
  }
  GroupPoint d = a;
  for (double& v : d.x) v *= r;
  for (double& v : d.y) v *= r;
  d.tau *= r * r;
  return d;
}

double fujita_exponent(const GroupParams& params) {
  return 1.0 + 2.0 / static_cast<double>(params.homogeneous_dimension());
}

}  // namespace heis
