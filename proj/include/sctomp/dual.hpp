#ifndef SCTOMP_DUAL_HPP
#define SCTOMP_DUAL_HPP

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <utility>

namespace sctomp {

/// Forward-mode first-order scalar: a value plus its gradient with respect
/// to a seed set. An empty gradient vector stands for an identically zero
/// gradient, so plain constants cost no storage or arithmetic.
template <class GradVec>
struct DualT {
  double v = 0.0;
  GradVec g;

  DualT() = default;
  DualT(double value) : v(value) {}  // NOLINT: constants promote implicitly
  DualT(double value, GradVec grad) : v(value), g(std::move(grad)) {}

  static DualT seeded(double value, int dim, int index) {
    DualT d(value);
    d.g.setZero(dim);
    d.g[index] = 1.0;
    return d;
  }

  bool has_grad() const { return g.size() > 0; }
};

namespace detail {

// g = fa*a + fb*b with empty vectors treated as zero.
template <class GradVec>
GradVec lincomb(double fa, const GradVec& a, double fb, const GradVec& b) {
  if (a.size() == 0 && b.size() == 0) return GradVec();
  if (a.size() == 0) return GradVec(fb * b);
  if (b.size() == 0) return GradVec(fa * a);
  return GradVec(fa * a + fb * b);
}

template <class GradVec>
GradVec scaled(double f, const GradVec& a) {
  if (a.size() == 0) return GradVec();
  return GradVec(f * a);
}

}  // namespace detail

template <class V>
DualT<V> operator+(const DualT<V>& a, const DualT<V>& b) {
  return {a.v + b.v, detail::lincomb(1.0, a.g, 1.0, b.g)};
}
template <class V>
DualT<V> operator-(const DualT<V>& a, const DualT<V>& b) {
  return {a.v - b.v, detail::lincomb(1.0, a.g, -1.0, b.g)};
}
template <class V>
DualT<V> operator-(const DualT<V>& a) {
  return {-a.v, detail::scaled(-1.0, a.g)};
}
template <class V>
DualT<V> operator*(const DualT<V>& a, const DualT<V>& b) {
  return {a.v * b.v, detail::lincomb(b.v, a.g, a.v, b.g)};
}
template <class V>
DualT<V> operator/(const DualT<V>& a, const DualT<V>& b) {
  const double r = a.v / b.v;
  return {r, detail::lincomb(1.0 / b.v, a.g, -r / b.v, b.g)};
}

// Mixed double/dual forms (avoid allocating an empty-gradient temporary).
template <class V>
DualT<V> operator+(const DualT<V>& a, double b) { return {a.v + b, a.g}; }
template <class V>
DualT<V> operator+(double a, const DualT<V>& b) { return {a + b.v, b.g}; }
template <class V>
DualT<V> operator-(const DualT<V>& a, double b) { return {a.v - b, a.g}; }
template <class V>
DualT<V> operator-(double a, const DualT<V>& b) {
  return {a - b.v, detail::scaled(-1.0, b.g)};
}
template <class V>
DualT<V> operator*(const DualT<V>& a, double b) {
  return {a.v * b, detail::scaled(b, a.g)};
}
template <class V>
DualT<V> operator*(double a, const DualT<V>& b) {
  return {a * b.v, detail::scaled(a, b.g)};
}
template <class V>
DualT<V> operator/(const DualT<V>& a, double b) {
  return {a.v / b, detail::scaled(1.0 / b, a.g)};
}
template <class V>
DualT<V> operator/(double a, const DualT<V>& b) {
  const double r = a / b.v;
  return {r, detail::scaled(-r / b.v, b.g)};
}

template <class V>
DualT<V>& operator+=(DualT<V>& a, const DualT<V>& b) { a = a + b; return a; }
template <class V>
DualT<V>& operator-=(DualT<V>& a, const DualT<V>& b) { a = a - b; return a; }
template <class V>
DualT<V>& operator*=(DualT<V>& a, const DualT<V>& b) { a = a * b; return a; }
template <class V>
DualT<V>& operator/=(DualT<V>& a, const DualT<V>& b) { a = a / b; return a; }

template <class V>
DualT<V> sqrt(const DualT<V>& a) {
  const double s = std::sqrt(a.v);
  return {s, detail::scaled(0.5 / s, a.g)};
}
template <class V>
DualT<V> sin(const DualT<V>& a) {
  return {std::sin(a.v), detail::scaled(std::cos(a.v), a.g)};
}
template <class V>
DualT<V> cos(const DualT<V>& a) {
  return {std::cos(a.v), detail::scaled(-std::sin(a.v), a.g)};
}
template <class V>
DualT<V> tan(const DualT<V>& a) {
  const double c = std::cos(a.v);
  return {std::tan(a.v), detail::scaled(1.0 / (c * c), a.g)};
}
template <class V>
DualT<V> exp(const DualT<V>& a) {
  const double e = std::exp(a.v);
  return {e, detail::scaled(e, a.g)};
}

template <class V> bool operator<(const DualT<V>& a, const DualT<V>& b) { return a.v < b.v; }
template <class V> bool operator>(const DualT<V>& a, const DualT<V>& b) { return a.v > b.v; }
template <class V> bool operator<(const DualT<V>& a, double b) { return a.v < b; }
template <class V> bool operator>(const DualT<V>& a, double b) { return a.v > b; }
template <class V> bool operator<(double a, const DualT<V>& b) { return a < b.v; }
template <class V> bool operator>(double a, const DualT<V>& b) { return a > b.v; }

inline double value(double x) { return x; }
template <class V>
double value(const DualT<V>& x) { return x.v; }

inline bool is_finite(double x) { return std::isfinite(x); }
template <class V>
bool is_finite(const DualT<V>& x) {
  return std::isfinite(x.v) && (x.g.size() == 0 || x.g.allFinite());
}

/// Heap-backed gradient: any seed dimension (stage-1 coefficient pipelines).
using Dual = DualT<Eigen::VectorXd>;

/// Stack-backed gradient for per-interval shooting sensitivities.
inline constexpr int kMaxLocalSens = 24;
using SensVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxLocalSens, 1>;
using DualN = DualT<SensVec>;

// Small fixed-size vector helpers shared by the templated pipelines.
template <class T>
using Vec3T = std::array<T, 3>;
template <class T>
using Vec4T = std::array<T, 4>;

template <class T>
Vec3T<T> add3(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
template <class T>
Vec3T<T> sub3(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
template <class T, class S>
Vec3T<T> scale3(const Vec3T<T>& a, const S& s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}
template <class T>
T dot3(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
template <class T>
Vec3T<T> cross3(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

}  // namespace sctomp

#endif
