#ifndef SCTOMP_BERNSTEIN_HPP
#define SCTOMP_BERNSTEIN_HPP

#include <vector>

#include "sctomp/dual.hpp"
#include "sctomp/errors.hpp"

namespace sctomp {

/// Pascal-triangle binomial coefficients, exact in double up to the degrees
/// this library produces (products of nonic data stay below n = 40).
inline double binomial(int n, int k) {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t(41);
    for (int i = 0; i <= 40; ++i) {
      t[i].resize(i + 1, 1.0);
      for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
    }
    return t;
  }();
  return table[n][k];
}

/// Polynomial in Bernstein form on the local parameter interval [0,1].
/// All polynomial arithmetic in the library stays in this basis; nothing is
/// ever converted to the power basis.
template <class T>
class Bernstein {
 public:
  Bernstein() : coeffs_(1, T(0.0)) {}
  explicit Bernstein(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw DomainError("Bernstein: empty coefficient list");
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<T>& coeffs() const { return coeffs_; }
  T& operator[](int i) { return coeffs_[i]; }
  const T& operator[](int i) const { return coeffs_[i]; }

  /// de Casteljau evaluation; xi must lie in [0,1] (a 1e-12 slack absorbs
  /// roundoff from global-parameter splitting).
  T eval(double xi) const {
    if (xi < -1e-12 || xi > 1.0 + 1e-12)
      throw DomainError("Bernstein::eval: parameter outside [0,1]");
    xi = xi < 0.0 ? 0.0 : (xi > 1.0 ? 1.0 : xi);
    std::vector<T> tmp = coeffs_;
    for (int r = degree(); r >= 1; --r)
      for (int i = 0; i < r; ++i) tmp[i] = (1.0 - xi) * tmp[i] + xi * tmp[i + 1];
    return tmp[0];
  }

  /// Derivative in Bernstein form; the constant polynomial maps to the
  /// degree-0 zero polynomial.
  Bernstein derivative() const {
    const int n = degree();
    if (n == 0) return Bernstein(std::vector<T>{T(0.0)});
    std::vector<T> d(n);
    for (int i = 0; i < n; ++i) d[i] = double(n) * (coeffs_[i + 1] - coeffs_[i]);
    return Bernstein(std::move(d));
  }

  /// Exact integral over [0,1]: the mean of the coefficients.
  T integral() const {
    T s(0.0);
    for (const T& c : coeffs_) s += c;
    return s / double(coeffs_.size());
  }

  Bernstein operator+(const Bernstein& o) const { return combined(o, 1.0); }
  Bernstein operator-(const Bernstein& o) const { return combined(o, -1.0); }

  Bernstein scaled(double f) const {
    std::vector<T> c = coeffs_;
    for (T& x : c) x *= T(f);
    return Bernstein(std::move(c));
  }

  /// Exact product via binomial convolution; degree adds.
  friend Bernstein product(const Bernstein& a, const Bernstein& b) {
    const int da = a.degree(), db = b.degree(), dc = da + db;
    std::vector<T> c(dc + 1, T(0.0));
    for (int k = 0; k <= dc; ++k) {
      const int lo = k > db ? k - db : 0;
      const int hi = k < da ? k : da;
      T acc(0.0);
      for (int i = lo; i <= hi; ++i) {
        const double w = binomial(da, i) * binomial(db, k - i) / binomial(dc, k);
        acc += w * (a.coeffs_[i] * b.coeffs_[k - i]);
      }
      c[k] = acc;
    }
    return Bernstein(std::move(c));
  }

 private:
  Bernstein combined(const Bernstein& o, double sign) const {
    if (degree() != o.degree())
      throw DomainError("Bernstein: +/- needs matching degrees");
    std::vector<T> c(coeffs_.size());
    for (size_t i = 0; i < c.size(); ++i) c[i] = coeffs_[i] + sign * o.coeffs_[i];
    return Bernstein(std::move(c));
  }

  std::vector<T> coeffs_;
};

using BernsteinPoly = Bernstein<double>;

}  // namespace sctomp

#endif
