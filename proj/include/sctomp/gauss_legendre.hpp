#ifndef SCTOMP_GAUSS_LEGENDRE_HPP
#define SCTOMP_GAUSS_LEGENDRE_HPP

#include <cmath>
#include <vector>

namespace sctomp {

struct QuadratureRule {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre nodes/weights on [0,1], computed once per order by Newton
/// iteration on the Legendre recurrence (accurate to machine precision).
inline const QuadratureRule& gauss_legendre(int order) {
  static const auto make = [](int n) {
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      // Chebyshev-like initial guess for the i-th root of P_n on [-1,1].
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      r.nodes[n - 1 - i] = 0.5 * (x + 1.0);
      r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  };
  static const QuadratureRule rule64 = make(64);
  static const QuadratureRule rule16 = make(16);
  if (order == 64) return rule64;
  if (order == 16) return rule16;
  static thread_local QuadratureRule custom;
  custom = make(order);
  return custom;
}

}  // namespace sctomp

#endif
