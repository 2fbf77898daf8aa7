#ifndef SCTOMP_NLP_HPP
#define SCTOMP_NLP_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sctomp/errors.hpp"

namespace sctomp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Triplet collector for constraint Jacobians. The solver only ever needs
/// J^T w products, so rows are never assembled into a matrix internally.
class JacobianSink {
 public:
  struct Entry {
    int row, col;
    double val;
  };
  void add(int row, int col, double val) { entries_.push_back({row, col, val}); }
  void clear() { entries_.clear(); }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

/// Smooth NLP:  min f(x)  s.t.  ceq(x) = 0,  cin(x) <= 0,  lo <= x <= hi.
/// Callbacks supply first derivatives; a null sink means values only.
struct NlpProblem {
  int n = 0;
  Eigen::VectorXd lower, upper;  // empty means unbounded
  int num_eq = 0;
  int num_in = 0;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)> objective;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, JacobianSink*)>
      equalities;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, JacobianSink*)>
      inequalities;
};

enum class SolveStatus { converged, max_iter, infeasible, degenerate };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

struct SolveReport {
  SolveStatus status = SolveStatus::max_iter;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double objective = 0.0;
  double max_violation = 0.0;
  double first_order_residual = 0.0;
  int worst_constraint = -1;       // row index (eq rows first, then in)
  std::vector<double> outer_violation;  // per outer iteration
  Eigen::VectorXd multipliers_eq, multipliers_in;
};

struct NlpOptions {
  double tol_feas = 1e-6;
  double tol_opt = 1e-5;
  int max_outer = 50;
  int max_inner = 500;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e8;
  int lbfgs_memory = 10;
  bool verbose = false;
};

namespace detail {

inline Eigen::VectorXd clamp_to_bounds(const NlpProblem& p,
                                       Eigen::VectorXd x) {
  if (p.lower.size()) x = x.cwiseMax(p.lower);
  if (p.upper.size()) x = x.cwiseMin(p.upper);
  return x;
}

// Augmented Lagrangian workspace: caches constraint values at the query
// point and accumulates gradients through J^T products from the sinks.
class AugLag {
 public:
  AugLag(const NlpProblem& p, const NlpOptions& o) : p_(p), o_(o) {
    lam_.setZero(p.num_eq);
    kap_.setZero(p.num_in);
    mu_ = o.penalty_init;
  }

  double mu() const { return mu_; }
  void grow_penalty() { mu_ = std::min(mu_ * o_.penalty_growth, o_.penalty_max); }
  bool penalty_capped() const { return mu_ >= o_.penalty_max; }
  const Eigen::VectorXd& lam() const { return lam_; }
  const Eigen::VectorXd& kap() const { return kap_; }

  void update_multipliers(const Eigen::VectorXd& ceq,
                          const Eigen::VectorXd& cin) {
    if (p_.num_eq) lam_ += mu_ * ceq;
    if (p_.num_in)
      kap_ = (kap_ + mu_ * cin).cwiseMax(0.0).cwiseMin(1e12);
    lam_ = lam_.cwiseMax(-1e12).cwiseMin(1e12);
  }

  void eval_constraints(const Eigen::VectorXd& x, Eigen::VectorXd& ceq,
                        Eigen::VectorXd& cin, JacobianSink* jeq,
                        JacobianSink* jin) const {
    ceq.resize(p_.num_eq);
    cin.resize(p_.num_in);
    if (p_.num_eq) p_.equalities(x, ceq, jeq);
    if (p_.num_in) p_.inequalities(x, cin, jin);
  }

  // Value of the augmented Lagrangian (no gradient).
  double value(const Eigen::VectorXd& x) const {
    const double f = p_.objective(x, nullptr);
    if (!std::isfinite(f)) return f;
    Eigen::VectorXd ceq, cin;
    eval_constraints(x, ceq, cin, nullptr, nullptr);
    return merit(f, ceq, cin);
  }

  double merit(double f, const Eigen::VectorXd& ceq,
               const Eigen::VectorXd& cin) const {
    double L = f;
    for (int i = 0; i < ceq.size(); ++i)
      L += lam_[i] * ceq[i] + 0.5 * mu_ * ceq[i] * ceq[i];
    for (int i = 0; i < cin.size(); ++i) {
      const double t = kap_[i] + mu_ * cin[i];
      if (t > 0.0)
        L += cin[i] * (kap_[i] + 0.5 * mu_ * cin[i]);
      else
        L -= 0.5 * kap_[i] * kap_[i] / mu_;
    }
    return L;
  }

  // Value and gradient.
  double value_grad(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    grad.setZero(p_.n);
    const double f = p_.objective(x, &grad);
    Eigen::VectorXd ceq, cin;
    JacobianSink jeq, jin;
    eval_constraints(x, ceq, cin, &jeq, &jin);
    // weights: eq -> lam + mu c ; in -> max(0, kap + mu c)
    Eigen::VectorXd weq = lam_ + mu_ * ceq;
    for (const auto& e : jeq.entries()) grad[e.col] += e.val * weq[e.row];
    if (p_.num_in) {
      Eigen::VectorXd win = (kap_ + mu_ * cin).cwiseMax(0.0);
      for (const auto& e : jin.entries()) grad[e.col] += e.val * win[e.row];
    }
    return merit(f, ceq, cin);
  }

  // Projected gradient of the plain Lagrangian with current multipliers
  // (first-order optimality residual).
  double stationarity(const Eigen::VectorXd& x) const {
    Eigen::VectorXd grad;
    grad.setZero(p_.n);
    p_.objective(x, &grad);
    Eigen::VectorXd ceq, cin;
    JacobianSink jeq, jin;
    eval_constraints(x, ceq, cin, &jeq, &jin);
    for (const auto& e : jeq.entries()) grad[e.col] += e.val * lam_[e.row];
    for (const auto& e : jin.entries()) grad[e.col] += e.val * kap_[e.row];
    const Eigen::VectorXd step = clamp_to_bounds(p_, x - grad) - x;
    return step.size() ? step.cwiseAbs().maxCoeff() : 0.0;
  }

 private:
  const NlpProblem& p_;
  const NlpOptions& o_;
  Eigen::VectorXd lam_, kap_;
  double mu_;
};

// Projected-gradient convergence measure.
inline double projected_gradient_norm(const NlpProblem& p,
                                      const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& g) {
  const Eigen::VectorXd step = clamp_to_bounds(p, x - g) - x;
  return step.size() ? step.cwiseAbs().maxCoeff() : 0.0;
}

// Limited-memory BFGS direction with projected Armijo backtracking.
// Returns the number of iterations spent.
inline int lbfgs_inner(const NlpProblem& p, const AugLag& al,
                       Eigen::VectorXd& x, double tol, int max_iter,
                       int memory) {
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;
  Eigen::VectorXd g(p.n), g_new(p.n);
  double L = al.value_grad(x, g);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    if (projected_gradient_norm(p, x, g) <= tol) break;

    // Two-loop recursion.
    Eigen::VectorXd d = -g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(d);
      d -= alpha[i] * Y[i];
    }
    if (!S.empty()) {
      const double gamma = S.back().dot(Y.back()) / Y.back().squaredNorm();
      d *= gamma;
    }
    for (size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * Y[i].dot(d);
      d += (alpha[i] - beta) * S[i];
    }
    if (d.dot(g) > -1e-14 * d.norm() * g.norm()) {
      d = -g;  // memory not a descent direction; restart
      S.clear();
      Y.clear();
      rho.clear();
    }

    // Projected backtracking line search.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    double L_new = 0.0;
    for (int ls = 0; ls < 48; ++ls) {
      x_new = clamp_to_bounds(p, x + step * d);
      const Eigen::VectorXd dx = x_new - x;
      if (dx.cwiseAbs().maxCoeff() == 0.0) break;
      L_new = al.value(x_new);
      const double slope = g.dot(dx);
      if (std::isfinite(L_new) && L_new <= L + 1e-4 * std::min(slope, 0.0)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!S.empty()) {  // retry from a fresh steepest-descent state
        S.clear();
        Y.clear();
        rho.clear();
        continue;
      }
      break;  // line search exhausted
    }

    const double L_at_new = al.value_grad(x_new, g_new);
    (void)L_at_new;
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x = x_new;
    g = g_new;
    L = L_new;
  }
  return iter;
}

}  // namespace detail

struct MinimizeResult {
  Eigen::VectorXd x;
  SolveReport report;
};

/// Augmented-Lagrangian method: outer multiplier/penalty updates around a
/// bound-constrained limited-memory quasi-Newton inner solver. Deterministic
/// for identical inputs and options.
inline MinimizeResult minimize(const NlpProblem& problem,
                               const Eigen::VectorXd& x_init,
                               const NlpOptions& options = {}) {
  if (x_init.size() != problem.n)
    throw DomainError("minimize: x_init dimension mismatch");
  Eigen::VectorXd x = detail::clamp_to_bounds(problem, x_init);
  {
    const double f0 = problem.objective(x, nullptr);
    if (!std::isfinite(f0))
      throw DomainError("minimize: objective not finite at x_init");
  }

  detail::AugLag al(problem, options);
  SolveReport rep;
  Eigen::VectorXd ceq, cin;

  const auto violation = [&](const Eigen::VectorXd& e, const Eigen::VectorXd& i,
                             int* worst) -> double {
    double v = 0.0;
    if (worst) *worst = -1;
    for (int k = 0; k < e.size(); ++k)
      if (std::abs(e[k]) > v) {
        v = std::abs(e[k]);
        if (worst) *worst = k;
      }
    for (int k = 0; k < i.size(); ++k)
      if (i[k] > v) {
        v = i[k];
        if (worst) *worst = e.size() + k;
      }
    return v;
  };

  double viol_prev = kInf;
  double inner_tol = std::max(options.tol_opt, 1e-3);
  double f_prev = kInf;
  int stagnant = 0;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    rep.outer_iterations = outer + 1;
    rep.inner_iterations += detail::lbfgs_inner(
        problem, al, x, inner_tol, options.max_inner, options.lbfgs_memory);

    al.eval_constraints(x, ceq, cin, nullptr, nullptr);
    int worst = -1;
    const double viol = violation(ceq, cin, &worst);
    rep.outer_violation.push_back(viol);
    rep.max_violation = viol;
    rep.worst_constraint = worst;
    if (options.verbose)
      std::printf("  [al] outer %d viol %.3e mu %.1e inner_tol %.1e\n", outer,
                  viol, al.mu(), inner_tol);

    const bool feasible = viol <= options.tol_feas;
    if (feasible) {
      // Feasible but frozen objective across several outers: the inner
      // solver cannot polish stationarity further (typically a degenerate
      // active set). Stop and say so rather than spinning.
      const double f_now = problem.objective(x, nullptr);
      if (std::abs(f_now - f_prev) <= 1e-12 * (1.0 + std::abs(f_now))) {
        if (++stagnant >= 3) {
          rep.status = SolveStatus::degenerate;
          rep.first_order_residual = al.stationarity(x);
          break;
        }
      } else {
        stagnant = 0;
      }
      f_prev = f_now;
    }
    if (feasible) {
      al.update_multipliers(ceq, cin);
      const double res = al.stationarity(x);
      if (res <= options.tol_opt && inner_tol <= options.tol_opt) {
        rep.status = SolveStatus::converged;
        rep.first_order_residual = res;
        break;
      }
      inner_tol = std::max(options.tol_opt, 0.2 * inner_tol);
    } else if (viol <= 0.25 * viol_prev) {
      al.update_multipliers(ceq, cin);  // good progress: classic update
      inner_tol = std::max(options.tol_opt, 0.5 * inner_tol);
    } else {
      if (al.penalty_capped()) {
        rep.status = SolveStatus::infeasible;
        rep.first_order_residual = al.stationarity(x);
        break;
      }
      al.grow_penalty();  // stall: raise penalty, keep multipliers
    }
    viol_prev = std::min(viol_prev, viol);
  }

  if (rep.status == SolveStatus::max_iter) {
    al.eval_constraints(x, ceq, cin, nullptr, nullptr);
    rep.max_violation = violation(ceq, cin, &rep.worst_constraint);
    rep.first_order_residual = al.stationarity(x);
    if (rep.max_violation <= options.tol_feas &&
        rep.first_order_residual <= options.tol_opt)
      rep.status = SolveStatus::converged;
  }
  rep.objective = problem.objective(x, nullptr);
  rep.multipliers_eq = al.lam();
  rep.multipliers_in = al.kap();
  return {std::move(x), rep};
}

/// Central finite differences against the supplied derivatives. Returns the
/// worst mismatch, scaled by max(1, |fd|).
inline double check_derivatives(const NlpProblem& problem,
                                const Eigen::VectorXd& x, double h = 1e-6) {
  double worst = 0.0;
  Eigen::VectorXd grad(problem.n);
  grad.setZero();
  problem.objective(x, &grad);

  Eigen::MatrixXd Jeq = Eigen::MatrixXd::Zero(problem.num_eq, problem.n);
  Eigen::MatrixXd Jin = Eigen::MatrixXd::Zero(problem.num_in, problem.n);
  Eigen::VectorXd ceq(problem.num_eq), cin(problem.num_in);
  JacobianSink sink;
  if (problem.num_eq) {
    problem.equalities(x, ceq, &sink);
    for (const auto& e : sink.entries()) Jeq(e.row, e.col) += e.val;
  }
  if (problem.num_in) {
    sink.clear();
    problem.inequalities(x, cin, &sink);
    for (const auto& e : sink.entries()) Jin(e.row, e.col) += e.val;
  }

  Eigen::VectorXd xp = x, xm = x;
  Eigen::VectorXd ep(problem.num_eq), em(problem.num_eq);
  Eigen::VectorXd ip(problem.num_in), im(problem.num_in);
  const auto rel = [](double fd, double an) {
    return std::abs(fd - an) / std::max(1.0, std::abs(fd));
  };
  for (int j = 0; j < problem.n; ++j) {
    const double hj = h * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + hj;
    xm[j] = x[j] - hj;
    const double fp = problem.objective(xp, nullptr);
    const double fm = problem.objective(xm, nullptr);
    worst = std::max(worst, rel((fp - fm) / (2.0 * hj), grad[j]));
    if (problem.num_eq) {
      problem.equalities(xp, ep, nullptr);
      problem.equalities(xm, em, nullptr);
      for (int r = 0; r < problem.num_eq; ++r)
        worst = std::max(worst, rel((ep[r] - em[r]) / (2.0 * hj), Jeq(r, j)));
    }
    if (problem.num_in) {
      problem.inequalities(xp, ip, nullptr);
      problem.inequalities(xm, im, nullptr);
      for (int r = 0; r < problem.num_in; ++r)
        worst = std::max(worst, rel((ip[r] - im[r]) / (2.0 * hj), Jin(r, j)));
    }
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return worst;
}

}  // namespace sctomp

#endif
