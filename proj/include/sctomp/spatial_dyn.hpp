#ifndef SCTOMP_SPATIAL_DYN_HPP
#define SCTOMP_SPATIAL_DYN_HPP

#include <Eigen/Core>
#include <limits>
#include <string>

#include "sctomp/dual.hpp"
#include "sctomp/errors.hpp"
#include "sctomp/ph_spline.hpp"

namespace sctomp {

/// User-supplied dynamic system: equations of motion f, output map h into
/// 3-space, and the output's time derivative along f (the velocity
/// extractor). Every evaluation exists in a plain-double and a dual-number
/// form so the transcription can assemble exact first derivatives.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual int path_constraint_dim() const { return 0; }

  virtual void dynamics(const double* x, const double* u, double* dx) const = 0;
  virtual void dynamics(const DualN* x, const DualN* u, DualN* dx) const = 0;

  virtual void output(const double* x, double* y) const = 0;
  virtual void output(const DualN* x, DualN* y) const = 0;

  virtual void velocity(const double* x, double* v) const = 0;
  virtual void velocity(const DualN* x, DualN* v) const = 0;

  virtual void path_constraints(const double*, const double*, double*) const {}
  virtual void path_constraints(const DualN*, const DualN*, DualN*) const {}

  /// Box bounds; +-inf entries mean unbounded.
  virtual void state_bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
    lo.setConstant(state_dim(), -kInfinity());
    hi.setConstant(state_dim(), kInfinity());
  }
  virtual void input_bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const = 0;

  /// Numerical projection applied after every integrator step (e.g. unit
  /// quaternion renormalization). Defaults to a no-op.
  virtual void project_state(double*) const {}
  virtual void project_state(DualN*) const {}

  /// State seeded on the path: output at p, moving at speed v along dir,
  /// remaining states at trim.
  virtual Eigen::VectorXd seed_state(const Eigen::Vector3d& p,
                                     const Eigen::Vector3d& dir,
                                     double v) const = 0;
  virtual Eigen::VectorXd trim_input() const = 0;

  static double kInfinity() { return std::numeric_limits<double>::infinity(); }
};

/// Implements both scalar flavours of the virtual interface from a single
/// templated body in the derived class (eval_f / eval_h / eval_vel /
/// eval_path / eval_project).
template <class Derived>
class ModelFacade : public DynamicsModel {
 public:
  void dynamics(const double* x, const double* u, double* dx) const override {
    self().template eval_f<double>(x, u, dx);
  }
  void dynamics(const DualN* x, const DualN* u, DualN* dx) const override {
    self().template eval_f<DualN>(x, u, dx);
  }
  void output(const double* x, double* y) const override {
    self().template eval_h<double>(x, y);
  }
  void output(const DualN* x, DualN* y) const override {
    self().template eval_h<DualN>(x, y);
  }
  void velocity(const double* x, double* v) const override {
    self().template eval_vel<double>(x, v);
  }
  void velocity(const DualN* x, DualN* v) const override {
    self().template eval_vel<DualN>(x, v);
  }
  void path_constraints(const double* x, const double* u,
                        double* c) const override {
    self().template eval_path<double>(x, u, c);
  }
  void path_constraints(const DualN* x, const DualN* u,
                        DualN* c) const override {
    self().template eval_path<DualN>(x, u, c);
  }
  void project_state(double* x) const override {
    self().template eval_project<double>(x);
  }
  void project_state(DualN* x) const override {
    self().template eval_project<DualN>(x);
  }

  // Overridden by models that need them.
  template <class T>
  void eval_path(const T*, const T*, T*) const {}
  template <class T>
  void eval_project(T*) const {}

 private:
  const Derived& self() const { return *static_cast<const Derived*>(this); }
};

// ---------------------------------------------------------------------------
// Spatial projection quantities (Fig. 1 semantics: xi is given, never
// searched for).
// ---------------------------------------------------------------------------

/// Transverse coordinates of p relative to the frame at xi:
/// w1 along e2, w2 along e3.
inline std::pair<double, double> transverse_coordinates(const PHSpline& spline,
                                                        double xi,
                                                        const Eigen::Vector3d& p) {
  const FrameSample F = sample_spline(spline, xi);
  const Eigen::Vector3d d = p - F.position;
  return {F.rotation.col(1).dot(d), F.rotation.col(2).dot(d)};
}

inline constexpr double kDenomMinDefault = 1e-6;

/// Path-parameter rate of a point mass at p moving with velocity v:
///   xidot = e1.v / (sigma - chi3 w1 + chi2 w2).
/// Raises when the projection denominator collapses (point outside the tube
/// where the projection is well posed).
inline double spatial_rate(const PHSpline& spline, double xi,
                           const Eigen::Vector3d& p, const Eigen::Vector3d& v,
                           double denom_min = kDenomMinDefault) {
  const FrameSample F = sample_spline(spline, xi);
  const Eigen::Vector3d d = p - F.position;
  const double w1 = F.rotation.col(1).dot(d);
  const double w2 = F.rotation.col(2).dot(d);
  const double denom = F.sigma - F.chi[2] * w1 + F.chi[1] * w2;
  if (denom <= denom_min)
    throw DomainError("spatial_rate: projection denominator " +
                      std::to_string(denom) + " below " +
                      std::to_string(denom_min) + " (outside the tube)");
  return F.rotation.col(0).dot(v) / denom;
}

/// Transverse-coordinate rates (the remaining two point-mass equations);
/// kept for validation, the OCP never integrates them.
inline std::pair<double, double> transverse_rates(const PHSpline& spline,
                                                  double xi,
                                                  const Eigen::Vector3d& p,
                                                  const Eigen::Vector3d& v) {
  const FrameSample F = sample_spline(spline, xi);
  const Eigen::Vector3d d = p - F.position;
  const double w1 = F.rotation.col(1).dot(d);
  const double w2 = F.rotation.col(2).dot(d);
  const double xidot = spatial_rate(spline, xi, p, v);
  const double w1dot = F.rotation.col(1).dot(v) + xidot * F.chi[0] * w2;
  const double w2dot = F.rotation.col(2).dot(v) - xidot * F.chi[0] * w1;
  return {w1dot, w2dot};
}

namespace detail {

/// Augmented spatial derivative at a precomputed frame: out[0..n_x) holds
/// f(x,u)/xidot, out[n_x] holds dt/dxi = 1/xidot. Returns quiet NaNs when
/// the evaluation leaves the transform's domain (denominator collapse or
/// non-positive progress rate) so that line searches back off.
template <class T>
void spatial_ode_eval(const DynamicsModel& model, const FrameSample& F,
                      const T* x, const T* u, T* out, double denom_min) {
  const int n_x = model.state_dim();
  T p[3], v[3];
  model.output(x, p);
  model.velocity(x, v);
  const Eigen::Vector3d e1 = F.rotation.col(0);
  const Eigen::Vector3d e2 = F.rotation.col(1);
  const Eigen::Vector3d e3 = F.rotation.col(2);
  T d0 = p[0] - F.position[0], d1 = p[1] - F.position[1],
    d2 = p[2] - F.position[2];
  T w1 = e2[0] * d0 + e2[1] * d1 + e2[2] * d2;
  T w2 = e3[0] * d0 + e3[1] * d1 + e3[2] * d2;
  T denom = F.sigma - F.chi[2] * w1 + F.chi[1] * w2;
  T speed = e1[0] * v[0] + e1[1] * v[1] + e1[2] * v[2];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!(value(denom) > denom_min) || !(value(speed) > 0.0)) {
    for (int i = 0; i <= n_x; ++i) out[i] = T(nan);
    return;
  }
  T inv = denom / speed;  // dt/dxi
  model.dynamics(x, u, out);
  for (int i = 0; i < n_x; ++i) out[i] *= inv;
  out[n_x] = inv;
}

}  // namespace detail

/// The spatially transformed dynamics x' = f/xidot with the elapsed-time
/// channel t' = 1/xidot appended. This is the operator the stage-2
/// transcription integrates.
class SpatialOde {
 public:
  SpatialOde(const DynamicsModel& model, const PHSpline& spline,
             double xidot_min = 1e-3, double denom_min = kDenomMinDefault)
      : model_(model),
        spline_(spline),
        xidot_min_(xidot_min),
        denom_min_(denom_min) {}

  const DynamicsModel& model() const { return model_; }
  const PHSpline& spline() const { return spline_; }

  /// Public evaluation at a path parameter; enforces forward progress.
  /// x has n_x entries; returns (dx/dxi, dt/dxi).
  std::pair<Eigen::VectorXd, double> operator()(double xi,
                                                const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& u) const {
    const int n_x = model_.state_dim();
    const FrameSample F = sample_spline(spline_, xi);
    Eigen::Vector3d p, v;
    model_.output(x.data(), p.data());
    model_.velocity(x.data(), v.data());
    const double xidot = spatial_rate(spline_, xi, p, v, denom_min_);
    if (xidot <= xidot_min_)
      throw DomainError("spatial_ode: forward-progress violation, xidot = " +
                        std::to_string(xidot) + " <= " +
                        std::to_string(xidot_min_));
    Eigen::VectorXd out(n_x + 1);
    detail::spatial_ode_eval(model_, F, x.data(), u.data(), out.data(),
                             denom_min_);
    Eigen::VectorXd dx = out.head(n_x);
    return {dx, out[n_x]};
  }

  /// Raw evaluation against a precomputed frame (used by the transcription).
  template <class T>
  void eval(const FrameSample& F, const T* x_aug, const T* u, T* out) const {
    detail::spatial_ode_eval(model_, F, x_aug, u, out, denom_min_);
  }

 private:
  const DynamicsModel& model_;
  const PHSpline& spline_;
  double xidot_min_, denom_min_;
};

/// Re-simulates the schedule in the time domain (RK4 on f with piecewise
/// constant inputs, `steps_per_interval` fine steps) and returns the largest
/// state deviation against the supplied node states. The time grid comes
/// from the elapsed-time channel.
inline double roundtrip_check(const DynamicsModel& model,
                              const Eigen::MatrixXd& states,
                              const Eigen::VectorXd& times,
                              const Eigen::MatrixXd& inputs,
                              int steps_per_interval = 40) {
  const int n_x = model.state_dim();
  const int nodes = static_cast<int>(states.rows());
  if (nodes <= 1) return 0.0;
  Eigen::VectorXd x = states.row(0);
  Eigen::VectorXd k1(n_x), k2(n_x), k3(n_x), k4(n_x), tmp(n_x);
  double worst = 0.0;
  for (int j = 0; j + 1 < nodes; ++j) {
    const Eigen::VectorXd u = inputs.row(std::min<int>(j, inputs.rows() - 1));
    const double dt = (times[j + 1] - times[j]) / steps_per_interval;
    for (int s = 0; s < steps_per_interval; ++s) {
      model.dynamics(x.data(), u.data(), k1.data());
      tmp = x + 0.5 * dt * k1;
      model.dynamics(tmp.data(), u.data(), k2.data());
      tmp = x + 0.5 * dt * k2;
      model.dynamics(tmp.data(), u.data(), k3.data());
      tmp = x + dt * k3;
      model.dynamics(tmp.data(), u.data(), k4.data());
      x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      model.project_state(x.data());
    }
    worst = std::max(worst,
                     (x - states.row(j + 1).transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace sctomp

#endif
