#ifndef SCTOMP_MODELS_HPP
#define SCTOMP_MODELS_HPP

#include <cmath>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>

#include "sctomp/spatial_dyn.hpp"

namespace sctomp {

struct DoubleIntegratorParams {
  double a_max = 1.0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  Eigen::Vector3d base = Eigen::Vector3d::Zero();
};

/// 1D double integrator riding along a fixed axis in space; the analytic
/// minimum-time oracle model. States (p, v), input a with |a| <= a_max.
class DoubleIntegratorModel : public ModelFacade<DoubleIntegratorModel> {
 public:
  using Params = DoubleIntegratorParams;

  explicit DoubleIntegratorModel(Params p = {}) : p_(std::move(p)) {
    p_.axis.normalize();
  }

  std::string name() const override { return "double_integrator"; }
  int state_dim() const override { return 2; }
  int input_dim() const override { return 1; }

  template <class T>
  void eval_f(const T* x, const T* u, T* dx) const {
    dx[0] = x[1];
    dx[1] = u[0];
  }
  template <class T>
  void eval_h(const T* x, T* y) const {
    for (int k = 0; k < 3; ++k) y[k] = p_.base[k] + p_.axis[k] * x[0];
  }
  template <class T>
  void eval_vel(const T* x, T* v) const {
    for (int k = 0; k < 3; ++k) v[k] = p_.axis[k] * x[1];
  }

  void input_bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const override {
    lo.setConstant(1, -p_.a_max);
    hi.setConstant(1, p_.a_max);
  }

  Eigen::VectorXd seed_state(const Eigen::Vector3d& p, const Eigen::Vector3d&,
                             double v) const override {
    Eigen::VectorXd x(2);
    x << p_.axis.dot(p - p_.base), v;
    return x;
  }
  Eigen::VectorXd trim_input() const override {
    return Eigen::VectorXd::Zero(1);
  }

  const Params& params() const { return p_; }

 private:
  Params p_;
};

struct CarParams {
  double wheelbase = 0.06;  // m (1:43-scale vehicle)
  double c_m = 6.0;         // throttle gain (m/s^2 per unit D)
  double c_r = 0.5;         // rolling/drag coefficient (1/s)
};

/// Planar kinematic bicycle with a first-order drivetrain force map
/// F/m = c_m D - c_r v. States (p_x, p_y, psi, v, D, delta), inputs
/// (Ddot, deltadot). Longitudinal and lateral accelerations are exposed as
/// path constraints; all numeric bounds follow the planar reference model.
class CarModel : public ModelFacade<CarModel> {
 public:
  using Params = CarParams;

  static constexpr double kThrottleMax = 1.0;
  static constexpr double kSteerMax = 0.4;
  static constexpr double kThrottleRateMax = 10.0;
  static constexpr double kSteerRateMax = 2.0;
  static constexpr double kAccelMax = 4.0;

  explicit CarModel(Params p = {}) : p_(p) {}

  std::string name() const override { return "car"; }
  int state_dim() const override { return 6; }
  int input_dim() const override { return 2; }
  int path_constraint_dim() const override { return 4; }

  // x = (px, py, psi, v, D, delta)
  template <class T>
  void eval_f(const T* x, const T* u, T* dx) const {
    using std::cos;
    using std::sin;
    using std::tan;
    const T& psi = x[2];
    const T& v = x[3];
    const T& D = x[4];
    const T& delta = x[5];
    dx[0] = v * cos(psi);
    dx[1] = v * sin(psi);
    dx[2] = v * tan(delta) / p_.wheelbase;
    dx[3] = p_.c_m * D - p_.c_r * v;
    dx[4] = u[0];
    dx[5] = u[1];
  }
  template <class T>
  void eval_h(const T* x, T* y) const {
    y[0] = x[0];
    y[1] = x[1];
    y[2] = T(0.0);
  }
  template <class T>
  void eval_vel(const T* x, T* v) const {
    using std::cos;
    using std::sin;
    v[0] = x[3] * cos(x[2]);
    v[1] = x[3] * sin(x[2]);
    v[2] = T(0.0);
  }
  // a_par = vdot, a_perp = v^2 tan(delta)/L, both within +-kAccelMax.
  template <class T>
  void eval_path(const T* x, const T*, T* c) const {
    using std::tan;
    const T a_par = p_.c_m * x[4] - p_.c_r * x[3];
    const T a_perp = x[3] * x[3] * tan(x[5]) / p_.wheelbase;
    c[0] = a_par - kAccelMax;
    c[1] = -1.0 * a_par - kAccelMax;
    c[2] = a_perp - kAccelMax;
    c[3] = -1.0 * a_perp - kAccelMax;
  }

  void state_bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const override {
    const double inf = kInfinity();
    lo.resize(6);
    hi.resize(6);
    lo << -inf, -inf, -inf, -inf, -kThrottleMax, -kSteerMax;
    hi << inf, inf, inf, inf, kThrottleMax, kSteerMax;
  }
  void input_bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const override {
    lo.resize(2);
    hi.resize(2);
    lo << -kThrottleRateMax, -kSteerRateMax;
    hi << kThrottleRateMax, kSteerRateMax;
  }

  Eigen::VectorXd seed_state(const Eigen::Vector3d& p,
                             const Eigen::Vector3d& dir,
                             double v) const override {
    Eigen::VectorXd x(6);
    // Steady throttle balancing drag at the cruise speed.
    x << p[0], p[1], std::atan2(dir[1], dir[0]), v, p_.c_r * v / p_.c_m, 0.0;
    return x;
  }
  Eigen::VectorXd trim_input() const override {
    return Eigen::VectorXd::Zero(2);
  }

  const Params& params() const { return p_; }

 private:
  Params p_;
};

struct QuadrotorParams {
  double mass = 0.8;      // kg: thrust-to-weight about 3.5 at f_c,max
  double gravity = 9.81;  // m/s^2
};

/// Quadrotor with collective thrust and body rates as inputs. States
/// (p, v, q) with q = (w, x, y, z); the unit norm is maintained by per-step
/// renormalization in project_state.
class QuadrotorModel : public ModelFacade<QuadrotorModel> {
 public:
  using Params = QuadrotorParams;

  static constexpr double kThrustMin = 0.0;
  static constexpr double kThrustMax = 27.52;
  static constexpr double kRateXYMax = 15.0;
  static constexpr double kRateZMax = 0.3;

  explicit QuadrotorModel(Params p = {}) : p_(p) {}

  std::string name() const override { return "quadrotor"; }
  int state_dim() const override { return 10; }
  int input_dim() const override { return 4; }

  // x = (p, v, q), u = (f_c, wx, wy, wz)
  template <class T>
  void eval_f(const T* x, const T* u, T* dx) const {
    const T* v = x + 3;
    const T* q = x + 6;  // (w, x, y, z)
    dx[0] = v[0];
    dx[1] = v[1];
    dx[2] = v[2];
    // Body z-axis in world coordinates, exact for any quaternion norm.
    const T n2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
    const T acc = u[0] / (p_.mass * n2);
    dx[3] = 2.0 * (q[1] * q[3] + q[0] * q[2]) * acc;
    dx[4] = 2.0 * (q[2] * q[3] - q[0] * q[1]) * acc;
    dx[5] = (q[0] * q[0] - q[1] * q[1] - q[2] * q[2] + q[3] * q[3]) * acc -
            p_.gravity;
    // qdot = 1/2 q x (0, w)
    const T& wx = u[1];
    const T& wy = u[2];
    const T& wz = u[3];
    dx[6] = 0.5 * (-q[1] * wx - q[2] * wy - q[3] * wz);
    dx[7] = 0.5 * (q[0] * wx + q[2] * wz - q[3] * wy);
    dx[8] = 0.5 * (q[0] * wy - q[1] * wz + q[3] * wx);
    dx[9] = 0.5 * (q[0] * wz + q[1] * wy - q[2] * wx);
  }
  template <class T>
  void eval_h(const T* x, T* y) const {
    y[0] = x[0];
    y[1] = x[1];
    y[2] = x[2];
  }
  template <class T>
  void eval_vel(const T* x, T* v) const {
    v[0] = x[3];
    v[1] = x[4];
    v[2] = x[5];
  }
  template <class T>
  void eval_project(T* x) const {
    using std::sqrt;
    T* q = x + 6;
    const T n =
        sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (int i = 0; i < 4; ++i) q[i] /= n;
  }

  void input_bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const override {
    lo.resize(4);
    hi.resize(4);
    lo << kThrustMin, -kRateXYMax, -kRateXYMax, -kRateZMax;
    hi << kThrustMax, kRateXYMax, kRateXYMax, kRateZMax;
  }

  Eigen::VectorXd seed_state(const Eigen::Vector3d& p, const Eigen::Vector3d& dir,
                             double v) const override {
    Eigen::VectorXd x(10);
    x << p[0], p[1], p[2], v * dir[0], v * dir[1], v * dir[2], 1, 0, 0, 0;
    return x;
  }
  Eigen::VectorXd trim_input() const override {
    Eigen::VectorXd u(4);
    u << p_.mass * p_.gravity, 0, 0, 0;  // hover
    return u;
  }

  const Params& params() const { return p_; }

 private:
  Params p_;
};

// ---------------------------------------------------------------------------
// Model config file: {"model": ..., "params": {...}, "x0": [...],
// "terminal_mask": [...]?, "xf": [...]?}
// ---------------------------------------------------------------------------

struct ModelSetup {
  std::shared_ptr<DynamicsModel> model;
  Eigen::VectorXd x0;
  std::optional<Eigen::VectorXd> terminal_mask;  // 0/1 per state
  std::optional<Eigen::VectorXd> xf;             // targets for masked states
};

inline ModelSetup model_from_json(const nlohmann::json& j) {
  ModelSetup setup;
  try {
    const std::string kind = j.at("model").get<std::string>();
    const auto params = j.value("params", nlohmann::json::object());
    if (kind == "double_integrator") {
      DoubleIntegratorModel::Params p;
      p.a_max = params.value("a_max", p.a_max);
      if (params.contains("axis"))
        for (int k = 0; k < 3; ++k) p.axis[k] = params.at("axis").at(k).get<double>();
      if (params.contains("base"))
        for (int k = 0; k < 3; ++k) p.base[k] = params.at("base").at(k).get<double>();
      setup.model = std::make_shared<DoubleIntegratorModel>(p);
    } else if (kind == "car") {
      CarModel::Params p;
      p.wheelbase = params.value("wheelbase", p.wheelbase);
      p.c_m = params.value("c_m", p.c_m);
      p.c_r = params.value("c_r", p.c_r);
      setup.model = std::make_shared<CarModel>(p);
    } else if (kind == "quadrotor") {
      QuadrotorModel::Params p;
      p.mass = params.value("mass", p.mass);
      p.gravity = params.value("gravity", p.gravity);
      setup.model = std::make_shared<QuadrotorModel>(p);
    } else {
      throw ValidationError("model config: unknown model '" + kind + "'");
    }

    const auto& x0j = j.at("x0");
    if (static_cast<int>(x0j.size()) != setup.model->state_dim())
      throw ValidationError("model config: x0 length != state dimension");
    setup.x0.resize(setup.model->state_dim());
    for (int i = 0; i < setup.x0.size(); ++i) setup.x0[i] = x0j.at(i).get<double>();

    if (j.contains("terminal_mask")) {
      const auto& mj = j.at("terminal_mask");
      if (static_cast<int>(mj.size()) != setup.model->state_dim())
        throw ValidationError("model config: terminal_mask length mismatch");
      Eigen::VectorXd mask(setup.model->state_dim());
      for (int i = 0; i < mask.size(); ++i) mask[i] = mj.at(i).get<double>();
      setup.terminal_mask = mask;
      if (!j.contains("xf"))
        throw ValidationError("model config: terminal_mask requires xf");
    }
    if (j.contains("xf")) {
      const auto& xj = j.at("xf");
      if (static_cast<int>(xj.size()) != setup.model->state_dim())
        throw ValidationError("model config: xf length mismatch");
      Eigen::VectorXd xf(setup.model->state_dim());
      for (int i = 0; i < xf.size(); ++i) xf[i] = xj.at(i).get<double>();
      setup.xf = xf;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  return setup;
}

inline ModelSetup load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model config: " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace sctomp

#endif
