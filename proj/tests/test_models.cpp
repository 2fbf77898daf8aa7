#include <catch2/catch_amalgamated.hpp>

#include "sctomp/models.hpp"

using namespace sctomp;

TEST_CASE("car bounds match the reference constraint table") {
  CarModel car;
  Eigen::VectorXd xlo, xhi, ulo, uhi;
  car.state_bounds(xlo, xhi);
  car.input_bounds(ulo, uhi);
  // Throttle D in [-1, 1], steering delta in [-0.4, 0.4].
  CHECK(xlo[4] == -1.0);
  CHECK(xhi[4] == 1.0);
  CHECK(xlo[5] == -0.4);
  CHECK(xhi[5] == 0.4);
  // Rates: Ddot in [-10, 10], deltadot in [-2, 2].
  CHECK(ulo[0] == -10.0);
  CHECK(uhi[0] == 10.0);
  CHECK(ulo[1] == -2.0);
  CHECK(uhi[1] == 2.0);
  // Accelerations as path constraints, |a| <= 4.
  CHECK(CarModel::kAccelMax == 4.0);
  CHECK(car.path_constraint_dim() == 4);
  // Position, yaw and speed are unbounded states.
  for (int i = 0; i < 4; ++i) {
    CHECK(xlo[i] == -DynamicsModel::kInfinity());
    CHECK(xhi[i] == DynamicsModel::kInfinity());
  }
}

TEST_CASE("quadrotor bounds match the reference constraint table") {
  QuadrotorModel quad;
  Eigen::VectorXd ulo, uhi;
  quad.input_bounds(ulo, uhi);
  CHECK(ulo[0] == 0.0);
  CHECK(uhi[0] == 27.52);
  CHECK(ulo[1] == -15.0);
  CHECK(uhi[1] == 15.0);
  CHECK(ulo[2] == -15.0);
  CHECK(uhi[2] == 15.0);
  CHECK(ulo[3] == -0.3);
  CHECK(uhi[3] == 0.3);
  // Racing-class thrust-to-weight with the default parameters.
  CHECK(uhi[0] / (quad.params().mass * quad.params().gravity) ==
        Catch::Approx(3.5).margin(0.1));
}

TEST_CASE("car equilibrium and yaw rate") {
  CarModel car;
  {
    Eigen::VectorXd x(6), u(2), dx(6);
    x.setZero();
    u.setZero();
    car.dynamics(x.data(), u.data(), dx.data());
    CHECK(dx.cwiseAbs().maxCoeff() == 0.0);  // rest with zero throttle
  }
  {
    // Kinematic bicycle yaw rate: psidot = v tan(delta) / wheelbase.
    Eigen::VectorXd x(6), u(2), dx(6);
    x << 0, 0, 0, 1.0, 0, 0.4;
    u.setZero();
    car.dynamics(x.data(), u.data(), dx.data());
    CHECK(dx[2] ==
          Catch::Approx(std::tan(0.4) / car.params().wheelbase));
  }
  {
    // No steering: zero lateral acceleration path constraint margin.
    Eigen::VectorXd x(6), u(2), c(4);
    x << 0, 0, 0.3, 2.0, 0.5, 0.0;
    u.setZero();
    car.path_constraints(x.data(), u.data(), c.data());
    // c[2] = a_perp - 4, c[3] = -a_perp - 4 with a_perp = 0.
    CHECK(c[2] == Catch::Approx(-4.0));
    CHECK(c[3] == Catch::Approx(-4.0));
  }
}

TEST_CASE("quadrotor hover and free fall") {
  QuadrotorModel quad;
  {
    Eigen::VectorXd x(10), u(4), dx(10);
    x << 0, 0, 0, 0, 0, 0, 1, 0, 0, 0;
    u << quad.params().mass * quad.params().gravity, 0, 0, 0;
    quad.dynamics(x.data(), u.data(), dx.data());
    CHECK(dx.cwiseAbs().maxCoeff() <= 1e-12);  // hover equilibrium
  }
  {
    Eigen::VectorXd x(10), u(4), dx(10);
    x << 0, 0, 0, 0, 0, 0, 1, 0, 0, 0;
    u.setZero();
    quad.dynamics(x.data(), u.data(), dx.data());
    CHECK(dx[5] == Catch::Approx(-9.81));
  }
}

TEST_CASE("quadrotor quaternion norm under fine integration") {
  QuadrotorModel quad;
  Eigen::VectorXd x(10), u(4);
  x << 0, 0, 0, 0, 0, 0, 1, 0, 0, 0;
  u << 8.0, 0.0, 0.0, 0.3;  // max yaw rate
  Eigen::VectorXd k1(10), k2(10), k3(10), k4(10), tmp(10);
  const double dt = 1e-4;
  for (int s = 0; s < 20000; ++s) {  // 2 seconds
    quad.dynamics(x.data(), u.data(), k1.data());
    tmp = x + 0.5 * dt * k1;
    quad.dynamics(tmp.data(), u.data(), k2.data());
    tmp = x + 0.5 * dt * k2;
    quad.dynamics(tmp.data(), u.data(), k3.data());
    tmp = x + dt * k3;
    quad.dynamics(tmp.data(), u.data(), k4.data());
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK(x.segment<4>(6).norm() == Catch::Approx(1.0).margin(1e-9));
  // And with the per-step projection the norm is exact.
  quad.project_state(x.data());
  CHECK(x.segment<4>(6).norm() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("velocity extractors") {
  QuadrotorModel quad;
  Eigen::VectorXd x(10);
  x << 1, 2, 3, -1, 0.5, 2, 1, 0, 0, 0;
  Eigen::Vector3d v;
  quad.velocity(x.data(), v.data());
  CHECK(v == Eigen::Vector3d(-1, 0.5, 2));

  CarModel car;
  Eigen::VectorXd xc(6);
  xc << 0, 0, 0.7, 2.0, 0, 0;
  Eigen::Vector3d vc;
  car.velocity(xc.data(), vc.data());
  CHECK(vc[0] == Catch::Approx(2.0 * std::cos(0.7)));
  CHECK(vc[1] == Catch::Approx(2.0 * std::sin(0.7)));
  CHECK(vc[2] == 0.0);
}

TEST_CASE("model config loading") {
  nlohmann::json j;
  j["model"] = "double_integrator";
  j["params"] = {{"a_max", 4.0}, {"base", {0.0, 0.5, 0.5}}};
  j["x0"] = {0.0, 0.012};
  j["terminal_mask"] = {0, 1};
  j["xf"] = {0.0, 0.012};
  const auto setup = model_from_json(j);
  CHECK(setup.model->name() == "double_integrator");
  CHECK(setup.x0[1] == 0.012);
  REQUIRE(setup.terminal_mask.has_value());
  CHECK((*setup.terminal_mask)[0] == 0.0);
  CHECK((*setup.terminal_mask)[1] == 1.0);

  nlohmann::json bad = j;
  bad.erase("xf");
  CHECK_THROWS_AS(model_from_json(bad), ValidationError);

  nlohmann::json unknown = j;
  unknown["model"] = "hovercraft";
  CHECK_THROWS_AS(model_from_json(unknown), ValidationError);

  nlohmann::json shortx = j;
  shortx["x0"] = {0.0};
  CHECK_THROWS_AS(model_from_json(shortx), ValidationError);
}
