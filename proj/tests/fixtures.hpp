// Shared corridor fixtures for the unit and acceptance suites.
#ifndef SCTOMP_TESTS_FIXTURES_HPP
#define SCTOMP_TESTS_FIXTURES_HPP

#include "sctomp/corridor.hpp"

namespace fixtures {

using sctomp::Corridor;
using sctomp::make_box;

// One unit box; the stage-1 optimum is a straight segment of length 0.8.
inline Corridor single_box() {
  Corridor c;
  c.regions.push_back(make_box({0, 0, 0}, {1, 1, 1}));
  c.start = {0.1, 0.5, 0.5};
  c.goal = {0.9, 0.5, 0.5};
  c.start_frame = Eigen::Vector4d(1, 0, 0, 0);
  sctomp::validate_corridor(c);
  return c;
}

// Straight corridor with start and goal exactly 1 m apart.
inline Corridor straight_1m() {
  Corridor c;
  c.regions.push_back(make_box({-0.1, 0, 0}, {1.1, 1, 1}));
  c.start = {0.0, 0.5, 0.5};
  c.goal = {1.0, 0.5, 0.5};
  c.start_frame = Eigen::Vector4d(1, 0, 0, 0);
  sctomp::validate_corridor(c);
  return c;
}

// Two boxes forming an L in the x-y plane, symmetric in z about the path
// plane (the energy optimum is twist-free).
inline Corridor l_corridor() {
  Corridor c;
  c.regions.push_back(make_box({0, 0, 0}, {1.25, 0.5, 0.5}));
  c.regions.push_back(make_box({0.75, 0, 0}, {1.25, 2.0, 0.5}));
  c.start = {0.1, 0.25, 0.25};
  c.goal = {1.0, 1.8, 0.25};
  c.start_frame = Eigen::Vector4d(1, 0, 0, 0);
  sctomp::validate_corridor(c);
  return c;
}

// Two-box spatial corridor with a climb; exercises genuinely 3D frames.
inline Corridor quad_corridor() {
  Corridor c;
  c.regions.push_back(make_box({0, 0, 0}, {3.0, 1.0, 1.0}));
  c.regions.push_back(make_box({2.0, 0, 0}, {3.0, 1.0, 3.0}));
  c.start = {0.3, 0.5, 0.5};
  c.goal = {2.5, 0.5, 2.6};
  c.start_frame = Eigen::Vector4d(1, 0, 0, 0);
  sctomp::validate_corridor(c);
  return c;
}

// Planar L-shaped track for the car: boxes carry |z| <= 1e-3 slabs.
inline Corridor car_corridor() {
  Corridor c;
  c.regions.push_back(make_box({0, 0, -1e-3}, {1.3, 0.4, 1e-3}));
  c.regions.push_back(make_box({0.9, 0, -1e-3}, {1.3, 1.2, 1e-3}));
  c.start = {0.1, 0.2, 0.0};
  c.goal = {1.1, 1.1, 0.0};
  c.start_frame = Eigen::Vector4d(1, 0, 0, 0);
  sctomp::validate_corridor(c);
  return c;
}

}  // namespace fixtures

#endif
