#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "sctomp/corridor.hpp"

using namespace sctomp;

namespace {

nlohmann::json region_json(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
                           bool with_vertices = false) {
  const auto box = make_box(lo, hi);
  nlohmann::json r;
  r["A"] = nlohmann::json::array();
  r["b"] = nlohmann::json::array();
  for (int i = 0; i < box.A.rows(); ++i) {
    r["A"].push_back({box.A(i, 0), box.A(i, 1), box.A(i, 2)});
    r["b"].push_back(box.b[i]);
  }
  if (with_vertices) {
    r["vertices"] = nlohmann::json::array();
    for (const auto& v : box.vertices) r["vertices"].push_back({v[0], v[1], v[2]});
  }
  return r;
}

std::string write_temp(const nlohmann::json& j, const std::string& name) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << j.dump(2);
  return path.string();
}

}  // namespace

TEST_CASE("contains on the unit cube") {
  const auto cube = make_box({0, 0, 0}, {1, 1, 1});
  CHECK(contains(cube, {0.5, 0.5, 0.5}, 0.0));
  CHECK(!contains(cube, {1.0000001, 0.5, 0.5}, 1e-9));
  CHECK(contains(cube, {1.0, 1.0, 1.0}, 0.0));  // closed boundary
  for (const auto& v : cube.vertices) CHECK(contains(cube, v, 1e-9));
}

TEST_CASE("chebyshev ball of a box") {
  const auto cube = make_box({0, 0, 0}, {2, 1, 1});
  const auto ball = chebyshev_ball(cube);
  CHECK(ball.radius == Catch::Approx(0.5).margin(1e-5));
  CHECK(ball.center[1] == Catch::Approx(0.5).margin(1e-4));
  CHECK(ball.center[2] == Catch::Approx(0.5).margin(1e-4));
}

TEST_CASE("region_of maps the global parameter to its segment") {
  Corridor c;
  for (int k = 0; k < 4; ++k)
    c.regions.push_back(make_box({double(k), 0, 0}, {k + 1.0, 1, 1}));
  c.start = {0.5, 0.5, 0.5};
  c.goal = {3.5, 0.5, 0.5};
  CHECK(region_of(c, 0.0) == 0);
  CHECK(region_of(c, 2.5) == 2);
  CHECK(region_of(c, 4.0) == 3);
  CHECK_THROWS_AS(region_of(c, 4.5), DomainError);
  CHECK_THROWS_AS(region_of(c, -0.5), DomainError);

  // Monotone in xi.
  int prev = 0;
  for (int i = 0; i <= 400; ++i) {
    const int k = region_of(c, 4.0 * i / 400.0);
    REQUIRE(k >= prev);
    prev = k;
  }
}

TEST_CASE("load_corridor accepts a valid two-box chain") {
  nlohmann::json j;
  j["regions"] = {region_json({0, 0, 0}, {1.05, 1, 1}, true),
                  region_json({0.95, 0, 0}, {2, 1, 1})};
  j["start"] = {0.1, 0.5, 0.5};
  j["goal"] = {1.9, 0.5, 0.5};
  const auto path = write_temp(j, "corridor_ok.json");
  const auto c = load_corridor(path);
  CHECK(c.num_regions() == 2);
  REQUIRE(c.overlap_probes.size() == 1);
  CHECK(contains(c.regions[0], c.overlap_probes[0], 1e-7));
  CHECK(contains(c.regions[1], c.overlap_probes[0], 1e-7));
}

TEST_CASE("load_corridor rejects a disjoint chain naming the join") {
  nlohmann::json j;
  j["regions"] = {region_json({0, 0, 0}, {1, 1, 1}),
                  region_json({3, 0, 0}, {4, 1, 1})};
  j["start"] = {0.1, 0.5, 0.5};
  j["goal"] = {3.9, 0.5, 0.5};
  const auto path = write_temp(j, "corridor_disjoint.json");
  try {
    load_corridor(path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
    CHECK(std::string(e.what()).find("overlap") != std::string::npos);
  }
}

TEST_CASE("load_corridor rejects a goal outside the last region") {
  nlohmann::json j;
  j["regions"] = {region_json({0, 0, 0}, {1, 1, 1})};
  j["start"] = {0.1, 0.5, 0.5};
  j["goal"] = {1.5, 0.5, 0.5};
  const auto path = write_temp(j, "corridor_badgoal.json");
  try {
    load_corridor(path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("goal") != std::string::npos);
  }
}

TEST_CASE("load_corridor rejects malformed json") {
  const auto path = std::filesystem::temp_directory_path() / "corridor_bad.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_corridor(path.string()), ParseError);
  CHECK_THROWS_AS(load_corridor("/nonexistent/corridor.json"), ParseError);
}

TEST_CASE("load_corridor rejects unbounded regions") {
  // A single halfspace cannot bound a region.
  nlohmann::json j;
  j["regions"] = {nlohmann::json{{"A", {{1.0, 0.0, 0.0}}}, {"b", {1.0}}}};
  j["start"] = {0.0, 0.0, 0.0};
  j["goal"] = {0.5, 0.0, 0.0};
  const auto path = write_temp(j, "corridor_unbounded.json");
  CHECK_THROWS_AS(load_corridor(path), ValidationError);
}

TEST_CASE("box_split fixtures") {
  const auto cube = make_box({0, 0, 0}, {1, 1, 1});
  const auto one = box_split(cube, 0);
  REQUIRE(one.size() == 1);
  CHECK(contains(one[0], {0.5, 0.5, 0.5}));
  CHECK(!contains(one[0], {1.1, 0.5, 0.5}));

  const auto wide = make_box({0, 0, 0}, {2, 1, 1});
  const auto two = box_split(wide, 1);
  REQUIRE(two.size() == 2);
  // Overlap on x in [0.95, 1.05].
  CHECK(contains(two[0], {1.049, 0.5, 0.5}));
  CHECK(!contains(two[0], {1.051, 0.5, 0.5}));
  CHECK(contains(two[1], {0.951, 0.5, 0.5}));
  CHECK(!contains(two[1], {0.949, 0.5, 0.5}));

  const auto four = box_split(make_box({0, 0, 0}, {4, 1, 1}), 3);
  REQUIRE(four.size() == 4);
  for (size_t k = 0; k + 1 < four.size(); ++k) {
    const auto ball = chebyshev_ball({&four[k], &four[k + 1]});
    REQUIRE(ball.radius > 1e-3);
  }

  // Non-axis-aligned input is rejected.
  Eigen::MatrixX3d A(6, 3);
  A << 1, 1, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  Eigen::VectorXd b(6);
  b << 1, 0, 1, 0, 1, 0;
  CHECK_THROWS_AS(box_split(ConvexRegion(A, b), 1), ValidationError);
}
