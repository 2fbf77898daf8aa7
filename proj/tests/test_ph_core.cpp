#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Geometry>
#include <random>

#include "sctomp/ph_curve.hpp"
#include "sctomp/ph_spline.hpp"

using namespace sctomp;

namespace {

QuaternionPoly<double> constant_z(double u, double v, double g, double h,
                                  int n = 4) {
  std::vector<Vec4T<double>> tuples(n + 1, Vec4T<double>{u, v, g, h});
  return QuaternionPoly<double>(tuples);
}

QuaternionPoly<double> random_z(std::mt19937& rng, bool planar = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Eigen::Vector4d base(u(rng), u(rng), u(rng), u(rng));
    if (base.norm() < 0.3) continue;
    base.normalize();
    base *= 1.0 + 0.3 * u(rng);
    std::vector<Vec4T<double>> tuples(5);
    for (auto& t : tuples)
      for (int c = 0; c < 4; ++c) t[c] = base[c] + 0.25 * u(rng);
    if (planar)
      for (auto& t : tuples) t[1] = t[2] = 0.0;  // v = g = 0: curve in x-y
    QuaternionPoly<double> z(tuples);
    PHSegment<double> probe(z, {0.0, 0.0, 0.0});
    if (probe.regular(1e-3)) return z;
  }
}

// Adaptive Simpson quadrature, the independent oracle for arc-length and
// curve-position checks.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-12) {
  if (b - a < 1e-14) return 0.0;
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 28);
}

}  // namespace

TEST_CASE("hodograph of simple generators") {
  {
    PHSegment<double> seg(constant_z(1, 0, 0, 0), {0, 0, 0});
    const auto hp = seg.hodograph_at(0.4);
    CHECK(hp[0] == Catch::Approx(1.0));
    CHECK(hp[1] == Catch::Approx(0.0).margin(1e-15));
    CHECK(hp[2] == Catch::Approx(0.0).margin(1e-15));
  }
  {
    // k i k* = -i: the hodograph points along -x.
    PHSegment<double> seg(constant_z(0, 0, 0, 1), {0, 0, 0});
    const auto hp = seg.hodograph_at(0.8);
    CHECK(hp[0] == Catch::Approx(-1.0));
    CHECK(hp[1] == Catch::Approx(0.0).margin(1e-15));
    CHECK(hp[2] == Catch::Approx(0.0).margin(1e-15));
  }
  {
    PHSegment<double> seg(constant_z(1, 2, 0, 2), {0, 0, 0});
    const auto hp = seg.hodograph_at(0.1);
    CHECK(hp[0] == Catch::Approx(1.0));
    CHECK(hp[1] == Catch::Approx(4.0));
    CHECK(hp[2] == Catch::Approx(8.0));
  }
}

TEST_CASE("parametric speed") {
  PHSegment<double> seg(constant_z(1, 2, 0, 2), {0, 0, 0});
  for (double xi : {0.0, 0.33, 1.0})
    CHECK(seg.sigma_at(xi) == Catch::Approx(9.0));
  PHSegment<double> unit(constant_z(1, 0, 0, 0), {0, 0, 0});
  CHECK(unit.sigma_at(0.5) == Catch::Approx(1.0));
}

TEST_CASE("PH identity: sigma^2 equals squared hodograph norm") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    PHSegment<double> seg(random_z(rng), {0, 0, 0});
    // Pointwise identity at 1000 samples.
    for (int i = 0; i <= 1000; ++i) {
      const double xi = i / 1000.0;
      const double s = seg.sigma_at(xi);
      const auto hp = seg.hodograph_at(xi);
      const double n2 = hp[0] * hp[0] + hp[1] * hp[1] + hp[2] * hp[2];
      REQUIRE(std::abs(s * s - n2) <= 1e-9 * (1.0 + s * s));
    }
    // Exact polynomial identity on the Bernstein coefficients.
    const auto s2 = product(seg.sigma_poly(), seg.sigma_poly());
    auto n2 = product(seg.hodograph()[0], seg.hodograph()[0]);
    n2 = n2 + product(seg.hodograph()[1], seg.hodograph()[1]);
    n2 = n2 + product(seg.hodograph()[2], seg.hodograph()[2]);
    const auto diff = s2 - n2;
    double cmax = 0.0;
    for (double c : s2.coeffs()) cmax = std::max(cmax, std::abs(c));
    for (double c : diff.coeffs()) REQUIRE(std::abs(c) <= 1e-10 * cmax);
  }
}

TEST_CASE("degree bookkeeping for nonics") {
  std::mt19937 rng(5);
  PHSegment<double> seg(random_z(rng), {0, 0, 0});
  CHECK(seg.n() == 4);
  CHECK(seg.hodograph()[0].degree() == 8);
  CHECK(seg.sigma_poly().degree() == 8);
  CHECK(seg.curve_degree() == 9);
  CHECK(seg.control_points().size() == 10);
}

TEST_CASE("euler-rodrigues frame") {
  {
    const auto R = erf_frame(constant_z(1, 0, 0, 0), 0.3);
    CHECK((R - Eigen::Matrix3d::Identity()).norm() ==
          Catch::Approx(0.0).margin(1e-15));
  }
  {
    // Constant unit generator (cos t/2, sin t/2, 0, 0): rotation by t about x.
    const double theta = 0.7;
    const auto R = erf_frame(
        constant_z(std::cos(theta / 2), std::sin(theta / 2), 0, 0), 0.5);
    Eigen::Matrix3d expected =
        Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitX()).toRotationMatrix();
    CHECK((R - expected).norm() == Catch::Approx(0.0).margin(1e-12));
  }
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    PHSegment<double> seg(random_z(rng), {0, 0, 0});
    const auto R = erf_frame(seg.z(), 0.37);
    CHECK((R.transpose() * R - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() <= 1e-9);
    // Tangency: e1 * sigma = hodograph.
    for (int i = 0; i <= 100; ++i) {
      const double xi = i / 100.0;
      const double s = seg.sigma_at(xi);
      const auto hp = seg.hodograph_at(xi);
      const Eigen::Vector3d e1 = erf_frame(seg.z(), xi).col(0);
      REQUIRE((e1 * s - Eigen::Vector3d(hp[0], hp[1], hp[2])).norm() <=
              1e-9 * s);
    }
  }
}

TEST_CASE("frame angular velocity") {
  {
    const auto chi = frame_angular_velocity(constant_z(1, 2, 0, 2), 0.5);
    CHECK(chi.norm() == Catch::Approx(0.0).margin(1e-15));
  }
  std::mt19937 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    PHSegment<double> seg(random_z(rng), {0, 0, 0});
    const double h = 1e-5;
    for (int i = 1; i < 100; ++i) {
      const double xi = i / 100.0;
      const auto chi = frame_angular_velocity(seg.z(), xi);
      const Eigen::Matrix3d Rp = erf_frame(seg.z(), xi + h);
      const Eigen::Matrix3d Rm = erf_frame(seg.z(), xi - h);
      const Eigen::Matrix3d R = erf_frame(seg.z(), xi);
      const Eigen::Matrix3d dR = (Rp - Rm) / (2.0 * h);
      REQUIRE(std::abs(chi[0] - dR.col(1).dot(R.col(2))) <= 1e-6);
      REQUIRE(std::abs(chi[1] - dR.col(2).dot(R.col(0))) <= 1e-6);
      REQUIRE(std::abs(chi[2] - dR.col(0).dot(R.col(1))) <= 1e-6);
    }
  }
}

TEST_CASE("planar generators have twist-free frames") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    PHSegment<double> seg(random_z(rng, /*planar=*/true), {0, 0, 0});
    for (int i = 0; i <= 50; ++i) {
      const double xi = i / 50.0;
      const auto chi = seg.chi_at(xi);
      REQUIRE(std::abs(chi[0]) <= 1e-12);
      REQUIRE(std::abs(chi[1]) <= 1e-12);
    }
  }
}

TEST_CASE("degenerate sigma raises") {
  // Generator passing through zero: u = xi - 1/2, all other channels zero.
  std::vector<Vec4T<double>> tuples(5, Vec4T<double>{0, 0, 0, 0});
  for (int i = 0; i <= 4; ++i) tuples[i][0] = i / 4.0 - 0.5;
  PHSegment<double> seg(QuaternionPoly<double>(tuples), {0, 0, 0});
  CHECK(!seg.regular());
  CHECK_THROWS_AS(seg.chi_at(0.5), DegenerateCurveError);
  CHECK_THROWS_AS(sample_segment(seg, 0.5), DegenerateCurveError);
}

TEST_CASE("control points of a straight unit-speed line") {
  PHSegment<double> seg(constant_z(1, 0, 0, 0), {0, 0, 0});
  const auto& pts = seg.control_points();
  REQUIRE(pts.size() == 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(pts[i][0] == Catch::Approx(i / 9.0).margin(1e-15));
    CHECK(pts[i][1] == Catch::Approx(0.0).margin(1e-15));
    CHECK(pts[i][2] == Catch::Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("curve reproduces the integrated hodograph") {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3T<double> origin{0.3, -0.7, 1.1};
    PHSegment<double> seg(random_z(rng), origin);
    CHECK(seg.control_points()[0][0] == origin[0]);
    for (int i = 0; i <= 100; ++i) {
      const double xi = i / 100.0;
      const auto p = seg.gamma(xi);
      for (int c = 0; c < 3; ++c) {
        const double q = integrate(
            [&](double s) { return seg.hodograph_at(s)[c]; }, 0.0, xi);
        REQUIRE(std::abs(p[c] - (origin[c] + q)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("arc length") {
  PHSegment<double> a(constant_z(1, 2, 0, 2), {0, 0, 0});
  CHECK(a.arc_length() == Catch::Approx(9.0));
  PHSegment<double> b(constant_z(1, 0, 0, 0), {0, 0, 0});
  CHECK(b.arc_length() == Catch::Approx(1.0));

  std::mt19937 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    PHSegment<double> seg(random_z(rng), {0, 0, 0});
    const double oracle = integrate(
        [&](double s) {
          const auto hp = seg.hodograph_at(s);
          return std::sqrt(hp[0] * hp[0] + hp[1] * hp[1] + hp[2] * hp[2]);
        },
        0.0, 1.0);
    CHECK(seg.arc_length() == Catch::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("spline functionals") {
  {
    std::vector<PHSegment<double>> segs;
    segs.emplace_back(constant_z(1, 0, 0, 0), Vec3T<double>{0, 0, 0});
    PHSpline line(std::move(segs));
    const auto f = spline_functionals(line);
    CHECK(f.arc_length == Catch::Approx(1.0));
    CHECK(f.energy == Catch::Approx(0.0).margin(1e-14));
    CHECK(f.twist == Catch::Approx(0.0).margin(1e-14));
  }
  {
    std::mt19937 rng(29);
    std::vector<PHSegment<double>> segs;
    segs.emplace_back(random_z(rng, /*planar=*/true), Vec3T<double>{0, 0, 0});
    PHSpline planar(std::move(segs));
    const auto f = spline_functionals(planar);
    CHECK(f.twist == Catch::Approx(0.0).margin(1e-12));
    CHECK(f.energy > 0.0);
  }
}

TEST_CASE("frame jet matches finite differences") {
  std::mt19937 rng(31);
  PHSegment<double> seg(random_z(rng), {0, 0, 0});
  const double h = 1e-5;
  for (double xi : {0.2, 0.5, 0.8}) {
    const auto jet = frame_jet(seg, xi);
    const auto fp = frame_jet(seg, xi + h);
    const auto fm = frame_jet(seg, xi - h);
    CHECK(jet.dsigma ==
          Catch::Approx((fp.sigma - fm.sigma) / (2 * h)).margin(1e-6));
    CHECK(jet.ddsigma ==
          Catch::Approx((fp.sigma - 2 * jet.sigma + fm.sigma) / (h * h))
              .margin(1e-4));
    CHECK((jet.dR - (fp.R - fm.R) / (2 * h)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((jet.ddR - (fp.R - 2 * jet.R + fm.R) / (h * h))
              .cwiseAbs()
              .maxCoeff() <= 1e-3);
    CHECK((jet.dchi - (fp.chi - fm.chi) / (2 * h)).cwiseAbs().maxCoeff() <=
          1e-5);
    CHECK((jet.ddchi - (fp.chi - 2 * jet.chi + fm.chi) / (h * h))
              .cwiseAbs()
              .maxCoeff() <= 1e-2);
  }
}

TEST_CASE("spline locate and evaluation across joins") {
  std::mt19937 rng(37);
  // Two independent segments just to exercise the global parameter map.
  std::vector<PHSegment<double>> segs;
  segs.emplace_back(random_z(rng), Vec3T<double>{0, 0, 0});
  const auto join = segs[0].gamma(1.0);
  segs.emplace_back(random_z(rng), join);
  PHSpline spline(std::move(segs));
  CHECK(spline.num_segments() == 2);
  CHECK(spline.locate(0.0).first == 0);
  CHECK(spline.locate(1.5).first == 1);
  CHECK(spline.locate(2.0).first == 1);
  CHECK(spline.locate(2.0).second == Catch::Approx(1.0));
  CHECK_THROWS_AS(spline.locate(2.5), DomainError);
  const auto p = spline.gamma(1.0);
  for (int c = 0; c < 3; ++c) CHECK(p[c] == Catch::Approx(join[c]));
}
