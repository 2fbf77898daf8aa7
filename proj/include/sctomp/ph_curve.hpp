#ifndef SCTOMP_PH_CURVE_HPP
#define SCTOMP_PH_CURVE_HPP

#include <Eigen/Core>
#include <vector>

#include "sctomp/bernstein.hpp"
#include "sctomp/dual.hpp"
#include "sctomp/errors.hpp"
#include "sctomp/gauss_legendre.hpp"

namespace sctomp {

/// Parametric speed below this threshold counts as a degenerate curve.
inline constexpr double kSigmaFloor = 1e-8;

/// Degree-n polynomial with four scalar Bernstein channels (u, v, g, h).
/// Acts as the generator of one hodograph segment: the channels enter the
/// curve only through the quadratic forms in PHSegment.
template <class T>
struct QuaternionPoly {
  std::array<Bernstein<T>, 4> ch;  // u, v, g, h

  QuaternionPoly() = default;
  /// tuples[i] = (u_i, v_i, g_i, h_i); all channels share the degree.
  explicit QuaternionPoly(const std::vector<Vec4T<T>>& tuples) {
    if (tuples.size() < 2)
      throw DomainError("QuaternionPoly: need at least two coefficient tuples");
    for (int c = 0; c < 4; ++c) {
      std::vector<T> cc(tuples.size());
      for (size_t i = 0; i < tuples.size(); ++i) cc[i] = tuples[i][c];
      ch[c] = Bernstein<T>(std::move(cc));
    }
  }

  int degree() const { return ch[0].degree(); }

  Vec4T<T> eval(double xi) const {
    return {ch[0].eval(xi), ch[1].eval(xi), ch[2].eval(xi), ch[3].eval(xi)};
  }

  std::vector<Vec4T<T>> tuples() const {
    std::vector<Vec4T<T>> t(degree() + 1);
    for (int i = 0; i <= degree(); ++i)
      t[i] = {ch[0][i], ch[1][i], ch[2][i], ch[3][i]};
    return t;
  }
};

/// One evaluated point of a curve with its adapted frame.
struct FrameSample {
  Eigen::Vector3d position;  // m
  Eigen::Matrix3d rotation;  // columns e1, e2, e3, orthonormal
  double sigma = 0.0;        // m per unit of the local parameter
  Eigen::Vector3d chi;       // frame angular velocity per unit parameter
};

/// Frame quantities together with first and second parameter derivatives;
/// used by the join-smoothness checks.
struct FrameJet {
  double sigma, dsigma, ddsigma;
  Eigen::Matrix3d R, dR, ddR;
  Eigen::Vector3d chi, dchi, ddchi;
};

namespace detail {

// N/D and its first two derivatives from the value jets of N and D.
struct RatioJet {
  double r, dr, ddr;
};
inline RatioJet ratio_jet(double n, double dn, double ddn, double d, double dd,
                          double ddd) {
  RatioJet out;
  out.r = n / d;
  out.dr = (dn - out.r * dd) / d;
  out.ddr = (ddn - 2.0 * out.dr * dd - out.r * ddd) / d;
  return out;
}

}  // namespace detail

/// Single PH segment: hodograph, parametric speed, adapted frame and its
/// angular velocity, all cached in exact Bernstein form. The curve has
/// degree 2n+1 and 2n+2 control points.
template <class T>
class PHSegment {
 public:
  PHSegment(QuaternionPoly<T> z, Vec3T<T> origin)
      : z_(std::move(z)), origin_(origin) {
    build();
  }

  const QuaternionPoly<T>& z() const { return z_; }
  const Vec3T<T>& origin() const { return origin_; }
  int n() const { return z_.degree(); }
  int curve_degree() const { return 2 * n() + 1; }

  /// Hodograph components of Z i Z* (each degree 2n).
  const std::array<Bernstein<T>, 3>& hodograph() const { return hodo_; }
  /// sigma = u^2 + v^2 + g^2 + h^2 (degree 2n).
  const Bernstein<T>& sigma_poly() const { return sigma_; }
  /// Numerators of chi = 2 vec(Z* Z') / sigma.
  const std::array<Bernstein<T>, 3>& chi_numerators() const { return chin_; }
  /// Unnormalized frame columns Z j Z* and Z k Z*.
  const std::array<Bernstein<T>, 3>& e2_raw() const { return e2raw_; }
  const std::array<Bernstein<T>, 3>& e3_raw() const { return e3raw_; }

  /// Bezier control points of gamma; point 0 is the segment origin.
  const std::vector<Vec3T<T>>& control_points() const { return ctrl_; }

  /// Every sigma Bernstein coefficient strictly positive (sufficient
  /// regularity condition).
  bool regular(double floor = 0.0) const {
    for (const T& c : sigma_.coeffs())
      if (!(value(c) > floor)) return false;
    return true;
  }

  T sigma_at(double xi) const { return sigma_.eval(xi); }

  Vec3T<T> gamma(double xi) const {
    if (xi < -1e-12 || xi > 1.0 + 1e-12)
      throw DomainError("PHSegment::gamma: parameter outside [0,1]");
    xi = xi < 0.0 ? 0.0 : (xi > 1.0 ? 1.0 : xi);
    std::vector<Vec3T<T>> tmp = ctrl_;
    for (int r = static_cast<int>(tmp.size()) - 1; r >= 1; --r)
      for (int i = 0; i < r; ++i)
        for (int c = 0; c < 3; ++c)
          tmp[i][c] = (1.0 - xi) * tmp[i][c] + xi * tmp[i + 1][c];
    return tmp[0];
  }

  Vec3T<T> hodograph_at(double xi) const {
    return {hodo_[0].eval(xi), hodo_[1].eval(xi), hodo_[2].eval(xi)};
  }

  /// Angular-velocity components (chi1, chi2, chi3) per unit local
  /// parameter; chi1 is the twist about the tangent.
  Vec3T<T> chi_at(double xi) const {
    const T s = guarded_sigma(xi);
    return {chin_[0].eval(xi) / s, chin_[1].eval(xi) / s, chin_[2].eval(xi) / s};
  }

  /// Exact arc length: integral of sigma.
  T arc_length() const { return sigma_.integral(); }

  const Bernstein<T>& channel(int c) const { return z_.ch[c]; }

 private:
  T guarded_sigma(double xi) const {
    T s = sigma_.eval(xi);
    if (!(value(s) > kSigmaFloor))
      throw DegenerateCurveError("parametric speed below regularity floor");
    return s;
  }

  void build() {
    const auto& u = z_.ch[0];
    const auto& v = z_.ch[1];
    const auto& g = z_.ch[2];
    const auto& h = z_.ch[3];

    const auto uu = product(u, u), vv = product(v, v);
    const auto gg = product(g, g), hh = product(h, h);
    const auto uv = product(u, v), ug = product(u, g), uh = product(u, h);
    const auto vg = product(v, g), vh = product(v, h), gh = product(g, h);

    // Z i Z*, Z j Z*, Z k Z*: the homogeneous rotation applied to the basis.
    hodo_ = {uu + vv - gg - hh, (uh + vg).scaled(2.0), (vh - ug).scaled(2.0)};
    e2raw_ = {(vg - uh).scaled(2.0), uu - vv + gg - hh, (gh + uv).scaled(2.0)};
    e3raw_ = {(vh + ug).scaled(2.0), (gh - uv).scaled(2.0), uu - vv - gg + hh};
    sigma_ = uu + vv + gg + hh;

    const auto du = u.derivative(), dv = v.derivative();
    const auto dg = g.derivative(), dh = h.derivative();
    // chi = 2 vec(Z* Z') / sigma; numerators cached with the 2 baked in.
    chin_ = {(product(u, dv) - product(v, du) - product(g, dh) + product(h, dg)).scaled(2.0),
             (product(u, dg) + product(v, dh) - product(g, du) - product(h, dv)).scaled(2.0),
             (product(u, dh) - product(v, dg) + product(g, dv) - product(h, du)).scaled(2.0)};

    // Control points: integrate the hodograph, c_{i+1} = c_i + h_i/(2n+1).
    const int pts = curve_degree() + 1;
    const double inv = 1.0 / curve_degree();
    ctrl_.resize(pts);
    ctrl_[0] = origin_;
    for (int i = 0; i + 1 < pts; ++i)
      for (int c = 0; c < 3; ++c)
        ctrl_[i + 1][c] = ctrl_[i][c] + inv * hodo_[c][i];
  }

  QuaternionPoly<T> z_;
  Vec3T<T> origin_;
  std::array<Bernstein<T>, 3> hodo_, e2raw_, e3raw_, chin_;
  Bernstein<T> sigma_;
  std::vector<Vec3T<T>> ctrl_;
};

/// Orthonormal Euler-Rodrigues frame at xi. The raw columns of
/// [Z i Z*, Z j Z*, Z k Z*] carry magnitude sigma, so each is normalized by
/// sigma to make the result a rotation.
template <class T>
std::array<Vec3T<T>, 3> erf_columns(const QuaternionPoly<T>& z, double xi) {
  const Vec4T<T> q = z.eval(xi);
  const T& u = q[0];
  const T& v = q[1];
  const T& g = q[2];
  const T& h = q[3];
  const T s = u * u + v * v + g * g + h * h;
  if (!(value(s) > kSigmaFloor))
    throw DegenerateCurveError("erf_columns: sigma below regularity floor");
  Vec3T<T> e1{(u * u + v * v - g * g - h * h) / s, 2.0 * (u * h + v * g) / s,
              2.0 * (v * h - u * g) / s};
  Vec3T<T> e2{2.0 * (v * g - u * h) / s, (u * u - v * v + g * g - h * h) / s,
              2.0 * (g * h + u * v) / s};
  Vec3T<T> e3{2.0 * (v * h + u * g) / s, 2.0 * (g * h - u * v) / s,
              (u * u - v * v - g * g + h * h) / s};
  return {e1, e2, e3};
}

inline Eigen::Matrix3d erf_frame(const QuaternionPoly<double>& z, double xi) {
  const auto cols = erf_columns(z, xi);
  Eigen::Matrix3d R;
  for (int c = 0; c < 3; ++c)
    R.col(c) = Eigen::Vector3d(cols[c][0], cols[c][1], cols[c][2]);
  return R;
}

/// chi(xi) = 2 vec(Z* Z') / sigma, straight from the quaternion channels.
inline Eigen::Vector3d frame_angular_velocity(const QuaternionPoly<double>& z,
                                              double xi) {
  const auto q = z.eval(xi);
  Vec4T<double> dq;
  for (int c = 0; c < 4; ++c) dq[c] = z.ch[c].derivative().eval(xi);
  const double u = q[0], v = q[1], g = q[2], h = q[3];
  const double s = u * u + v * v + g * g + h * h;
  if (!(s > kSigmaFloor))
    throw DegenerateCurveError("frame_angular_velocity: sigma below floor");
  return 2.0 / s *
         Eigen::Vector3d(u * dq[1] - v * dq[0] - g * dq[3] + h * dq[2],
                         u * dq[2] + v * dq[3] - g * dq[0] - h * dq[1],
                         u * dq[3] - v * dq[2] + g * dq[1] - h * dq[0]);
}

/// Full sample of a double segment at local xi.
inline FrameSample sample_segment(const PHSegment<double>& seg, double xi) {
  FrameSample f;
  const auto p = seg.gamma(xi);
  f.position = Eigen::Vector3d(p[0], p[1], p[2]);
  f.sigma = seg.sigma_at(xi);
  if (!(f.sigma > kSigmaFloor))
    throw DegenerateCurveError("sample_segment: sigma below regularity floor");
  f.rotation = erf_frame(seg.z(), xi);
  const auto c = seg.chi_at(xi);
  f.chi = Eigen::Vector3d(c[0], c[1], c[2]);
  return f;
}

/// sigma, R, chi and their first two local-parameter derivatives.
inline FrameJet frame_jet(const PHSegment<double>& seg, double xi) {
  FrameJet out;
  const auto& sp = seg.sigma_poly();
  const auto dsp = sp.derivative();
  const auto ddsp = dsp.derivative();
  out.sigma = sp.eval(xi);
  if (!(out.sigma > kSigmaFloor))
    throw DegenerateCurveError("frame_jet: sigma below regularity floor");
  out.dsigma = dsp.eval(xi);
  out.ddsigma = ddsp.eval(xi);

  const std::array<const std::array<Bernstein<double>, 3>*, 3> raws = {
      &seg.hodograph(), &seg.e2_raw(), &seg.e3_raw()};
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) {
      const auto& p = (*raws[c])[r];
      const auto dp = p.derivative();
      const auto j = detail::ratio_jet(p.eval(xi), dp.eval(xi),
                                       dp.derivative().eval(xi), out.sigma,
                                       out.dsigma, out.ddsigma);
      out.R(r, c) = j.r;
      out.dR(r, c) = j.dr;
      out.ddR(r, c) = j.ddr;
    }
  }
  for (int r = 0; r < 3; ++r) {
    const auto& p = seg.chi_numerators()[r];
    const auto dp = p.derivative();
    const auto j =
        detail::ratio_jet(p.eval(xi), dp.eval(xi), dp.derivative().eval(xi),
                          out.sigma, out.dsigma, out.ddsigma);
    out.chi[r] = j.r;
    out.dchi[r] = j.dr;
    out.ddchi[r] = j.ddr;
  }
  return out;
}

}  // namespace sctomp

#endif
