#ifndef SCTOMP_PH_SPLINE_HPP
#define SCTOMP_PH_SPLINE_HPP

#include <Eigen/Core>
#include <algorithm>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "sctomp/ph_curve.hpp"

namespace sctomp {

/// Concatenation of m PH segments over the global parameter xi in [0, m].
/// Segment k (0-based) covers [k, k+1] with local parameter xi - k. The
/// assembly in spline_opt guarantees the generator polynomial is C^3 across
/// joins, which makes sigma, R and chi C^2 in the global parameter.
template <class T>
class PHSplineT {
 public:
  PHSplineT() = default;
  explicit PHSplineT(std::vector<PHSegment<T>> segments)
      : segments_(std::move(segments)) {
    if (segments_.empty()) throw DomainError("PHSpline: no segments");
  }

  int num_segments() const { return static_cast<int>(segments_.size()); }
  const std::vector<PHSegment<T>>& segments() const { return segments_; }
  const PHSegment<T>& segment(int k) const { return segments_[k]; }

  /// Splits global xi in [0, m] into (segment index, local parameter).
  std::pair<int, double> locate(double xi) const {
    const double m = num_segments();
    if (xi < -1e-9 || xi > m + 1e-9)
      throw DomainError("PHSpline: parameter outside [0, m]");
    xi = std::clamp(xi, 0.0, m);
    int k = std::min(static_cast<int>(xi), num_segments() - 1);
    return {k, xi - k};
  }

  Vec3T<T> gamma(double xi) const {
    const auto [k, loc] = locate(xi);
    return segments_[k].gamma(loc);
  }
  T sigma(double xi) const {
    const auto [k, loc] = locate(xi);
    return segments_[k].sigma_at(loc);
  }
  Vec3T<T> chi(double xi) const {
    const auto [k, loc] = locate(xi);
    return segments_[k].chi_at(loc);
  }

  T arc_length() const {
    T total(0.0);
    for (const auto& s : segments_) total += s.arc_length();
    return total;
  }

 private:
  std::vector<PHSegment<T>> segments_;
};

using PHSpline = PHSplineT<double>;

inline FrameSample sample_spline(const PHSpline& spline, double xi) {
  const auto [k, loc] = spline.locate(xi);
  return sample_segment(spline.segment(k), loc);
}

inline FrameJet spline_jet(const PHSpline& spline, double xi) {
  const auto [k, loc] = spline.locate(xi);
  return frame_jet(spline.segment(k), loc);
}

/// Arc length L, bending/twist energy E = integral of |chi|^2, and twist
/// E_chi1 = integral of chi1^2, accumulated per segment. The chi integrands
/// are rational, so they go through fixed 64-point Gauss-Legendre; sigma is
/// integrated exactly.
struct SplineFunctionals {
  double arc_length = 0.0;
  double energy = 0.0;
  double twist = 0.0;
};

template <class T>
struct SplineFunctionalsT {
  T arc_length{0.0};
  T energy{0.0};
  T twist{0.0};
};

template <class T>
SplineFunctionalsT<T> spline_functionals_t(const PHSplineT<T>& spline) {
  const auto& rule = gauss_legendre(64);
  SplineFunctionalsT<T> f;
  for (const auto& seg : spline.segments()) {
    f.arc_length += seg.arc_length();
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
      const auto c = seg.chi_at(rule.nodes[i]);
      f.twist += rule.weights[i] * (c[0] * c[0]);
      f.energy += rule.weights[i] * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    }
  }
  return f;
}

inline SplineFunctionals spline_functionals(const PHSpline& spline) {
  const auto f = spline_functionals_t(spline);
  return {f.arc_length, f.energy, f.twist};
}

/// Largest two-sided mismatch of sigma, R, chi and their first two
/// derivatives over all interior joins (diagnostic for C^2 smoothness of the
/// parametric functions).
inline double max_join_mismatch(const PHSpline& spline) {
  double worst = 0.0;
  for (int k = 0; k + 1 < spline.num_segments(); ++k) {
    const FrameJet a = frame_jet(spline.segment(k), 1.0);
    const FrameJet b = frame_jet(spline.segment(k + 1), 0.0);
    const auto upd = [&worst](double x) { worst = std::max(worst, std::abs(x)); };
    upd(a.sigma - b.sigma);
    upd(a.dsigma - b.dsigma);
    upd(a.ddsigma - b.ddsigma);
    for (int i = 0; i < 3; ++i) {
      upd(a.chi[i] - b.chi[i]);
      upd(a.dchi[i] - b.dchi[i]);
      upd(a.ddchi[i] - b.ddchi[i]);
      for (int j = 0; j < 3; ++j) {
        upd(a.R(i, j) - b.R(i, j));
        upd(a.dR(i, j) - b.dR(i, j));
        upd(a.ddR(i, j) - b.ddR(i, j));
      }
    }
  }
  return worst;
}

/// Position gap and generator C^3 gap at joins (construction invariants).
inline double max_join_position_gap(const PHSpline& spline) {
  double worst = 0.0;
  for (int k = 0; k + 1 < spline.num_segments(); ++k) {
    const auto a = spline.segment(k).gamma(1.0);
    const auto b = spline.segment(k + 1).gamma(0.0);
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
  }
  return worst;
}

inline double max_join_generator_gap(const PHSpline& spline) {
  double worst = 0.0;
  for (int k = 0; k + 1 < spline.num_segments(); ++k) {
    for (int c = 0; c < 4; ++c) {
      Bernstein<double> pa = spline.segment(k).channel(c);
      Bernstein<double> pb = spline.segment(k + 1).channel(c);
      for (int d = 0; d < 4; ++d) {  // value and first three derivatives
        worst = std::max(worst, std::abs(pa.eval(1.0) - pb.eval(0.0)));
        pa = pa.derivative();
        pb = pb.derivative();
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Spline artifact file: everything needed to re-evaluate the parametric
// functions downstream without re-optimizing.
// ---------------------------------------------------------------------------

inline nlohmann::json spline_to_json(const PHSpline& spline) {
  nlohmann::json j;
  j["n"] = spline.segment(0).n();
  j["m"] = spline.num_segments();
  j["segments"] = nlohmann::json::array();
  for (const auto& seg : spline.segments()) {
    nlohmann::json s;
    s["tuples"] = nlohmann::json::array();
    for (const auto& t : seg.z().tuples())
      s["tuples"].push_back({t[0], t[1], t[2], t[3]});
    const auto& o = seg.origin();
    s["origin"] = {o[0], o[1], o[2]};
    j["segments"].push_back(std::move(s));
  }
  return j;
}

inline PHSpline spline_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    if (m < 1) throw ValidationError("spline artifact: m must be >= 1");
    std::vector<PHSegment<double>> segs;
    for (const auto& s : j.at("segments")) {
      std::vector<Vec4T<double>> tuples;
      for (const auto& t : s.at("tuples"))
        tuples.push_back({t.at(0).get<double>(), t.at(1).get<double>(),
                          t.at(2).get<double>(), t.at(3).get<double>()});
      if (static_cast<int>(tuples.size()) != n + 1)
        throw ValidationError("spline artifact: tuple count != n+1");
      const auto& o = s.at("origin");
      segs.emplace_back(QuaternionPoly<double>(tuples),
                        Vec3T<double>{o.at(0).get<double>(),
                                      o.at(1).get<double>(),
                                      o.at(2).get<double>()});
    }
    if (static_cast<int>(segs.size()) != m)
      throw ValidationError("spline artifact: segment count != m");
    return PHSpline(std::move(segs));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("spline artifact: ") + e.what());
  }
}

}  // namespace sctomp

#endif
