#ifndef SCTOMP_SPLINE_OPT_HPP
#define SCTOMP_SPLINE_OPT_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sctomp/corridor.hpp"
#include "sctomp/nlp.hpp"
#include "sctomp/ph_spline.hpp"

namespace sctomp {

enum class SplineCriterion { arc_length, energy, twist };

inline const char* to_string(SplineCriterion c) {
  switch (c) {
    case SplineCriterion::arc_length: return "arc_length";
    case SplineCriterion::energy: return "energy";
    case SplineCriterion::twist: return "twist";
  }
  return "unknown";
}

inline SplineCriterion parse_criterion(const std::string& s) {
  if (s == "arc_length") return SplineCriterion::arc_length;
  if (s == "energy") return SplineCriterion::energy;
  if (s == "twist") return SplineCriterion::twist;
  throw ValidationError("unknown spline criterion: " + s);
}

struct SplineOptConfig {
  SplineCriterion criterion = SplineCriterion::energy;
  double sigma_min = 1e-3;          // lower bound on sigma Bernstein coeffs
  double containment_margin = 2e-6; // tighten halfspaces by this much (m)
  double start_scale = 1.0;         // |Z(0)| when the start frame is fixed
  double goal_scale = 1.0;          // |Z(m)| when the goal frame is fixed
  double jitter = 1e-3;             // uniform perturbation of the initial guess
  std::uint64_t seed = 0;
  NlpOptions nlp;

  SplineOptConfig() {
    // Geometric criteria are cheap per iteration but ill-conditioned near
    // corridor corners; a deeper quasi-Newton memory pays off.
    nlp.lbfgs_memory = 30;
    nlp.max_inner = 2000;
    nlp.max_outer = 30;
  }
};

/// Free-coefficient bookkeeping for nonic (n = 4) splines. The generator
/// polynomial is matched up to its third derivative across joins, so tuples
/// 0-3 of every segment after the first are eliminated; a fixed start frame
/// pins tuple 0 of segment 1 and a fixed goal frame pins the last tuple of
/// segment m.
struct CoefficientLayout {
  int m = 1;
  bool fixed_start = false;
  bool fixed_goal = false;

  int free_count() const {
    return (fixed_start ? 16 : 20) + 4 * (m - 1) - (fixed_goal ? 4 : 0);
  }
};

/// Net degrees of freedom after continuity elimination, frame fixing, and
/// the 3-row endpoint equality. Under the reference configuration (both
/// frames fixed, endpoint constrained) this is 4m + 5.
inline int coefficient_ledger(int m, bool fixed_start, bool fixed_goal_frame,
                              bool endpoint_constrained) {
  if (m < 1) throw DomainError("coefficient_ledger: m must be >= 1");
  int dof = 20 + 4 * (m - 1);
  if (fixed_start) dof -= 4;
  if (fixed_goal_frame) dof -= 4;
  if (endpoint_constrained) dof -= 3;
  return dof;
}

/// Boundary data shared by assembly and optimization.
struct SplineBoundary {
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector4d> q_start, q_goal;  // unit (w,x,y,z)
  double start_scale = 1.0, goal_scale = 1.0;

  CoefficientLayout layout(int m) const {
    return {m, q_start.has_value(), q_goal.has_value()};
  }
};

inline SplineBoundary boundary_from(const Corridor& corridor,
                                    const SplineOptConfig& cfg) {
  SplineBoundary bc;
  bc.p0 = corridor.start;
  bc.q_start = corridor.start_frame;
  bc.q_goal = corridor.goal_frame;
  bc.start_scale = cfg.start_scale;
  bc.goal_scale = cfg.goal_scale;
  return bc;
}

namespace detail {

// d tuples of segment k+1 fixed by C^3 continuity from c tuples of segment k
// (Bernstein endpoint-derivative matching for equal degrees):
//   d0 = c4, d1 = 2c4 - c3, d2 = 4c4 - 4c3 + c2, d3 = 8c4 - 12c3 + 6c2 - c1.
template <class T>
std::array<Vec4T<T>, 4> chain_tuples(const std::array<Vec4T<T>, 5>& c) {
  std::array<Vec4T<T>, 4> d;
  for (int i = 0; i < 4; ++i) {
    d[0][i] = c[4][i];
    d[1][i] = 2.0 * c[4][i] - c[3][i];
    d[2][i] = 4.0 * c[4][i] - 4.0 * c[3][i] + c[2][i];
    d[3][i] = 8.0 * c[4][i] - 12.0 * c[3][i] + 6.0 * c[2][i] - c[1][i];
  }
  return d;
}

}  // namespace detail

/// Builds the full spline from the free coefficients. Continuity and the
/// fixed frames are enforced by construction; segment origins chain through
/// the accumulated control points. With validate set, any non-positive
/// sigma coefficient raises a regularity error.
template <class T>
PHSplineT<T> assemble_spline_t(const std::vector<T>& z,
                               const SplineBoundary& bc, int m,
                               bool validate = true) {
  const CoefficientLayout layout = bc.layout(m);
  if (static_cast<int>(z.size()) != layout.free_count())
    throw DomainError("assemble_spline: expected " +
                      std::to_string(layout.free_count()) +
                      " free coefficients, got " + std::to_string(z.size()));

  int zi = 0;
  const auto take_tuple = [&]() {
    Vec4T<T> t{z[zi], z[zi + 1], z[zi + 2], z[zi + 3]};
    zi += 4;
    return t;
  };

  std::vector<PHSegment<T>> segments;
  segments.reserve(m);
  Vec3T<T> origin{T(bc.p0[0]), T(bc.p0[1]), T(bc.p0[2])};
  std::array<Vec4T<T>, 5> tuples;
  for (int k = 0; k < m; ++k) {
    int first_free = 4;
    if (k == 0) {
      if (layout.fixed_start) {
        for (int i = 0; i < 4; ++i)
          tuples[0][i] = T(bc.start_scale * (*bc.q_start)[i]);
      } else {
        tuples[0] = take_tuple();
      }
      first_free = 1;
    } else {
      const auto fixed = detail::chain_tuples(tuples);
      for (int j = 0; j < 4; ++j) tuples[j] = fixed[j];
    }
    for (int j = first_free; j <= 4; ++j) {
      if (k == m - 1 && layout.fixed_goal && j == 4) {
        for (int i = 0; i < 4; ++i)
          tuples[4][i] = T(bc.goal_scale * (*bc.q_goal)[i]);
      } else {
        tuples[j] = take_tuple();
      }
    }

    QuaternionPoly<T> q(std::vector<Vec4T<T>>(tuples.begin(), tuples.end()));
    segments.emplace_back(std::move(q), origin);
    origin = segments.back().control_points().back();
  }

  PHSplineT<T> spline(std::move(segments));
  if (validate) {
    for (int k = 0; k < m; ++k)
      if (!spline.segment(k).regular(0.0))
        throw ValidationError(
            "assemble_spline: sigma regularity violated in segment " +
            std::to_string(k + 1));
  }
  return spline;
}

inline PHSpline assemble_spline(const Eigen::VectorXd& free,
                                const Corridor& corridor,
                                const SplineOptConfig& cfg = {}) {
  std::vector<double> z(free.data(), free.data() + free.size());
  return assemble_spline_t(z, boundary_from(corridor, cfg),
                           corridor.num_regions());
}

/// Per-segment Bezier control points of the assembled spline.
inline std::vector<std::vector<Eigen::Vector3d>> spline_control_points(
    const Eigen::VectorXd& free, const Corridor& corridor,
    const SplineOptConfig& cfg = {}) {
  const PHSpline spline = assemble_spline(free, corridor, cfg);
  std::vector<std::vector<Eigen::Vector3d>> out;
  for (const auto& seg : spline.segments()) {
    std::vector<Eigen::Vector3d> pts;
    for (const auto& c : seg.control_points())
      pts.emplace_back(c[0], c[1], c[2]);
    out.push_back(std::move(pts));
  }
  return out;
}

namespace detail {

inline double uniform_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0,1)
}

// Minimal-rotation quaternion taking +x onto dir (w kept non-negative).
inline Eigen::Vector4d quat_from_x_to(const Eigen::Vector3d& dir_in) {
  Eigen::Vector3d dir = dir_in;
  const double n = dir.norm();
  if (n < 1e-12) return {1.0, 0.0, 0.0, 0.0};
  dir /= n;
  const Eigen::Vector3d x(1.0, 0.0, 0.0);
  const double c = x.dot(dir);
  if (c > 1.0 - 1e-14) return {1.0, 0.0, 0.0, 0.0};
  if (c < -1.0 + 1e-14) return {0.0, 0.0, 0.0, 1.0};  // half turn about z
  const Eigen::Vector3d axis = x.cross(dir).normalized();
  const double half = 0.5 * std::acos(std::clamp(c, -1.0, 1.0));
  Eigen::Vector4d q;
  q << std::cos(half), std::sin(half) * axis;
  return q;
}

}  // namespace detail

/// Deterministic feasible-leaning start: per segment, a constant generator
/// aligned with the chord between consecutive corridor waypoints (start,
/// overlap witnesses, goal), scaled so the segment length roughly matches
/// the chord, plus a small uniform jitter.
inline Eigen::VectorXd stage1_initial_guess(const Corridor& corridor,
                                            const SplineOptConfig& cfg) {
  const int m = corridor.num_regions();
  const SplineBoundary bc = boundary_from(corridor, cfg);
  const CoefficientLayout layout = bc.layout(m);

  std::vector<Eigen::Vector3d> waypoints;
  waypoints.push_back(corridor.start);
  for (int k = 0; k + 1 < m; ++k) waypoints.push_back(corridor.overlap_probes[k]);
  waypoints.push_back(corridor.goal);

  std::vector<Eigen::Vector4d> tuple_guess(m);
  for (int k = 0; k < m; ++k) {
    const Eigen::Vector3d chord = waypoints[k + 1] - waypoints[k];
    const double scale = std::sqrt(std::max(chord.norm(), 1e-2));
    tuple_guess[k] = scale * detail::quat_from_x_to(chord);
  }

  Eigen::VectorXd z(layout.free_count());
  int zi = 0;
  if (!layout.fixed_start)
    for (int i = 0; i < 4; ++i) z[zi++] = tuple_guess[0][i];
  const int seg1_last = (m == 1 && layout.fixed_goal) ? 3 : 4;
  for (int j = 1; j <= seg1_last; ++j)
    for (int i = 0; i < 4; ++i) z[zi++] = tuple_guess[0][i];
  for (int k = 1; k < m; ++k) {
    if (k == m - 1 && layout.fixed_goal) continue;
    for (int i = 0; i < 4; ++i) z[zi++] = tuple_guess[k][i];
  }

  std::mt19937_64 rng(cfg.seed);
  for (int i = 0; i < z.size(); ++i)
    z[i] += cfg.jitter * (2.0 * detail::uniform_from_bits(rng()) - 1.0);
  return z;
}

struct SplineFit {
  PHSpline spline;
  Eigen::VectorXd free_coefficients;
  SplineFunctionals functionals;
  int dof_ledger = 0;
  SolveReport report;
};

/// Human-readable name of a stage-1 constraint row (equality rows first).
inline std::string stage1_row_name(const Corridor& corridor, int row) {
  if (row < 0) return "none";
  if (row < 3) return "endpoint[" + std::to_string(row) + "]";
  row -= 3;
  for (int k = 0; k < corridor.num_regions(); ++k) {
    const int faces = corridor.regions[k].num_halfspaces();
    const int block = faces * 10;
    if (row < block)
      return "containment segment " + std::to_string(k + 1) + " point " +
             std::to_string(row / faces) + " face " +
             std::to_string(row % faces);
    row -= block;
  }
  return "sigma regularity segment " + std::to_string(row / 9 + 1) +
         " coefficient " + std::to_string(row % 9);
}

namespace detail {

inline bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  for (int i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

// Shared evaluation pipeline for the stage-1 NLP, instantiated with plain
// doubles for values and dual scalars for derivatives. Constraint ordering:
// equalities = endpoint rows (3); inequalities = containment rows (per
// segment, per control point, per halfspace), then sigma regularity rows.
template <class D>
class Stage1Problem {
 public:
  Stage1Problem(const Corridor& corridor, const SplineOptConfig& cfg)
      : corridor_(corridor),
        cfg_(cfg),
        bc_(boundary_from(corridor, cfg)),
        m_(corridor.num_regions()),
        layout_(bc_.layout(m_)) {
    num_in_ = 0;
    for (int k = 0; k < m_; ++k)
      num_in_ += corridor_.regions[k].num_halfspaces() * 10;  // 2n+2 points
    num_in_ += 9 * m_;  // sigma coefficients, degree 2n
  }

  int num_vars() const { return layout_.free_count(); }
  int num_eq() const { return 3; }
  int num_in() const { return num_in_; }

  NlpProblem make_nlp() {
    NlpProblem p;
    p.n = num_vars();
    p.num_eq = num_eq();
    p.num_in = num_in();
    p.objective = [this](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      return objective(x, grad);
    };
    p.equalities = [this](const Eigen::VectorXd& x, Eigen::VectorXd& c,
                          JacobianSink* J) { equalities(x, c, J); };
    p.inequalities = [this](const Eigen::VectorXd& x, Eigen::VectorXd& c,
                            JacobianSink* J) { inequalities(x, c, J); };
    return p;
  }

 private:
  using SplineD = PHSplineT<D>;

  const SplineD& dual_spline(const Eigen::VectorXd& x) {
    if (!grad_cache_ || !same_vector(grad_x_, x)) {
      std::vector<D> z(x.size());
      for (int i = 0; i < x.size(); ++i)
        z[i] = D::seeded(x[i], static_cast<int>(x.size()), i);
      grad_cache_ = assemble_spline_t(z, bc_, m_, false);
      grad_x_ = x;
    }
    return *grad_cache_;
  }
  const PHSplineT<double>& value_spline(const Eigen::VectorXd& x) {
    if (!val_cache_ || !same_vector(val_x_, x)) {
      std::vector<double> z(x.data(), x.data() + x.size());
      val_cache_ = assemble_spline_t(z, bc_, m_, false);
      val_x_ = x;
    }
    return *val_cache_;
  }

  template <class T>
  T criterion_value(const PHSplineT<T>& s) const {
    if (cfg_.criterion == SplineCriterion::arc_length) {
      T total(0.0);
      for (const auto& seg : s.segments()) total += seg.arc_length();
      return total;
    }
    const auto& rule = gauss_legendre(64);
    T total(0.0);
    for (const auto& seg : s.segments()) {
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double xi = rule.nodes[i];
        const T sig = seg.sigma_poly().eval(xi);
        const T c1 = seg.chi_numerators()[0].eval(xi) / sig;
        if (cfg_.criterion == SplineCriterion::twist) {
          total += rule.weights[i] * (c1 * c1);
        } else {
          const T c2 = seg.chi_numerators()[1].eval(xi) / sig;
          const T c3 = seg.chi_numerators()[2].eval(xi) / sig;
          total += rule.weights[i] * (c1 * c1 + c2 * c2 + c3 * c3);
        }
      }
    }
    return total;
  }

  double objective(const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    if (!grad) return value(criterion_value(value_spline(x)));
    const D f = criterion_value(dual_spline(x));
    if (f.g.size())
      for (int i = 0; i < x.size(); ++i) (*grad)[i] += f.g[i];
    return f.v;
  }

  template <class T>
  void eq_rows(const PHSplineT<T>& s, Eigen::VectorXd& c, JacobianSink* J) {
    const auto& last = s.segment(m_ - 1).control_points().back();
    for (int r = 0; r < 3; ++r) {
      c[r] = value(last[r]) - corridor_.goal[r];
      if (J) add_row(*J, r, last[r]);
    }
  }

  template <class T>
  void in_rows(const PHSplineT<T>& s, Eigen::VectorXd& c, JacobianSink* J) {
    int row = 0;
    for (int k = 0; k < m_; ++k) {
      const auto& reg = corridor_.regions[k];
      for (const auto& pt : s.segment(k).control_points()) {
        for (int f = 0; f < reg.num_halfspaces(); ++f) {
          T lhs = reg.A(f, 0) * pt[0] + reg.A(f, 1) * pt[1] +
                  reg.A(f, 2) * pt[2];
          c[row] = value(lhs) - (reg.b[f] - cfg_.containment_margin);
          if (J) add_row(*J, row, lhs);
          ++row;
        }
      }
    }
    for (int k = 0; k < m_; ++k) {
      const auto& sig = s.segment(k).sigma_poly();
      for (int i = 0; i <= sig.degree(); ++i) {
        c[row] = cfg_.sigma_min - value(sig[i]);
        if (J) add_row_negated(*J, row, sig[i]);
        ++row;
      }
    }
  }

  void equalities(const Eigen::VectorXd& x, Eigen::VectorXd& c,
                  JacobianSink* J) {
    if (J)
      eq_rows(dual_spline(x), c, J);
    else
      eq_rows(value_spline(x), c, J);
  }
  void inequalities(const Eigen::VectorXd& x, Eigen::VectorXd& c,
                    JacobianSink* J) {
    if (J)
      in_rows(dual_spline(x), c, J);
    else
      in_rows(value_spline(x), c, J);
  }

  static void add_row(JacobianSink& J, int row, const D& v) {
    for (int i = 0; i < v.g.size(); ++i)
      if (v.g[i] != 0.0) J.add(row, i, v.g[i]);
  }
  static void add_row(JacobianSink&, int, double) {}
  static void add_row_negated(JacobianSink& J, int row, const D& v) {
    for (int i = 0; i < v.g.size(); ++i)
      if (v.g[i] != 0.0) J.add(row, i, -v.g[i]);
  }
  static void add_row_negated(JacobianSink&, int, double) {}

  const Corridor& corridor_;
  SplineOptConfig cfg_;
  SplineBoundary bc_;
  int m_;
  CoefficientLayout layout_;
  int num_in_ = 0;

  std::optional<PHSplineT<double>> val_cache_;
  std::optional<SplineD> grad_cache_;
  Eigen::VectorXd val_x_, grad_x_;
};

}  // namespace detail

/// Stage 1: minimize the chosen geometric criterion subject to the
/// convex-hull containment of every control point in its segment's region,
/// the endpoint equality, and sigma regularity.
inline SplineFit optimize_spline(const Corridor& corridor,
                                 const SplineOptConfig& cfg = {}) {
  const int m = corridor.num_regions();
  const SplineBoundary bc = boundary_from(corridor, cfg);
  const CoefficientLayout layout = bc.layout(m);

  const Eigen::VectorXd z0 = stage1_initial_guess(corridor, cfg);

  /// Fixed-capacity duals cover the common case; very long corridors fall
  /// back to heap-backed gradients.
  using DualS = DualT<Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor,
                                    64, 1>>;
  MinimizeResult res;
  if (layout.free_count() <= 64) {
    detail::Stage1Problem<DualS> prob(corridor, cfg);
    res = minimize(prob.make_nlp(), z0, cfg.nlp);
  } else {
    detail::Stage1Problem<Dual> prob(corridor, cfg);
    res = minimize(prob.make_nlp(), z0, cfg.nlp);
  }

  if (res.report.status == SolveStatus::infeasible ||
      res.report.max_violation > cfg.nlp.tol_feas)
    throw SolveError("stage 1 infeasible: worst constraint [" +
                     stage1_row_name(corridor, res.report.worst_constraint) +
                     "] violates by " +
                     std::to_string(res.report.max_violation));

  SplineFit fit;
  fit.free_coefficients = res.x;
  fit.spline = assemble_spline(res.x, corridor, cfg);  // validates regularity
  fit.functionals = spline_functionals(fit.spline);
  fit.dof_ledger =
      coefficient_ledger(m, layout.fixed_start, layout.fixed_goal, true);
  fit.report = res.report;
  return fit;
}

}  // namespace sctomp

#endif
