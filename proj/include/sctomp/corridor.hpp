#ifndef SCTOMP_CORRIDOR_HPP
#define SCTOMP_CORRIDOR_HPP

#include <Eigen/Core>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sctomp/errors.hpp"
#include "sctomp/nlp.hpp"

namespace sctomp {

/// Convex polytope as halfspaces a.p <= b. Rows are normalized on
/// construction so tolerances read as distances in meters. The optional
/// vertex list is used only by fixtures and convex-hull tests.
struct ConvexRegion {
  Eigen::MatrixX3d A;                   // outward normals, unit length
  Eigen::VectorXd b;
  std::vector<Eigen::Vector3d> vertices;

  ConvexRegion() = default;
  ConvexRegion(Eigen::MatrixX3d A_in, Eigen::VectorXd b_in,
               std::vector<Eigen::Vector3d> verts = {})
      : A(std::move(A_in)), b(std::move(b_in)), vertices(std::move(verts)) {
    if (A.rows() != b.size())
      throw ValidationError("ConvexRegion: A rows and b length differ");
    if (A.rows() == 0) throw ValidationError("ConvexRegion: no halfspaces");
    for (int i = 0; i < A.rows(); ++i) {
      const double n = A.row(i).norm();
      if (n < 1e-12)
        throw ValidationError("ConvexRegion: zero normal in halfspace");
      A.row(i) /= n;
      b[i] /= n;
    }
  }

  int num_halfspaces() const { return static_cast<int>(A.rows()); }
};

inline bool contains(const ConvexRegion& region, const Eigen::Vector3d& p,
                     double tol = 0.0) {
  for (int i = 0; i < region.A.rows(); ++i)
    if (region.A.row(i).dot(p) > region.b[i] + tol) return false;
  return true;
}

/// Signed worst violation (negative inside, in meters).
inline double max_violation(const ConvexRegion& region,
                            const Eigen::Vector3d& p) {
  double worst = -kInf;
  for (int i = 0; i < region.A.rows(); ++i)
    worst = std::max(worst, region.A.row(i).dot(p) - region.b[i]);
  return worst;
}

/// Chebyshev center of the intersection of one or more regions: the center
/// and radius of the largest inscribed ball, found with the in-repo NLP
/// backend (the rows are affine, so this is the classic LP). Radius <= 0
/// means the intersection is empty; a huge radius flags an unbounded set.
struct ChebyshevBall {
  Eigen::Vector3d center;
  double radius;
};

inline ChebyshevBall chebyshev_ball(
    const std::vector<const ConvexRegion*>& regions) {
  std::vector<Eigen::RowVector3d> rows;
  std::vector<double> rhs;
  for (const auto* r : regions)
    for (int i = 0; i < r->A.rows(); ++i) {
      rows.emplace_back(r->A.row(i));
      rhs.push_back(r->b[i]);
    }
  const int nrows = static_cast<int>(rows.size());
  const double big = 1e6;

  NlpProblem p;
  p.n = 4;  // (x, y, z, radius)
  p.lower = Eigen::Vector4d(-big, -big, -big, 0.0);
  p.upper = Eigen::Vector4d(big, big, big, big);
  p.num_in = nrows;
  p.objective = [](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    if (grad) (*grad)[3] -= 1.0;
    return -x[3];
  };
  p.inequalities = [&rows, &rhs, nrows](const Eigen::VectorXd& x,
                                        Eigen::VectorXd& c, JacobianSink* J) {
    for (int i = 0; i < nrows; ++i) {
      c[i] = rows[i].dot(x.head<3>()) + x[3] - rhs[i];
      if (J) {
        for (int k = 0; k < 3; ++k) J->add(i, k, rows[i][k]);
        J->add(i, 3, 1.0);
      }
    }
  };

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  NlpOptions opts;
  opts.tol_feas = 1e-9;
  opts.tol_opt = 1e-7;
  auto res = minimize(p, x0, opts);
  return {res.x.head<3>(), res.x[3]};
}

inline ChebyshevBall chebyshev_ball(const ConvexRegion& region) {
  return chebyshev_ball(std::vector<const ConvexRegion*>{&region});
}

/// Ordered chain of convex regions; spline segment k pairs with region k.
struct Corridor {
  std::vector<ConvexRegion> regions;
  Eigen::Vector3d start, goal;
  std::optional<Eigen::Vector4d> start_frame, goal_frame;  // (w, x, y, z)
  std::vector<Eigen::Vector3d> overlap_probes;  // witness point per join

  int num_regions() const { return static_cast<int>(regions.size()); }
};

/// Region index (0-based) paired with global parameter xi in [0, m]:
/// segment k of the spline owns [k, k+1], the final segment keeps xi = m.
inline int region_of(const Corridor& corridor, double xi) {
  const int m = corridor.num_regions();
  if (xi < -1e-9 || xi > m + 1e-9)
    throw DomainError("region_of: parameter outside [0, m]");
  return std::min(static_cast<int>(std::max(xi, 0.0)), m - 1);
}

/// Full validation: each region bounded and nonempty, consecutive regions
/// overlapping, endpoints inside their terminal regions. Overlap witness
/// points are retained for initial guesses.
inline void validate_corridor(Corridor& corridor) {
  const int m = corridor.num_regions();
  if (m < 1) throw ValidationError("corridor: needs at least one region");
  for (int k = 0; k < m; ++k) {
    const auto& r = corridor.regions[k];
    for (size_t vi = 0; vi < r.vertices.size(); ++vi)
      if (!contains(r, r.vertices[vi], 1e-9))
        throw ValidationError("corridor: region " + std::to_string(k + 1) +
                              " vertex " + std::to_string(vi) +
                              " violates its halfspaces");
    const auto ball = chebyshev_ball(r);
    if (ball.radius <= 1e-9)
      throw ValidationError("corridor: region " + std::to_string(k + 1) +
                            " is empty or degenerate");
    if (ball.radius >= 1e5)
      throw ValidationError("corridor: region " + std::to_string(k + 1) +
                            " is unbounded");
  }
  corridor.overlap_probes.clear();
  for (int k = 0; k + 1 < m; ++k) {
    const auto ball = chebyshev_ball(
        {&corridor.regions[k], &corridor.regions[k + 1]});
    if (ball.radius <= 1e-9)
      throw ValidationError("corridor: regions " + std::to_string(k + 1) +
                            " and " + std::to_string(k + 2) +
                            " do not overlap");
    corridor.overlap_probes.push_back(ball.center);
  }
  if (!contains(corridor.regions.front(), corridor.start, 1e-9))
    throw ValidationError("corridor: start lies outside region 1");
  if (!contains(corridor.regions.back(), corridor.goal, 1e-9))
    throw ValidationError("corridor: goal lies outside region " +
                          std::to_string(m));
  for (const auto& f : {corridor.start_frame, corridor.goal_frame})
    if (f && std::abs(f->norm() - 1.0) > 1e-6)
      throw ValidationError("corridor: frame quaternion is not unit length");
}

inline Corridor corridor_from_json(const nlohmann::json& j) {
  Corridor c;
  try {
    for (const auto& rj : j.at("regions")) {
      const auto& Aj = rj.at("A");
      const auto& bj = rj.at("b");
      if (Aj.size() != bj.size())
        throw ValidationError("corridor: A rows and b length differ in region " +
                              std::to_string(c.regions.size() + 1));
      Eigen::MatrixX3d A(Aj.size(), 3);
      Eigen::VectorXd b(bj.size());
      for (size_t i = 0; i < Aj.size(); ++i) {
        for (int k = 0; k < 3; ++k) A(i, k) = Aj.at(i).at(k).get<double>();
        b[i] = bj.at(i).get<double>();
      }
      std::vector<Eigen::Vector3d> verts;
      if (rj.contains("vertices"))
        for (const auto& vj : rj.at("vertices"))
          verts.emplace_back(vj.at(0).get<double>(), vj.at(1).get<double>(),
                             vj.at(2).get<double>());
      c.regions.emplace_back(std::move(A), std::move(b), std::move(verts));
    }
    for (int k = 0; k < 3; ++k) {
      c.start[k] = j.at("start").at(k).get<double>();
      c.goal[k] = j.at("goal").at(k).get<double>();
    }
    for (const char* key : {"start_frame", "goal_frame"}) {
      if (j.contains(key)) {
        Eigen::Vector4d q;
        for (int k = 0; k < 4; ++k) q[k] = j.at(key).at(k).get<double>();
        if (std::string(key) == "start_frame")
          c.start_frame = q;
        else
          c.goal_frame = q;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corridor: ") + e.what());
  }
  validate_corridor(c);
  return c;
}

inline nlohmann::json corridor_to_json(const Corridor& c) {
  nlohmann::json j;
  j["regions"] = nlohmann::json::array();
  for (const auto& r : c.regions) {
    nlohmann::json rj;
    rj["A"] = nlohmann::json::array();
    rj["b"] = nlohmann::json::array();
    for (int i = 0; i < r.A.rows(); ++i) {
      rj["A"].push_back({r.A(i, 0), r.A(i, 1), r.A(i, 2)});
      rj["b"].push_back(r.b[i]);
    }
    if (!r.vertices.empty()) {
      rj["vertices"] = nlohmann::json::array();
      for (const auto& v : r.vertices) rj["vertices"].push_back({v[0], v[1], v[2]});
    }
    j["regions"].push_back(std::move(rj));
  }
  j["start"] = {c.start[0], c.start[1], c.start[2]};
  j["goal"] = {c.goal[0], c.goal[1], c.goal[2]};
  if (c.start_frame)
    j["start_frame"] = {(*c.start_frame)[0], (*c.start_frame)[1],
                        (*c.start_frame)[2], (*c.start_frame)[3]};
  if (c.goal_frame)
    j["goal_frame"] = {(*c.goal_frame)[0], (*c.goal_frame)[1],
                       (*c.goal_frame)[2], (*c.goal_frame)[3]};
  return j;
}

inline Corridor load_corridor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("corridor: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("corridor: " + path + ": " + e.what());
  }
  return corridor_from_json(j);
}

/// Axis-aligned box (lo, hi) as a 6-halfspace region with its 8 vertices.
inline ConvexRegion make_box(const Eigen::Vector3d& lo,
                             const Eigen::Vector3d& hi) {
  Eigen::MatrixX3d A(6, 3);
  Eigen::VectorXd b(6);
  A.setZero();
  for (int k = 0; k < 3; ++k) {
    A(2 * k, k) = 1.0;
    b[2 * k] = hi[k];
    A(2 * k + 1, k) = -1.0;
    b[2 * k + 1] = -lo[k];
  }
  std::vector<Eigen::Vector3d> verts;
  for (int mask = 0; mask < 8; ++mask)
    verts.emplace_back(mask & 1 ? hi[0] : lo[0], mask & 2 ? hi[1] : lo[1],
                       mask & 4 ? hi[2] : lo[2]);
  return ConvexRegion(std::move(A), std::move(b), std::move(verts));
}

/// Test-fixture generator: split an axis-aligned box along its longest axis
/// into cuts+1 pieces, each pair overlapping by 10% of the piece width.
inline std::vector<ConvexRegion> box_split(const ConvexRegion& box, int cuts) {
  // Recover the axis-aligned bounds; reject anything else.
  Eigen::Vector3d lo, hi;
  std::array<bool, 6> seen{};
  for (int i = 0; i < box.A.rows(); ++i) {
    const Eigen::RowVector3d n = box.A.row(i);
    int axis = -1;
    for (int k = 0; k < 3; ++k)
      if (std::abs(std::abs(n[k]) - 1.0) < 1e-12) axis = k;
    if (axis < 0 || n.cwiseAbs().sum() > 1.0 + 1e-12)
      throw ValidationError("box_split: box is not axis-aligned");
    if (n[axis] > 0) {
      hi[axis] = box.b[i];
      seen[2 * axis] = true;
    } else {
      lo[axis] = -box.b[i];
      seen[2 * axis + 1] = true;
    }
  }
  for (bool s : seen)
    if (!s) throw ValidationError("box_split: box faces incomplete");
  if (cuts < 0) throw DomainError("box_split: cuts must be >= 0");
  if (cuts == 0) return {make_box(lo, hi)};

  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (hi[k] - lo[k] > hi[axis] - lo[axis]) axis = k;
  const int pieces = cuts + 1;
  const double width = (hi[axis] - lo[axis]) / pieces;
  const double pad = 0.05 * width;  // 10% overlap split evenly across the cut
  std::vector<ConvexRegion> out;
  for (int i = 0; i < pieces; ++i) {
    Eigen::Vector3d l = lo, u = hi;
    l[axis] = lo[axis] + i * width - (i > 0 ? pad : 0.0);
    u[axis] = lo[axis] + (i + 1) * width + (i + 1 < pieces ? pad : 0.0);
    out.push_back(make_box(l, u));
  }
  return out;
}

}  // namespace sctomp

#endif
