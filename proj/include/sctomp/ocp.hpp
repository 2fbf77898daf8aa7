#ifndef SCTOMP_OCP_HPP
#define SCTOMP_OCP_HPP

#include <Eigen/Core>
#include <fstream>
#include <iomanip>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sctomp/corridor.hpp"
#include "sctomp/gauss_legendre.hpp"
#include "sctomp/models.hpp"
#include "sctomp/nlp.hpp"
#include "sctomp/spatial_dyn.hpp"

namespace sctomp {

struct TranscriptionConfig {
  int nodes_per_segment = 25;  // N: shooting intervals per spline segment
  double xidot_min = 1e-3;     // forward-progress floor at nodes
  int substeps = 4;            // RK4 steps per shooting interval
  double terminal_tol = 1e-4;  // m, half-width of the terminal output box
  double v_guess = 1.0;        // m/s along the path for the initial guess
  NlpOptions nlp;

  TranscriptionConfig() {
    nlp.lbfgs_memory = 30;
    nlp.max_inner = 3000;
    nlp.max_outer = 40;
  }
};

/// Discretized solution of the spatial minimum-time problem.
struct SpatialTrajectory {
  Eigen::VectorXd xi_grid;  // m*N + 1 nodes on [0, m]
  Eigen::MatrixXd states;   // (m*N+1) x n_x
  Eigen::MatrixXd inputs;   // m*N x n_u
  Eigen::VectorXd times;    // elapsed time at nodes, times[0] = 0
  double total_time = 0.0;
  SolveReport report;
};

/// Multiple-shooting transcription of the spatial minimum-time problem:
/// decision variables are the node states augmented with the elapsed-time
/// channel plus one constant input per interval; RK4 defects stitch the
/// intervals; the objective is the time channel at the final node.
class Transcription {
 public:
  Transcription(const DynamicsModel& model, const PHSpline& spline,
                const Corridor& corridor, Eigen::VectorXd x0,
                Eigen::Vector3d yf, TranscriptionConfig cfg,
                std::optional<Eigen::VectorXd> terminal_mask = {},
                std::optional<Eigen::VectorXd> xf = {})
      : model_(model),
        spline_(spline),
        corridor_(corridor),
        ode_(model, spline, cfg.xidot_min),
        x0_(std::move(x0)),
        yf_(std::move(yf)),
        cfg_(std::move(cfg)),
        mask_(std::move(terminal_mask)),
        xf_(std::move(xf)) {
    n_x_ = model_.state_dim();
    n_u_ = model_.input_dim();
    n_s_ = n_x_ + 1;
    npc_ = model_.path_constraint_dim();
    m_ = spline_.num_segments();
    if (corridor_.num_regions() != m_)
      throw ValidationError("transcribe: corridor and spline disagree on m");
    N_ = cfg_.nodes_per_segment;
    if (N_ < 2) throw ValidationError("transcribe: nodes_per_segment must be >= 2");
    M_ = m_ * N_;
    if (n_s_ + n_u_ > kMaxLocalSens)
      throw ValidationError("transcribe: model exceeds the sensitivity budget");

    if (x0_.size() != n_x_) throw ValidationError("transcribe: x0 dimension");
    Eigen::VectorXd xlo, xhi, ulo, uhi;
    model_.state_bounds(xlo, xhi);
    model_.input_bounds(ulo, uhi);
    for (int i = 0; i < n_x_; ++i)
      if (x0_[i] < xlo[i] - 1e-12 || x0_[i] > xhi[i] + 1e-12)
        throw ValidationError("transcribe: x0 outside the state bounds");
    {
      Eigen::Vector3d y0;
      model_.output(x0_.data(), y0.data());
      if (!contains(corridor_.regions.front(), y0, 1e-9))
        throw ValidationError("transcribe: h(x0) outside region 1");
    }
    if ((yf_ - corridor_.goal).cwiseAbs().maxCoeff() > cfg_.terminal_tol)
      throw ValidationError(
          "transcribe: terminal output does not match the corridor goal");
    if (mask_ && !xf_)
      throw ValidationError("transcribe: terminal mask requires xf targets");

    build_grid_and_frames();
    build_bounds(xlo, xhi, ulo, uhi);
    count_rows();
  }

  int num_vars() const { return (M_ + 1) * n_s_ + M_ * n_u_; }
  int num_nodes() const { return M_ + 1; }
  int num_intervals() const { return M_; }
  int num_eq() const { return num_eq_; }
  int num_in() const { return num_in_; }
  const TranscriptionConfig& config() const { return cfg_; }

  int state_index(int node) const { return node * n_s_; }
  int input_index(int interval) const {
    return (M_ + 1) * n_s_ + interval * n_u_;
  }

  NlpProblem make_nlp() {
    NlpProblem p;
    p.n = num_vars();
    p.lower = lower_;
    p.upper = upper_;
    p.num_eq = num_eq_;
    p.num_in = num_in_;
    const int t_idx = state_index(M_) + n_x_;
    p.objective = [t_idx](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      if (grad) (*grad)[t_idx] += 1.0;
      return x[t_idx];
    };
    p.equalities = [this](const Eigen::VectorXd& x, Eigen::VectorXd& c,
                          JacobianSink* J) { equalities(x, c, J); };
    p.inequalities = [this](const Eigen::VectorXd& x, Eigen::VectorXd& c,
                            JacobianSink* J) { inequalities(x, c, J); };
    return p;
  }

  /// Nodes seeded on the spline at cruise speed, time channel from the
  /// quadrature of sigma / v_guess, inputs at trim.
  Eigen::VectorXd initial_guess() const {
    Eigen::VectorXd x(num_vars());
    const auto& rule = gauss_legendre(16);
    double t = 0.0;
    for (int j = 0; j <= M_; ++j) {
      const FrameSample F = sample_spline(spline_, xi_[j]);
      Eigen::VectorXd xs =
          model_.seed_state(F.position, F.rotation.col(0), cfg_.v_guess);
      x.segment(state_index(j), n_x_) = xs;
      x[state_index(j) + n_x_] = t;
      if (j < M_) {
        double dt = 0.0;
        for (size_t q = 0; q < rule.nodes.size(); ++q) {
          const double xi = xi_[j] + rule.nodes[q] * (xi_[j + 1] - xi_[j]);
          dt += rule.weights[q] * spline_.sigma(xi);
        }
        t += dt * (xi_[j + 1] - xi_[j]) / cfg_.v_guess;
        x.segment(input_index(j), n_u_) = model_.trim_input();
      }
    }
    // Node 0 is pinned to x0 through the variable bounds.
    x.segment(0, n_x_) = x0_;
    x[n_x_] = 0.0;
    return clamped(x);
  }

  SpatialTrajectory unpack(const Eigen::VectorXd& x) const {
    SpatialTrajectory tr;
    tr.xi_grid = Eigen::Map<const Eigen::VectorXd>(xi_.data(), M_ + 1);
    tr.states.resize(M_ + 1, n_x_);
    tr.times.resize(M_ + 1);
    tr.inputs.resize(M_, n_u_);
    for (int j = 0; j <= M_; ++j) {
      tr.states.row(j) = x.segment(state_index(j), n_x_);
      tr.times[j] = x[state_index(j) + n_x_];
    }
    for (int j = 0; j < M_; ++j)
      tr.inputs.row(j) = x.segment(input_index(j), n_u_);
    tr.total_time = tr.times[M_];
    return tr;
  }

  /// Row description for diagnostics ("defect node 3 state 1", ...).
  std::string row_name(int row) const {
    if (row < 0) return "none";
    if (row < M_ * n_s_) {
      const int j = row / n_s_, r = row % n_s_;
      return "defect interval " + std::to_string(j) + " channel " +
             std::to_string(r);
    }
    row -= M_ * n_s_;
    if (row < static_cast<int>(mask_rows_.size()))
      return "terminal state " + std::to_string(mask_rows_[row]);
    row -= static_cast<int>(mask_rows_.size());
    // inequality block
    for (int j = 0; j <= M_; ++j) {
      int rows = 0;
      for (int k : node_regions_[j]) rows += corridor_.regions[k].num_halfspaces();
      if (row < rows) return "containment node " + std::to_string(j);
      row -= rows;
      if (row < 1) return "forward progress node " + std::to_string(j);
      row -= 1;
      if (j < M_ && npc_ > 0) {
        if (row < npc_)
          return "path constraint " + std::to_string(row) + " interval " +
                 std::to_string(j);
        row -= npc_;
      }
    }
    return "terminal output box";
  }

  const std::vector<double>& grid() const { return xi_; }
  const std::vector<std::vector<int>>& node_regions() const {
    return node_regions_;
  }

 private:
  void build_grid_and_frames() {
    xi_.resize(M_ + 1);
    for (int j = 0; j <= M_; ++j) xi_[j] = static_cast<double>(j) / N_;
    node_frames_.resize(M_ + 1);
    for (int j = 0; j <= M_; ++j) node_frames_[j] = sample_spline(spline_, xi_[j]);
    stage_frames_.resize(M_ * cfg_.substeps);
    for (int j = 0; j < M_; ++j) {
      const double h = (xi_[j + 1] - xi_[j]) / cfg_.substeps;
      for (int s = 0; s < cfg_.substeps; ++s) {
        const double a = xi_[j] + s * h;
        stage_frames_[j * cfg_.substeps + s] = {
            sample_spline(spline_, a), sample_spline(spline_, a + 0.5 * h),
            sample_spline(spline_, a + h)};
      }
    }
    // Region rows per node: interior nodes at integer xi satisfy both
    // adjacent regions.
    node_regions_.resize(M_ + 1);
    for (int j = 0; j <= M_; ++j) {
      const int k = std::min(j / N_, m_ - 1);
      node_regions_[j].push_back(k);
      if (j % N_ == 0 && j > 0 && j < M_) node_regions_[j].push_back(k - 1);
    }
  }

  void build_bounds(const Eigen::VectorXd& xlo, const Eigen::VectorXd& xhi,
                    const Eigen::VectorXd& ulo, const Eigen::VectorXd& uhi) {
    lower_.resize(num_vars());
    upper_.resize(num_vars());
    for (int j = 0; j <= M_; ++j) {
      lower_.segment(state_index(j), n_x_) = xlo;
      upper_.segment(state_index(j), n_x_) = xhi;
      lower_[state_index(j) + n_x_] = 0.0;  // elapsed time
      upper_[state_index(j) + n_x_] = kInf;
    }
    for (int j = 0; j < M_; ++j) {
      lower_.segment(input_index(j), n_u_) = ulo;
      upper_.segment(input_index(j), n_u_) = uhi;
    }
    // Pin the initial node: state to x0, elapsed time to zero.
    lower_.segment(0, n_x_) = x0_;
    upper_.segment(0, n_x_) = x0_;
    lower_[n_x_] = upper_[n_x_] = 0.0;
  }

  void count_rows() {
    mask_rows_.clear();
    if (mask_) {
      for (int i = 0; i < n_x_; ++i)
        if ((*mask_)[i] != 0.0) mask_rows_.push_back(i);
    }
    num_eq_ = M_ * n_s_ + static_cast<int>(mask_rows_.size());
    num_in_ = 0;
    for (int j = 0; j <= M_; ++j) {
      for (int k : node_regions_[j])
        num_in_ += corridor_.regions[k].num_halfspaces();
      num_in_ += 1;  // forward progress
      if (j < M_) num_in_ += npc_;
    }
    num_in_ += 6;  // terminal output box
  }

  Eigen::VectorXd clamped(Eigen::VectorXd x) const {
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

  // RK4 over one shooting interval with per-substep state projection.
  template <class T>
  void propagate(int j, const T* x_in, const T* u, T* x_out) const {
    const int n = n_s_;
    std::vector<T> xs(x_in, x_in + n), k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double h = (xi_[j + 1] - xi_[j]) / cfg_.substeps;
    for (int s = 0; s < cfg_.substeps; ++s) {
      const auto& F = stage_frames_[j * cfg_.substeps + s];
      ode_.eval(F[0], xs.data(), u, k1.data());
      for (int i = 0; i < n; ++i) tmp[i] = xs[i] + 0.5 * h * k1[i];
      ode_.eval(F[1], tmp.data(), u, k2.data());
      for (int i = 0; i < n; ++i) tmp[i] = xs[i] + 0.5 * h * k2[i];
      ode_.eval(F[1], tmp.data(), u, k3.data());
      for (int i = 0; i < n; ++i) tmp[i] = xs[i] + h * k3[i];
      ode_.eval(F[2], tmp.data(), u, k4.data());
      for (int i = 0; i < n; ++i)
        xs[i] = xs[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      model_.project_state(xs.data());
    }
    for (int i = 0; i < n; ++i) x_out[i] = xs[i];
  }

  void equalities(const Eigen::VectorXd& x, Eigen::VectorXd& c,
                  JacobianSink* J) const {
    const int n_loc = n_s_ + n_u_;
    for (int j = 0; j < M_; ++j) {
      const int rs = j * n_s_;
      if (!J) {
        std::vector<double> phi(n_s_);
        propagate(j, x.data() + state_index(j), x.data() + input_index(j),
                  phi.data());
        for (int r = 0; r < n_s_; ++r)
          c[rs + r] = x[state_index(j + 1) + r] - phi[r];
      } else {
        std::vector<DualN> xa(n_s_), uu(n_u_), phi(n_s_);
        for (int i = 0; i < n_s_; ++i)
          xa[i] = DualN::seeded(x[state_index(j) + i], n_loc, i);
        for (int i = 0; i < n_u_; ++i)
          uu[i] = DualN::seeded(x[input_index(j) + i], n_loc, n_s_ + i);
        propagate(j, xa.data(), uu.data(), phi.data());
        for (int r = 0; r < n_s_; ++r) {
          c[rs + r] = x[state_index(j + 1) + r] - phi[r].v;
          J->add(rs + r, state_index(j + 1) + r, 1.0);
          if (phi[r].g.size())
            for (int i = 0; i < n_loc; ++i)
              if (phi[r].g[i] != 0.0) {
                const int col = i < n_s_ ? state_index(j) + i
                                         : input_index(j) + (i - n_s_);
                J->add(rs + r, col, -phi[r].g[i]);
              }
        }
      }
    }
    const int base = M_ * n_s_;
    for (size_t r = 0; r < mask_rows_.size(); ++r) {
      const int i = mask_rows_[r];
      c[base + r] = x[state_index(M_) + i] - (*xf_)[i];
      if (J) J->add(base + static_cast<int>(r), state_index(M_) + i, 1.0);
    }
  }

  void inequalities(const Eigen::VectorXd& x, Eigen::VectorXd& c,
                    JacobianSink* J) const {
    int row = 0;
    const int n_loc = n_s_ + n_u_;
    std::vector<DualN> xa(n_s_), uu(n_u_);
    std::vector<double> xd(n_s_), ud(n_u_);
    for (int j = 0; j <= M_; ++j) {
      const bool has_u = j < M_;
      const int ui = has_u ? j : M_ - 1;
      if (J) {
        for (int i = 0; i < n_s_; ++i)
          xa[i] = DualN::seeded(x[state_index(j) + i], n_loc, i);
        for (int i = 0; i < n_u_; ++i)
          uu[i] = DualN::seeded(x[input_index(ui) + i], n_loc, n_s_ + i);
        row = node_rows(j, xa.data(), uu.data(), c, J, row);
      } else {
        for (int i = 0; i < n_s_; ++i) xd[i] = x[state_index(j) + i];
        for (int i = 0; i < n_u_; ++i) ud[i] = x[input_index(ui) + i];
        row = node_rows(j, xd.data(), ud.data(), c, nullptr, row);
      }
    }
  }

  // Containment, forward progress, path constraints and (at the last node)
  // the terminal box, for one node. Returns the next row index.
  template <class T>
  int node_rows(int j, const T* xs, const T* u, Eigen::VectorXd& c,
                JacobianSink* J, int row) const {
    T y[3], v[3];
    model_.output(xs, y);
    model_.velocity(xs, v);
    const FrameSample& F = node_frames_[j];

    for (int k : node_regions_[j]) {
      const auto& reg = corridor_.regions[k];
      for (int f = 0; f < reg.num_halfspaces(); ++f) {
        T lhs = reg.A(f, 0) * y[0] + reg.A(f, 1) * y[1] + reg.A(f, 2) * y[2];
        c[row] = value(lhs) - reg.b[f];
        sink_row(J, row, j, lhs);
        ++row;
      }
    }

    // xidot >= xidot_min, multiplied through by the positive denominator:
    //   xidot_min * (sigma - chi3 w1 + chi2 w2) - e1.v <= 0.
    {
      const Eigen::Vector3d e1 = F.rotation.col(0), e2 = F.rotation.col(1),
                            e3 = F.rotation.col(2);
      T d0 = y[0] - F.position[0], d1 = y[1] - F.position[1],
        d2 = y[2] - F.position[2];
      T w1 = e2[0] * d0 + e2[1] * d1 + e2[2] * d2;
      T w2 = e3[0] * d0 + e3[1] * d1 + e3[2] * d2;
      T denom = F.sigma - F.chi[2] * w1 + F.chi[1] * w2;
      T speed = e1[0] * v[0] + e1[1] * v[1] + e1[2] * v[2];
      T lhs = cfg_.xidot_min * denom - speed;
      c[row] = value(lhs);
      sink_row(J, row, j, lhs);
      ++row;
    }

    if (j < M_ && npc_ > 0) {
      std::vector<T> pc(npc_);
      model_.path_constraints(xs, u, pc.data());
      for (int r = 0; r < npc_; ++r) {
        c[row] = value(pc[r]);
        sink_row(J, row, j, pc[r], /*interval=*/j);
        ++row;
      }
    }

    if (j == M_) {
      for (int k = 0; k < 3; ++k) {
        T hi = y[k] - (yf_[k] + cfg_.terminal_tol);
        T lo = (yf_[k] - cfg_.terminal_tol) - y[k];
        c[row] = value(hi);
        sink_row(J, row, j, hi);
        ++row;
        c[row] = value(lo);
        sink_row(J, row, j, lo);
        ++row;
      }
    }
    return row;
  }

  void sink_row(JacobianSink* J, int row, int node, const DualN& v,
                int interval = -1) const {
    if (!J || v.g.size() == 0) return;
    const int ui = interval >= 0 ? interval : std::min(node, M_ - 1);
    for (int i = 0; i < v.g.size(); ++i)
      if (v.g[i] != 0.0) {
        const int col =
            i < n_s_ ? state_index(node) + i : input_index(ui) + (i - n_s_);
        J->add(row, col, v.g[i]);
      }
  }
  void sink_row(JacobianSink*, int, int, double, int = -1) const {}

  const DynamicsModel& model_;
  const PHSpline& spline_;
  const Corridor& corridor_;
  SpatialOde ode_;
  Eigen::VectorXd x0_;
  Eigen::Vector3d yf_;
  TranscriptionConfig cfg_;
  std::optional<Eigen::VectorXd> mask_, xf_;

  int n_x_ = 0, n_u_ = 0, n_s_ = 0, npc_ = 0, m_ = 0, N_ = 0, M_ = 0;
  int num_eq_ = 0, num_in_ = 0;
  std::vector<double> xi_;
  std::vector<FrameSample> node_frames_;
  std::vector<std::array<FrameSample, 3>> stage_frames_;
  std::vector<std::vector<int>> node_regions_;
  std::vector<int> mask_rows_;
  Eigen::VectorXd lower_, upper_;
};

/// Post-hoc checks of every SpatialTrajectory invariant. Returns a list of
/// human-readable violations (empty when the trajectory verifies).
inline std::vector<std::string> verify_trajectory(
    const DynamicsModel& model, const PHSpline& spline,
    const Corridor& corridor, const SpatialTrajectory& tr,
    const TranscriptionConfig& cfg) {
  std::vector<std::string> bad;
  const int nodes = static_cast<int>(tr.states.rows());
  const int n_x = model.state_dim();
  const auto note = [&bad](const std::string& s) { bad.push_back(s); };

  if (nodes < 2) {
    note("trajectory has fewer than two nodes");
    return bad;
  }
  if (std::abs(tr.times[0]) > 1e-9) note("times[0] is not zero");
  for (int j = 0; j + 1 < nodes; ++j)
    if (!(tr.times[j + 1] > tr.times[j])) {
      note("times not strictly increasing at node " + std::to_string(j + 1));
      break;
    }
  if (std::abs(tr.total_time - tr.times[nodes - 1]) > 1e-12)
    note("total_time does not equal the final time");

  Eigen::VectorXd xlo, xhi, ulo, uhi;
  model.state_bounds(xlo, xhi);
  model.input_bounds(ulo, uhi);
  const int N = cfg.nodes_per_segment;
  const int m = corridor.num_regions();
  for (int j = 0; j < nodes; ++j) {
    const Eigen::VectorXd xs = tr.states.row(j);
    for (int i = 0; i < n_x; ++i)
      if (xs[i] < xlo[i] - 1e-6 || xs[i] > xhi[i] + 1e-6) {
        note("state bound violated at node " + std::to_string(j) + " state " +
             std::to_string(i));
        break;
      }
    Eigen::Vector3d y;
    model.output(xs.data(), y.data());
    const int k = std::min(j / N, m - 1);
    std::vector<int> ks = {k};
    if (j % N == 0 && j > 0 && j < nodes - 1) ks.push_back(k - 1);
    for (int kk : ks)
      if (max_violation(corridor.regions[kk], y) > 1e-6)
        note("containment violated at node " + std::to_string(j) + " region " +
             std::to_string(kk + 1));
    Eigen::Vector3d v;
    model.velocity(xs.data(), v.data());
    const double xidot = spatial_rate(spline, tr.xi_grid[j], y, v);
    if (xidot < cfg.xidot_min - 1e-6)
      note("forward progress violated at node " + std::to_string(j));
  }
  for (int j = 0; j + 1 < nodes; ++j) {
    const Eigen::VectorXd us = tr.inputs.row(j);
    for (int i = 0; i < us.size(); ++i)
      if (us[i] < ulo[i] - 1e-6 || us[i] > uhi[i] + 1e-6) {
        note("input bound violated at interval " + std::to_string(j));
        break;
      }
    if (model.path_constraint_dim() > 0) {
      Eigen::VectorXd pc(model.path_constraint_dim());
      const Eigen::VectorXd xs = tr.states.row(j);
      model.path_constraints(xs.data(), us.data(), pc.data());
      if (pc.maxCoeff() > 1e-6)
        note("path constraint violated at interval " + std::to_string(j));
    }
  }
  {
    Eigen::Vector3d yN;
    const Eigen::VectorXd xN = tr.states.row(nodes - 1);
    model.output(xN.data(), yN.data());
    if ((yN - corridor.goal).cwiseAbs().maxCoeff() > cfg.terminal_tol + 1e-6)
      note("terminal output outside the goal box");
  }
  const double dev = roundtrip_check(model, tr.states, tr.times, tr.inputs,
                                     10 * cfg.substeps);
  if (dev > 1e-3)
    note("time-domain roundtrip deviation " + std::to_string(dev) +
         " exceeds 1e-3");
  return bad;
}

/// Stage 2 of the pipeline. Solves the transcribed NLP and verifies the
/// result post-hoc; verification failures demote the solution to an error.
inline SpatialTrajectory solve_min_time(
    const DynamicsModel& model, const PHSpline& spline,
    const Corridor& corridor, const Eigen::VectorXd& x0,
    const Eigen::Vector3d& yf, const TranscriptionConfig& cfg = {},
    std::optional<Eigen::VectorXd> terminal_mask = {},
    std::optional<Eigen::VectorXd> xf = {}) {
  Transcription tr(model, spline, corridor, x0, yf, cfg, terminal_mask, xf);
  auto nlp = tr.make_nlp();
  const Eigen::VectorXd guess = tr.initial_guess();
  auto res = minimize(nlp, guess, cfg.nlp);

  if (res.report.status == SolveStatus::infeasible ||
      res.report.max_violation > cfg.nlp.tol_feas) {
    // Forward-progress stall across consecutive nodes usually means the
    // corridor/model pairing cannot move forward at the floor rate.
    std::string hint;
    const SpatialTrajectory t = tr.unpack(res.x);
    int pinned = 0;
    for (int j = 0; j < t.states.rows(); ++j) {
      Eigen::Vector3d y, v;
      const Eigen::VectorXd xs = t.states.row(j);
      model.output(xs.data(), y.data());
      model.velocity(xs.data(), v.data());
      double xd = kInf;
      try {
        xd = spatial_rate(spline, t.xi_grid[j], y, v);
      } catch (const DomainError&) {
      }
      if (xd <= cfg.xidot_min * 1.01) {
        if (++pinned >= 2) {
          hint = "; xidot pinned at the floor across consecutive nodes";
          break;
        }
      } else {
        pinned = 0;
      }
    }
    throw SolveError("stage 2 failed (" +
                     std::string(to_string(res.report.status)) +
                     "): worst constraint [" +
                     tr.row_name(res.report.worst_constraint) +
                     "] violates by " +
                     std::to_string(res.report.max_violation) + hint);
  }

  SpatialTrajectory out = tr.unpack(res.x);
  out.report = res.report;
  const auto bad = verify_trajectory(model, spline, corridor, out, cfg);
  if (!bad.empty()) {
    std::string msg = "stage 2 verification failed:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw SolveError(msg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory artifact: CSV with header xi, t, x0..x{n_x-1}, u0..u{n_u-1}
// (inputs repeated on the closing node) plus a JSON sidecar.
// ---------------------------------------------------------------------------

inline void write_trajectory_csv(const std::string& path,
                                 const SpatialTrajectory& tr) {
  std::ofstream out(path);
  if (!out) throw ParseError("trajectory: cannot open " + path + " for writing");
  const int n_x = static_cast<int>(tr.states.cols());
  const int n_u = static_cast<int>(tr.inputs.cols());
  out << "xi,t";
  for (int i = 0; i < n_x; ++i) out << ",x" << i;
  for (int i = 0; i < n_u; ++i) out << ",u" << i;
  out << "\n";
  out << std::setprecision(17);
  const int nodes = static_cast<int>(tr.states.rows());
  for (int j = 0; j < nodes; ++j) {
    out << tr.xi_grid[j] << "," << tr.times[j];
    for (int i = 0; i < n_x; ++i) out << "," << tr.states(j, i);
    const int ui = std::min(j, nodes - 2);
    for (int i = 0; i < n_u; ++i) out << "," << tr.inputs(ui, i);
    out << "\n";
  }
}

inline SpatialTrajectory read_trajectory_csv(const std::string& path, int n_x,
                                             int n_u) {
  std::ifstream in(path);
  if (!in) throw ParseError("trajectory: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trajectory: empty file " + path);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != 2 + n_x + n_u)
      throw ParseError("trajectory: column count mismatch in " + path);
    rows.push_back(std::move(vals));
  }
  if (rows.size() < 2) throw ParseError("trajectory: too few rows in " + path);
  SpatialTrajectory tr;
  const int nodes = static_cast<int>(rows.size());
  tr.xi_grid.resize(nodes);
  tr.times.resize(nodes);
  tr.states.resize(nodes, n_x);
  tr.inputs.resize(nodes - 1, n_u);
  for (int j = 0; j < nodes; ++j) {
    tr.xi_grid[j] = rows[j][0];
    tr.times[j] = rows[j][1];
    for (int i = 0; i < n_x; ++i) tr.states(j, i) = rows[j][2 + i];
    if (j < nodes - 1)
      for (int i = 0; i < n_u; ++i) tr.inputs(j, i) = rows[j][2 + n_x + i];
  }
  tr.total_time = tr.times[nodes - 1];
  return tr;
}

}  // namespace sctomp

#endif
