#pragma once

#include <array>
#include <functional>

#include "pideq/resolvent_semigroup.hpp"

namespace pideq {

struct HorizonTooLargeError : std::runtime_error {
  double ratio;
  HorizonTooLargeError(const std::string& what, double r) : std::runtime_error(what), ratio(r) {}
};

struct DataTooLargeError : std::runtime_error {
  double ratio;
  DataTooLargeError(const std::string& what, double r) : std::runtime_error(what), ratio(r) {}
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchedulingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class InitialIterate { linear_flow, frozen };

struct SolverConfig {
  double gamma = 2.0;
  std::array<double, 2> a{1.0, 0.0};
  double T = 1.0;
  double dt = 1e-2;
  double picard_tol = 1e-10;
  int picard_max = 50;
  double ball_radius = 0.0;  // 0: not enforced, measured sup norm is reported
  bool projected = false;
  double window = 1.0;       // restart length for projected runs
  int save_every = 1;        // keep every k-th state in the trajectory
  int hyperbola_nodes = 24;
  InitialIterate initial = InitialIterate::linear_flow;
};

// e^{dt Delta_alpha} on frequency data through a hyperbolic contour, with the
// node tables precomputed for one step size.
class StepPropagator {
 public:
  StepPropagator(std::shared_ptr<const PointOperator> op, double dt, int nodes = 24);
  // Returns S(dt) h; q receives the singular coefficient carried by the correction.
  Field apply(const Field& hat, cplx* q = nullptr) const;
  double dt() const { return dt_; }
  const PointOperator& op() const { return *op_; }

 private:
  std::shared_ptr<const PointOperator> op_;
  double dt_;
  Eigen::MatrixXcd r_;   // nodes x classes, 1/(lambda_m + nu_c)
  Eigen::VectorXcd c_;   // w_m e^{dt lambda_m} / (2 pi i D(lambda_m))
  RealValues decay_;     // e^{-dt nu}
};

struct StepSeries {
  std::vector<double> t, l2, l4, grad32, q_abs, rho, psi_overlap;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DecomposedField> states;
  std::vector<double> rho;
  StepSeries series;
  double dt = 0.0;
  int save_every = 1;
  bool projected = false;
  // Picard diagnostics: successive-iterate distances of the last window and
  // the worst ratio seen over all windows.
  std::vector<double> picard_distances;
  double max_contraction = 0.0;
  int picard_iterations = 0;
  long clamp_count = 0;
  double sup_norm = 0.0;
};

// a . grad(|u|^gamma) with grad u = grad phi + q grad G_lambda_ref.
Field nonlinearity(const DecomposedField& u, const SolverConfig& cfg);

double lagrange_multiplier(const DecomposedField& u, const SolverConfig& cfg);

// Product-integration quadrature of int_0^t S(t - tau) f(tau) dtau for a
// source sampled at tau_k = k dt, k = 0..K. Full semigroup unless projected.
Field duhamel_integral(const std::vector<Field>& source, double dt, const AlphaParams& params, bool projected,
                       int hyperbola_nodes = 24);

Trajectory solve_local(const DecomposedField& u0, const SolverConfig& cfg);
Trajectory solve_global_projected(const DecomposedField& u0, const SolverConfig& cfg);

// One extra Picard application on a stored single-window trajectory; returns
// the sup-in-time H^1_alpha-proxy change.
double picard_defect(const Trajectory& traj, const SolverConfig& cfg);

// Max over interior times of the relative PDE residual.
double residual_check(const Trajectory& traj, const SolverConfig& cfg);

// H^1_alpha-proxy distance between two decomposed fields on the same reference.
double h1_alpha_distance(const DecomposedField& u, const DecomposedField& v);

}  // namespace pideq
