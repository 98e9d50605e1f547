#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pideq/nonlinear_solver.hpp"

namespace pideq {

struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateFitError : std::domain_error {
  using std::domain_error::domain_error;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double theoretical = 0.0;
  std::size_t samples = 0;
};

enum class ExperimentKind { semigroup, gradient, nonlinear, rho, lemma42 };

// Gaussian amp * exp(-|x - c|^2 / (2 sigma^2)) unless a field is supplied.
struct Datum {
  double sigma = 1.0;
  double amp = 1.0;
  double cx = 0.0, cy = 0.0;
  std::optional<Field> field;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::semigroup;
  double p = 4.0, q = 2.0;
  double h1 = 4.0, h2 = 1.5;
  std::optional<std::pair<double, double>> theta;
  double delta = 0.0;
  std::vector<double> t_grid;
  Grid grid{40.0, 512};
  Datum datum;
  double alpha = 0.0;
  ContourSpec contour;
};

std::vector<double> default_t_grid(std::size_t count = 12, double t0 = 1.0, double t1 = 50.0);

Field make_datum(const Datum& d, const Grid& g);

RateFit fit_rate(const std::vector<std::pair<double, double>>& samples);

// ||S(t) P_ac g||_p / ||g||_q over the t grid, without exponent checks.
std::vector<std::pair<double, double>> semigroup_norm_series(const ExperimentSpec& spec);
std::vector<std::pair<double, double>> gradient_norm_series(const ExperimentSpec& spec);

RateFit run_semigroup_decay(const ExperimentSpec& spec);
RateFit run_gradient_decay(const ExperimentSpec& spec);
// Fits of ||u||_{h1}, ||grad u||_{h2} and |rho| over stored states with t >= 1.
std::array<RateFit, 3> run_nonlinear_decay(const ExperimentSpec& spec, const Trajectory& traj);

bool exponents_admissible(double h1, double h2, double theta1, double theta2);
std::optional<std::pair<double, double>> admissible_exponents(double h1, double h2);

// max over t of int_1^t (t - tau)^-a tau^-b dtau / t^{1 - a - b}.
double verify_convolution_lemma(double alpha_exp, double beta_exp, const std::vector<double>& t_grid,
                                double tol = 1e-10);

struct ReportRow {
  std::string kind;
  double p = 0.0, q = 0.0, h1 = 0.0, h2 = 0.0;
  bool has_pq = false, has_h = false;
  RateFit fit;
  int n = 0;
  double L = 0.0;
};

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);

// Full-precision scientific formatting used for all CSV output.
std::string fmt_num(double v);

}  // namespace pideq
