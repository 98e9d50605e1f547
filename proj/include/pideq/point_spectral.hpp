#pragma once

#include <memory>
#include <optional>

#include "pideq/fields.hpp"

namespace pideq {

struct NoEigenfunctionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlphaParams {
  int dim = 2;
  double alpha = 0.0;
  std::optional<double> eigenvalue;
  double psi_norm = 0.0;  // ||G_E||_{L^2} on the whole space, 0 if no eigenvalue
};

AlphaParams make_alpha_params(double alpha, int dim = 2);

std::optional<double> eigenvalue(double alpha, int dim = 2);

// 2D: (gamma - ln 2)/2pi + Log(sqrt(lambda))/2pi; 3D: sqrt(lambda)/4pi.
cplx c_lambda(cplx lambda, int dim = 2);

// Real positive lambda: direct samples K0(sqrt(lambda)|x|)/2pi.
// Otherwise: inverse transform of 1/(lambda + |xi|^2) on masked modes.
Field green_field(cplx lambda, const Grid& g, int dim = 2);
// Frequency data of the band-limited G_lambda.
Field green_hat(cplx lambda, const Grid& g);
// -(sqrt(lambda)/2pi) K1(sqrt(lambda)|x|) x/|x|.
std::pair<Field, Field> green_gradient_field(double lambda, const Grid& g);

// ||G_lambda||_2 from the band-limited spectral sum plus the analytic tail
// outside the resolved square.
double green_l2_norm(double lambda, const Grid& g);

// Delta_alpha restricted to band-limited fields on a grid: the free Laplacian
// plus a rank-one term on the band-limited Dirac. The constant in c^h is tuned
// so that E_alpha is an exact eigenvalue whenever the grid resolves it.
class PointOperator {
 public:
  PointOperator(const AlphaParams& params, const Grid& grid);

  const AlphaParams& params() const { return params_; }
  const Grid& grid() const { return grid_; }
  double eigenvalue() const { return eh_; }
  bool exact_eigenvalue() const { return exact_; }
  // alpha + K, so that alpha + c^h(lambda) = strength() - G^h_lambda(0).
  double strength() const { return kinv_; }

  cplx green_origin(cplx lambda) const;
  cplx denominator(cplx lambda) const { return kinv_ - green_origin(lambda); }
  // <g, G_conj(lambda)> from per-class coefficient sums.
  cplx green_pairing(const Eigen::VectorXcd& sums, cplx lambda) const;

  const Field& psi_hat() const { return psi_hat_; }
  const Field& psi() const { return psi_; }

  // Singular coefficient q of a band-limited field, from u(0) = q (alpha + K).
  cplx singular_coefficient(const Field& F) const;

 private:
  AlphaParams params_;
  Grid grid_;
  double eh_ = 0.0;
  double kinv_ = 0.0;
  bool exact_ = false;
  Field psi_hat_, psi_;
};

// Cached operator for (params.alpha, grid).
std::shared_ptr<const PointOperator> point_operator(const AlphaParams& params, const Grid& g);

Field psi_alpha_field(const AlphaParams& params, const Grid& g);

// Both accept either domain and return the same domain as the input.
Field project_d(const Field& f, const PointOperator& op);
Field project_ac(const Field& f, const PointOperator& op);
Field project_d(const Field& f, const AlphaParams& params);
Field project_ac(const Field& f, const AlphaParams& params);

// u = phi + q G_lambda_ref.
struct DecomposedField {
  Field regular;
  cplx coeff = 0.0;
  double lambda_ref = 0.0;
  AlphaParams params;

  Field reconstruct() const;
};

// Reference point 1 + E_alpha.
double reference_lambda(const AlphaParams& params);
DecomposedField decompose(const Field& u, cplx q, const AlphaParams& params, double lambda_ref = 0.0);

double h1_alpha_norm(const DecomposedField& u);

// grad phi (spectral) + q grad G_lambda_ref (closed form), in space.
std::pair<Field, Field> decomposed_gradient(const DecomposedField& u);

}  // namespace pideq
