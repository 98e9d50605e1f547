#pragma once

#include "pideq/contour.hpp"
#include "pideq/point_spectral.hpp"

namespace pideq {

struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

struct SemigroupResult {
  Field field;
  double free_part_norm = 0.0;
  double correction_norm = 0.0;
  cplx coeff = 0.0;  // singular coefficient accumulated from the contour
  double imag_residue = 0.0;
};

// Frequency-domain propagation e^{t Delta} g + (1/2 pi i) sum_m w_m e^{t lambda_m}
// <g, G_conj(lambda_m)>/(alpha + c^h(lambda_m)) G_lambda_m.
struct Propagated {
  Field hat;
  cplx coeff = 0.0;
  double free_norm = 0.0;
  double correction_norm = 0.0;
};
Propagated propagate(const PointOperator& op, const Field& ghat, double t, const ContourNodes& nodes);

// (lambda - Delta)^-1 g + <g, G_conj(lambda)>/(alpha + c(lambda)) G_lambda.
// Returns a field in the domain of g.
Field krein_resolvent(cplx lambda, const Field& g, const PointOperator& op);
Field krein_resolvent(cplx lambda, const Field& g, const AlphaParams& params);
// The rank-one coefficient <g, G_conj(lambda)>/(alpha + c(lambda)).
cplx krein_coefficient(cplx lambda, const Field& g, const PointOperator& op);

// Minimal time handled by the ray contour.
constexpr double kMinContourTime = 0.01;

SemigroupResult semigroup_pac(double t, const Field& g, const PointOperator& op, const ContourSpec& spec = {});
SemigroupResult semigroup_pac(double t, const Field& g, const AlphaParams& params, const ContourSpec& spec = {});
Field semigroup_full(double t, const Field& g, const PointOperator& op, const ContourSpec& spec = {});
Field semigroup_full(double t, const Field& g, const AlphaParams& params, const ContourSpec& spec = {});
std::pair<Field, Field> semigroup_gradient_pac(double t, const Field& g, const PointOperator& op,
                                               const ContourSpec& spec = {});

// ((I - (t/steps) Delta_alpha)^-1)^steps P_ac g. With correction off the free
// backward Euler iteration is returned.
Field backward_euler_oracle(double t, const Field& g, const PointOperator& op, int steps, bool correction = true);

}  // namespace pideq
