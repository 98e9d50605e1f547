#include "pideq/resolvent_semigroup.hpp"

#include <cmath>
#include <iostream>

namespace pideq {

namespace {

Field to_hat(const Field& g) { return g.domain == Domain::frequency ? g : fourier(g); }

Field like_input(const Field& hat, const Field& input) {
  return input.domain == Domain::frequency ? hat : inverse_fourier(hat);
}

void check_resolvent_point(cplx lambda, const PointOperator& op) {
  if (lambda.imag() == 0.0 && lambda.real() <= 0.0)
    throw BranchError("krein_resolvent: lambda on the branch cut (-inf, 0]");
  const double E = op.eigenvalue();
  if (std::abs(lambda - E) <= 1e-12 * std::max(1.0, E)) throw PoleError("krein_resolvent: lambda is the eigenvalue");
}

Eigen::Map<const Eigen::ArrayXd> class_nu(const SpectralData& sd) {
  return {sd.class_nu.data(), Eigen::Index(sd.class_nu.size())};
}

Eigen::Map<const Eigen::ArrayXd> class_count(const SpectralData& sd) {
  return {sd.class_count.data(), Eigen::Index(sd.class_count.size())};
}

}  // namespace

Propagated propagate(const PointOperator& op, const Field& ghat, double t, const ContourNodes& nodes) {
  if (ghat.domain != Domain::frequency) throw ShapeError("propagate: expects frequency data");
  const auto& sd = spectral_data(ghat.grid);
  const auto nu = class_nu(sd);
  const auto cnt = class_count(sd);
  const Eigen::ArrayXcd sums = class_sums(ghat).array();
  const double W = ghat.grid.w();
  const cplx two_pi_i(0.0, 2.0 * kPi);
  Eigen::ArrayXcd corr = Eigen::ArrayXcd::Zero(nu.size());
  Eigen::ArrayXcd r(nu.size());
  cplx q = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    const cplx lam = nodes.lambda[m];
    r = (nu.cast<cplx>() + lam).inverse();
    const cplx A = W * (sums * r).sum();
    const cplx D = op.strength() - W * (cnt * r).sum();
    const cplx beta = nodes.weight[m] * std::exp(t * lam) * A / (D * two_pi_i);
    corr += beta * r;
    q += beta;
  }
  Propagated out;
  Field free_hat = heat_free(ghat, t);
  Field corr_hat = class_scatter(ghat.grid, corr.matrix());
  out.free_norm = lp_norm(free_hat, 2.0);
  out.correction_norm = lp_norm(corr_hat, 2.0);
  out.hat = free_hat + corr_hat;
  out.coeff = q;
  return out;
}

cplx krein_coefficient(cplx lambda, const Field& g, const PointOperator& op) {
  check_resolvent_point(lambda, op);
  const Field F = to_hat(g);
  return op.green_pairing(class_sums(F), lambda) / op.denominator(lambda);
}

Field krein_resolvent(cplx lambda, const Field& g, const PointOperator& op) {
  check_resolvent_point(lambda, op);
  const auto& sd = spectral_data(g.grid);
  const Field F = to_hat(g);
  const cplx coef = op.green_pairing(class_sums(F), lambda) / op.denominator(lambda);
  Field R(g.grid, Values(F.values / (sd.nu.cast<cplx>() + lambda)), Domain::frequency);
  R += coef * green_hat(lambda, g.grid);
  return like_input(R, g);
}

Field krein_resolvent(cplx lambda, const Field& g, const AlphaParams& params) {
  return krein_resolvent(lambda, g, *point_operator(params, g.grid));
}

namespace {

void check_time(double t) {
  if (!(t > 0.0)) throw DomainError("semigroup: t must be positive");
  if (t < kMinContourTime)
    throw DomainError("semigroup: t below 0.01; compose shorter steps from the free flow or use the solver");
}

Propagated pac_hat(double t, const Field& g, const PointOperator& op, const ContourSpec& spec) {
  check_time(t);
  const ContourNodes nodes = keyhole_contour(t, op.eigenvalue(), spec);
  return propagate(op, project_ac(to_hat(g), op), t, nodes);
}

}  // namespace

SemigroupResult semigroup_pac(double t, const Field& g, const PointOperator& op, const ContourSpec& spec) {
  Propagated p = pac_hat(t, g, op, spec);
  SemigroupResult out;
  out.field = inverse_fourier(p.hat);
  out.free_part_norm = p.free_norm;
  out.correction_norm = p.correction_norm;
  out.coeff = p.coeff;
  out.imag_residue = std::sqrt(pairwise_sum(RealValues(out.field.values.imag().square()).data(),
                                            std::size_t(out.field.values.size())) *
                               out.field.cell());
  return out;
}

SemigroupResult semigroup_pac(double t, const Field& g, const AlphaParams& params, const ContourSpec& spec) {
  return semigroup_pac(t, g, *point_operator(params, g.grid), spec);
}

Field semigroup_full(double t, const Field& g, const PointOperator& op, const ContourSpec& spec) {
  check_time(t);
  const Field F = to_hat(g);
  const cplx c = inner_product(F, op.psi_hat());
  const ContourNodes nodes = keyhole_contour(t, op.eigenvalue(), spec);
  Propagated p = propagate(op, F - c * op.psi_hat(), t, nodes);
  p.hat += (std::exp(op.eigenvalue() * t) * c) * op.psi_hat();
  return like_input(p.hat, g.domain == Domain::frequency ? g : Field(g.grid));
}

Field semigroup_full(double t, const Field& g, const AlphaParams& params, const ContourSpec& spec) {
  return semigroup_full(t, g, *point_operator(params, g.grid), spec);
}

std::pair<Field, Field> semigroup_gradient_pac(double t, const Field& g, const PointOperator& op,
                                               const ContourSpec& spec) {
  if (op.params().dim != 2) throw DomainError("semigroup_gradient_pac: unsupported dimension");
  Propagated p = pac_hat(t, g, op, spec);
  auto [gx, gy] = gradient(p.hat);
  return {inverse_fourier(gx), inverse_fourier(gy)};
}

Field backward_euler_oracle(double t, const Field& g, const PointOperator& op, int steps, bool correction) {
  if (!(t > 0.0)) throw DomainError("backward_euler_oracle: t must be positive");
  if (steps < 10) throw DomainError("backward_euler_oracle: steps must be >= 10");
  double lambda = steps / t;
  if (correction && std::abs(lambda - op.eigenvalue()) <= 1e-9 * op.eigenvalue()) {
    ++steps;
    lambda = steps / t;
    std::cerr << "backward_euler_oracle: step count hit the eigenvalue, using " << steps << " steps\n";
  }
  const auto& sd = spectral_data(g.grid);
  Field u = to_hat(g);
  if (correction) u = project_ac(u, op);
  const Values inv = lambda / (sd.nu.cast<cplx>() + lambda);
  const Field gl = green_hat(lambda, g.grid);
  const cplx D = op.denominator(lambda);
  for (int k = 0; k < steps; ++k) {
    cplx coef = 0.0;
    if (correction) coef = lambda * op.green_pairing(class_sums(u), lambda) / D;
    u.values *= inv;
    if (correction) u.values += coef * gl.values;
  }
  return like_input(u, g.domain == Domain::frequency ? g : Field(g.grid));
}

}  // namespace pideq
