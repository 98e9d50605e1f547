#include "pideq/point_spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace pideq {

std::optional<double> eigenvalue(double alpha, int dim) {
  if (dim == 2) return 4.0 * std::exp(-4.0 * kPi * alpha - 2.0 * euler_gamma());
  if (dim == 3) {
    if (alpha < 0.0) return std::pow(4.0 * kPi * alpha, 2);
    return std::nullopt;
  }
  throw DomainError("eigenvalue: dimension must be 2 or 3");
}

AlphaParams make_alpha_params(double alpha, int dim) {
  AlphaParams p;
  p.dim = dim;
  p.alpha = alpha;
  p.eigenvalue = eigenvalue(alpha, dim);
  if (p.eigenvalue) {
    const double E = *p.eigenvalue;
    p.psi_norm = dim == 2 ? 1.0 / std::sqrt(4.0 * kPi * E) : 1.0 / std::sqrt(8.0 * kPi * std::sqrt(E));
  }
  return p;
}

cplx c_lambda(cplx lambda, int dim) {
  if (lambda.imag() == 0.0 && lambda.real() <= 0.0)
    throw BranchError("c_lambda: lambda on the branch cut (-inf, 0]");
  if (dim == 2) return (euler_gamma() - std::log(2.0)) / (2.0 * kPi) + 0.5 * std::log(lambda) / (2.0 * kPi);
  if (dim == 3) return std::sqrt(lambda) / (4.0 * kPi);
  throw DomainError("c_lambda: dimension must be 2 or 3");
}

namespace {

void check_lambda(cplx lambda) {
  if (lambda.imag() == 0.0 && lambda.real() <= 0.0)
    throw BranchError("lambda on the branch cut (-inf, 0]");
}

}  // namespace

Field green_hat(cplx lambda, const Grid& g) {
  check_lambda(lambda);
  const auto& sd = spectral_data(g);
  Eigen::VectorXcd per(Eigen::Index(sd.class_nu.size()));
  for (Eigen::Index c = 0; c < per.size(); ++c) per[c] = 1.0 / (lambda + sd.class_nu[c]);
  return class_scatter(g, per);
}

Field green_field(cplx lambda, const Grid& g, int dim) {
  if (dim != 2) throw DomainError("green_field: only the planar case is sampled on grids");
  check_lambda(lambda);
  if (lambda.imag() == 0.0) {
    const double s = std::sqrt(lambda.real());
    return sample(g, [&](double x, double y) { return cplx(bessel_k0(s * std::hypot(x, y)) / (2.0 * kPi)); });
  }
  return inverse_fourier(green_hat(lambda, g));
}

std::pair<Field, Field> green_gradient_field(double lambda, const Grid& g) {
  if (!(lambda > 0.0)) throw DomainError("green_gradient_field: lambda must be positive");
  const double s = std::sqrt(lambda);
  Field gx(g), gy(g);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      const double x = g.x(i), y = g.x(j), r = std::hypot(x, y);
      const double d = -s / (2.0 * kPi) * bessel_k1(s * r) / r;
      gx(i, j) = d * x;
      gy(i, j) = d * y;
    }
  }
  return {gx, gy};
}

double green_l2_norm(double lambda, const Grid& g) {
  if (!(lambda > 0.0)) throw DomainError("green_l2_norm: lambda must be positive");
  const auto& sd = spectral_data(g);
  double s = 0.0;
  for (std::size_t c = 0; c < sd.class_nu.size(); ++c) s += sd.class_count[c] / std::pow(lambda + sd.class_nu[c], 2);
  s *= g.w();
  // Integral of (lambda + |xi|^2)^-2 over the square covered by masked modes.
  const double a = (g.n / 2 - 0.5) * kPi / g.L;
  auto inner = [&](double x) {
    const double c = lambda + x * x;
    return a / (c * (c + a * a)) + std::atan(a / std::sqrt(c)) / std::pow(c, 1.5);
  };
  const double sq = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(inner, -a, a, 15, 1e-14);
  const double tail = 1.0 / (4.0 * kPi * lambda) - sq / (4.0 * kPi * kPi);
  return std::sqrt(s + tail);
}

PointOperator::PointOperator(const AlphaParams& params, const Grid& grid) : params_(params), grid_(grid) {
  if (params.dim != 2) throw DomainError("PointOperator: only the planar operator is discretised");
  if (!params.eigenvalue) throw NoEigenfunctionError("PointOperator: no eigenvalue");
  const double E = *params.eigenvalue;
  const double lo = 64.0 / (grid.L * grid.L);
  const double hi = grid.kmax() * grid.kmax() / 16.0;
  exact_ = E >= lo && E <= hi;
  const double lam0 = exact_ ? E : std::clamp(E, lo, hi);
  kinv_ = params.alpha + c_lambda(lam0).real() + green_origin(lam0).real();
  if (exact_) {
    eh_ = E;
  } else {
    if (!(kinv_ > 0.0)) throw NoEigenfunctionError("PointOperator: no discrete bound state on this grid");
    // G^h_lambda(0) decreases from +inf (zero mode) to 0.
    double a = std::log(1e-16), b = std::log(1e16);
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (green_origin(std::exp(m)).real() > kinv_)
        a = m;
      else
        b = m;
    }
    eh_ = std::exp(0.5 * (a + b));
  }
  psi_hat_ = green_hat(eh_, grid);
  psi_hat_ *= 1.0 / lp_norm(psi_hat_, 2.0);
  psi_ = inverse_fourier(psi_hat_);
}

cplx PointOperator::green_origin(cplx lambda) const {
  const auto& sd = spectral_data(grid_);
  cplx s = 0.0;
  for (std::size_t c = 0; c < sd.class_nu.size(); ++c) s += sd.class_count[c] / (lambda + sd.class_nu[c]);
  return s * grid_.w();
}

cplx PointOperator::green_pairing(const Eigen::VectorXcd& sums, cplx lambda) const {
  const auto& sd = spectral_data(grid_);
  cplx s = 0.0;
  for (std::size_t c = 0; c < sd.class_nu.size(); ++c) s += sums[Eigen::Index(c)] / (lambda + sd.class_nu[c]);
  return s * grid_.w();
}

cplx PointOperator::singular_coefficient(const Field& F) const {
  const Field H = F.domain == Domain::frequency ? F : fourier(F);
  return value_at_origin(H) / kinv_;
}

std::shared_ptr<const PointOperator> point_operator(const AlphaParams& params, const Grid& g) {
  using Key = std::tuple<double, int, double, int, bool>;
  static std::map<Key, std::shared_ptr<const PointOperator>> cache;
  static std::mutex mu;
  const Key key{params.alpha, params.dim, g.L, g.n, g.offset};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto op = std::make_shared<const PointOperator>(params, g);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() > 32) cache.clear();
  return cache.emplace(key, op).first->second;
}

Field psi_alpha_field(const AlphaParams& params, const Grid& g) {
  if (!params.eigenvalue) throw NoEigenfunctionError("psi_alpha_field: no eigenvalue for these parameters");
  return point_operator(params, g)->psi();
}

Field project_d(const Field& f, const PointOperator& op) {
  const Field& psi = f.domain == Domain::space ? op.psi() : op.psi_hat();
  return inner_product(f, psi) * psi;
}

Field project_ac(const Field& f, const PointOperator& op) { return f - project_d(f, op); }

Field project_d(const Field& f, const AlphaParams& params) {
  if (!params.eigenvalue) return Field::zeros(f.grid, f.domain);
  return project_d(f, *point_operator(params, f.grid));
}

Field project_ac(const Field& f, const AlphaParams& params) {
  if (!params.eigenvalue) return f;
  return project_ac(f, *point_operator(params, f.grid));
}

double reference_lambda(const AlphaParams& params) { return 1.0 + params.eigenvalue.value_or(0.0); }

Field DecomposedField::reconstruct() const {
  if (coeff == 0.0) return regular;
  return regular + coeff * inverse_fourier(green_hat(lambda_ref, regular.grid));
}

DecomposedField decompose(const Field& u, cplx q, const AlphaParams& params, double lambda_ref) {
  DecomposedField d;
  d.params = params;
  d.lambda_ref = lambda_ref > 0.0 ? lambda_ref : reference_lambda(params);
  d.coeff = q;
  const Field us = u.domain == Domain::space ? u : inverse_fourier(u);
  d.regular = q == 0.0 ? us : us - q * inverse_fourier(green_hat(d.lambda_ref, u.grid));
  return d;
}

double h1_alpha_norm(const DecomposedField& u) {
  if (!(u.lambda_ref > 0.0) || (u.params.eigenvalue && u.lambda_ref == *u.params.eigenvalue))
    throw DomainError("h1_alpha_norm: invalid reference lambda");
  const double l2 = lp_norm(u.regular, 2.0);
  auto [gx, gy] = gradient(u.regular);
  const double g2 = std::pow(lp_norm(gx, 2.0), 2) + std::pow(lp_norm(gy, 2.0), 2);
  return std::sqrt(l2 * l2 + g2 + std::norm(u.coeff));
}

std::pair<Field, Field> decomposed_gradient(const DecomposedField& u) {
  auto [gx, gy] = gradient(u.regular);
  if (gx.domain == Domain::frequency) {
    gx = inverse_fourier(gx);
    gy = inverse_fourier(gy);
  }
  if (u.coeff != 0.0) {
    auto [sx, sy] = green_gradient_field(u.lambda_ref, u.regular.grid);
    gx += u.coeff * sx;
    gy += u.coeff * sy;
  }
  return {gx, gy};
}

}  // namespace pideq
