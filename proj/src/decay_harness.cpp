#include "pideq/decay_harness.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace pideq {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::vector<double> default_t_grid(std::size_t count, double t0, double t1) {
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k)
    t[k] = t0 * std::pow(t1 / t0, count == 1 ? 0.0 : double(k) / double(count - 1));
  return t;
}

Field make_datum(const Datum& d, const Grid& g) {
  if (d.field) {
    if (d.field->grid != g) throw SpecError("datum field lives on another grid");
    return d.field->domain == Domain::space ? *d.field : inverse_fourier(*d.field);
  }
  if (!(d.sigma > 0.0)) throw SpecError("datum: sigma must be positive");
  const double s2 = 2.0 * d.sigma * d.sigma;
  return sample(g, [&](double x, double y) {
    return cplx(d.amp * std::exp(-((x - d.cx) * (x - d.cx) + (y - d.cy) * (y - d.cy)) / s2));
  });
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 5) throw DomainError("fit_rate: need at least 5 samples");
  const double n = double(samples.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [t, v] : samples) {
    if (!(t >= 1.0)) throw DomainError("fit_rate: samples must have t >= 1");
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("fit_rate: values must be positive");
    const double x = std::log(t), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw DomainError("fit_rate: times must not all coincide");
  RateFit f;
  f.samples = samples.size();
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  const double ybar = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (auto [t, v] : samples) {
    const double y = std::log(v);
    const double r = y - (f.slope * std::log(t) + f.intercept);
    ss_res += r * r;
    ss_tot += (y - ybar) * (y - ybar);
  }
  f.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return f;
}

namespace {

std::vector<double> spec_times(const ExperimentSpec& spec) {
  std::vector<double> t = spec.t_grid.empty() ? default_t_grid() : spec.t_grid;
  for (double s : t)
    if (!(s >= 1.0)) throw SpecError("t_grid must start at t >= 1");
  return t;
}

Field grad_magnitude(const Field& gx, const Field& gy) {
  return Field(gx.grid, Values((gx.values.abs2() + gy.values.abs2()).sqrt().cast<cplx>()));
}

}  // namespace

std::vector<std::pair<double, double>> semigroup_norm_series(const ExperimentSpec& spec) {
  const AlphaParams params = make_alpha_params(spec.alpha);
  auto op = point_operator(params, spec.grid);
  const Field g = project_ac(make_datum(spec.datum, spec.grid), *op);
  const double gq = lp_norm(g, spec.q);
  if (!(gq > 0.0)) throw DegenerateFitError("semigroup decay: zero datum");
  std::vector<std::pair<double, double>> out;
  for (double t : spec_times(spec)) {
    const SemigroupResult r = semigroup_pac(t, g, *op, spec.contour);
    out.emplace_back(t, lp_norm(r.field, spec.p) / gq);
  }
  return out;
}

std::vector<std::pair<double, double>> gradient_norm_series(const ExperimentSpec& spec) {
  const AlphaParams params = make_alpha_params(spec.alpha);
  auto op = point_operator(params, spec.grid);
  const Field g = project_ac(make_datum(spec.datum, spec.grid), *op);
  const double gq = lp_norm(g, spec.q);
  if (!(gq > 0.0)) throw DegenerateFitError("gradient decay: zero datum");
  std::vector<std::pair<double, double>> out;
  for (double t : spec_times(spec)) {
    auto [gx, gy] = semigroup_gradient_pac(t, g, *op, spec.contour);
    out.emplace_back(t, lp_norm(grad_magnitude(gx, gy), spec.p) / gq);
  }
  return out;
}

RateFit run_semigroup_decay(const ExperimentSpec& spec) {
  if (!(spec.q > 1.0 && spec.q < spec.p && std::isfinite(spec.p)))
    throw SpecError("semigroup decay needs 1 < q < p < infinity");
  RateFit f = fit_rate(semigroup_norm_series(spec));
  f.theoretical = -(2.0 / 2.0) * (1.0 / spec.q - 1.0 / spec.p);
  return f;
}

RateFit run_gradient_decay(const ExperimentSpec& spec) {
  if (!(spec.q > 1.0 && spec.q < spec.p && spec.p < 2.0)) throw SpecError("gradient decay needs 1 < q < p < 2");
  RateFit f = fit_rate(gradient_norm_series(spec));
  f.theoretical = -0.5 - (1.0 / spec.q - 1.0 / spec.p);
  return f;
}

std::array<RateFit, 3> run_nonlinear_decay(const ExperimentSpec& spec, const Trajectory& traj) {
  if (!(spec.h1 > 1.0 && std::isfinite(spec.h1)) || !(spec.h2 > 1.0 && spec.h2 < 2.0))
    throw SpecError("nonlinear decay needs h1 in (1, inf) and h2 in (1, 2)");
  if (!admissible_exponents(spec.h1, spec.h2)) throw SpecError("nonlinear decay: exponents are not admissible");
  if (traj.times.empty() || traj.times.back() < 20.0) throw SpecError("nonlinear decay needs t_max >= 20");
  std::vector<std::pair<double, double>> su, sg, sr;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    if (t < 1.0) continue;
    const auto& s = traj.states[k];
    const Field u = s.reconstruct();
    auto [gx, gy] = decomposed_gradient(s);
    su.emplace_back(t, lp_norm(u, spec.h1));
    sg.emplace_back(t, lp_norm(grad_magnitude(gx, gy), spec.h2));
    sr.emplace_back(t, std::abs(traj.rho[k]));
  }
  std::array<RateFit, 3> out{fit_rate(su), fit_rate(sg), fit_rate(sr)};
  out[0].theoretical = -1.0 + 1.0 / spec.h1;
  out[1].theoretical = -1.5 + 1.0 / spec.h2;
  out[2].theoretical = -1.0;
  return out;
}

bool exponents_admissible(double h1, double h2, double th1, double th2) {
  if (!(th1 > 0.5 && th1 < 1.0 && th2 > 0.5 && th2 < 1.0)) return false;
  if (!(th1 + th2 > 1.5)) return false;
  const double mid = th1 / h1 + th2 / h2 + (1.0 - th2) / 2.0;
  return std::max(1.0 / h1, 1.0 / h2) < mid && mid < 1.0;
}

std::optional<std::pair<double, double>> admissible_exponents(double h1, double h2) {
  if (!(h1 > 1.0) || std::isinf(h1)) throw DomainError("admissible_exponents: h1 must lie in (1, inf)");
  if (!(h2 > 1.0 && h2 < 2.0)) throw DomainError("admissible_exponents: h2 must lie in (1, 2)");
  for (int i = 501; i < 1000; ++i)
    for (int j = 501; j < 1000; ++j) {
      const double a = i * 1e-3, b = j * 1e-3;
      if (exponents_admissible(h1, h2, a, b)) return std::make_pair(a, b);
    }
  return std::nullopt;
}

double verify_convolution_lemma(double a, double b, const std::vector<double>& t_grid, double tol) {
  if (!(a < 1.0)) throw DomainError("verify_convolution_lemma: alpha must be < 1");
  double worst = 0.0;
  for (double t : t_grid) {
    if (!(t > 1.0)) throw DomainError("verify_convolution_lemma: t must exceed 1");
    // tau = t - u^{1/(1-a)} removes the endpoint singularity.
    const double e = 1.0 / (1.0 - a);
    auto f = [&](double u) { return std::pow(t - std::pow(u, e), -b); };
    const double top = std::pow(t - 1.0, 1.0 - a);
    const double I = e * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, top, 30, tol);
    worst = std::max(worst, I / std::pow(t, 1.0 - a - b));
  }
  return worst;
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "kind,p,q,h1,h2,slope,theoretical,delta,r2,n,L\n";
  auto opt = [](bool has, double v) { return has ? fmt_num(v) : std::string(); };
  for (const auto& r : rows) {
    os << r.kind << ',' << opt(r.has_pq, r.p) << ',' << opt(r.has_pq, r.q) << ',' << opt(r.has_h, r.h1) << ','
       << opt(r.has_h, r.h2) << ',' << fmt_num(r.fit.slope) << ',' << fmt_num(r.fit.theoretical) << ','
       << fmt_num(r.fit.slope - r.fit.theoretical) << ',' << fmt_num(r.fit.r_squared) << ',' << r.n << ','
       << fmt_num(r.L) << '\n';
  }
}

}  // namespace pideq
