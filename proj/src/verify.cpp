#include "pideq/verify.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>

#include "pideq/decay_harness.hpp"

namespace pideq {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

CheckResult named(int id, std::string name) {
  CheckResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

double rel(const Field& a, const Field& b) { return lp_norm(a - b, 2.0) / lp_norm(b, 2.0); }

Field gaussian(const Grid& g, double sigma = 1.0, double cx = 0.0) {
  Datum d;
  d.sigma = sigma;
  d.cx = cx;
  return make_datum(d, g);
}

CheckResult spectral_data_check() {
  CheckResult r = named(1, "spectral data");
  const double E0 = *eigenvalue(0.0);
  const double want = 4.0 * std::exp(-2.0 * euler_gamma());
  const double e_eig = std::abs(E0 - want) / want;
  double e_root = 0.0;
  for (double a : {-1.0, 0.0, 1.0}) e_root = std::max(e_root, std::abs((c_lambda(*eigenvalue(a)) + a).real()));
  // ||G_E||^2 = int_0^inf 2 pi r K0(sqrt(E) r)^2 / (4 pi^2) dr.
  const double s = std::sqrt(E0);
  auto f = [&](double x) {
    const double k = boost::math::cyl_bessel_k(0, s * x);
    return x * k * k / (2.0 * kPi);
  };
  const double oracle = std::sqrt(boost::math::quadrature::exp_sinh<double>().integrate(f));
  const double grid_norm = green_l2_norm(E0, Grid(40.0, 512));
  const double e_psi = std::abs(grid_norm - oracle) / oracle;
  r.pass = e_eig <= 1e-12 && e_root <= 1e-12 && e_psi <= 1e-4;
  r.detail = fmt("eig err %.2e, root residual %.2e, psi_norm err %.2e (oracle %.10f)", e_eig, e_root, e_psi, oracle);
  return r;
}

CheckResult resolvent_check() {
  CheckResult r = named(2, "resolvent");
  const Grid g(40.0, 512);
  auto op = point_operator(make_alpha_params(0.0), g);
  const Field u = gaussian(g);
  const double lam = 2.0, mu = 5.0;
  const Field lhs = krein_resolvent(lam, u, *op) - krein_resolvent(mu, u, *op);
  const Field rhs = (mu - lam) * krein_resolvent(lam, krein_resolvent(mu, u, *op), *op);
  const double e_id = rel(lhs, rhs);
  const Field& psi = op->psi();
  const double e_psi = rel(krein_resolvent(lam, psi, *op), (1.0 / (lam - op->eigenvalue())) * psi);
  r.pass = e_id <= 1e-6 && e_psi <= 1e-3;
  r.detail = fmt("identity %.2e, eigenfunction %.2e", e_id, e_psi);
  return r;
}

CheckResult growth_check() {
  CheckResult r = named(3, "eigenmode growth");
  const Grid g(40.0, 512);
  auto op = point_operator(make_alpha_params(0.0), g);
  const double eE = std::exp(op->eigenvalue());
  const Field s = semigroup_full(1.0, op->psi(), *op);
  const double e = lp_norm(s - eE * op->psi(), 2.0) / eE;
  r.pass = e <= 1e-3;
  r.detail = fmt("||S(1)psi - e^E psi|| / e^E = %.2e", e);
  return r;
}

CheckResult semigroup_law_check() {
  CheckResult r = named(4, "semigroup law");
  const Grid g(40.0, 512);
  auto op = point_operator(make_alpha_params(0.0), g);
  const Field u = gaussian(g);
  const Field one = semigroup_full(1.0, u, *op);
  const Field two = semigroup_full(0.5, semigroup_full(0.5, u, *op), *op);
  const double e = lp_norm(one - two, 2.0) / lp_norm(u, 2.0);
  r.pass = e <= 1e-3;
  r.detail = fmt("||S(1)g - S(.5)S(.5)g|| / ||g|| = %.2e", e);
  return r;
}

CheckResult oracle_check() {
  CheckResult r = named(5, "backward Euler oracle");
  const Grid g(40.0, 256);
  auto op = point_operator(make_alpha_params(0.0), g);
  const Field u = gaussian(g);
  const Field c = semigroup_pac(1.0, u, *op).field;
  const double e1 = rel(backward_euler_oracle(1.0, u, *op, 1000), c);
  const double e2 = rel(backward_euler_oracle(1.0, u, *op, 2000), c);
  const double gain = e1 / e2;
  r.pass = e1 <= 1e-2 && gain >= 1.6 && gain <= 2.5;
  r.detail = fmt("steps 1000: %.2e, steps 2000: %.2e, gain %.2f", e1, e2, gain);
  return r;
}

CheckResult rate_check(int id, bool grad) {
  CheckResult r = named(id, grad ? "gradient decay rate" : "semigroup decay rate");
  ExperimentSpec s;
  if (grad) {
    s.kind = ExperimentKind::gradient;
    s.q = 4.0 / 3.0;
    s.p = 1.5;
  }
  const RateFit f = grad ? run_gradient_decay(s) : run_semigroup_decay(s);
  r.pass = std::abs(f.slope - f.theoretical) <= 0.05 && f.r_squared >= 0.98;
  r.detail = fmt("slope %.4f vs %.4f, r2 %.4f, upper bound ", f.slope, f.theoretical, f.r_squared);
  r.detail += f.slope <= f.theoretical + 0.05 ? "holds" : "violated";
  return r;
}

CheckResult contour_check() {
  CheckResult r = named(8, "contour independence");
  const Grid g(40.0, 512);
  auto op = point_operator(make_alpha_params(0.0), g);
  const Field u = gaussian(g);
  ContourSpec a, b;
  a.epsilon = op->eigenvalue() / 2.0;
  b.epsilon = op->eigenvalue() / 4.0;
  const double e = rel(semigroup_pac(1.0, u, *op, a).field, semigroup_pac(1.0, u, *op, b).field);
  r.pass = e <= 1e-6;
  r.detail = fmt("eps E/2 vs E/4: %.2e", e);
  return r;
}

CheckResult local_solver_check() {
  CheckResult r = named(9, "local solver");
  const Grid g(40.0, 256);
  const AlphaParams P = make_alpha_params(0.0);
  auto op = point_operator(P, g);
  Field u = gaussian(g);
  u *= 1e-2 / h1_alpha_norm(decompose(u, op->singular_coefficient(u), P));
  const DecomposedField u0 = decompose(u, op->singular_coefficient(u), P);
  std::vector<double> res;
  bool contract = true, geometric = true;
  double worst_ratio = 0.0;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    SolverConfig c;
    c.T = 0.5;
    c.dt = dt;
    const Trajectory tr = solve_local(u0, c);
    worst_ratio = std::max(worst_ratio, tr.max_contraction);
    contract = contract && tr.max_contraction < 1.0;
    for (std::size_t k = 1; k < tr.picard_distances.size(); ++k)
      geometric = geometric && tr.picard_distances[k] < tr.picard_distances[k - 1];
    res.push_back(residual_check(tr, c));
  }
  const double o1 = std::log2(res[0] / res[1]), o2 = std::log2(res[1] / res[2]);
  r.pass = contract && geometric && res[1] <= 1e-2 && o1 > 0.8 && o2 > 0.8;
  r.detail = fmt("contraction %.2e, residual at dt=1e-3 %.2e, observed orders %.2f %.2f", worst_ratio, res[1], o1, o2);
  if (!geometric) r.detail += ", iterates not geometric";
  return r;
}

struct ProjectedRun {
  Trajectory traj;
  double u0_norm = 0.0;
};

ProjectedRun projected_run() {
  const Grid g(40.0, 256);
  const AlphaParams P = make_alpha_params(0.0);
  auto op = point_operator(P, g);
  // Off-centre so the multiplier is not killed by symmetry.
  Field u = gaussian(g, 1.0, 2.0);
  u *= 1e-2 / h1_alpha_norm(decompose(u, op->singular_coefficient(u), P));
  SolverConfig c;
  c.T = 50.0;
  c.dt = 1e-2;
  c.projected = true;
  c.save_every = 10;
  ProjectedRun out;
  out.u0_norm = lp_norm(u, 2.0);
  out.traj = solve_global_projected(decompose(u, op->singular_coefficient(u), P), c);
  return out;
}

CheckResult orthogonality_check(const ProjectedRun& run) {
  CheckResult r = named(10, "projected solver");
  const Trajectory& tr = run.traj;
  double overlap = 0.0;
  for (std::size_t k = 0; k < tr.series.t.size(); ++k)
    if (tr.series.t[k] <= 20.0 + 1e-9) overlap = std::max(overlap, tr.series.psi_overlap[k]);
  overlap /= run.u0_norm;
  SolverConfig c;
  c.projected = true;
  double cons = 0.0;
  for (std::size_t k = 0; k < tr.states.size(); k += 50) {
    const auto& s = tr.states[k];
    const Field f = nonlinearity(s, c);
    auto op = point_operator(s.params, f.grid);
    const Field pd = project_d(f, *op);
    const double rho = lagrange_multiplier(s, c);
    const double fn = lp_norm(f, 2.0);
    if (fn > 0.0) cons = std::max(cons, lp_norm(pd - rho * op->psi(), 2.0) / fn);
  }
  r.pass = overlap <= 1e-6 && cons <= 1e-8;
  r.detail = fmt("max |<u,psi>|/||u0|| for t<=20: %.2e, P_d f vs rho psi: %.2e, Picard ratio %.2e", overlap, cons,
                 tr.max_contraction);
  return r;
}

CheckResult nonlinear_decay_check(const ProjectedRun& run) {
  CheckResult r = named(11, "nonlinear decay");
  ExperimentSpec s;
  s.kind = ExperimentKind::nonlinear;
  s.h1 = 4.0;
  s.h2 = 1.5;
  s.grid = run.traj.states.front().regular.grid;
  const auto f = run_nonlinear_decay(s, run.traj);
  r.pass = true;
  for (const auto& x : f) r.pass = r.pass && x.slope <= x.theoretical + 0.1;
  r.detail = fmt("slopes L4 %.3f (<= %.3f), grad L3/2 %.3f (<= %.3f)", f[0].slope, f[0].theoretical + 0.1,
                 f[1].slope, f[1].theoretical + 0.1);
  r.detail += fmt(", rho %.3f (<= %.3f)", f[2].slope, f[2].theoretical + 0.1);
  return r;
}

CheckResult lemma_check() {
  CheckResult r = named(12, "convolution lemma");
  const std::vector<double> ts{2.0, 10.0, 100.0};
  double worst = 0.0, change = 0.0;
  bool finite = true;
  for (double a : {0.25, 0.5, 0.75})
    for (double b : {-0.5, 0.0, 0.5}) {
      const double coarse = verify_convolution_lemma(a, b, ts, 1e-6);
      const double fine = verify_convolution_lemma(a, b, ts, 1e-12);
      finite = finite && std::isfinite(fine);
      worst = std::max(worst, fine);
      change = std::max(change, std::abs(coarse - fine) / fine);
    }
  r.pass = finite && change < 0.1;
  r.detail = fmt("max ratio %.6f, refinement change %.2e", worst, change);
  return r;
}

}  // namespace

const std::vector<int>& verify_suite() {
  static const std::vector<int> ids{1, 2, 3, 4, 5, 6, 7, 8, 12};
  return ids;
}

std::vector<CheckResult> run_checks(const std::vector<int>& ids) {
  std::optional<ProjectedRun> proj;
  std::vector<CheckResult> out;
  for (int id : ids) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      switch (id) {
        case 1: r = spectral_data_check(); break;
        case 2: r = resolvent_check(); break;
        case 3: r = growth_check(); break;
        case 4: r = semigroup_law_check(); break;
        case 5: r = oracle_check(); break;
        case 6: r = rate_check(6, false); break;
        case 7: r = rate_check(7, true); break;
        case 8: r = contour_check(); break;
        case 9: r = local_solver_check(); break;
        case 10:
        case 11:
          if (!proj) proj = projected_run();
          r = id == 10 ? orthogonality_check(*proj) : nonlinear_decay_check(*proj);
          break;
        case 12: r = lemma_check(); break;
        default: throw std::invalid_argument("no check numbered " + std::to_string(id));
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "check " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(r);
  }
  return out;
}

std::string format_check(const CheckResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s %2d %-24s (%.1fs) ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  return head + r.detail;
}

}  // namespace pideq
