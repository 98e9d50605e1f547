#include "pideq/nonlinear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace pideq {

StepPropagator::StepPropagator(std::shared_ptr<const PointOperator> op, double dt, int nodes)
    : op_(std::move(op)), dt_(dt) {
  if (!(dt > 0.0)) throw DomainError("StepPropagator: dt must be positive");
  const double E = op_->eigenvalue();
  // Keep the hyperbola vertex well to the right of the eigenvalue.
  const int N = std::max(nodes, int(std::ceil(12.0 * E * dt)));
  const ContourNodes cn = hyperbolic_contour(dt, N);
  const auto& sd = spectral_data(op_->grid());
  const Eigen::Index K = Eigen::Index(sd.class_nu.size());
  const Eigen::Index M = Eigen::Index(cn.size());
  r_.resize(M, K);
  c_.resize(M);
  const double W = op_->grid().w();
  const cplx two_pi_i(0.0, 2.0 * kPi);
  for (Eigen::Index m = 0; m < M; ++m) {
    const cplx lam = cn.lambda[std::size_t(m)];
    cplx g0 = 0.0;
    for (Eigen::Index c = 0; c < K; ++c) {
      r_(m, c) = 1.0 / (lam + sd.class_nu[std::size_t(c)]);
      g0 += sd.class_count[std::size_t(c)] * r_(m, c);
    }
    const cplx D = op_->strength() - W * g0;
    c_[m] = cn.weight[std::size_t(m)] * std::exp(dt * lam) * W / (two_pi_i * D);
  }
  decay_ = (-dt * sd.nu).exp();
}

Field StepPropagator::apply(const Field& hat, cplx* q) const {
  const Eigen::VectorXcd sums = class_sums(hat);
  const Eigen::VectorXcd beta = c_.cwiseProduct(r_ * sums);
  const Eigen::VectorXcd corr = r_.transpose() * beta;
  if (q) *q = beta.sum();
  Field out = class_scatter(hat.grid, corr);
  out.values += hat.values * decay_;
  return out;
}

namespace {

struct Context {
  std::shared_ptr<const PointOperator> op;
  SolverConfig cfg;
  double omega;
  Field ghat;          // band-limited G_omega
  Field dgx, dgy;      // analytic grad G_omega
  RealValues h1w;      // 1 + |xi|^2 on masked modes
  std::unique_ptr<StepPropagator> S;
  long clamps = 0;

  Context(const AlphaParams& params, const Grid& g, const SolverConfig& c, bool stepper = true) : cfg(c) {
    if (!(cfg.gamma > 1.0)) throw DomainError("solver: gamma must exceed 1");
    if (!(cfg.dt > 0.0)) throw DomainError("solver: dt must be positive");
    if (!(cfg.picard_tol > 0.0)) throw DomainError("solver: picard_tol must be positive");
    op = point_operator(params, g);
    omega = reference_lambda(params);
    ghat = green_hat(omega, g);
    auto [gx, gy] = green_gradient_field(omega, g);
    dgx = std::move(gx);
    dgy = std::move(gy);
    const auto& sd = spectral_data(g);
    h1w = 1.0 + sd.nu * sd.mask;
    if (stepper) S = std::make_unique<StepPropagator>(op, cfg.dt, cfg.hyperbola_nodes);
  }

  cplx canonical_q(const Field& hat) const { return op->singular_coefficient(hat); }

  double proxy(const Field& du, cplx dq) const {
    Values phi = du.values - dq * ghat.values;
    RealValues a = phi.abs2() * h1w;
    return std::sqrt(pairwise_sum(a.data(), std::size_t(a.size())) * du.grid.w() + std::norm(dq));
  }
};

struct Eval {
  Field u, gx, gy;
};

// Frequency data of a . grad(|u|^gamma); optionally keeps u and grad u.
Field nonlinearity_hat(Context& ctx, const Field& uhat, cplx q, Eval* keep = nullptr) {
  const Grid& g = uhat.grid;
  const bool drift = ctx.cfg.a[0] != 0.0 || ctx.cfg.a[1] != 0.0;
  if (!drift && !keep) return Field(g, Domain::frequency);
  const Field phihat = uhat - q * ctx.ghat;
  auto [gxh, gyh] = gradient(phihat);
  Field gx = inverse_fourier(gxh) + q * ctx.dgx;
  Field gy = inverse_fourier(gyh) + q * ctx.dgy;
  Field u = inverse_fourier(uhat);
  Field f(g);
  if (drift) {
    const double gam = ctx.cfg.gamma, ax = ctx.cfg.a[0], ay = ctx.cfg.a[1];
    const std::size_t N = std::size_t(g.n) * g.n;
    const cplx* up = u.values.data();
    const cplx* xp = gx.values.data();
    const cplx* yp = gy.values.data();
    cplx* fp = f.values.data();
    for (std::size_t k = 0; k < N; ++k) {
      const double m = std::abs(up[k]);
      if (m == 0.0) continue;
      double w = gam == 2.0 ? 1.0 : std::pow(m, gam - 2.0);
      if (w > 1e8) {
        w = 1e8;
        ++ctx.clamps;
      }
      fp[k] = gam * w * up[k] * (ax * xp[k] + ay * yp[k]);
    }
  }
  if (keep) {
    keep->u = std::move(u);
    keep->gx = std::move(gx);
    keep->gy = std::move(gy);
  }
  return drift ? fourier(f) : Field(g, Domain::frequency);
}

Field project_hat(const Context& ctx, const Field& hat) { return project_ac(hat, *ctx.op); }

// One Picard sweep of the trapezoidal exponential integrator; v[0] is the
// window's initial state and stays fixed. Overwrites v in place and returns
// the sup-in-time proxy distance between old and new iterates.
double picard_sweep(Context& ctx, std::vector<Field>& v, std::vector<cplx>& qv) {
  const double dt = ctx.cfg.dt;
  const bool proj = ctx.cfg.projected;
  auto source = [&](const Field& uhat, cplx q) {
    Field f = nonlinearity_hat(ctx, uhat, q);
    return proj ? project_hat(ctx, f) : f;
  };
  Field f_prev = source(v[0], qv[0]);
  Field w = v[0];
  double dist = 0.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    Field f_next = source(v[k + 1], qv[k + 1]);
    Field h = w;
    h.values += (0.5 * dt) * f_prev.values;
    Field wn = ctx.S->apply(h);
    wn.values += (0.5 * dt) * f_next.values;
    if (proj) wn -= inner_product(wn, ctx.op->psi_hat()) * ctx.op->psi_hat();
    const cplx qn = ctx.canonical_q(wn);
    dist = std::max(dist, ctx.proxy(wn - v[k + 1], qn - qv[k + 1]));
    v[k + 1] = wn;
    qv[k + 1] = qn;
    w = std::move(wn);
    f_prev = std::move(f_next);
  }
  return dist;
}

void initial_iterate(Context& ctx, std::vector<Field>& v, std::vector<cplx>& qv) {
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    if (ctx.cfg.initial == InitialIterate::frozen) {
      v[k + 1] = v[0];
      qv[k + 1] = qv[0];
      continue;
    }
    v[k + 1] = ctx.S->apply(v[k]);
    if (ctx.cfg.projected) v[k + 1] -= inner_product(v[k + 1], ctx.op->psi_hat()) * ctx.op->psi_hat();
    qv[k + 1] = ctx.canonical_q(v[k + 1]);
  }
}

struct WindowReport {
  std::vector<double> distances;
  double max_ratio = 0.0;
  int iterations = 0;
};

WindowReport picard_window(Context& ctx, std::vector<Field>& v, std::vector<cplx>& qv) {
  WindowReport rep;
  initial_iterate(ctx, v, qv);
  int bad = 0;
  double prev = 0.0;
  for (int j = 1; j <= ctx.cfg.picard_max; ++j) {
    const double d = picard_sweep(ctx, v, qv);
    rep.distances.push_back(d);
    rep.iterations = j;
    if (ctx.cfg.ball_radius > 0.0) {
      double sup = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) sup = std::max(sup, ctx.proxy(v[k], qv[k]));
      if (sup > ctx.cfg.ball_radius) {
        const std::string msg = "Picard iterate left the ball";
        if (ctx.cfg.projected) throw DataTooLargeError(msg, sup / ctx.cfg.ball_radius);
        throw HorizonTooLargeError(msg, sup / ctx.cfg.ball_radius);
      }
    }
    if (d < ctx.cfg.picard_tol) return rep;
    if (j > 1 && prev > 0.0) {
      const double ratio = d / prev;
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      bad = ratio >= 1.0 ? bad + 1 : 0;
      if (bad >= 3) {
        const std::string msg = "Picard map is not contracting (ratio " + std::to_string(ratio) + ")";
        if (ctx.cfg.projected) throw DataTooLargeError(msg, ratio);
        throw HorizonTooLargeError(msg, ratio);
      }
    }
    prev = d;
  }
  throw ConvergenceError("Picard iteration exceeded picard_max");
}

void record_window(Context& ctx, const std::vector<Field>& v, const std::vector<cplx>& qv, double t0,
                   long step0, bool include_first, Trajectory& traj) {
  const double dt = ctx.cfg.dt;
  for (std::size_t k = include_first ? 0 : 1; k < v.size(); ++k) {
    const long step = step0 + long(k);
    const double t = t0 + double(k) * dt;
    Eval ev;
    const Field f = nonlinearity_hat(ctx, v[k], qv[k], &ev);
    const double rho = inner_product(f, ctx.op->psi_hat()).real();
    auto& s = traj.series;
    s.t.push_back(t);
    s.l2.push_back(lp_norm(v[k], 2.0));
    s.l4.push_back(lp_norm(ev.u, 4.0));
    Field gm(ev.u.grid, Values((ev.gx.values.abs2() + ev.gy.values.abs2()).sqrt().cast<cplx>()));
    s.grad32.push_back(lp_norm(gm, 1.5));
    s.q_abs.push_back(std::abs(qv[k]));
    s.rho.push_back(rho);
    s.psi_overlap.push_back(std::abs(inner_product(v[k], ctx.op->psi_hat())));
    traj.sup_norm = std::max(traj.sup_norm, ctx.proxy(v[k], qv[k]));
    if (step % ctx.cfg.save_every == 0) {
      DecomposedField d;
      d.params = ctx.op->params();
      d.lambda_ref = ctx.omega;
      d.coeff = qv[k];
      d.regular = inverse_fourier(v[k] - qv[k] * ctx.ghat);
      traj.times.push_back(t);
      traj.states.push_back(std::move(d));
      traj.rho.push_back(rho);
    }
  }
}

Field initial_hat(const DecomposedField& u0) {
  Field hat = u0.regular.domain == Domain::frequency ? u0.regular : fourier(u0.regular);
  if (u0.coeff != 0.0) hat += u0.coeff * green_hat(u0.lambda_ref, hat.grid);
  return hat;
}

Trajectory run(const DecomposedField& u0, const SolverConfig& cfg, bool global) {
  if (!(cfg.T > 0.0)) throw DomainError("solver: T must be positive");
  if (cfg.save_every < 1) throw DomainError("solver: save_every must be >= 1");
  Context ctx(u0.params, u0.regular.grid, cfg);
  if (cfg.gamma < 2.0) std::cerr << "solver: gamma < 2 is outside the default regime\n";
  Trajectory traj;
  traj.dt = cfg.dt;
  traj.save_every = cfg.save_every;
  traj.projected = cfg.projected;

  // The decomposition of u0 is only used to rebuild it; the trajectory carries
  // the operator's own coefficient u(0)/(alpha + K).
  Field uhat = initial_hat(u0);
  if (cfg.projected) uhat -= inner_product(uhat, ctx.op->psi_hat()) * ctx.op->psi_hat();
  cplx q0 = ctx.canonical_q(uhat);
  const long total = std::lround(cfg.T / cfg.dt);
  if (total < 1) throw DomainError("solver: T shorter than one step");
  const long per_window = global ? std::max(1L, std::lround(cfg.window / cfg.dt)) : total;

  long done = 0;
  bool first = true;
  while (done < total) {
    const long m = std::min(per_window, total - done);
    std::vector<Field> v(std::size_t(m) + 1, uhat);
    std::vector<cplx> qv(std::size_t(m) + 1, q0);
    const WindowReport rep = picard_window(ctx, v, qv);
    traj.picard_distances = rep.distances;
    traj.max_contraction = std::max(traj.max_contraction, rep.max_ratio);
    traj.picard_iterations += rep.iterations;
    record_window(ctx, v, qv, double(done) * cfg.dt, done, first, traj);
    uhat = v.back();
    q0 = qv.back();
    done += m;
    first = false;
  }
  traj.clamp_count = ctx.clamps;
  return traj;
}

}  // namespace

Field nonlinearity(const DecomposedField& u, const SolverConfig& cfg) {
  if (!(cfg.gamma > 1.0)) throw DomainError("nonlinearity: gamma must exceed 1");
  SolverConfig c = cfg;
  Context ctx(u.params, u.regular.grid, c, false);
  if (u.lambda_ref != ctx.omega) throw DomainError("nonlinearity: state must use the reference 1 + E");
  Field uhat = initial_hat(u);
  return inverse_fourier(nonlinearity_hat(ctx, uhat, u.coeff));
}

double lagrange_multiplier(const DecomposedField& u, const SolverConfig& cfg) {
  const Field f = nonlinearity(u, cfg);
  return inner_product(f, psi_alpha_field(u.params, f.grid)).real();
}

Field duhamel_integral(const std::vector<Field>& source, double dt, const AlphaParams& params, bool projected,
                       int hyperbola_nodes) {
  if (source.size() < 2) throw SchedulingError("duhamel_integral: need samples at both ends");
  const Grid g = source.front().grid;
  for (const auto& f : source)
    if (f.grid != g) throw SchedulingError("duhamel_integral: samples on different grids");
  auto op = point_operator(params, g);
  StepPropagator S(op, dt, hyperbola_nodes);
  auto hat = [&](const Field& f) {
    Field F = f.domain == Domain::frequency ? f : fourier(f);
    return projected ? project_ac(F, *op) : F;
  };
  Field w(g, Domain::frequency);
  Field fp = hat(source[0]);
  for (std::size_t k = 0; k + 1 < source.size(); ++k) {
    Field fn = hat(source[k + 1]);
    Field h = w;
    h.values += (0.5 * dt) * fp.values;
    w = S.apply(h);
    w.values += (0.5 * dt) * fn.values;
    fp = std::move(fn);
  }
  return inverse_fourier(w);
}

Trajectory solve_local(const DecomposedField& u0, const SolverConfig& cfg) { return run(u0, cfg, false); }

Trajectory solve_global_projected(const DecomposedField& u0, const SolverConfig& cfg) {
  if (!cfg.projected) throw DomainError("solve_global_projected: cfg.projected must be set");
  return run(u0, cfg, true);
}

double h1_alpha_distance(const DecomposedField& u, const DecomposedField& v) {
  DecomposedField d;
  d.params = u.params;
  d.lambda_ref = u.lambda_ref;
  d.coeff = u.coeff - v.coeff;
  d.regular = u.regular - v.regular;
  return h1_alpha_norm(d);
}

double picard_defect(const Trajectory& traj, const SolverConfig& cfg) {
  if (traj.states.size() < 2 || traj.save_every != 1) throw DomainError("picard_defect: needs every step stored");
  const auto& first = traj.states.front();
  Context ctx(first.params, first.regular.grid, cfg);
  std::vector<Field> v;
  std::vector<cplx> qv;
  for (const auto& s : traj.states) {
    v.push_back(initial_hat(s));
    qv.push_back(s.coeff);
  }
  return picard_sweep(ctx, v, qv);
}

double residual_check(const Trajectory& traj, const SolverConfig& cfg) {
  if (traj.states.size() < 3) throw DomainError("residual_check: need at least 3 time samples");
  const double dt = traj.dt * traj.save_every;
  for (std::size_t k = 1; k < traj.times.size(); ++k)
    if (std::abs(traj.times[k] - traj.times[k - 1] - dt) > 1e-9 * dt)
      throw DomainError("residual_check: trajectory is not uniformly sampled");
  const auto& first = traj.states.front();
  Context ctx(first.params, first.regular.grid, cfg, false);
  const auto& sd = spectral_data(first.regular.grid);
  const double om = ctx.omega;
  double worst = 0.0;
  Field prev = initial_hat(traj.states[0]);
  Field cur = initial_hat(traj.states[1]);
  for (std::size_t k = 1; k + 1 < traj.states.size(); ++k) {
    Field next = initial_hat(traj.states[k + 1]);
    const cplx q = traj.states[k].coeff;
    const Field phihat = cur - q * ctx.ghat;
    Field r(cur.grid, Values((next.values - prev.values) / (2.0 * dt)), Domain::frequency);
    r.values -= om * cur.values - (om + sd.nu) * phihat.values;
    Field f = nonlinearity_hat(ctx, cur, q);
    r -= f;
    if (traj.projected) r += inner_product(f, ctx.op->psi_hat()) * ctx.op->psi_hat();
    const double nu = lp_norm(cur, 2.0);
    if (nu > 0.0) worst = std::max(worst, lp_norm(r, 2.0) / nu);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return worst;
}

}  // namespace pideq
