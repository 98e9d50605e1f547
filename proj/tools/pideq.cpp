#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pideq/config.hpp"
#include "pideq/decay_harness.hpp"
#include "pideq/verify.hpp"

using namespace pideq;
namespace fs = std::filesystem;

namespace {

struct Settings {
  double alpha = 0.0;
  int grid_n = 512;
  double grid_L = 40.0;
  double contour_eps = 0.0;
  int contour_nodes = 0;
  double gamma = 2.0;
  double ax = 1.0, ay = 0.0;
  double dt = 1e-2;
  double T = 1.0;
  double tol = 1e-10;
};

// Options a subcommand exposes, keyed by config name; a config value only
// applies when the flag was not given.
struct Bindings {
  std::vector<std::pair<std::string, CLI::Option*>> opts;
  std::vector<std::function<void(const Config&)>> apply;

  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, T& var, const std::string& help) {
    CLI::Option* o = app->add_option(flag, var, help)->capture_default_str();
    apply.push_back([o, key, &var](const Config& c) {
      if (o->count() > 0) return;
      if constexpr (std::is_same_v<T, int>) {
        if (auto v = c.integer(key)) var = *v;
      } else {
        if (auto v = c.number(key)) var = *v;
      }
    });
  }
};

Grid make_grid(const Settings& s) { return Grid(s.grid_L, s.grid_n); }

ContourSpec make_contour(const Settings& s) {
  ContourSpec c;
  c.epsilon = s.contour_eps;
  c.nodes_ray = s.contour_nodes;
  return c;
}

// "gaussian:sigma,amp[,cx,cy]" or a binary field file.
Field load_datum(const std::string& desc, const Grid& g) {
  const std::string tag = "gaussian:";
  if (desc.rfind(tag, 0) == 0) {
    std::vector<double> v;
    std::stringstream ss(desc.substr(tag.size()));
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    if (v.size() != 2 && v.size() != 4) throw std::invalid_argument("gaussian datum needs sigma,amp[,cx,cy]");
    Datum d;
    d.sigma = v[0];
    d.amp = v[1];
    if (v.size() == 4) {
      d.cx = v[2];
      d.cy = v[3];
    }
    return make_datum(d, g);
  }
  Field f = read_field_binary(desc);
  if (f.grid != g) std::cerr << "note: using the grid stored in " << desc << "\n";
  return f.domain == Domain::space ? f : inverse_fourier(f);
}

fs::path out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return fs::path(dir) / name;
}

void write_field_file(const Field& f, const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + p.string());
  write_field_csv(f, os);
}

int cmd_spectral(const Settings& s, int dim) {
  const AlphaParams P = make_alpha_params(s.alpha, dim);
  std::cout << "alpha,N,E,psi_norm,lambda,c_re,c_im\n";
  const std::string E = P.eigenvalue ? fmt_num(*P.eigenvalue) : "";
  const std::string pn = P.eigenvalue ? fmt_num(P.psi_norm) : "";
  for (int k = 0; k <= 16; ++k) {
    const double lam = std::pow(10.0, -4.0 + 0.5 * k);
    const cplx c = c_lambda(lam, dim);
    std::cout << fmt_num(s.alpha) << ',' << dim << ',' << E << ',' << pn << ',' << fmt_num(lam) << ','
              << fmt_num(c.real()) << ',' << fmt_num(c.imag()) << '\n';
  }
  return 0;
}

void print_diagnostics(double free_norm, double corr_norm, double imag_residue) {
  std::cout << "free_part_norm,correction_norm,imag_residue\n"
            << fmt_num(free_norm) << ',' << fmt_num(corr_norm) << ',' << fmt_num(imag_residue) << '\n';
}

int cmd_resolve(const Settings& s, double lam_re, double lam_im, const std::string& datum, const std::string& out) {
  const Grid g = make_grid(s);
  const Field u = load_datum(datum, g);
  auto op = point_operator(make_alpha_params(s.alpha), u.grid);
  const cplx lam(lam_re, lam_im);
  const Field r = krein_resolvent(lam, u, *op);
  const auto& sd = spectral_data(u.grid);
  Field free_hat = fourier(u);
  free_hat.values *= sd.mask / (lam + sd.nu.cast<cplx>());
  const Field corr = krein_coefficient(lam, u, *op) * green_hat(lam, u.grid);
  const double imag = lam_im == 0.0 ? r.values.imag().abs().maxCoeff() : 0.0;
  write_field_file(r, out_path(out, "resolve.csv"));
  print_diagnostics(lp_norm(free_hat, 2.0), lp_norm(corr, 2.0), imag);
  return 0;
}

int cmd_semigroup(const Settings& s, double t, bool full, const std::string& datum, const std::string& out) {
  const Grid g = make_grid(s);
  const Field u = load_datum(datum, g);
  auto op = point_operator(make_alpha_params(s.alpha), u.grid);
  SemigroupResult r = semigroup_pac(t, u, *op, make_contour(s));
  if (full) r.field += (std::exp(op->eigenvalue() * t) * inner_product(u, op->psi())) * op->psi();
  write_field_file(r.field, out_path(out, "semigroup.csv"));
  print_diagnostics(r.free_part_norm, r.correction_norm, r.imag_residue);
  return 0;
}

int cmd_simulate(const Settings& s, const std::string& u0desc, bool projected, double norm, int save_every,
                 const std::string& out) {
  const Grid g = make_grid(s);
  const AlphaParams P = make_alpha_params(s.alpha);
  Field u = load_datum(u0desc, g);
  auto op = point_operator(P, u.grid);
  if (norm > 0.0) u *= norm / h1_alpha_norm(decompose(u, op->singular_coefficient(u), P));
  SolverConfig c;
  c.gamma = s.gamma;
  c.a = {s.ax, s.ay};
  c.T = s.T;
  c.dt = s.dt;
  c.picard_tol = s.tol;
  c.projected = projected;
  c.save_every = save_every;
  const DecomposedField u0 = decompose(u, op->singular_coefficient(u), P);
  const Trajectory tr = projected ? solve_global_projected(u0, c) : solve_local(u0, c);

  std::ofstream man(out_path(out, "manifest.csv"), std::ios::binary);
  man << "t,l2,l4,grad32,q_abs,rho,snapshot\n";
  std::size_t next = 0;
  for (std::size_t k = 0; k < tr.series.t.size(); ++k) {
    const double t = tr.series.t[k];
    std::string snap;
    if (next < tr.times.size() && std::abs(tr.times[next] - t) < 1e-9 * std::max(1.0, t)) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%06zu.bin", next);
      snap = name;
      write_field_binary(tr.states[next].reconstruct(), out_path(out, snap));
      ++next;
    }
    const auto& x = tr.series;
    man << fmt_num(t) << ',' << fmt_num(x.l2[k]) << ',' << fmt_num(x.l4[k]) << ',' << fmt_num(x.grad32[k]) << ','
        << fmt_num(x.q_abs[k]) << ',' << fmt_num(x.rho[k]) << ',' << snap << '\n';
  }
  std::cout << "steps " << tr.series.t.size() - 1 << ", snapshots " << tr.times.size() << ", picard iterations "
            << tr.picard_iterations << ", worst contraction ratio " << fmt_num(tr.max_contraction) << "\n";
  return 0;
}

struct DecayArgs {
  std::vector<std::string> kinds{"semigroup", "gradient"};
  double p = 4.0, q = 2.0, h1 = 4.0, h2 = 1.5;
  double tmax = 50.0;
  int points = 12;
  double sigma = 1.0;
};

int cmd_decay(const Settings& s, const DecayArgs& a, const std::string& out) {
  std::vector<ReportRow> rows;
  ExperimentSpec spec;
  spec.grid = make_grid(s);
  spec.alpha = s.alpha;
  spec.contour = make_contour(s);
  spec.datum.sigma = a.sigma;
  spec.t_grid = default_t_grid(std::size_t(a.points), 1.0, a.tmax);
  std::optional<Trajectory> traj;
  for (const auto& kind : a.kinds) {
    ReportRow row;
    row.kind = kind;
    row.n = spec.grid.n;
    row.L = spec.grid.L;
    if (kind == "semigroup" || kind == "gradient") {
      const bool grad = kind == "gradient";
      spec.p = a.p;
      spec.q = a.q;
      if (grad && a.p == 4.0 && a.q == 2.0) {
        spec.p = 1.5;
        spec.q = 4.0 / 3.0;
      }
      row.p = spec.p;
      row.q = spec.q;
      row.has_pq = true;
      row.fit = grad ? run_gradient_decay(spec) : run_semigroup_decay(spec);
      rows.push_back(row);
    } else if (kind == "nonlinear" || kind == "rho") {
      spec.h1 = a.h1;
      spec.h2 = a.h2;
      if (!traj) {
        const AlphaParams P = make_alpha_params(s.alpha);
        Datum d;
        d.sigma = a.sigma;
        d.cx = 2.0;
        Field u = make_datum(d, spec.grid);
        auto op = point_operator(P, spec.grid);
        u *= 1e-2 / h1_alpha_norm(decompose(u, op->singular_coefficient(u), P));
        SolverConfig c;
        c.gamma = s.gamma;
        c.a = {s.ax, s.ay};
        c.dt = s.dt;
        c.T = a.tmax;
        c.picard_tol = s.tol;
        c.projected = true;
        c.save_every = std::max(1, int(std::lround(0.1 / s.dt)));
        traj = solve_global_projected(decompose(u, op->singular_coefficient(u), P), c);
      }
      const auto fits = run_nonlinear_decay(spec, *traj);
      row.h1 = a.h1;
      row.h2 = a.h2;
      row.has_h = true;
      if (kind == "nonlinear") {
        row.fit = fits[0];
        row.kind = "nonlinear_u";
        rows.push_back(row);
        row.fit = fits[1];
        row.kind = "nonlinear_grad";
        rows.push_back(row);
      } else {
        row.fit = fits[2];
        rows.push_back(row);
      }
    } else if (kind == "lemma42") {
      // Log-log slope of the convolution ratio against t; boundedness means <= 0.
      for (double ae : {0.25, 0.5, 0.75})
        for (double be : {-0.5, 0.0, 0.5}) {
          std::vector<std::pair<double, double>> samples;
          for (double t : default_t_grid(std::size_t(a.points), 2.0, 100.0))
            samples.emplace_back(t, verify_convolution_lemma(ae, be, {t}));
          row.p = ae;
          row.q = be;
          row.has_pq = true;
          row.fit = fit_rate(samples);
          row.fit.theoretical = 0.0;
          rows.push_back(row);
        }
    } else {
      throw std::invalid_argument("unknown decay kind '" + kind + "'");
    }
  }
  const fs::path p = out_path(out, "report.csv");
  write_report_csv(rows, p.string());
  std::ifstream is(p);
  std::cout << is.rdbuf();
  return 0;
}

int cmd_verify(const std::vector<int>& only) {
  const std::vector<int>& ids = only.empty() ? verify_suite() : only;
  bool ok = true;
  for (int id : ids) {
    const CheckResult r = run_checks({id}).front();
    std::cout << format_check(r) << std::endl;
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-interaction heat flow and convection-diffusion toolkit"};
  app.require_subcommand(1);
  std::string config_path, out = ".";
  app.add_option("--config", config_path, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory")->capture_default_str();

  Settings s;
  std::map<CLI::App*, Bindings> bind;
  auto common = [&](CLI::App* sub) {
    auto& b = bind[sub];
    b.add(sub, "--alpha", "alpha", s.alpha, "interaction strength");
    b.add(sub, "--grid-n", "grid_n", s.grid_n, "points per axis");
    b.add(sub, "--grid-L", "grid_L", s.grid_L, "half box length");
    return &b;
  };
  auto contour = [&](CLI::App* sub) {
    auto& b = bind[sub];
    b.add(sub, "--contour-eps", "contour_eps", s.contour_eps, "contour radius (0: automatic)");
    b.add(sub, "--nodes", "contour_nodes", s.contour_nodes, "nodes per ray (0: automatic)");
  };

  auto* spectral = app.add_subcommand("spectral", "eigenvalue, psi norm and c(lambda) table");
  int dim = 2;
  bind[spectral].add(spectral, "--alpha", "alpha", s.alpha, "interaction strength");
  spectral->add_option("--dim", dim, "dimension")->check(CLI::IsMember({2, 3}))->capture_default_str();

  auto* resolve = app.add_subcommand("resolve", "apply the resolvent to a datum");
  common(resolve);
  contour(resolve);
  double lam_re = 2.0, lam_im = 0.0;
  std::string datum = "gaussian:1,1";
  resolve->add_option("--lambda", lam_re, "real part of lambda")->capture_default_str();
  resolve->add_option("--lambda-im", lam_im, "imaginary part of lambda")->capture_default_str();
  resolve->add_option("--datum", datum, "gaussian:sigma,amp[,cx,cy] or field file")->capture_default_str();

  auto* semigroup = app.add_subcommand("semigroup", "apply the heat semigroup to a datum");
  common(semigroup);
  contour(semigroup);
  double t = 1.0;
  bool full = false;
  semigroup->add_option("--t", t, "time")->capture_default_str();
  semigroup->add_option("--datum", datum, "gaussian:sigma,amp[,cx,cy] or field file")->capture_default_str();
  semigroup->add_flag("--full", full, "keep the growing eigenmode instead of projecting it out");

  auto* simulate = app.add_subcommand("simulate", "solve the convection-diffusion equation");
  auto& sb = *common(simulate);
  sb.add(simulate, "--gamma", "gamma", s.gamma, "power in |u|^gamma");
  sb.add(simulate, "--ax", "ax", s.ax, "drift x component");
  sb.add(simulate, "--ay", "ay", s.ay, "drift y component");
  sb.add(simulate, "--T", "T", s.T, "final time");
  sb.add(simulate, "--dt", "dt", s.dt, "time step");
  sb.add(simulate, "--tol", "tol", s.tol, "Picard tolerance");
  std::string u0 = "gaussian:1,1";
  bool projected = false;
  double norm = 0.0;
  int save_every = 10;
  simulate->add_option("--u0", u0, "gaussian:sigma,amp[,cx,cy] or field file")->capture_default_str();
  simulate->add_flag("--projected", projected, "solve the projected problem with restarts");
  simulate->add_option("--norm", norm, "rescale u0 to this H1_alpha proxy norm (0: keep)");
  simulate->add_option("--save-every", save_every, "snapshot stride in steps")->capture_default_str();

  auto* decay = app.add_subcommand("decay", "fit decay rates and write report.csv");
  auto& db = *common(decay);
  contour(decay);
  db.add(decay, "--gamma", "gamma", s.gamma, "power in |u|^gamma");
  db.add(decay, "--ax", "ax", s.ax, "drift x component");
  db.add(decay, "--ay", "ay", s.ay, "drift y component");
  db.add(decay, "--dt", "dt", s.dt, "time step for nonlinear runs");
  db.add(decay, "--tol", "tol", s.tol, "Picard tolerance");
  DecayArgs da;
  decay->add_option("--kind", da.kinds, "semigroup, gradient, nonlinear, rho, lemma42")->capture_default_str();
  decay->add_option("--p", da.p, "target exponent");
  decay->add_option("--q", da.q, "datum exponent");
  decay->add_option("--h1", da.h1, "nonlinear L^h1 exponent")->capture_default_str();
  decay->add_option("--h2", da.h2, "nonlinear gradient exponent")->capture_default_str();
  decay->add_option("--tmax", da.tmax, "last fit time")->capture_default_str();
  decay->add_option("--points", da.points, "number of fit times")->capture_default_str();
  decay->add_option("--sigma", da.sigma, "Gaussian width")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  std::vector<int> only;
  verify->add_option("--only", only, "run only these checks");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) {
      const Config cfg = Config::load(config_path);
      for (auto& f : bind[sub].apply) f(cfg);
    }
    if (sub == spectral) return cmd_spectral(s, dim);
    if (sub == resolve) return cmd_resolve(s, lam_re, lam_im, datum, out);
    if (sub == semigroup) return cmd_semigroup(s, t, full, datum, out);
    if (sub == simulate) return cmd_simulate(s, u0, projected, norm, save_every, out);
    if (sub == decay) return cmd_decay(s, da, out);
    if (sub == verify) return cmd_verify(only);
  } catch (const HorizonTooLargeError& e) {
    std::cerr << "error: " << e.what() << " (ratio " << e.ratio << "); try a shorter T\n";
    return 2;
  } catch (const DataTooLargeError& e) {
    std::cerr << "error: " << e.what() << " (ratio " << e.ratio << "); try smaller data\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
