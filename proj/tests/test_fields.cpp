#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "pideq/fields.hpp"

using namespace pideq;

namespace {

Field gauss(const Grid& g, double s) {
  return sample(g, [s](double x, double y) { return cplx(std::exp(-(x * x + y * y) / (4 * s))); });
}

double rel(const Field& a, const Field& b) { return lp_norm(a - b, 2.0) / lp_norm(b, 2.0); }

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid(40.0, 100), DomainError);
  CHECK_THROWS_AS(Grid(40.0, 8), DomainError);
  CHECK_THROWS_AS(Grid(-1.0, 64), DomainError);
  const Grid g(10.0, 64);
  CHECK(g.h() == doctest::Approx(20.0 / 64));
  CHECK(g.x(0) == doctest::Approx(-10.0 + g.h() / 2));
  CHECK(Field(g).values.rows() == 64);
  CHECK_THROWS_AS(Field(g, Values::Zero(32, 32)), ShapeError);
  CHECK_THROWS_AS(Field(g) + Field(Grid(10.0, 32)), ShapeError);
  CHECK_THROWS_AS(Field(g) + Field(g, Domain::frequency), ShapeError);
}

TEST_CASE("lp_norm") {
  const Grid g(20.0, 512);
  Field one(g);
  one(3, 4) = 1.0;
  CHECK(lp_norm(one, 2.0) == doctest::Approx(g.h()).epsilon(1e-14));
  Field c(g, Values::Constant(g.n, g.n, 1.0));
  CHECK(lp_norm(c, INFINITY) == 1.0);
  const Field G = sample(g, [](double x, double y) { return cplx(std::exp(-(x * x + y * y) / 2)); });
  CHECK(std::abs(lp_norm(G, 2.0) - std::sqrt(kPi)) < 1e-6);
  CHECK_THROWS_AS(lp_norm(G, 0.5), DomainError);
}

TEST_CASE("fourier round trip, Plancherel and the Gaussian transform") {
  const Grid g(20.0, 256);
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  Field f(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) f(i, j) = cplx(nd(rng), nd(rng));
  CHECK(rel(inverse_fourier(fourier(f)), f) < 1e-12);
  CHECK(std::abs(lp_norm(fourier(f), 2.0) - lp_norm(f, 2.0)) < 1e-10 * lp_norm(f, 2.0));
  CHECK_THROWS_AS(fourier(fourier(f)), ShapeError);

  // e^{-|x|^2/2} has transform 2 pi e^{-|xi|^2/2}.
  const Field G = sample(g, [](double x, double y) { return cplx(std::exp(-(x * x + y * y) / 2)); });
  const Field H = fourier(G);
  const auto& sd = spectral_data(g);
  double err = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      err = std::max(err, std::abs(H(i, j) - 2 * kPi * std::exp(-sd.nu(i, j) / 2)));
  CHECK(err < 1e-10);
}

TEST_CASE("heat_free") {
  const Grid g(20.0, 256);
  const double s = 0.5, t = 0.7;
  const Field G = gauss(g, s);
  CHECK(rel(heat_free(G, 0.0), G) == 0.0);
  const Field want = (s / (s + t)) * gauss(g, s + t);
  CHECK(linf_norm(heat_free(G, t) - want) < 1e-8);
  CHECK(rel(heat_free(heat_free(G, 0.3), 0.4), heat_free(G, 0.7)) < 1e-12);
  CHECK_THROWS_AS(heat_free(G, -1.0), DomainError);
}

TEST_CASE("heat_free conserves mass and obeys the maximum principle") {
  const Grid g(20.0, 128);
  Field f(g);
  for (int i = 60; i < 70; ++i)
    for (int j = 58; j < 64; ++j) f(i, j) = 1.0 + 0.1 * (i - j);
  const double m0 = f.values.real().sum() * g.h() * g.h();
  double prev = linf_norm(f);
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    const Field u = heat_free(f, t);
    CHECK(std::abs(u.values.real().sum() * g.h() * g.h() - m0) < 1e-10 * m0);
    CHECK(linf_norm(u) <= prev + 1e-12);
    prev = linf_norm(u);
  }
}

TEST_CASE("L^4 decay of the free heat flow") {
  // For an L^1 Gaussian the L^2 -> L^4 rate -0.25 is only an upper bound;
  // the norm follows the faster L^1 -> L^4 rate -0.75.
  const Grid g(40.0, 256);
  const Field G = gauss(g, 0.5);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (double t = 1.0; t <= 50.0; t *= 1.4) {
    const double x = std::log(t), y = std::log(lp_norm(heat_free(G, t), 4.0) / lp_norm(G, 2.0));
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope <= -0.25 + 0.05);
  CHECK(slope == doctest::Approx(-0.75).epsilon(0.05));
}

TEST_CASE("gradient") {
  const Grid g(20.0, 256);
  Field c(g, Values::Constant(g.n, g.n, 3.0));
  auto [cx, cy] = gradient(c);
  CHECK(linf_norm(cx) < 1e-14);
  CHECK(linf_norm(cy) < 1e-14);

  const double k1 = 3 * kPi / g.L, k2 = -5 * kPi / g.L;
  const Field w = sample(g, [&](double x, double y) { return std::exp(cplx(0, k1 * x + k2 * y)); });
  auto [wx, wy] = gradient(w);
  CHECK(linf_norm(wx - cplx(0, k1) * w) < 1e-10);
  CHECK(linf_norm(wy - cplx(0, k2) * w) < 1e-10);

  const double s = 0.5;
  const Field G = gauss(g, s);
  auto [gx, gy] = gradient(G);
  const Field want = sample(g, [s](double x, double y) { return cplx(-x / (2 * s) * std::exp(-(x * x + y * y) / (4 * s))); });
  CHECK(gx.domain == Domain::space);
  CHECK(linf_norm(gx - want) < 1e-8);
  CHECK(linf_norm(gy - want) > 0.1);
}

TEST_CASE("inner_product") {
  const Grid g(10.0, 64);
  const Field a = gauss(g, 1.0);
  const Field b = sample(g, [](double x, double y) { return cplx(x, y * y); });
  CHECK(inner_product(a, a).real() == doctest::Approx(std::pow(lp_norm(a, 2.0), 2)).epsilon(1e-13));
  CHECK(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))) < 1e-12);
  Field p(g), q(g);
  p(1, 1) = 1.0;
  q(5, 5) = 1.0;
  CHECK(inner_product(p, q) == 0.0);
  // Parseval in the continuous-transform normalisation.
  CHECK(std::abs(inner_product(fourier(a), fourier(b)) - inner_product(a, b)) < 1e-10 * std::abs(inner_product(a, b)));
}

TEST_CASE("pairwise sums") {
  std::vector<double> v(100001, 0.1);
  CHECK(std::abs(pairwise_sum(v.data(), v.size()) - 10000.1) < 1e-9);
}

TEST_CASE("binary and csv output") {
  const Grid g(10.0, 32);
  const Field a = gauss(g, 1.0) + cplx(0, 0.5) * gauss(g, 2.0);
  const auto p = std::filesystem::temp_directory_path() / "pideq_field_test.bin";
  write_field_binary(a, p.string());
  const Field b = read_field_binary(p.string());
  std::filesystem::remove(p);
  CHECK(b.grid == g);
  CHECK(linf_norm(a - b) < 1e-6);
  CHECK_THROWS(read_field_binary("/nonexistent/field.bin"));

  std::ostringstream os;
  write_field_csv(a, os);
  const std::string s = os.str();
  CHECK(s.rfind("x,y,re,im\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 32 * 32);
  CHECK(s.find("\r") == std::string::npos);
  std::ostringstream fs;
  write_field_csv(fourier(a), fs);
  CHECK(fs.str().rfind("kx,ky,re,im\n", 0) == 0);
}
