#include "pideq/contour.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace pideq {

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) {
    std::vector<double> xs(m), ws(m);
    for (int i = 0; i < m; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (m + 0.5));
      double dp = 0.0;
      for (int it2 = 0; it2 < 100; ++it2) {
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= m; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = m * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      xs[i] = -z;
      ws[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    it = cache.emplace(m, std::make_pair(xs, ws)).first;
  }
  x = it->second.first;
  w = it->second.second;
}

ContourSpec ContourSpec::resolve(double t, double E) const {
  ContourSpec c = *this;
  if (c.epsilon <= 0.0) c.epsilon = std::min(0.5 * E, 1.0 / t);
  if (c.truncation <= 0.0) c.truncation = std::max(50.0 / t, 2.0 * E);
  return c;
}

ContourNodes keyhole_contour(double t, double E, const ContourSpec& spec) {
  if (!(t > 0.0)) throw DomainError("contour: t must be positive");
  const ContourSpec c = spec.resolve(t, E);
  if (!(c.epsilon > 0.0) || c.epsilon >= E) throw ContourError("contour: radius must satisfy 0 < epsilon < E");
  if (c.nodes_arc < 8) throw ContourError("contour: too few arc nodes");
  const double eps = c.epsilon, S = c.truncation;
  constexpr int order = 16;
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);

  // Panels on s in [0, S]: first width w0, geometric growth to reach S.
  const double w0 = std::min(2.0 * eps, S);
  int panels;
  if (c.nodes_ray > 0)
    panels = std::max(1, (c.nodes_ray + order - 1) / order);
  else
    panels = int(std::ceil(std::min(S, 12.0 / t) / w0)) + 12;
  double ratio = 1.0;
  if (panels * w0 < S) {
    double lo = 1.0, hi = 2.0;
    auto total = [&](double r) { return w0 * (std::pow(r, panels) - 1.0) / (r - 1.0); };
    while (total(hi) < S) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (lo + hi);
      (total(m) < S ? lo : hi) = m;
    }
    ratio = 0.5 * (lo + hi);
  }
  std::vector<double> edges{0.0};
  double width = panels * w0 >= S ? S / panels : w0;
  for (int p = 0; p < panels; ++p) {
    edges.push_back(p + 1 == panels ? S : edges.back() + width);
    width *= ratio;
  }

  ContourNodes out;
  const cplx I(0.0, 1.0);
  for (int p = 0; p < panels; ++p) {
    const double a = edges[p], b = edges[p + 1];
    for (int k = 0; k < order; ++k) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * gx[k];
      const double ws = 0.5 * (b - a) * gw[k];
      out.lambda.push_back(cplx(-s, -eps));
      out.weight.push_back(ws);
      out.lambda.push_back(cplx(-s, eps));
      out.weight.push_back(-ws);
    }
  }
  std::vector<double> ax, aw;
  gauss_legendre(c.nodes_arc, ax, aw);
  for (int k = 0; k < c.nodes_arc; ++k) {
    const double th = 0.5 * kPi * ax[k];
    const cplx lam = std::polar(eps, th);
    out.lambda.push_back(lam);
    out.weight.push_back(I * lam * (0.5 * kPi * aw[k]));
  }
  return out;
}

double hyperbolic_vertex(double t, int N) { return 0.0785 * 4.4921 * N / t; }

ContourNodes hyperbolic_contour(double t, int N) {
  if (!(t > 0.0)) throw DomainError("contour: t must be positive");
  if (N < 4) throw ContourError("contour: too few hyperbola nodes");
  const double a = 1.1721, hh = 1.0818 / N, mu = 4.4921 * N / t;
  const cplx I(0.0, 1.0);
  ContourNodes out;
  for (int k = -N; k <= N; ++k) {
    const double u = k * hh;
    out.lambda.push_back(mu * (1.0 + std::sin(I * u - a)));
    out.weight.push_back(hh * mu * I * std::cos(I * u - a));
  }
  return out;
}

}  // namespace pideq
