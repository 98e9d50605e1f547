#pragma once

#include <vector>

#include "pideq/special_functions.hpp"

namespace pideq {

struct ContourError : std::domain_error {
  using std::domain_error::domain_error;
};

// Gamma_1 u Gamma_2 u Gamma_3: rays Im lambda = -/+ epsilon running to
// Re lambda = -S, joined by the right half circle of radius epsilon.
// Zero fields are filled in by resolve().
struct ContourSpec {
  double epsilon = 0.0;   // 0: min(E/2, 1/t)
  double truncation = 0.0;  // 0: max(50/t, 2E)
  int nodes_ray = 0;      // per ray; 0: panel count chosen from t and epsilon
  int nodes_arc = 48;

  ContourSpec resolve(double t, double E) const;
};

// Quadrature for a closed counterclockwise contour: oint f dlambda ~ sum w f(lambda).
struct ContourNodes {
  std::vector<cplx> lambda;
  std::vector<cplx> weight;
  std::size_t size() const { return lambda.size(); }
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w);

ContourNodes keyhole_contour(double t, double E, const ContourSpec& spec);

// Weideman-Trefethen hyperbola for e^{t lambda}; 2N+1 nodes. Its vertex sits
// at 0.0785 mu with mu = 4.4921 N / t.
ContourNodes hyperbolic_contour(double t, int N);
double hyperbolic_vertex(double t, int N);

}  // namespace pideq
