#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pideq/special_functions.hpp"

namespace pideq {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Periodic box [-L, L]^2 with n points per axis. With offset on, nodes sit at
// cell centres x_j = -L + (j + 1/2) h, so the origin is never a node.
struct Grid {
  double L = 40.0;
  int n = 256;
  bool offset = true;

  Grid() = default;
  Grid(double L_, int n_, bool offset_ = true);

  double h() const { return 2.0 * L / n; }
  double x(int j) const { return -L + (j + (offset ? 0.5 : 0.0)) * h(); }
  // Spectral cell measure, (dxi / 2 pi)^2.
  double w() const { return 1.0 / (4.0 * L * L); }
  // Largest resolved wavenumber.
  double kmax() const { return kPi / h(); }

  bool operator==(const Grid& o) const { return L == o.L && n == o.n && offset == o.offset; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

using Values = Eigen::Array<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealValues = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Domain { space, frequency };

// Samples on a grid. Row index is x_1, column index is x_2. A frequency-domain
// field holds continuous-transform coefficients g^(xi) on the fftfreq lattice.
struct Field {
  Grid grid;
  Values values;
  Domain domain = Domain::space;

  Field() = default;
  explicit Field(const Grid& g, Domain d = Domain::space);
  Field(const Grid& g, Values v, Domain d = Domain::space);

  static Field zeros(const Grid& g, Domain d = Domain::space) { return Field(g, d); }

  int n() const { return grid.n; }
  cplx& operator()(int i, int j) { return values(i, j); }
  const cplx& operator()(int i, int j) const { return values(i, j); }
  double cell() const { return domain == Domain::space ? grid.h() * grid.h() : grid.w(); }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx s) { values *= s; return *this; }
  Field& operator*=(double s) { values *= s; return *this; }

  bool all_finite() const;
};

void check_compatible(const Field& a, const Field& b);

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);
Field operator*(double s, Field a);
Field operator*(Field a, double s);

// Sample a function of (x1, x2) on the grid.
template <class F>
Field sample(const Grid& g, F&& fn) {
  Field out(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) out(i, j) = fn(g.x(i), g.x(j));
  return out;
}

// Per-grid spectral tables. Masked modes exclude the Nyquist row and column;
// "classes" group masked modes by |xi|^2 (a^2 + b^2 on the integer lattice).
struct SpectralData {
  Grid grid;
  RealValues kx, ky, nu, mask;
  Values phase;  // e^{-i xi . x0}, x0 the first node
  std::vector<int> cls;  // per mode (row-major), -1 when masked
  std::vector<double> class_nu;
  std::vector<double> class_count;
};

const SpectralData& spectral_data(const Grid& g);

// Sum masked coefficients per |xi|^2 class.
Eigen::VectorXcd class_sums(const Field& F);
// Scatter per-class values onto masked modes (zero elsewhere).
Field class_scatter(const Grid& g, const Eigen::VectorXcd& per_class);

double lp_norm(const Field& f, double p);
double linf_norm(const Field& f);

Field fourier(const Field& f);
Field inverse_fourier(const Field& F);

Field heat_free(const Field& f, double t);
std::pair<Field, Field> gradient(const Field& f);

cplx inner_product(const Field& f, const Field& g);

// Band-limited value at the origin from frequency data (masked modes).
cplx value_at_origin(const Field& F);

// Deterministic pairwise summation.
double pairwise_sum(const double* a, std::size_t n);
cplx pairwise_sum(const cplx* a, std::size_t n);

// Binary container: double L, int32 n, uint8 offset, n*n complex64 row-major.
void write_field_binary(const Field& f, const std::string& path);
Field read_field_binary(const std::string& path);
void write_field_csv(const Field& f, std::ostream& os);

}  // namespace pideq
