#include "pideq/fields.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace pideq {

Grid::Grid(double L_, int n_, bool offset_) : L(L_), n(n_), offset(offset_) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("Grid: L must be positive");
  if (n < 16 || (n & (n - 1)) != 0) throw DomainError("Grid: n must be a power of two >= 16");
}

Field::Field(const Grid& g, Domain d) : grid(g), values(Values::Zero(g.n, g.n)), domain(d) {}

Field::Field(const Grid& g, Values v, Domain d) : grid(g), values(std::move(v)), domain(d) {
  if (values.rows() != g.n || values.cols() != g.n) throw ShapeError("Field: size does not match grid");
}

void check_compatible(const Field& a, const Field& b) {
  if (a.grid != b.grid) throw ShapeError("fields live on different grids");
  if (a.domain != b.domain) throw ShapeError("fields live in different domains");
}

Field& Field::operator+=(const Field& o) {
  check_compatible(*this, o);
  values += o.values;
  return *this;
}

Field& Field::operator-=(const Field& o) {
  check_compatible(*this, o);
  values -= o.values;
  return *this;
}

bool Field::all_finite() const { return values.isFinite().all(); }

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx s, Field a) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }

double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 64) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t m = n / 2;
  return pairwise_sum(a, m) + pairwise_sum(a + m, n - m);
}

cplx pairwise_sum(const cplx* a, std::size_t n) {
  if (n <= 64) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t m = n / 2;
  return pairwise_sum(a, m) + pairwise_sum(a + m, n - m);
}

namespace {

struct GridKey {
  double L;
  int n;
  bool offset;
  bool operator<(const GridKey& o) const {
    return std::tie(L, n, offset) < std::tie(o.L, o.n, o.offset);
  }
};

std::mutex g_cache_mutex;

struct Plans {
  fftw_plan fwd = nullptr, bwd = nullptr;
};

const Plans& plans_for(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto* a = fftw_alloc_complex(std::size_t(n) * n);
  auto* b = fftw_alloc_complex(std::size_t(n) * n);
  Plans p;
  p.fwd = fftw_plan_dft_2d(n, n, a, b, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_2d(n, n, a, b, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(a);
  fftw_free(b);
  return cache.emplace(n, p).first->second;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

double freq_index(int k, int n) { return k < n / 2 ? k : k - n; }

}  // namespace

const SpectralData& spectral_data(const Grid& g) {
  static std::map<GridKey, std::unique_ptr<SpectralData>> cache;
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = cache.find({g.L, g.n, g.offset});
    if (it != cache.end()) return *it->second;
  }
  auto sd = std::make_unique<SpectralData>();
  const int n = g.n;
  const double dk = kPi / g.L;
  const double x0 = g.x(0);
  sd->grid = g;
  sd->kx.resize(n, n);
  sd->ky.resize(n, n);
  sd->nu.resize(n, n);
  sd->mask.resize(n, n);
  sd->phase.resize(n, n);
  sd->cls.assign(std::size_t(n) * n, -1);
  const int half = n / 2;
  std::vector<int> lookup(2 * half * half + 1, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = freq_index(i, n), b = freq_index(j, n);
      sd->kx(i, j) = dk * a;
      sd->ky(i, j) = dk * b;
      sd->nu(i, j) = dk * dk * (a * a + b * b);
      const bool nyq = (i == half) || (j == half);
      sd->mask(i, j) = nyq ? 0.0 : 1.0;
      sd->phase(i, j) = std::polar(1.0, -dk * (a + b) * x0);
      if (!nyq) {
        const int r2 = int(a * a + b * b);
        if (lookup[r2] < 0) {
          lookup[r2] = int(sd->class_nu.size());
          sd->class_nu.push_back(dk * dk * r2);
          sd->class_count.push_back(0.0);
        }
        sd->cls[std::size_t(i) * n + j] = lookup[r2];
        sd->class_count[lookup[r2]] += 1.0;
      }
    }
  }
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  auto& slot = cache[{g.L, g.n, g.offset}];
  if (!slot) slot = std::move(sd);
  return *slot;
}

Eigen::VectorXcd class_sums(const Field& F) {
  const auto& sd = spectral_data(F.grid);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(Eigen::Index(sd.class_nu.size()));
  const cplx* v = F.values.data();
  const std::size_t N = sd.cls.size();
  for (std::size_t k = 0; k < N; ++k)
    if (sd.cls[k] >= 0) out[sd.cls[k]] += v[k];
  return out;
}

Field class_scatter(const Grid& g, const Eigen::VectorXcd& per_class) {
  const auto& sd = spectral_data(g);
  Field out(g, Domain::frequency);
  cplx* v = out.values.data();
  const std::size_t N = sd.cls.size();
  for (std::size_t k = 0; k < N; ++k)
    if (sd.cls[k] >= 0) v[k] = per_class[sd.cls[k]];
  return out;
}

double lp_norm(const Field& f, double p) {
  if (std::isinf(p) && p > 0) return linf_norm(f);
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
  RealValues a = f.values.abs();
  if (p == 2.0)
    a = a.square();
  else if (p != 1.0)
    a = a.pow(p);
  const double s = pairwise_sum(a.data(), std::size_t(a.size())) * f.cell();
  return std::pow(s, 1.0 / p);
}

double linf_norm(const Field& f) { return f.values.abs().maxCoeff(); }

Field fourier(const Field& f) {
  if (f.domain != Domain::space) throw ShapeError("fourier: expects a space-domain field");
  const auto& sd = spectral_data(f.grid);
  Field out(f.grid, Domain::frequency);
  Values in = f.values;
  fftw_execute_dft(plans_for(f.grid.n).fwd, as_fftw(in.data()), as_fftw(out.values.data()));
  const double h2 = f.grid.h() * f.grid.h();
  out.values *= sd.phase * h2;
  return out;
}

Field inverse_fourier(const Field& F) {
  if (F.domain != Domain::frequency) throw ShapeError("inverse_fourier: expects a frequency-domain field");
  const auto& sd = spectral_data(F.grid);
  Field out(F.grid, Domain::space);
  const double n2 = double(F.grid.n) * F.grid.n;
  const double h2 = F.grid.h() * F.grid.h();
  Values in = F.values * sd.phase.conjugate() / (n2 * h2);
  fftw_execute_dft(plans_for(F.grid.n).bwd, as_fftw(in.data()), as_fftw(out.values.data()));
  return out;
}

Field heat_free(const Field& f, double t) {
  if (!(t >= 0.0)) throw DomainError("heat_free: t must be >= 0");
  if (t == 0.0) return f;
  const auto& sd = spectral_data(f.grid);
  if (f.domain == Domain::frequency) {
    Field out = f;
    out.values *= (-t * sd.nu).exp();
    return out;
  }
  Field F = fourier(f);
  F.values *= (-t * sd.nu).exp();
  return inverse_fourier(F);
}

std::pair<Field, Field> gradient(const Field& f) {
  const auto& sd = spectral_data(f.grid);
  const Field F = f.domain == Domain::space ? fourier(f) : f;
  const cplx I(0.0, 1.0);
  Field gx(f.grid, Values(I * F.values * (sd.kx * sd.mask)), Domain::frequency);
  Field gy(f.grid, Values(I * F.values * (sd.ky * sd.mask)), Domain::frequency);
  if (f.domain == Domain::frequency) return {gx, gy};
  return {inverse_fourier(gx), inverse_fourier(gy)};
}

cplx inner_product(const Field& f, const Field& g) {
  check_compatible(f, g);
  Values prod = f.values * g.values.conjugate();
  return pairwise_sum(prod.data(), std::size_t(prod.size())) * f.cell();
}

cplx value_at_origin(const Field& F) {
  if (F.domain != Domain::frequency) throw ShapeError("value_at_origin: expects frequency data");
  const auto& sd = spectral_data(F.grid);
  Values m = F.values * sd.mask;
  return pairwise_sum(m.data(), std::size_t(m.size())) * F.grid.w();
}

void write_field_binary(const Field& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  const double L = f.grid.L;
  const std::int32_t n = f.grid.n;
  const std::uint8_t off = f.grid.offset ? 1 : 0;
  os.write(reinterpret_cast<const char*>(&L), sizeof L);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&off), sizeof off);
  std::vector<float> buf(2 * std::size_t(n) * n);
  const cplx* v = f.values.data();
  for (std::size_t k = 0; k < std::size_t(n) * n; ++k) {
    buf[2 * k] = float(v[k].real());
    buf[2 * k + 1] = float(v[k].imag());
  }
  os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
  if (!os) throw std::runtime_error("write failed: " + path);
}

Field read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  double L;
  std::int32_t n;
  std::uint8_t off;
  is.read(reinterpret_cast<char*>(&L), sizeof L);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&off), sizeof off);
  if (!is) throw std::runtime_error("truncated field header: " + path);
  Grid g(L, n, off != 0);
  std::vector<float> buf(2 * std::size_t(n) * n);
  is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
  if (!is) throw std::runtime_error("truncated field data: " + path);
  Field f(g);
  cplx* v = f.values.data();
  for (std::size_t k = 0; k < std::size_t(n) * n; ++k) v[k] = cplx(buf[2 * k], buf[2 * k + 1]);
  return f;
}

void write_field_csv(const Field& f, std::ostream& os) {
  const bool freq = f.domain == Domain::frequency;
  os << (freq ? "kx,ky,re,im\n" : "x,y,re,im\n") << std::scientific << std::setprecision(16);
  const SpectralData* sd = freq ? &spectral_data(f.grid) : nullptr;
  for (int i = 0; i < f.grid.n; ++i)
    for (int j = 0; j < f.grid.n; ++j) {
      const double a = freq ? sd->kx(i, j) : f.grid.x(i), b = freq ? sd->ky(i, j) : f.grid.x(j);
      os << a << ',' << b << ',' << f(i, j).real() << ',' << f(i, j).imag() << '\n';
    }
}

}  // namespace pideq
