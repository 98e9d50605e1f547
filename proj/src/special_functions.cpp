#include "pideq/special_functions.hpp"

#include <cmath>
#include <limits>

namespace pideq {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr double kEps = 1e-17;

template <class T>
double mag(const T& v) { return std::abs(v); }

// Ascending series, used for |z| <= 2.
template <class T>
void series_k01(const T& z, T& k0, T& k1) {
  const T t = z * z / 4.0;
  const T lz = std::log(z / 2.0);
  T term0 = 1.0;   // t^k / (k!)^2
  T term1 = 1.0;   // t^k / (k! (k+1)!)
  T i0 = 0.0, i1s = 0.0, s0 = 0.0, s1 = 0.0;
  double hk = 0.0;  // harmonic number H_k
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      term0 *= t / double(k * k);
      term1 *= t / double(k * (k + 1));
      hk += 1.0 / k;
    }
    const double hk1 = hk + 1.0 / (k + 1);
    i0 += term0;
    i1s += term1;
    s0 += hk * term0;
    s1 += (hk + hk1 - 2.0 * kEulerGamma) * term1;
    if (mag(term0) < kEps * mag(i0) && mag(term1) < kEps * mag(i1s)) break;
  }
  const T i1 = z / 2.0 * i1s;
  k0 = -(lz + kEulerGamma) * i0 + s0;
  k1 = 1.0 / z + i1 * lz - z / 4.0 * s1;
}

// Steed's CF2 in Temme's normalisation, order 0 and 1, Re z > 0.
template <class T>
void cf2_k01(const T& x, T& k0, T& k1) {
  T b = 2.0 * (1.0 + x);
  T d = 1.0 / b;
  T h = d, delh = d;
  T q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  T q = a1, c = a1;
  double a = -a1;
  T s = 1.0 + q * delh;
  for (int i = 2; i < 200000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / double(i);
    const T qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const T dels = q * delh;
    s += dels;
    if (mag(dels) < 1e-16 * mag(s)) break;
  }
  k0 = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
  k1 = k0 * (x + 0.5 - a1 * h) / x;
}

template <class T>
void k01(const T& z, T& k0, T& k1) {
  if (mag(z) <= 2.0)
    series_k01(z, k0, k1);
  else
    cf2_k01(z, k0, k1);
}

template <class T>
void i01(const T& z, T& i0, T& i1) {
  const T t = z * z / 4.0;
  T term0 = 1.0, term1 = 1.0;
  T s0 = 0.0, s1 = 0.0;
  for (int k = 0; k < 500; ++k) {
    if (k > 0) {
      term0 *= t / double(k * k);
      term1 *= t / double(k * (k + 1));
    }
    s0 += term0;
    s1 += term1;
    if (mag(term0) < kEps * mag(s0) && mag(term1) < kEps * mag(s1) && k > 2) break;
  }
  i0 = s0;
  i1 = z / 2.0 * s1;
}

void check_cut(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("bessel: non-finite argument");
  if (z.imag() == 0.0 && z.real() <= 0.0)
    throw BranchError("bessel: argument on the branch cut (-inf, 0]");
}

void k01_complex(cplx z, cplx& k0, cplx& k1) {
  check_cut(z);
  if (z.real() > 0.0 || std::abs(z) <= 2.0) {
    k01(z, k0, k1);
    return;
  }
  // Continuation from the right half plane: z = w e^{+-i pi}.
  const cplx w = -z;
  cplx kw0, kw1, iw0, iw1;
  k01(w, kw0, kw1);
  i01(w, iw0, iw1);
  const double m = z.imag() > 0.0 ? 1.0 : -1.0;
  const cplx ipi(0.0, kPi);
  k0 = kw0 - m * ipi * iw0;
  k1 = -kw1 - m * ipi * iw1;
}

}  // namespace

double euler_gamma() { return kEulerGamma; }

double bessel_k0(double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k0: x must be positive");
  double k0, k1;
  k01(x, k0, k1);
  return k0;
}

double bessel_k1(double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k1: x must be positive");
  double k0, k1;
  k01(x, k0, k1);
  return k1;
}

cplx bessel_k0_complex(cplx z) {
  cplx k0, k1;
  k01_complex(z, k0, k1);
  return k0;
}

cplx bessel_k1_complex(cplx z) {
  cplx k0, k1;
  k01_complex(z, k0, k1);
  return k1;
}

cplx bessel_i0_complex(cplx z) {
  cplx i0, i1;
  i01(z, i0, i1);
  return i0;
}

cplx bessel_i1_complex(cplx z) {
  cplx i0, i1;
  i01(z, i0, i1);
  return i1;
}

}  // namespace pideq
