#pragma once

#include <complex>
#include <stdexcept>

namespace pideq {

using cplx = std::complex<double>;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct BranchError : std::domain_error {
  using std::domain_error::domain_error;
};

constexpr double kPi = 3.141592653589793238462643383279502884;

// Euler-Mascheroni constant.
double euler_gamma();

// Modified Bessel functions of the second kind, orders 0 and 1.
double bessel_k0(double x);
double bessel_k1(double x);

// Principal branch, arg z in (-pi, pi). Throws BranchError on (-inf, 0].
cplx bessel_k0_complex(cplx z);
cplx bessel_k1_complex(cplx z);

// Modified Bessel functions of the first kind (power series, entire).
cplx bessel_i0_complex(cplx z);
cplx bessel_i1_complex(cplx z);

}  // namespace pideq
