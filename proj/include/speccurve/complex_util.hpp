// Small complex-arithmetic helpers shared across the library.
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace speccurve {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Principal square root (arg in (-pi/2, pi/2]).
inline cplx psqrt(cplx z) { return std::sqrt(z); }

/// Square root with nonnegative imaginary part; ties (real nonnegative
/// argument) resolve to the principal value.
inline cplx sqrt_upper(cplx z) {
    cplx s = std::sqrt(z);
    return (s.imag() < 0.0) ? -s : s;
}

/// Principal cube root (real part is always nonnegative).
inline cplx cbrt_principal(cplx z) {
    if (z == cplx(0.0)) return z;
    return std::exp(std::log(z) / 3.0);
}

/// Reduce the imaginary part modulo 2*pi into the band (-pi, pi].
inline cplx mod_2pi_band(cplx z) {
    double k = std::floor((z.imag() + pi) / (2.0 * pi));
    return {z.real(), z.imag() - 2.0 * pi * k};
}

inline double sqr(double x) { return x * x; }
inline cplx sqr(cplx x) { return x * x; }

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Quadrature or regularization failed to reach the requested accuracy.
struct AccuracyError : NumericalError {
    AccuracyError(const std::string& what, double achieved)
        : NumericalError(what), achieved_error(achieved) {}
    double achieved_error;
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace speccurve
