#pragma once

// Floating-point complex helpers that tally real operations. They back the
// instrumented reference evaluators used to check the closed-form complexity
// expressions.

#include <sic/fxp.hpp>

#include <complex>

namespace sic::counted {

/// (a+jb)(c+jd) via s1 = ac, s2 = bd, s3 = (a+b)(c+d): 3 multiplications, 5 additions.
inline std::complex<double> cmul3(std::complex<double> x, std::complex<double> y, OpCounter& ops)
{
    const double a = x.real(), b = x.imag(), c = y.real(), d = y.imag();
    const double s1 = a * c;
    const double s2 = b * d;
    const double s3 = (a + b) * (c + d);
    ops.mul += 3;
    ops.add += 5;
    return {s1 - s2, s3 - s1 - s2};
}

inline std::complex<double> cadd(std::complex<double> x, std::complex<double> y, OpCounter& ops)
{
    ops.add += 2;
    return x + y;
}

inline double mul(double a, double b, OpCounter& ops)
{
    ++ops.mul;
    return a * b;
}

inline double add(double a, double b, OpCounter& ops)
{
    ++ops.add;
    return a + b;
}

/// ReLU is costed as one addition (a comparison against zero).
inline double relu(double a, OpCounter& ops)
{
    ++ops.add;
    return a > 0.0 ? a : 0.0;
}

} // namespace sic::counted
