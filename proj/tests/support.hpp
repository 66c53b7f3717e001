#pragma once

#include <sic/fxp.hpp>
#include <sic/signal.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace test {

using big = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;
using cd = std::complex<double>;

inline big to_big(sic::wide_int v)
{
    const bool neg = v < 0;
    const auto u = neg ? static_cast<unsigned __int128>(0) - static_cast<unsigned __int128>(v)
                       : static_cast<unsigned __int128>(v);
    big r = static_cast<std::uint64_t>(u >> 64);
    r <<= 64;
    r += static_cast<std::uint64_t>(u);
    return neg ? big(-r) : r;
}

inline rational pow2(int e)
{
    big one = 1;
    return e >= 0 ? rational(big(one << e)) : rational(big(1), big(one << -e));
}

inline rational exact(const sic::FxpReal& v) { return rational(big(v.raw)) * pow2(-v.fmt.frac_bits); }

/// Exact value of a double (every finite double is a dyadic rational).
inline rational exact(double v)
{
    int e = 0;
    const double m = std::frexp(v, &e);
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    return rational(big(mant)) * pow2(e - 53);
}

/// Round-half-even of a rational to an integer (oracle for the library's rounding).
inline big round_half_even(const rational& r)
{
    const big num = boost::multiprecision::numerator(r);
    const big den = boost::multiprecision::denominator(r);
    big q = num / den;
    big rem = num % den;
    if (rem < 0) { // floor division
        q -= 1;
        rem += den;
    }
    const big twice = 2 * rem;
    if (twice > den || (twice == den && (q & 1) != 0)) {
        q += 1;
    }
    return q;
}

inline big clamp(const big& v, const sic::FxpFormat& f)
{
    if (v > f.max_raw()) {
        return f.max_raw();
    }
    if (v < f.min_raw()) {
        return f.min_raw();
    }
    return v;
}

inline sic::FxpReal raw(std::int64_t r, sic::FxpFormat f) { return sic::FxpReal{r, f, false}; }

inline sic::FxpReal random_fxp(std::mt19937_64& rng, sic::FxpFormat f)
{
    std::uniform_int_distribution<std::int64_t> d(f.min_raw(), f.max_raw());
    return raw(d(rng), f);
}

inline sic::FxpComplex random_cfxp(std::mt19937_64& rng, sic::FxpFormat f)
{
    return {random_fxp(rng, f), random_fxp(rng, f)};
}

inline cd random_cd(std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale / std::sqrt(2.0));
    return {g(rng), g(rng)};
}

inline sic::ComplexSeq random_seq(std::size_t n, std::uint64_t seed, double scale = 1.0)
{
    std::mt19937_64 rng(seed);
    sic::ComplexSeq s;
    s.sample_rate_hz = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        s.samples.push_back(random_cd(rng, scale));
    }
    return s;
}

} // namespace test
