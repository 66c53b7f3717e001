#pragma once

// Signed fixed-point arithmetic with saturation.
//
// Every datapath value (weights, biases, partial sums, basis functions) shares
// one FxpFormat: `total_bits` wide two's-complement with `frac_bits` fraction
// bits. Rounding is round-half-to-even; overflow saturates to the format's
// range and raises a sticky overflow flag on the result.

#include <sic/errors.hpp>

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sic {

using wide_int = __int128;

struct FxpFormat
{
    int total_bits = 16;
    int frac_bits = 12;

    /// Validated constructor: 2 <= total_bits <= 32, 0 <= frac_bits < total_bits.
    static FxpFormat make(int total_bits, int frac_bits);
    /// Format with `integer_bits` bits (sign included) left of the binary point.
    static FxpFormat with_integer_bits(int total_bits, int integer_bits);

    void validate() const;

    std::int64_t max_raw() const { return (std::int64_t{1} << (total_bits - 1)) - 1; }
    std::int64_t min_raw() const { return -(std::int64_t{1} << (total_bits - 1)); }
    double lsb() const;
    double max_value() const { return static_cast<double>(max_raw()) * lsb(); }
    double min_value() const { return static_cast<double>(min_raw()) * lsb(); }

    std::string to_string() const;

    bool operator==(const FxpFormat&) const = default;
};

/// Thrown when two operands of a binary operation carry different formats.
class FxpFormatMismatch : public ConfigError
{
public:
    explicit FxpFormatMismatch(const std::string& what) : ConfigError(what) {}
};

struct FxpReal
{
    std::int64_t raw = 0;
    FxpFormat fmt{};
    bool overflow = false; ///< sticky: set if this value or any operand saturated

    double value() const;

    /// Bit identity of the value; the overflow flag is diagnostic and not compared.
    friend bool operator==(const FxpReal& a, const FxpReal& b) { return a.raw == b.raw && a.fmt == b.fmt; }
};

struct FxpComplex
{
    FxpReal re{};
    FxpReal im{};

    std::complex<double> value() const { return {re.value(), im.value()}; }
    const FxpFormat& fmt() const { return re.fmt; }
    bool overflow() const { return re.overflow || im.overflow; }

    friend bool operator==(const FxpComplex& a, const FxpComplex& b) { return a.re == b.re && a.im == b.im; }
};

/// Exact (unrounded) complex value with `frac_bits` fraction bits.
struct WideComplex
{
    wide_int re = 0;
    wide_int im = 0;
    int frac_bits = 0;
};

/// Real-operation instrumentation. One counter per evaluation context; never shared.
struct OpCounter
{
    std::uint64_t mul = 0;
    std::uint64_t add = 0;

    void reset() { *this = {}; }
    bool operator==(const OpCounter&) const = default;
};

// ---------------------------------------------------------------------------
// Scalar primitives

/// Arithmetic shift right by `shift` bits with round-half-to-even (shift >= 0).
wide_int round_shift(wide_int v, int shift);

/// Clamp a raw integer (already scaled to `fmt`) into the representable range.
FxpReal saturate(wide_int raw, FxpFormat fmt);

FxpReal quantize(double x, FxpFormat fmt);
FxpComplex quantize(std::complex<double> x, FxpFormat fmt);
inline double dequantize(const FxpReal& v) { return v.value(); }
inline std::complex<double> dequantize(const FxpComplex& v) { return v.value(); }

FxpReal fxp_add(const FxpReal& a, const FxpReal& b, OpCounter* ops = nullptr);
FxpReal fxp_sub(const FxpReal& a, const FxpReal& b, OpCounter* ops = nullptr);
/// Product formed at double width, rounded once back to the operand format.
FxpReal fxp_mul(const FxpReal& a, const FxpReal& b, OpCounter* ops = nullptr);
/// Multiplication by 2^shift (either sign), rounded and saturated.
FxpReal fxp_shift(const FxpReal& a, int shift);
FxpReal fxp_relu(const FxpReal& a);

// ---------------------------------------------------------------------------
// Complex primitives

FxpComplex cadd(const FxpComplex& a, const FxpComplex& b, OpCounter* ops = nullptr);
FxpComplex conj(const FxpComplex& a);

/// Three-multiplier complex product before rounding:
///   s1 = ac, s2 = bd, s3 = (a+b)(c+d);  re = s1 - s2,  im = s3 - s1 - s2.
/// The pre-adders carry one guard bit and products are double width, so the
/// result is exact. Counts 3 multiplications and 5 additions.
WideComplex cmul3_exact(const FxpComplex& x, const FxpComplex& y, OpCounter* ops = nullptr);

/// cmul3_exact rounded once (half-to-even) to the operand format and saturated.
FxpComplex cmul3(const FxpComplex& x, const FxpComplex& y, OpCounter* ops = nullptr);

// ---------------------------------------------------------------------------
// Reductions. Saturating addition is not associative, so the order is part of
// the contract: `sum_sequential` adds left to right, `tree_sum` adds adjacent
// pairs level by level (0+1, 2+3, ...), an odd trailing element passing through.

FxpReal sum_sequential(std::span<const FxpReal> terms, OpCounter* ops = nullptr);
FxpComplex sum_sequential(std::span<const FxpComplex> terms, OpCounter* ops = nullptr);
FxpReal tree_sum(std::span<const FxpReal> terms, OpCounter* ops = nullptr);
FxpComplex tree_sum(std::span<const FxpComplex> terms, OpCounter* ops = nullptr);

/// Wide accumulator that keeps exact double-width products and rounds once at
/// the end. For float-reference comparisons only; the hardware datapath
/// saturates after every addition.
class WideAccumulator
{
public:
    explicit WideAccumulator(FxpFormat fmt) : fmt_(fmt) {}

    void mac(const FxpReal& a, const FxpReal& b);
    void add(const FxpReal& a);
    FxpReal result() const;

private:
    FxpFormat fmt_;
    wide_int acc_ = 0; ///< scaled by 2^(2*frac_bits)
};

std::vector<FxpComplex> quantize(std::span<const std::complex<double>> xs, FxpFormat fmt);

} // namespace sic
