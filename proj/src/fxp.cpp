#include <sic/fxp.hpp>

#include <cmath>
#include <sstream>

namespace sic {

namespace {

void require_same(const FxpFormat& a, const FxpFormat& b, const char* op)
{
    if (a != b) {
        throw FxpFormatMismatch(std::string(op) + ": operand formats differ (" + a.to_string() + " vs " +
                                b.to_string() + ")");
    }
}

FxpReal with_flags(FxpReal r, bool inherited)
{
    r.overflow = r.overflow || inherited;
    return r;
}

} // namespace

FxpFormat FxpFormat::make(int total_bits, int frac_bits)
{
    FxpFormat f{total_bits, frac_bits};
    f.validate();
    return f;
}

FxpFormat FxpFormat::with_integer_bits(int total_bits, int integer_bits)
{
    return make(total_bits, total_bits - integer_bits);
}

void FxpFormat::validate() const
{
    if (total_bits < 2 || total_bits > 32) {
        throw ConfigError("fixed-point total_bits must be in [2, 32], got " + std::to_string(total_bits));
    }
    if (frac_bits < 0 || frac_bits >= total_bits) {
        throw ConfigError("fixed-point frac_bits must be in [0, total_bits), got " + std::to_string(frac_bits) +
                          " for total_bits " + std::to_string(total_bits));
    }
}

double FxpFormat::lsb() const { return std::ldexp(1.0, -frac_bits); }

std::string FxpFormat::to_string() const
{
    std::ostringstream os;
    os << "Q" << total_bits << "." << frac_bits;
    return os.str();
}

double FxpReal::value() const { return std::ldexp(static_cast<double>(raw), -fmt.frac_bits); }

wide_int round_shift(wide_int v, int shift)
{
    if (shift <= 0) {
        return v;
    }
    const wide_int one = 1;
    const wide_int q = v >> shift; // floor
    const wide_int r = v - (q << shift);
    const wide_int half = one << (shift - 1);
    if (r > half || (r == half && (q & 1) != 0)) {
        return q + 1;
    }
    return q;
}

FxpReal saturate(wide_int raw, FxpFormat fmt)
{
    FxpReal r;
    r.fmt = fmt;
    if (raw > fmt.max_raw()) {
        r.raw = fmt.max_raw();
        r.overflow = true;
    } else if (raw < fmt.min_raw()) {
        r.raw = fmt.min_raw();
        r.overflow = true;
    } else {
        r.raw = static_cast<std::int64_t>(raw);
    }
    return r;
}

FxpReal quantize(double x, FxpFormat fmt)
{
    FxpReal r;
    r.fmt = fmt;
    if (std::isnan(x)) {
        r.overflow = true;
        return r;
    }
    // Default floating-point environment rounds to nearest, ties to even.
    const double scaled = std::nearbyint(std::ldexp(x, fmt.frac_bits));
    if (scaled > static_cast<double>(fmt.max_raw())) {
        r.raw = fmt.max_raw();
        r.overflow = true;
    } else if (scaled < static_cast<double>(fmt.min_raw())) {
        r.raw = fmt.min_raw();
        r.overflow = true;
    } else {
        r.raw = static_cast<std::int64_t>(scaled);
    }
    return r;
}

FxpComplex quantize(std::complex<double> x, FxpFormat fmt) { return {quantize(x.real(), fmt), quantize(x.imag(), fmt)}; }

std::vector<FxpComplex> quantize(std::span<const std::complex<double>> xs, FxpFormat fmt)
{
    std::vector<FxpComplex> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        out.push_back(quantize(x, fmt));
    }
    return out;
}

FxpReal fxp_add(const FxpReal& a, const FxpReal& b, OpCounter* ops)
{
    require_same(a.fmt, b.fmt, "fxp_add");
    if (ops) {
        ++ops->add;
    }
    return with_flags(saturate(wide_int{a.raw} + b.raw, a.fmt), a.overflow || b.overflow);
}

FxpReal fxp_sub(const FxpReal& a, const FxpReal& b, OpCounter* ops)
{
    require_same(a.fmt, b.fmt, "fxp_sub");
    if (ops) {
        ++ops->add;
    }
    return with_flags(saturate(wide_int{a.raw} - b.raw, a.fmt), a.overflow || b.overflow);
}

FxpReal fxp_mul(const FxpReal& a, const FxpReal& b, OpCounter* ops)
{
    require_same(a.fmt, b.fmt, "fxp_mul");
    if (ops) {
        ++ops->mul;
    }
    const wide_int prod = wide_int{a.raw} * b.raw;
    return with_flags(saturate(round_shift(prod, a.fmt.frac_bits), a.fmt), a.overflow || b.overflow);
}

FxpReal fxp_shift(const FxpReal& a, int shift)
{
    if (shift >= 0) {
        return with_flags(saturate(wide_int{a.raw} << shift, a.fmt), a.overflow);
    }
    return with_flags(saturate(round_shift(a.raw, -shift), a.fmt), a.overflow);
}

FxpReal fxp_relu(const FxpReal& a)
{
    FxpReal r = a;
    if (r.raw < 0) {
        r.raw = 0;
    }
    return r;
}

FxpComplex cadd(const FxpComplex& a, const FxpComplex& b, OpCounter* ops)
{
    return {fxp_add(a.re, b.re, ops), fxp_add(a.im, b.im, ops)};
}

FxpComplex conj(const FxpComplex& a)
{
    // Negating min_raw saturates to max_raw.
    return {a.re, with_flags(saturate(-wide_int{a.im.raw}, a.im.fmt), a.im.overflow)};
}

WideComplex cmul3_exact(const FxpComplex& x, const FxpComplex& y, OpCounter* ops)
{
    require_same(x.fmt(), y.fmt(), "cmul3");
    require_same(x.re.fmt, x.im.fmt, "cmul3");
    require_same(y.re.fmt, y.im.fmt, "cmul3");
    const wide_int a = x.re.raw, b = x.im.raw, c = y.re.raw, d = y.im.raw;
    const wide_int s1 = a * c;
    const wide_int s2 = b * d;
    const wide_int s3 = (a + b) * (c + d);
    if (ops) {
        ops->mul += 3;
        ops->add += 5;
    }
    return {s1 - s2, s3 - s1 - s2, 2 * x.fmt().frac_bits};
}

FxpComplex cmul3(const FxpComplex& x, const FxpComplex& y, OpCounter* ops)
{
    const WideComplex w = cmul3_exact(x, y, ops);
    const FxpFormat fmt = x.fmt();
    const bool inherited = x.overflow() || y.overflow();
    return {with_flags(saturate(round_shift(w.re, fmt.frac_bits), fmt), inherited),
            with_flags(saturate(round_shift(w.im, fmt.frac_bits), fmt), inherited)};
}

FxpReal sum_sequential(std::span<const FxpReal> terms, OpCounter* ops)
{
    if (terms.empty()) {
        throw ConfigError("sum_sequential: empty reduction");
    }
    FxpReal acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) {
        acc = fxp_add(acc, terms[i], ops);
    }
    return acc;
}

FxpComplex sum_sequential(std::span<const FxpComplex> terms, OpCounter* ops)
{
    if (terms.empty()) {
        throw ConfigError("sum_sequential: empty reduction");
    }
    FxpComplex acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) {
        acc = cadd(acc, terms[i], ops);
    }
    return acc;
}

namespace {

template <class T, class Add>
T tree_reduce(std::span<const T> terms, Add add)
{
    if (terms.empty()) {
        throw ConfigError("tree_sum: empty reduction");
    }
    std::vector<T> level(terms.begin(), terms.end());
    while (level.size() > 1) {
        std::vector<T> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            next.push_back(add(level[i], level[i + 1]));
        }
        if (level.size() % 2 == 1) {
            next.push_back(level.back());
        }
        level = std::move(next);
    }
    return level.front();
}

} // namespace

FxpReal tree_sum(std::span<const FxpReal> terms, OpCounter* ops)
{
    return tree_reduce(terms, [ops](const FxpReal& a, const FxpReal& b) { return fxp_add(a, b, ops); });
}

FxpComplex tree_sum(std::span<const FxpComplex> terms, OpCounter* ops)
{
    return tree_reduce(terms, [ops](const FxpComplex& a, const FxpComplex& b) { return cadd(a, b, ops); });
}

void WideAccumulator::mac(const FxpReal& a, const FxpReal& b)
{
    require_same(a.fmt, fmt_, "WideAccumulator::mac");
    require_same(b.fmt, fmt_, "WideAccumulator::mac");
    acc_ += wide_int{a.raw} * b.raw;
}

void WideAccumulator::add(const FxpReal& a)
{
    require_same(a.fmt, fmt_, "WideAccumulator::add");
    acc_ += wide_int{a.raw} << fmt_.frac_bits;
}

FxpReal WideAccumulator::result() const { return saturate(round_shift(acc_, fmt_.frac_bits), fmt_); }

} // namespace sic
