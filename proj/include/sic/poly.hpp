#pragma once

// Polynomial (parallel-Hammerstein) canceller:
//   y_hat[n] = sum_{p odd <= P} sum_{q=0..p} sum_{l=0..L-1} h_{p,q}[l] BF_{p,q}(x[n-l]),
//   BF_{p,q}(x) = x^q conj(x)^(p-q).
//
// Basis functions of one sample are stored in "slot" order: p ascending, then
// q ascending, so slot(p, q) = (p*p - 1)/4 + q. Coefficients use lexicographic
// (p, q, l) order: index = slot(p, q) * L + l.

#include <sic/fxp.hpp>
#include <sic/linear.hpp>
#include <sic/signal.hpp>

#include <optional>
#include <span>
#include <vector>

namespace sic {

struct BfIndex
{
    int p = 1;
    int q = 0;

    bool operator==(const BfIndex&) const = default;
};

/// Throws ConfigError unless P is odd and positive.
void check_order(int P);

/// Basis functions per sample: (P+1)(P+3)/4.
int bf_per_sample(int P);
/// N_BF = L (P+1)(P+3) / 4.
int n_bf(int P, int L);
inline int bf_slot(int p, int q) { return (p * p - 1) / 4 + q; }
/// All (p, q) pairs in slot order.
std::vector<BfIndex> bf_indices(int P);

/// Literal x^q conj(x)^(p-q) by repeated multiplication. Oracle for bf_dp.
template <class T, class Mul, class Conj>
T bf_direct(const T& x, int p, int q, Mul mul, Conj conj)
{
    if (p < 1 || p % 2 == 0 || q < 0 || q > p) {
        throw ConfigError("bf_direct: invalid index (p=" + std::to_string(p) + ", q=" + std::to_string(q) + ")");
    }
    const T xc = conj(x);
    std::optional<T> acc;
    for (int i = 0; i < q; ++i) {
        acc = acc ? mul(*acc, x) : x;
    }
    for (int i = 0; i < p - q; ++i) {
        acc = acc ? mul(*acc, xc) : xc;
    }
    return *acc;
}

inline cd bf_direct(cd x, int p, int q)
{
    return bf_direct(x, p, q, [](cd a, cd b) { return a * b; }, [](cd a) { return std::conj(a); });
}

struct BfDpCounts
{
    int recurrence = 0; ///< products x^2 * BF_{p-2,q-2}
    int precompute = 0; ///< the x^2 product itself (1 when P >= 3)
};

template <class T>
struct BfSet
{
    std::vector<T> bf; ///< slot order
    BfDpCounts mults;
};

/// Dynamic-programming evaluation of every BF_{p,q}(x), p <= P:
///   BF_{1,1} = x, BF_{1,0} = conj(x),
///   BF_{p,q} = x^2 BF_{p-2,q-2} for q = (p+1)/2..p,
///   BF_{p,p-q} = conj(BF_{p,q}) for the remaining q.
template <class T, class Mul, class Conj>
BfSet<T> bf_dp(const T& x, int P, Mul mul, Conj conj)
{
    check_order(P);
    BfSet<T> out;
    out.bf.resize(static_cast<std::size_t>(bf_per_sample(P)), x);
    out.bf[static_cast<std::size_t>(bf_slot(1, 0))] = conj(x);
    out.bf[static_cast<std::size_t>(bf_slot(1, 1))] = x;
    if (P < 3) {
        return out;
    }
    const T x2 = mul(x, x);
    out.mults.precompute = 1;
    for (int p = 3; p <= P; p += 2) {
        for (int q = (p + 1) / 2; q <= p; ++q) {
            out.bf[static_cast<std::size_t>(bf_slot(p, q))] =
                mul(x2, out.bf[static_cast<std::size_t>(bf_slot(p - 2, q - 2))]);
            ++out.mults.recurrence;
        }
        for (int q = 0; q <= (p - 1) / 2; ++q) {
            out.bf[static_cast<std::size_t>(bf_slot(p, q))] = conj(out.bf[static_cast<std::size_t>(bf_slot(p, p - q))]);
        }
    }
    return out;
}

inline BfSet<cd> bf_dp(cd x, int P)
{
    return bf_dp(x, P, [](cd a, cd b) { return a * b; }, [](cd a) { return std::conj(a); });
}

inline BfSet<FxpComplex> bf_dp(const FxpComplex& x, int P)
{
    return bf_dp(
        x, P, [](const FxpComplex& a, const FxpComplex& b) { return cmul3(a, b); },
        [](const FxpComplex& a) { return conj(a); });
}

/// Circular store of the basis functions of the previous L-1 samples:
/// (L-1)(P+1)(P+3)/4 entries. Fresh basis functions are pushed once per sample
/// after they have been consumed at delay 0.
template <class T>
class BfBuffer
{
public:
    BfBuffer(int P, int L, const T& zero)
        : per_(static_cast<std::size_t>(bf_per_sample(P))), rows_(static_cast<std::size_t>(L > 1 ? L - 1 : 0)),
          data_(per_ * rows_, zero)
    {}

    std::size_t capacity() const { return data_.size(); }

    void push(std::span<const T> fresh)
    {
        if (rows_ == 0) {
            return;
        }
        head_ = (head_ + 1) % rows_;
        std::copy(fresh.begin(), fresh.end(), data_.begin() + static_cast<std::ptrdiff_t>(head_ * per_));
    }

    /// Basis function `slot` of x[n-l], 1 <= l <= L-1.
    const T& at(int l, std::size_t slot) const
    {
        const std::size_t row = (head_ + rows_ - static_cast<std::size_t>(l - 1)) % rows_;
        return data_[row * per_ + slot];
    }

private:
    std::size_t per_;
    std::size_t rows_;
    std::vector<T> data_;
    std::size_t head_ = 0;
};

struct PolyModel
{
    int P = 1;
    int L = 1;
    std::vector<cd> coeffs; ///< lexicographic (p, q, l)

    std::size_t index(int p, int q, int l) const
    {
        return static_cast<std::size_t>(bf_slot(p, q)) * static_cast<std::size_t>(L) + static_cast<std::size_t>(l);
    }
    cd coeff(int p, int q, int l) const { return coeffs[index(p, q, l)]; }
    /// Throws ConfigError/DataError when P is even, L < 1 or the coefficient count is not N_BF.
    void validate() const;
};

/// Least-squares fit of y against BF_{p,q}(x[n-l]) over n >= L-1. When `active`
/// is non-empty only those (p, q) pairs are used as regressors and the other
/// coefficients are zero. Requires at least 4 N_BF samples.
PolyModel fit_poly(const ComplexSeq& x, const ComplexSeq& y, int P, int L, std::span<const BfIndex> active = {});

/// Canceller output using the circular basis-function buffer.
Reconstruction apply_poly(const PolyModel& m, const ComplexSeq& x);

/// Same sum, but every delayed sample's basis functions are recomputed.
Reconstruction apply_poly_recompute(const PolyModel& m, const ComplexSeq& x);

/// Instrumented evaluator. `ops` receives the coefficient MACs and the output
/// adds (3 N_BF mults and 7 N_BF - 2 adds per sample); `bf_ops`, when given,
/// receives the basis-function products (3 real mults, 5 real adds each).
Reconstruction apply_poly_counted(const PolyModel& m, const ComplexSeq& x, OpCounter& ops,
                                  OpCounter* bf_ops = nullptr);

// ---------------------------------------------------------------------------
// Fixed-point inference

/// Quantized polynomial canceller. The input is prescaled by 2^-input_shift and
/// each coefficient of order p by 2^(p * input_shift), which keeps the product
/// unchanged while balancing the dynamic range of basis functions and
/// coefficients.
struct PolyFxpModel
{
    int P = 1;
    int L = 1;
    FxpFormat fmt{};
    int input_shift = 0;
    std::vector<FxpComplex> coeffs; ///< lexicographic (p, q, l)
};

/// Integer bits (sign included) of the default polynomial datapath format.
inline constexpr int kPolyIntegerBits = 6;
/// Default format for a Q-bit datapath (integer bits capped at Q).
FxpFormat poly_default_format(int total_bits);

/// Picks the input prescale from `x_train` and quantizes the coefficients.
PolyFxpModel quantize_poly(const PolyModel& m, FxpFormat fmt, const ComplexSeq& x_train);
PolyFxpModel quantize_poly(const PolyModel& m, FxpFormat fmt, int input_shift);

FxpComplex quantize_poly_input(const PolyFxpModel& m, cd x);

/// Order in which the complex PEs visit the terms of one output: terms on
/// buffered basis functions (l = 1..L-1) first, then the fresh sample's terms
/// (l = 0), each group in coefficient order. Entry i is the coefficient index.
std::vector<std::size_t> poly_term_schedule(int P, int L);

/// One output sample of the fixed-point datapath. Term i of the schedule is
/// accumulated by complex PE (i mod n_cpe); PE sums are combined with tree_sum.
FxpComplex poly_fxp_at(const PolyFxpModel& m, std::span<const FxpComplex> fresh, const BfBuffer<FxpComplex>& buffer,
                       int n_cpe);

/// Fixed-point canceller over a sequence (outputs for n < L-1 are zero).
std::vector<FxpComplex> apply_poly_fxp(const PolyFxpModel& m, std::span<const FxpComplex> xq, int n_cpe = 1);

} // namespace sic
