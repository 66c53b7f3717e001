#pragma once

// Linear (FIR) self-interference canceller: y_hat[n] = sum_l h[l] x[n-l].

#include <sic/fxp.hpp>
#include <sic/signal.hpp>

#include <span>
#include <vector>

namespace sic {

struct LinModel
{
    std::vector<cd> taps;

    int L() const { return static_cast<int>(taps.size()); }
    void validate() const;
};

/// Canceller output. Samples before `first_valid` lack a full input window;
/// they are zero and must be excluded from any metric.
struct Reconstruction
{
    ComplexSeq signal;
    std::size_t first_valid = 0;
};

/// One-shot least squares over n >= L-1 of sum |y[n] - sum_l h[l] x[n-l]|^2.
/// Requires x.size() == y.size() >= 4L.
LinModel fit_linear(const ComplexSeq& x, const ComplexSeq& y, int L);

Reconstruction apply_linear(const LinModel& m, const ComplexSeq& x);

/// Instrumented reference evaluator using the three-multiplier complex product.
/// Adds the per-sample operation counts of every valid output to `ops`.
Reconstruction apply_linear_counted(const LinModel& m, const ComplexSeq& x, OpCounter& ops);

/// Fixed-point FIR for one output. `window[l]` holds x[n-l]. Tap l is accumulated
/// by lane (l mod lanes) in ascending l; lane sums are combined with tree_sum.
FxpComplex linear_fxp_at(std::span<const FxpComplex> taps_q, std::span<const FxpComplex> window, int lanes = 1);

/// Fixed-point FIR over a whole sequence of quantized inputs. Outputs for
/// n < L-1 are zero.
std::vector<FxpComplex> apply_linear_fxp(std::span<const FxpComplex> taps_q, std::span<const FxpComplex> xq,
                                         int lanes = 1);

} // namespace sic
