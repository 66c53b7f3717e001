#include <sic/linear.hpp>

#include <sic/counted.hpp>

#include "lsq.hpp"

#include <cmath>
#include <string>

namespace sic {

void LinModel::validate() const
{
    if (taps.empty()) {
        throw ConfigError("linear model needs at least one tap");
    }
    for (const auto& t : taps) {
        if (!std::isfinite(t.real()) || !std::isfinite(t.imag())) {
            throw DataError("linear model has a non-finite tap");
        }
    }
}

LinModel fit_linear(const ComplexSeq& x, const ComplexSeq& y, int L)
{
    if (L < 1) {
        throw ConfigError("fit_linear: L must be >= 1");
    }
    if (x.size() != y.size()) {
        throw DataError("fit_linear: x and y lengths differ (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    }
    if (x.size() < 4 * static_cast<std::size_t>(L)) {
        throw DataError("fit_linear: need at least 4L = " + std::to_string(4 * L) + " samples, got " +
                        std::to_string(x.size()));
    }

    detail::NormalEquations ne(L);
    constexpr std::size_t block = 4096;
    const std::size_t first = static_cast<std::size_t>(L - 1);
    for (std::size_t start = first; start < x.size(); start += block) {
        const std::size_t rows = std::min(block, x.size() - start);
        Eigen::MatrixXcd a(rows, L);
        Eigen::VectorXcd t(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t n = start + r;
            for (int l = 0; l < L; ++l) {
                a(r, l) = x[n - l];
            }
            t(r) = y[n];
        }
        ne.add_rows(a, t);
    }
    const auto sol = ne.solve("fit_linear");
    LinModel m;
    m.taps.assign(sol.coeffs.data(), sol.coeffs.data() + L);
    return m;
}

Reconstruction apply_linear(const LinModel& m, const ComplexSeq& x)
{
    m.validate();
    const std::size_t L = m.taps.size();
    if (x.size() < L) {
        throw DataError("apply_linear: input shorter than the filter");
    }
    Reconstruction out;
    out.signal.sample_rate_hz = x.sample_rate_hz;
    out.signal.samples.assign(x.size(), cd{});
    out.first_valid = L - 1;
    for (std::size_t n = L - 1; n < x.size(); ++n) {
        cd acc{};
        for (std::size_t l = 0; l < L; ++l) {
            acc += m.taps[l] * x[n - l];
        }
        out.signal[n] = acc;
    }
    return out;
}

Reconstruction apply_linear_counted(const LinModel& m, const ComplexSeq& x, OpCounter& ops)
{
    m.validate();
    const std::size_t L = m.taps.size();
    if (x.size() < L) {
        throw DataError("apply_linear: input shorter than the filter");
    }
    Reconstruction out;
    out.signal.sample_rate_hz = x.sample_rate_hz;
    out.signal.samples.assign(x.size(), cd{});
    out.first_valid = L - 1;
    for (std::size_t n = L - 1; n < x.size(); ++n) {
        cd acc = counted::cmul3(m.taps[0], x[n], ops);
        for (std::size_t l = 1; l < L; ++l) {
            acc = counted::cadd(acc, counted::cmul3(m.taps[l], x[n - l], ops), ops);
        }
        out.signal[n] = acc;
    }
    return out;
}

FxpComplex linear_fxp_at(std::span<const FxpComplex> taps_q, std::span<const FxpComplex> window, int lanes)
{
    const std::size_t L = taps_q.size();
    if (window.size() < L || L == 0) {
        throw DataError("linear_fxp_at: window shorter than the filter");
    }
    if (lanes < 1) {
        throw ConfigError("linear_fxp_at: lanes must be >= 1");
    }
    const std::size_t n_lanes = std::min<std::size_t>(static_cast<std::size_t>(lanes), L);
    std::vector<FxpComplex> acc(n_lanes);
    for (std::size_t l = 0; l < L; ++l) {
        const FxpComplex prod = cmul3(taps_q[l], window[l]);
        const std::size_t lane = l % n_lanes;
        acc[lane] = l < n_lanes ? prod : cadd(acc[lane], prod);
    }
    return tree_sum(std::span<const FxpComplex>(acc));
}

std::vector<FxpComplex> apply_linear_fxp(std::span<const FxpComplex> taps_q, std::span<const FxpComplex> xq, int lanes)
{
    const std::size_t L = taps_q.size();
    if (L == 0 || xq.size() < L) {
        throw DataError("apply_linear_fxp: input shorter than the filter");
    }
    const FxpFormat fmt = taps_q[0].fmt();
    std::vector<FxpComplex> out(xq.size(), FxpComplex{FxpReal{0, fmt}, FxpReal{0, fmt}});
    std::vector<FxpComplex> window(L);
    for (std::size_t n = L - 1; n < xq.size(); ++n) {
        for (std::size_t l = 0; l < L; ++l) {
            window[l] = xq[n - l];
        }
        out[n] = linear_fxp_at(taps_q, window, lanes);
    }
    return out;
}

} // namespace sic
