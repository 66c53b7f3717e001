#include <sic/poly.hpp>

#include <sic/counted.hpp>

#include "lsq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sic {

void check_order(int P)
{
    if (P < 1 || P % 2 == 0) {
        throw ConfigError("polynomial order P must be odd and positive, got " + std::to_string(P));
    }
}

int bf_per_sample(int P)
{
    check_order(P);
    return (P + 1) * (P + 3) / 4;
}

int n_bf(int P, int L)
{
    if (L < 1) {
        throw ConfigError("memory length L must be >= 1, got " + std::to_string(L));
    }
    return L * bf_per_sample(P);
}

std::vector<BfIndex> bf_indices(int P)
{
    check_order(P);
    std::vector<BfIndex> out;
    for (int p = 1; p <= P; p += 2) {
        for (int q = 0; q <= p; ++q) {
            out.push_back({p, q});
        }
    }
    return out;
}

void PolyModel::validate() const
{
    const int n = n_bf(P, L);
    if (coeffs.size() != static_cast<std::size_t>(n)) {
        throw DataError("polynomial model has " + std::to_string(coeffs.size()) + " coefficients, expected N_BF = " +
                        std::to_string(n));
    }
}

namespace {

void check_input(const PolyModel& m, const ComplexSeq& x)
{
    m.validate();
    if (x.size() < static_cast<std::size_t>(m.L)) {
        throw DataError("apply_poly: input shorter than the memory length");
    }
}

Reconstruction empty_output(const PolyModel& m, const ComplexSeq& x)
{
    Reconstruction out;
    out.signal.sample_rate_hz = x.sample_rate_hz;
    out.signal.samples.assign(x.size(), cd{});
    out.first_valid = static_cast<std::size_t>(m.L - 1);
    return out;
}

} // namespace

PolyModel fit_poly(const ComplexSeq& x, const ComplexSeq& y, int P, int L, std::span<const BfIndex> active)
{
    const int nb = n_bf(P, L);
    if (x.size() != y.size()) {
        throw DataError("fit_poly: x and y lengths differ (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    }
    if (x.size() < 4 * static_cast<std::size_t>(nb)) {
        throw DataError("fit_poly: need at least 4 N_BF = " + std::to_string(4 * nb) + " samples, got " +
                        std::to_string(x.size()));
    }
    std::vector<BfIndex> terms = active.empty() ? bf_indices(P) : std::vector<BfIndex>(active.begin(), active.end());
    for (const auto& t : terms) {
        if (t.p > P || t.p % 2 == 0 || t.q < 0 || t.q > t.p) {
            throw ConfigError("fit_poly: active term (" + std::to_string(t.p) + "," + std::to_string(t.q) +
                              ") is outside the model");
        }
    }
    std::sort(terms.begin(), terms.end(),
              [](const BfIndex& a, const BfIndex& b) { return bf_slot(a.p, a.q) < bf_slot(b.p, b.q); });
    const auto n_cols = static_cast<Eigen::Index>(terms.size()) * L;

    std::vector<std::vector<cd>> bfs(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        bfs[n] = bf_dp(x[n], P).bf;
    }

    detail::NormalEquations ne(n_cols);
    constexpr std::size_t block = 2048;
    const auto first = static_cast<std::size_t>(L - 1);
    for (std::size_t start = first; start < x.size(); start += block) {
        const std::size_t rows = std::min(block, x.size() - start);
        Eigen::MatrixXcd a(rows, n_cols);
        Eigen::VectorXcd t(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t n = start + r;
            Eigen::Index c = 0;
            for (const auto& term : terms) {
                const auto slot = static_cast<std::size_t>(bf_slot(term.p, term.q));
                for (int l = 0; l < L; ++l) {
                    a(r, c++) = bfs[n - static_cast<std::size_t>(l)][slot];
                }
            }
            t(r) = y[n];
        }
        ne.add_rows(a, t);
    }
    const auto sol = ne.solve("fit_poly");

    PolyModel m;
    m.P = P;
    m.L = L;
    m.coeffs.assign(static_cast<std::size_t>(nb), cd{});
    Eigen::Index c = 0;
    for (const auto& term : terms) {
        for (int l = 0; l < L; ++l) {
            m.coeffs[m.index(term.p, term.q, l)] = sol.coeffs(c++);
        }
    }
    return m;
}

Reconstruction apply_poly(const PolyModel& m, const ComplexSeq& x)
{
    check_input(m, x);
    Reconstruction out = empty_output(m, x);
    const auto per = static_cast<std::size_t>(bf_per_sample(m.P));
    BfBuffer<cd> buffer(m.P, m.L, cd{});
    for (std::size_t n = 0; n < x.size(); ++n) {
        const auto fresh = bf_dp(x[n], m.P).bf;
        if (n >= out.first_valid) {
            cd acc{};
            for (std::size_t s = 0; s < per; ++s) {
                for (int l = 0; l < m.L; ++l) {
                    const cd bf = l == 0 ? fresh[s] : buffer.at(l, s);
                    acc += m.coeffs[s * static_cast<std::size_t>(m.L) + static_cast<std::size_t>(l)] * bf;
                }
            }
            out.signal[n] = acc;
        }
        buffer.push(fresh);
    }
    return out;
}

Reconstruction apply_poly_recompute(const PolyModel& m, const ComplexSeq& x)
{
    check_input(m, x);
    Reconstruction out = empty_output(m, x);
    const auto per = static_cast<std::size_t>(bf_per_sample(m.P));
    std::vector<std::vector<cd>> window(static_cast<std::size_t>(m.L));
    for (std::size_t n = out.first_valid; n < x.size(); ++n) {
        for (int l = 0; l < m.L; ++l) {
            window[static_cast<std::size_t>(l)] = bf_dp(x[n - static_cast<std::size_t>(l)], m.P).bf;
        }
        cd acc{};
        for (std::size_t s = 0; s < per; ++s) {
            for (int l = 0; l < m.L; ++l) {
                acc += m.coeffs[s * static_cast<std::size_t>(m.L) + static_cast<std::size_t>(l)] *
                       window[static_cast<std::size_t>(l)][s];
            }
        }
        out.signal[n] = acc;
    }
    return out;
}

Reconstruction apply_poly_counted(const PolyModel& m, const ComplexSeq& x, OpCounter& ops, OpCounter* bf_ops)
{
    check_input(m, x);
    Reconstruction out = empty_output(m, x);
    const auto per = static_cast<std::size_t>(bf_per_sample(m.P));
    OpCounter scratch;
    OpCounter& bops = bf_ops ? *bf_ops : scratch;
    auto mul = [&bops](cd a, cd b) { return counted::cmul3(a, b, bops); };
    auto cj = [](cd a) { return std::conj(a); };
    BfBuffer<cd> buffer(m.P, m.L, cd{});
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (n < out.first_valid) {
            buffer.push(bf_dp(x[n], m.P).bf);
            continue;
        }
        const auto fresh = bf_dp(x[n], m.P, mul, cj).bf;
        std::optional<cd> acc;
        for (std::size_t s = 0; s < per; ++s) {
            for (int l = 0; l < m.L; ++l) {
                const cd bf = l == 0 ? fresh[s] : buffer.at(l, s);
                const cd prod =
                    counted::cmul3(m.coeffs[s * static_cast<std::size_t>(m.L) + static_cast<std::size_t>(l)], bf, ops);
                acc = acc ? counted::cadd(*acc, prod, ops) : prod;
            }
        }
        out.signal[n] = *acc;
        buffer.push(fresh);
    }
    return out;
}

FxpFormat poly_default_format(int total_bits)
{
    return FxpFormat::with_integer_bits(total_bits, std::min(total_bits, kPolyIntegerBits));
}

namespace {

double max_component(cd v) { return std::max(std::abs(v.real()), std::abs(v.imag())); }

} // namespace

PolyFxpModel quantize_poly(const PolyModel& m, FxpFormat fmt, int input_shift)
{
    m.validate();
    fmt.validate();
    PolyFxpModel q;
    q.P = m.P;
    q.L = m.L;
    q.fmt = fmt;
    q.input_shift = input_shift;
    q.coeffs.reserve(m.coeffs.size());
    for (const auto& bf : bf_indices(m.P)) {
        for (int l = 0; l < m.L; ++l) {
            q.coeffs.push_back(quantize(std::ldexp(1.0, bf.p * input_shift) * m.coeff(bf.p, bf.q, l), fmt));
        }
    }
    return q;
}

PolyFxpModel quantize_poly(const PolyModel& m, FxpFormat fmt, const ComplexSeq& x_train)
{
    m.validate();
    double peak = 0.0;
    for (const auto& s : x_train.samples) {
        peak = std::max(peak, std::abs(s));
    }
    if (!(peak > 0.0)) {
        return quantize_poly(m, fmt, 0);
    }
    // Smallest k that minimises the larger of the two log2 magnitudes.
    int best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 8; ++k) {
        const double a = std::log2(peak) - k;
        const double bf_log = std::max(a, a * m.P);
        double coef_log = -std::numeric_limits<double>::infinity();
        for (const auto& bf : bf_indices(m.P)) {
            for (int l = 0; l < m.L; ++l) {
                const double c = max_component(m.coeff(bf.p, bf.q, l));
                if (c > 0.0) {
                    coef_log = std::max(coef_log, std::log2(c) + bf.p * k);
                }
            }
        }
        const double worst = std::max(bf_log, coef_log);
        if (worst < best - 1e-12) {
            best = worst;
            best_k = k;
        }
    }
    return quantize_poly(m, fmt, best_k);
}

FxpComplex quantize_poly_input(const PolyFxpModel& m, cd x) { return quantize(std::ldexp(1.0, -m.input_shift) * x, m.fmt); }

std::vector<std::size_t> poly_term_schedule(int P, int L)
{
    const auto per = static_cast<std::size_t>(bf_per_sample(P));
    const auto Ls = static_cast<std::size_t>(L);
    std::vector<std::size_t> order;
    order.reserve(per * Ls);
    for (std::size_t s = 0; s < per; ++s) {
        for (std::size_t l = 1; l < Ls; ++l) {
            order.push_back(s * Ls + l);
        }
    }
    for (std::size_t s = 0; s < per; ++s) {
        order.push_back(s * Ls);
    }
    return order;
}

FxpComplex poly_fxp_at(const PolyFxpModel& m, std::span<const FxpComplex> fresh, const BfBuffer<FxpComplex>& buffer,
                       int n_cpe)
{
    if (n_cpe < 1) {
        throw ConfigError("poly_fxp_at: n_cpe must be >= 1");
    }
    const auto schedule = poly_term_schedule(m.P, m.L);
    const auto Ls = static_cast<std::size_t>(m.L);
    const std::size_t lanes = std::min<std::size_t>(static_cast<std::size_t>(n_cpe), schedule.size());
    std::vector<FxpComplex> acc(lanes);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const std::size_t idx = schedule[i];
        const std::size_t s = idx / Ls;
        const int l = static_cast<int>(idx % Ls);
        const FxpComplex& bf = l == 0 ? fresh[s] : buffer.at(l, s);
        const FxpComplex prod = cmul3(m.coeffs[idx], bf);
        const std::size_t lane = i % lanes;
        acc[lane] = i < lanes ? prod : cadd(acc[lane], prod);
    }
    return tree_sum(std::span<const FxpComplex>(acc));
}

std::vector<FxpComplex> apply_poly_fxp(const PolyFxpModel& m, std::span<const FxpComplex> xq, int n_cpe)
{
    if (m.coeffs.size() != static_cast<std::size_t>(n_bf(m.P, m.L))) {
        throw DataError("apply_poly_fxp: coefficient count does not match N_BF");
    }
    const FxpComplex zero{FxpReal{0, m.fmt}, FxpReal{0, m.fmt}};
    std::vector<FxpComplex> out(xq.size(), zero);
    BfBuffer<FxpComplex> buffer(m.P, m.L, zero);
    for (std::size_t n = 0; n < xq.size(); ++n) {
        const auto fresh = bf_dp(xq[n], m.P).bf;
        if (n + 1 >= static_cast<std::size_t>(m.L)) {
            out[n] = poly_fxp_at(m, fresh, buffer, n_cpe);
        }
        buffer.push(fresh);
    }
    return out;
}

} // namespace sic
