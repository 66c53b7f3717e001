#include <sic/errors.hpp>
#include <sic/metrics.hpp>
#include <sic/poly.hpp>

#include "fft.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace sic {

double c_db(const ComplexSeq& y_si, const ComplexSeq& y_hat)
{
    if (y_si.size() != y_hat.size()) {
        throw DataError("c_db: length mismatch (" + std::to_string(y_si.size()) + " vs " +
                        std::to_string(y_hat.size()) + ")");
    }
    double sig = 0.0;
    double res = 0.0;
    for (std::size_t i = 0; i < y_si.size(); ++i) {
        sig += std::norm(y_si[i]);
        res += std::norm(y_si[i] - y_hat[i]);
    }
    if (sig == 0.0) {
        throw DataError("c_db: reference signal is all zero");
    }
    if (res == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(sig / res);
}

Psd psd(const ComplexSeq& x, int nfft, double overlap)
{
    if (nfft < 2 || (nfft & (nfft - 1)) != 0) {
        throw ConfigError("psd: nfft must be a power of two >= 2, got " + std::to_string(nfft));
    }
    if (!(overlap >= 0.0 && overlap < 1.0)) {
        throw ConfigError("psd: overlap must be in [0, 1)");
    }
    const auto N = static_cast<std::size_t>(nfft);
    if (x.size() < N) {
        throw DataError("psd: signal has " + std::to_string(x.size()) + " samples, shorter than nfft = " +
                        std::to_string(nfft));
    }
    std::vector<double> win(N);
    double wpow = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        win[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(N));
        wpow += win[i] * win[i];
    }
    const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(N) * (1.0 - overlap))));

    std::vector<double> acc(N, 0.0);
    std::vector<cd> seg(N);
    std::size_t n_seg = 0;
    for (std::size_t start = 0; start + N <= x.size(); start += hop) {
        for (std::size_t i = 0; i < N; ++i) {
            seg[i] = x[start + i] * win[i];
        }
        detail::fft_inplace(seg, false);
        for (std::size_t k = 0; k < N; ++k) {
            acc[k] += std::norm(seg[k]);
        }
        ++n_seg;
    }

    Psd out;
    out.freq_hz.resize(N);
    out.psd_db.resize(N);
    const double scale = 1.0 / (static_cast<double>(n_seg) * static_cast<double>(N) * wpow);
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t k = (i + N / 2) % N; // fftshift
        out.freq_hz[i] = (static_cast<double>(i) - static_cast<double>(N / 2)) * x.sample_rate_hz / static_cast<double>(N);
        const double p = acc[k] * scale;
        out.psd_db[i] = p > 0.0 ? 10.0 * std::log10(p) : -std::numeric_limits<double>::infinity();
    }
    return out;
}

std::string psd_csv(const Psd& p, const std::string& header_comment)
{
    std::ostringstream os;
    os.precision(17);
    if (!header_comment.empty()) {
        os << header_comment << "\n";
    }
    os << "freq_hz,psd_db\n";
    for (std::size_t i = 0; i < p.freq_hz.size(); ++i) {
        os << p.freq_hz[i] << ",";
        if (std::isinf(p.psd_db[i])) {
            os << "-inf";
        } else {
            os << p.psd_db[i];
        }
        os << "\n";
    }
    return os.str();
}

std::string to_string(CancellerKind k)
{
    switch (k) {
    case CancellerKind::linear:
        return "linear";
    case CancellerKind::poly:
        return "poly";
    case CancellerKind::nn:
        return "nn";
    }
    return "?";
}

CancellerKind parse_canceller_kind(const std::string& s)
{
    if (s == "linear") {
        return CancellerKind::linear;
    }
    if (s == "poly") {
        return CancellerKind::poly;
    }
    if (s == "nn") {
        return CancellerKind::nn;
    }
    throw ConfigError("unknown canceller kind '" + s + "' (expected linear, poly or nn)");
}

ComplexityReport complexity_linear(int L)
{
    if (L < 1) {
        throw ConfigError("complexity: L must be >= 1");
    }
    const auto l = static_cast<std::uint64_t>(L);
    return {7 * l - 2, 3 * l, 0, 0};
}

ComplexityReport complexity_poly(int L, int P)
{
    const auto nbf = static_cast<std::uint64_t>(n_bf(P, L));
    const auto pp = static_cast<std::uint64_t>(P);
    return {7 * nbf - 2, 3 * nbf, nbf, (pp + 1) * (pp + 3) / 8 - 1};
}

ComplexityReport complexity_nn(int L, int N_l, int N_h)
{
    if (L < 1 || N_l < 1 || N_h < 1) {
        throw ConfigError("complexity: NN dimensions must be positive");
    }
    const auto l = static_cast<std::uint64_t>(L);
    const auto nl = static_cast<std::uint64_t>(N_l);
    const auto nh = static_cast<std::uint64_t>(N_h);
    return {(2 * l + 3 + (nl - 1) * (nh + 1)) * nh + 7 * l, (2 * l + 2 + (nl - 1) * nh) * nh + 3 * l, 0, 0};
}

ComplexityReport complexity(CancellerKind kind, const ComplexityParams& p)
{
    switch (kind) {
    case CancellerKind::linear:
        return complexity_linear(p.L);
    case CancellerKind::poly:
        return complexity_poly(p.L, p.P);
    case CancellerKind::nn:
        return complexity_nn(p.L, p.N_l, p.N_h);
    }
    throw ConfigError("complexity: unknown canceller kind");
}

} // namespace sic
