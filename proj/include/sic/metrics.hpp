#pragma once

#include <sic/signal.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace sic {

/// Cancellation in dB: 10 log10(sum |y_si|^2 / sum |y_si - y_hat|^2).
/// Returns +infinity when the residual is exactly zero. Throws DataError when
/// the lengths differ or y_si is all zero.
double c_db(const ComplexSeq& y_si, const ComplexSeq& y_hat);

struct Psd
{
    std::vector<double> freq_hz; ///< ascending, DC in the middle
    std::vector<double> psd_db;  ///< dB per bin; -infinity for an empty bin
};

/// Welch estimate with a periodic Hann window. Bins are normalized so that
/// their linear sum equals the mean power of the analysed segments.
Psd psd(const ComplexSeq& x, int nfft, double overlap = 0.5);

/// "freq_hz,psd_db" rows.
std::string psd_csv(const Psd& p, const std::string& header_comment = "");

enum class CancellerKind
{
    linear,
    poly,
    nn,
};

std::string to_string(CancellerKind k);
CancellerKind parse_canceller_kind(const std::string& s);

/// Real operations per output sample; n_bf and n_mul_bf are set for the
/// polynomial canceller only.
struct ComplexityReport
{
    std::uint64_t n_add = 0;
    std::uint64_t n_mul = 0;
    std::uint64_t n_bf = 0;
    std::uint64_t n_mul_bf = 0;

    bool operator==(const ComplexityReport&) const = default;
};

struct ComplexityParams
{
    int L = 1;
    int P = 1;   ///< poly
    int N_l = 1; ///< nn
    int N_h = 1; ///< nn
};

/// Linear: 7L - 2 additions, 3L multiplications.
ComplexityReport complexity_linear(int L);
/// Polynomial: N_BF = L(P+1)(P+3)/4, 7 N_BF - 2 additions, 3 N_BF
/// multiplications, (P+1)(P+3)/8 - 1 basis-function products.
ComplexityReport complexity_poly(int L, int P);
/// Hybrid network including its linear canceller and the combining additions:
///   adds = (2L + 3 + (N_l - 1)(N_h + 1)) N_h + 7L
///   mults = (2L + 2 + (N_l - 1) N_h) N_h + 3L
ComplexityReport complexity_nn(int L, int N_l, int N_h);
ComplexityReport complexity(CancellerKind kind, const ComplexityParams& p);

} // namespace sic
