#pragma once

// Synthetic full-duplex transceiver: OFDM/QPSK baseband source, transmitter
// IQ imbalance, memory-polynomial power amplifier, self-interference channel
// and receiver noise. Every generator is a pure function of its config and seed.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sic {

using cd = std::complex<double>;

/// Complex baseband sample sequence with its sample rate.
struct ComplexSeq
{
    std::vector<cd> samples;
    double sample_rate_hz = 1.0;

    std::size_t size() const { return samples.size(); }
    const cd& operator[](std::size_t i) const { return samples[i]; }
    cd& operator[](std::size_t i) { return samples[i]; }

    /// Throws DataError when empty or when a sample is not finite.
    void validate() const;
    double mean_power() const;
    /// Copy of samples [begin, end).
    ComplexSeq slice(std::size_t begin, std::size_t end) const;
};

/// One power-amplifier branch: coeff * x[n-l] |x[n-l]|^(p-1), p odd.
struct PaTerm
{
    int p = 1;
    int l = 0;
    cd coeff{1.0, 0.0};
};

struct TxChainConfig
{
    double iq_gain_mismatch = 0.0;  ///< linear gain error of the Q branch (0 = ideal)
    double iq_phase_mismatch = 0.0; ///< radians
    std::vector<PaTerm> pa_coeffs{PaTerm{}};
    std::vector<cd> si_channel{cd{1.0, 0.0}};
    std::optional<double> snr_db; ///< receiver SNR w.r.t. the noiseless SI; nullopt = no noise
    std::uint64_t seed = 1;

    /// Structural checks (odd orders, non-negative delays, non-empty channel).
    /// Null and purely non-linear PA models are accepted so that oracles can
    /// isolate single branches.
    void validate() const;
    /// True when a nonzero (p=1, l=0) PA term exists; required of experiment configs.
    bool has_linear_term() const;
    /// Direct and image gains of the IQ-imbalanced transmitter: x_iq = mu*x + nu*conj(x).
    std::pair<cd, cd> iq_gains() const;
};

struct OfdmConfig
{
    int n_carriers = 2048;
    int oversample = 4;
    double sample_rate_hz = 80e6;
};

struct NormStats
{
    cd x_mean{};
    double x_var = 1.0; ///< E|x - mean|^2 over the training portion
    cd resid_mean{};
    double resid_var = 1.0;
    int resid_taps = 1; ///< linear canceller length the residual statistics refer to
};

struct Dataset
{
    ComplexSeq x;
    ComplexSeq y;
    std::optional<ComplexSeq> y_clean; ///< noiseless SI, kept for oracle use
    std::size_t split_index = 0;       ///< [0, split) trains, [split, n) tests
    NormStats norm;

    std::size_t size() const { return x.size(); }
    void validate() const;
};

struct TxOutput
{
    ComplexSeq y;       ///< with receiver noise
    ComplexSeq y_clean; ///< noiseless
};

/// Unit-average-power QPSK-OFDM baseband. Each symbol uses an IFFT of size
/// n_carriers * oversample with the carriers centred on DC, so oversampling is
/// zero padding in frequency. Symbol s draws from its own RNG stream derived
/// from (seed, s).
ComplexSeq gen_ofdm_qpsk(int n_carriers, int n_symbols, int oversample, std::uint64_t seed,
                         double sample_rate_hz = 80e6);

TxOutput apply_tx_chain(const ComplexSeq& x, const TxChainConfig& cfg);

/// Generates x and y, splits at floor(0.9 n) and computes normalization
/// statistics on the training portion only. The residual statistics refer to a
/// least-squares linear canceller with `resid_taps` taps.
Dataset make_dataset(const TxChainConfig& cfg, const OfdmConfig& ofdm, std::size_t n_samples, int resid_taps = 4);

/// (x - mean) / sqrt(var) applied to every sample.
ComplexSeq normalize(const ComplexSeq& x, cd mean, double var);

/// Peak-to-average power ratio in dB.
double papr_db(const ComplexSeq& x);

/// Stateless 64-bit mixer used to derive independent RNG streams from one seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

// Dataset container ("SICD"). See save_dataset for the layout.
inline constexpr std::uint16_t kDatasetVersion = 1;

/// Binary little-endian file:
///   "SICD" | u16 version | u16 flags (bit0: noiseless block present)
///   | u64 n | f64 sample_rate | u64 split | f64 x_mean.re, x_mean.im, x_var
///   | f64 resid_mean.re, resid_mean.im, resid_var | u32 resid_taps
///   | n x (f64 re, f64 im) for x | same for y | [same for y_clean]
/// A JSON sidecar `<path>.json` mirrors the header and records `config_hash`
/// when one is given.
void save_dataset(const Dataset& ds, const std::string& path, const std::string& config_hash = "");
Dataset load_dataset(const std::string& path);

} // namespace sic
