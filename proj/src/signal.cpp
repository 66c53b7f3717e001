#include <sic/signal.hpp>

#include <sic/errors.hpp>
#include <sic/linear.hpp>

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <tuple>

namespace sic {

void ComplexSeq::validate() const
{
    if (samples.empty()) {
        throw DataError("complex sequence is empty");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag())) {
            throw DataError("complex sequence has a non-finite sample at index " + std::to_string(i));
        }
    }
    if (!(sample_rate_hz > 0.0)) {
        throw DataError("complex sequence sample rate must be positive");
    }
}

double ComplexSeq::mean_power() const
{
    if (samples.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& s : samples) {
        acc += std::norm(s);
    }
    return acc / static_cast<double>(samples.size());
}

ComplexSeq ComplexSeq::slice(std::size_t begin, std::size_t end) const
{
    end = std::min(end, samples.size());
    begin = std::min(begin, end);
    return {std::vector<cd>(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                            samples.begin() + static_cast<std::ptrdiff_t>(end)),
            sample_rate_hz};
}

void TxChainConfig::validate() const
{
    for (const auto& t : pa_coeffs) {
        if (t.p < 1 || t.p % 2 == 0) {
            throw ConfigError("PA term order p must be odd and positive, got " + std::to_string(t.p));
        }
        if (t.l < 0) {
            throw ConfigError("PA term delay l must be non-negative");
        }
    }
    if (si_channel.empty()) {
        throw ConfigError("SI channel needs at least one tap");
    }
}

bool TxChainConfig::has_linear_term() const
{
    return std::any_of(pa_coeffs.begin(), pa_coeffs.end(),
                       [](const PaTerm& t) { return t.p == 1 && t.l == 0 && t.coeff != cd{}; });
}

std::pair<cd, cd> TxChainConfig::iq_gains() const
{
    const cd branch = (1.0 + iq_gain_mismatch) * std::polar(1.0, iq_phase_mismatch);
    const cd mu = (1.0 + std::conj(branch)) / 2.0;
    const cd nu = (1.0 - branch) / 2.0;
    return {mu, nu};
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finalizer over (seed, stream)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ComplexSeq gen_ofdm_qpsk(int n_carriers, int n_symbols, int oversample, std::uint64_t seed, double sample_rate_hz)
{
    if (n_carriers < 1 || (n_carriers & (n_carriers - 1)) != 0) {
        throw ConfigError("n_carriers must be a power of two, got " + std::to_string(n_carriers));
    }
    if (oversample < 1) {
        throw ConfigError("oversample must be >= 1");
    }
    if (n_symbols < 1) {
        throw ConfigError("n_symbols must be >= 1");
    }
    const std::size_t nfft = static_cast<std::size_t>(n_carriers) * static_cast<std::size_t>(oversample);
    const double amp = 1.0 / std::sqrt(2.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_carriers));

    ComplexSeq out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.reserve(nfft * static_cast<std::size_t>(n_symbols));
    std::vector<cd> bins(nfft);
    for (int s = 0; s < n_symbols; ++s) {
        std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(s)));
        std::fill(bins.begin(), bins.end(), cd{});
        std::uint64_t word = 0;
        for (int c = 0; c < n_carriers; ++c) {
            if (c % 32 == 0) {
                word = rng();
            }
            const auto bits = (word >> (2 * (c % 32))) & 3U;
            const cd sym{(bits & 1U) ? -amp : amp, (bits & 2U) ? -amp : amp};
            const long k = c - n_carriers / 2;
            const auto bin = static_cast<std::size_t>((k + static_cast<long>(nfft)) % static_cast<long>(nfft));
            bins[bin] = sym;
        }
        detail::fft_inplace(bins, true);
        for (const auto& v : bins) {
            out.samples.push_back(v * scale);
        }
    }
    return out;
}

TxOutput apply_tx_chain(const ComplexSeq& x, const TxChainConfig& cfg)
{
    cfg.validate();
    const std::size_t n = x.size();
    const auto [mu, nu] = cfg.iq_gains();

    std::vector<cd> xiq(n);
    for (std::size_t i = 0; i < n; ++i) {
        xiq[i] = nu == cd{} ? mu * x[i] : mu * x[i] + nu * std::conj(x[i]);
    }

    // Memory-polynomial PA; samples before the start are zero.
    std::vector<cd> pa(n, cd{});
    for (const auto& term : cfg.pa_coeffs) {
        const auto l = static_cast<std::size_t>(term.l);
        for (std::size_t i = l; i < n; ++i) {
            const cd v = xiq[i - l];
            double envelope = 1.0;
            const double mag2 = std::norm(v);
            for (int k = 1; k < term.p; k += 2) {
                envelope *= mag2;
            }
            pa[i] += term.coeff * (term.p == 1 ? v : v * envelope);
        }
    }

    TxOutput out;
    out.y_clean.sample_rate_hz = x.sample_rate_hz;
    out.y_clean.samples.assign(n, cd{});
    for (std::size_t i = 0; i < n; ++i) {
        cd acc{};
        for (std::size_t k = 0; k < cfg.si_channel.size() && k <= i; ++k) {
            acc += cfg.si_channel[k] * pa[i - k];
        }
        out.y_clean[i] = acc;
    }

    out.y = out.y_clean;
    if (cfg.snr_db) {
        double ref_power = out.y_clean.mean_power();
        if (ref_power == 0.0) {
            // Null signal path: noise is referenced to the input power instead.
            ref_power = x.mean_power();
        }
        const double noise_power = ref_power / std::pow(10.0, *cfg.snr_db / 10.0);
        std::mt19937_64 rng(split_seed(cfg.seed, 0x6E6F697365ULL));
        std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
        for (auto& s : out.y.samples) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            s += cd{re, im};
        }
    }
    return out;
}

ComplexSeq normalize(const ComplexSeq& x, cd mean, double var)
{
    if (!(var > 0.0)) {
        throw DataError("normalize: variance must be positive");
    }
    const double inv = 1.0 / std::sqrt(var);
    ComplexSeq out = x;
    for (auto& s : out.samples) {
        s = (s - mean) * inv;
    }
    return out;
}

double papr_db(const ComplexSeq& x)
{
    double peak = 0.0;
    for (const auto& s : x.samples) {
        peak = std::max(peak, std::norm(s));
    }
    return 10.0 * std::log10(peak / x.mean_power());
}

namespace {

std::pair<cd, double> mean_var(std::span<const cd> v)
{
    cd mean{};
    for (const auto& s : v) {
        mean += s;
    }
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (const auto& s : v) {
        var += std::norm(s - mean);
    }
    return {mean, var / static_cast<double>(v.size())};
}

} // namespace

void Dataset::validate() const
{
    x.validate();
    y.validate();
    if (x.size() != y.size()) {
        throw DataError("dataset x and y lengths differ");
    }
    if (y_clean && y_clean->size() != x.size()) {
        throw DataError("dataset noiseless block length differs from x");
    }
    if (split_index == 0 || split_index >= x.size()) {
        throw DataError("dataset split index out of range");
    }
    if (!(norm.x_var > 0.0) || !(norm.resid_var > 0.0)) {
        throw DataError("dataset normalization variances must be positive");
    }
}

Dataset make_dataset(const TxChainConfig& cfg, const OfdmConfig& ofdm, std::size_t n_samples, int resid_taps)
{
    if (n_samples < 512) {
        throw ConfigError("make_dataset: n_samples must be >= 512");
    }
    const std::size_t per_symbol =
        static_cast<std::size_t>(ofdm.n_carriers) * static_cast<std::size_t>(ofdm.oversample);
    const auto n_symbols = static_cast<int>((n_samples + per_symbol - 1) / per_symbol);

    Dataset ds;
    ds.x = gen_ofdm_qpsk(ofdm.n_carriers, n_symbols, ofdm.oversample, cfg.seed, ofdm.sample_rate_hz);
    ds.x.samples.resize(n_samples);
    auto chain = apply_tx_chain(ds.x, cfg);
    ds.y = std::move(chain.y);
    ds.y_clean = std::move(chain.y_clean);
    ds.split_index = n_samples * 9 / 10;

    const std::span<const cd> x_train(ds.x.samples.data(), ds.split_index);
    std::tie(ds.norm.x_mean, ds.norm.x_var) = mean_var(x_train);

    const ComplexSeq xt = ds.x.slice(0, ds.split_index);
    const ComplexSeq yt = ds.y.slice(0, ds.split_index);
    const LinModel lin = fit_linear(xt, yt, resid_taps);
    const Reconstruction rec = apply_linear(lin, xt);
    std::vector<cd> resid;
    resid.reserve(ds.split_index);
    for (std::size_t i = rec.first_valid; i < ds.split_index; ++i) {
        resid.push_back(yt[i] - rec.signal[i]);
    }
    std::tie(ds.norm.resid_mean, ds.norm.resid_var) = mean_var(resid);
    ds.norm.resid_taps = resid_taps;
    if (!(ds.norm.resid_var > 0.0)) {
        // Perfectly linear, noiseless data: keep the container valid.
        ds.norm.resid_var = 1.0;
    }
    return ds;
}

} // namespace sic
