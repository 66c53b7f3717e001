#include "support.hpp"

#include <sic/errors.hpp>
#include <sic/signal.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace sic;

namespace {

TxChainConfig identity_chain()
{
    TxChainConfig c;
    c.pa_coeffs = {PaTerm{1, 0, {1.0, 0.0}}};
    c.si_channel = {{1.0, 0.0}};
    return c;
}

std::filesystem::path temp_file(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "sic_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<char> read_bytes(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& b)
{
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(b.data(), static_cast<std::streamsize>(b.size()));
}

} // namespace

TEST_SUITE("sigmodel")
{
TEST_CASE("OFDM symbol length, power and determinism")
{
    const auto one = gen_ofdm_qpsk(2048, 1, 4, 1);
    CHECK(one.size() == 8192);
    const auto x = gen_ofdm_qpsk(2048, 100, 4, 42);
    CHECK(x.size() == 819200);
    CHECK(x.mean_power() == doctest::Approx(1.0).epsilon(0.01));
    CHECK(gen_ofdm_qpsk(2048, 3, 4, 42).samples == std::vector<cd>(x.samples.begin(), x.samples.begin() + 3 * 8192));
    CHECK(gen_ofdm_qpsk(2048, 1, 4, 43).samples != one.samples);
    CHECK_THROWS_AS(gen_ofdm_qpsk(2000, 1, 4, 1), ConfigError);
    CHECK_THROWS_AS(gen_ofdm_qpsk(2048, 1, 0, 1), ConfigError);
    CHECK_THROWS_AS(gen_ofdm_qpsk(2048, 0, 4, 1), ConfigError);
}

TEST_CASE("OFDM spectrum occupies the central carriers only")
{
    // Oversampling by zero padding leaves 3/4 of the band empty.
    const auto x = gen_ofdm_qpsk(64, 1, 4, 5);
    std::vector<cd> bins = x.samples;
    // Naive DFT: 256 points is cheap and keeps the oracle independent of FFTW.
    const double pi = std::acos(-1.0);
    for (int k = 0; k < 256; ++k) {
        cd acc{};
        for (int n = 0; n < 256; ++n) {
            acc += x[static_cast<std::size_t>(n)] * std::polar(1.0, -2.0 * pi * k * n / 256.0);
        }
        const int centred = k < 128 ? k : k - 256;
        if (centred >= -32 && centred < 32) {
            CHECK(std::abs(acc) > 1.0);
        } else {
            CHECK(std::abs(acc) < 1e-9);
        }
    }
}

TEST_CASE("PAPR of a long OFDM record is near 13 dB")
{
    const auto x = gen_ofdm_qpsk(2048, 100, 4, 7);
    const double p = papr_db(x);
    CHECK(p > 11.0);
    CHECK(p < 15.0);
}

TEST_CASE("identity chain reproduces x and conserves power")
{
    const auto x = gen_ofdm_qpsk(256, 2, 4, 3);
    const auto out = apply_tx_chain(x, identity_chain());
    CHECK(out.y.samples == x.samples);
    CHECK(out.y.mean_power() == x.mean_power());
}

TEST_CASE("null PA gives noise only")
{
    const auto x = gen_ofdm_qpsk(256, 2, 4, 3);
    TxChainConfig c = identity_chain();
    c.pa_coeffs.clear();
    c.snr_db = 20.0;
    const auto out = apply_tx_chain(x, c);
    for (const auto& v : out.y_clean.samples) {
        REQUIRE(v == cd{});
    }
    CHECK(out.y.mean_power() == doctest::Approx(x.mean_power() / 100.0).epsilon(0.1));
}

TEST_CASE("third-order PA with a single tap is pointwise c x |x|^2")
{
    const auto x = test::random_seq(1000, 21);
    TxChainConfig c = identity_chain();
    const cd coeff{-0.07, 0.03};
    c.pa_coeffs = {PaTerm{3, 0, coeff}};
    const auto out = apply_tx_chain(x, c);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(out.y[i] == coeff * (x[i] * std::norm(x[i])));
    }
}

TEST_CASE("memory taps, channel and IQ imbalance")
{
    const auto x = test::random_seq(64, 22);
    TxChainConfig c = identity_chain();
    c.pa_coeffs.push_back(PaTerm{1, 2, {0.5, 0.0}});
    c.si_channel = {{1.0, 0.0}, {0.0, 0.25}};
    const auto y = apply_tx_chain(x, c).y;
    for (std::size_t n = 3; n < x.size(); ++n) {
        const cd pa_n = x[n] + 0.5 * x[n - 2];
        const cd pa_n1 = x[n - 1] + 0.5 * x[n - 3];
        CHECK(std::abs(y[n] - (pa_n + cd{0.0, 0.25} * pa_n1)) < 1e-14);
    }

    TxChainConfig iq = identity_chain();
    iq.iq_gain_mismatch = 0.1;
    iq.iq_phase_mismatch = 0.05;
    const auto [mu, nu] = iq.iq_gains();
    // Default impairment leaves the image about 25 dB below the direct term.
    CHECK(20.0 * std::log10(std::abs(nu) / std::abs(mu)) == doctest::Approx(-25.0).epsilon(0.04));
    const auto yi = apply_tx_chain(x, iq).y;
    for (std::size_t n = 0; n < x.size(); ++n) {
        CHECK(std::abs(yi[n] - (mu * x[n] + nu * std::conj(x[n]))) < 1e-14);
    }
    // I passes through; the Q branch is (1+g)(Q cos(phi) - I sin(phi)).
    const ComplexSeq unit{{cd{1.0, 0.0}, cd{0.0, 1.0}}, 1.0};
    const auto y_unit = apply_tx_chain(unit, iq).y;
    CHECK(std::abs(y_unit[0] - cd{1.0, -1.1 * std::sin(0.05)}) < 1e-14);
    CHECK(std::abs(y_unit[1] - cd{0.0, 1.1 * std::cos(0.05)}) < 1e-14);
}

TEST_CASE("receiver noise matches the configured SNR")
{
    const auto x = gen_ofdm_qpsk(2048, 2, 4, 9);
    TxChainConfig c = identity_chain();
    c.pa_coeffs.push_back(PaTerm{3, 0, {-0.05, 0.0}});
    c.snr_db = 35.0;
    c.seed = 77;
    const auto out = apply_tx_chain(x, c);
    ComplexSeq noise = out.y;
    for (std::size_t i = 0; i < noise.size(); ++i) {
        noise[i] -= out.y_clean[i];
    }
    const double snr = 10.0 * std::log10(out.y_clean.mean_power() / noise.mean_power());
    CHECK(std::abs(snr - 35.0) < 0.3);
    CHECK(apply_tx_chain(x, c).y.samples == out.y.samples);
}

TEST_CASE("config validation")
{
    TxChainConfig c = identity_chain();
    c.pa_coeffs.push_back(PaTerm{2, 0, {1.0, 0.0}});
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = identity_chain();
    c.si_channel.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = identity_chain();
    CHECK(c.has_linear_term());
    c.pa_coeffs = {PaTerm{3, 0, {1.0, 0.0}}};
    CHECK_FALSE(c.has_linear_term());
}

TEST_CASE("dataset split and normalization")
{
    TxChainConfig c = identity_chain();
    c.pa_coeffs.push_back(PaTerm{3, 0, {-0.05, 0.01}});
    c.snr_db = 40.0;
    const OfdmConfig ofdm;
    const Dataset ds = make_dataset(c, ofdm, 20480);
    CHECK(ds.split_index == 18432);
    CHECK(ds.size() - ds.split_index == 2048);
    REQUIRE(ds.y_clean.has_value());

    const ComplexSeq xn = normalize(ds.x.slice(0, ds.split_index), ds.norm.x_mean, ds.norm.x_var);
    cd mean{};
    double re2 = 0.0, im2 = 0.0;
    for (const auto& v : xn.samples) {
        mean += v;
        re2 += v.real() * v.real();
        im2 += v.imag() * v.imag();
    }
    const double n = static_cast<double>(xn.size());
    CHECK(std::abs(mean / n) < 0.01);
    CHECK(xn.mean_power() >= 0.98);
    CHECK(xn.mean_power() <= 1.02);
    CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.05));
    CHECK(im2 / n == doctest::Approx(0.5).epsilon(0.05));

    // Statistics come from the training portion only.
    cd full_mean{};
    for (const auto& v : ds.x.samples) {
        full_mean += v;
    }
    full_mean /= static_cast<double>(ds.size());
    CHECK(full_mean != ds.norm.x_mean);
    CHECK(ds.norm.resid_var > 0.0);
    CHECK(ds.norm.resid_taps == 4);

    const Dataset again = make_dataset(c, ofdm, 20480);
    CHECK(again.x.samples == ds.x.samples);
    CHECK(again.y.samples == ds.y.samples);
    CHECK_THROWS_AS(make_dataset(c, ofdm, 511), ConfigError);
}

TEST_CASE("dataset file round trip and malformed files")
{
    TxChainConfig c = identity_chain();
    c.pa_coeffs.push_back(PaTerm{3, 0, {-0.05, 0.01}});
    c.snr_db = 30.0;
    const Dataset ds = make_dataset(c, OfdmConfig{64, 2, 10e6}, 1000, 2);
    const auto path = temp_file("rt.sicd");
    save_dataset(ds, path.string(), "abc123");
    const Dataset back = load_dataset(path.string());
    CHECK(back.x.samples == ds.x.samples);
    CHECK(back.y.samples == ds.y.samples);
    CHECK(back.y_clean->samples == ds.y_clean->samples);
    CHECK(back.split_index == ds.split_index);
    CHECK(back.x.sample_rate_hz == 10e6);
    CHECK(back.norm.x_mean == ds.norm.x_mean);
    CHECK(back.norm.x_var == ds.norm.x_var);
    CHECK(back.norm.resid_mean == ds.norm.resid_mean);
    CHECK(back.norm.resid_var == ds.norm.resid_var);
    CHECK(back.norm.resid_taps == 2);
    CHECK(std::filesystem::exists(path.string() + ".json"));

    Dataset no_clean = ds;
    no_clean.y_clean.reset();
    save_dataset(no_clean, path.string());
    CHECK_FALSE(load_dataset(path.string()).y_clean.has_value());

    save_dataset(ds, path.string());
    const auto bytes = read_bytes(path);

    auto expect_error = [&](const std::vector<char>& b, const std::string& needle) {
        const auto bad = temp_file("bad.sicd");
        write_bytes(bad, b);
        try {
            load_dataset(bad.string());
            FAIL("no error for " << needle);
        } catch (const DataError& e) {
            const std::string what = e.what();
            CHECK_MESSAGE(what.find(needle) != std::string::npos, what);
            CHECK(what.find("byte") != std::string::npos);
        }
    };
    expect_error(std::vector<char>(bytes.begin(), bytes.begin() + 30), "truncated");
    expect_error(std::vector<char>(bytes.begin(), bytes.end() - 8), "truncated");
    auto v = bytes;
    v[4] = 9;
    expect_error(v, "version");
    v = bytes;
    v[0] = 'X';
    expect_error(v, "magic");
    v = bytes;
    v.push_back(0);
    expect_error(v, "trailing");
    CHECK_THROWS_AS(load_dataset(temp_file("missing.sicd").string()), DataError);
}

TEST_CASE("split_seed derives distinct streams")
{
    CHECK(split_seed(1, 0) != split_seed(1, 1));
    CHECK(split_seed(1, 0) != split_seed(2, 0));
    CHECK(split_seed(5, 9) == split_seed(5, 9));
}
}
