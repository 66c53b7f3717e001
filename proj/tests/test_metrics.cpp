#include "support.hpp"

#include <sic/errors.hpp>
#include <sic/metrics.hpp>
#include <sic/poly.hpp>

#include <doctest.h>

#include <algorithm>
#include <numbers>

using namespace sic;

namespace {

ComplexSeq scaled(const ComplexSeq& x, cd a)
{
    ComplexSeq y = x;
    for (auto& v : y.samples) {
        v *= a;
    }
    return y;
}

double median(std::vector<double> v)
{
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

double integrated(const Psd& p)
{
    double s = 0.0;
    for (double d : p.psd_db) {
        s += std::pow(10.0, d / 10.0);
    }
    return s;
}

} // namespace

TEST_SUITE("metrics")
{
TEST_CASE("c_db examples")
{
    const auto y = test::random_seq(500, 60);
    ComplexSeq zero = y;
    std::fill(zero.samples.begin(), zero.samples.end(), cd{});
    CHECK(c_db(y, zero) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isinf(c_db(y, y)));
    CHECK(c_db(y, y) > 0);
    CHECK(c_db(y, scaled(y, 0.5)) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
    CHECK_THROWS_AS(c_db(zero, y), DataError);
    CHECK_THROWS_AS(c_db(y, y.slice(0, 499)), DataError);
}

TEST_CASE("c_db is invariant to a common scale")
{
    std::mt19937_64 rng(61);
    const auto y = test::random_seq(300, 62);
    auto y_hat = y;
    for (auto& v : y_hat.samples) {
        v += 0.05 * test::random_cd(rng);
    }
    const double ref = c_db(y, y_hat);
    for (const cd a : {cd{2.0, 0.0}, cd{-0.001, 0.0}, cd{0.3, -4.0}, cd{1e6, 1e6}}) {
        CHECK(c_db(scaled(y, a), scaled(y_hat, a)) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("psd of a tone")
{
    const int N = 256;
    const int k = 37;
    ComplexSeq x;
    x.sample_rate_hz = 1024.0;
    for (int n = 0; n < 8192; ++n) {
        x.samples.push_back(std::polar(1.0, 2 * std::numbers::pi * k * n / N));
    }
    const Psd p = psd(x, N);
    REQUIRE(p.psd_db.size() == static_cast<std::size_t>(N));
    const auto peak = static_cast<std::size_t>(std::max_element(p.psd_db.begin(), p.psd_db.end()) - p.psd_db.begin());
    CHECK(p.freq_hz[peak] == doctest::Approx(k * 1024.0 / N));
    CHECK(p.psd_db[peak] - median(p.psd_db) >= 40.0);
    CHECK(std::is_sorted(p.freq_hz.begin(), p.freq_hz.end()));
    CHECK(p.freq_hz[static_cast<std::size_t>(N / 2)] == 0.0);
    CHECK(10 * std::log10(integrated(p)) == doctest::Approx(0.0).epsilon(0.1 / 10));
}

TEST_CASE("psd of white noise")
{
    std::mt19937_64 rng(63);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5 * 3.0));
    ComplexSeq x;
    for (int n = 0; n < 1 << 18; ++n) {
        x.samples.emplace_back(g(rng), g(rng));
    }
    double mean_power = 0.0;
    for (const auto& v : x.samples) {
        mean_power += std::norm(v);
    }
    mean_power /= static_cast<double>(x.size());
    const Psd p = psd(x, 512);
    CHECK(std::abs(10 * std::log10(integrated(p) / mean_power)) <= 0.1);
    CHECK(std::abs(10 * std::log10(integrated(p) / 3.0)) <= 0.1);
    const double flat = 10 * std::log10(3.0 / 512);
    for (double d : p.psd_db) {
        REQUIRE(std::abs(d - flat) <= 1.0);
    }
}

TEST_CASE("psd of zero and argument errors")
{
    ComplexSeq zero;
    zero.samples.assign(1024, cd{});
    for (double d : psd(zero, 128).psd_db) {
        CHECK(std::isinf(d));
        CHECK(d < 0);
    }
    CHECK_THROWS_AS(psd(zero, 100), ConfigError);
    CHECK_THROWS_AS(psd(zero, 2048), DataError);
    CHECK_THROWS_AS(psd(zero, 128, 1.0), ConfigError);
    const auto csv = psd_csv(psd(test::random_seq(512, 64), 64), "# config_hash=abc");
    CHECK(csv.rfind("# config_hash=abc\nfreq_hz,psd_db\n", 0) == 0);
}

TEST_CASE("complexity examples")
{
    CHECK(complexity_poly(3, 7) == ComplexityReport{418, 180, 60, 9});
    CHECK(complexity_linear(1) == ComplexityReport{5, 3, 0, 0});
    CHECK(complexity_nn(2, 1, 8) == ComplexityReport{70, 54, 0, 0});
    CHECK(complexity(CancellerKind::poly, {3, 7, 1, 1}) == complexity_poly(3, 7));
    CHECK(complexity(CancellerKind::nn, {4, 1, 1, 34}) == complexity_nn(4, 1, 34));
    CHECK(complexity(CancellerKind::linear, {6, 1, 1, 1}) == complexity_linear(6));
    CHECK_THROWS_AS(complexity_poly(3, 4), ConfigError);
    CHECK_THROWS_AS(complexity_linear(0), ConfigError);
    CHECK_THROWS_AS(complexity_nn(2, 0, 8), ConfigError);
    CHECK(parse_canceller_kind("poly") == CancellerKind::poly);
    CHECK(to_string(CancellerKind::nn) == "nn");
    CHECK_THROWS_AS(parse_canceller_kind("cubic"), ConfigError);
}

TEST_CASE("complexity closed forms")
{
    for (int L = 1; L <= 10; ++L) {
        CHECK(complexity_linear(L) == ComplexityReport{static_cast<std::uint64_t>(7 * L - 2),
                                                       static_cast<std::uint64_t>(3 * L), 0, 0});
        CHECK(complexity_poly(L, 1).n_bf == static_cast<std::uint64_t>(2 * L));
        for (int P = 1; P <= 9; P += 2) {
            const auto c = complexity_poly(L, P);
            const int nbf = L * (P + 1) * (P + 3) / 4;
            CHECK(c.n_bf == static_cast<std::uint64_t>(nbf));
            CHECK(4 * c.n_add == static_cast<std::uint64_t>(7 * L * (P + 1) * (P + 3) - 8));
            CHECK(4 * c.n_mul == static_cast<std::uint64_t>(3 * L * (P + 1) * (P + 3)));
        }
        for (int N_l = 1; N_l <= 3; ++N_l) {
            for (int N_h = 1; N_h <= 40; N_h += 3) {
                const auto c = complexity_nn(L, N_l, N_h);
                CHECK(c.n_add == static_cast<std::uint64_t>((2 * L + 3 + (N_l - 1) * (N_h + 1)) * N_h + 7 * L));
                CHECK(c.n_mul == static_cast<std::uint64_t>((2 * L + 2 + (N_l - 1) * N_h) * N_h + 3 * L));
            }
        }
    }
}
}
