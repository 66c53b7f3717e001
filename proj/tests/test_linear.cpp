#include "support.hpp"

#include <sic/errors.hpp>
#include <sic/linear.hpp>
#include <sic/metrics.hpp>
#include <sic/model_io.hpp>

#include <doctest.h>

using namespace sic;

namespace {

ComplexSeq fir(const ComplexSeq& x, const std::vector<cd>& h)
{
    ComplexSeq y = x;
    for (std::size_t n = 0; n < x.size(); ++n) {
        cd acc{};
        for (std::size_t l = 0; l < h.size() && l <= n; ++l) {
            acc += h[l] * x[n - l];
        }
        y[n] = acc;
    }
    return y;
}

double max_tap_error(const LinModel& m, const std::vector<cd>& truth)
{
    double e = 0.0;
    for (std::size_t l = 0; l < m.taps.size(); ++l) {
        e = std::max(e, std::abs(m.taps[l] - (l < truth.size() ? truth[l] : cd{})));
    }
    return e;
}

} // namespace

TEST_SUITE("lincanc")
{
TEST_CASE("noiseless FIR identification")
{
    const auto x = test::random_seq(4000, 1);
    const std::vector<cd> h{{0.9, -0.2}, {0.15, 0.05}};
    const auto y = fir(x, h);
    CHECK(max_tap_error(fit_linear(x, y, 2), h) <= 1e-8);
    CHECK(max_tap_error(fit_linear(x, y, 5), h) <= 1e-8);

    const LinModel id = fit_linear(x, x, 3);
    CHECK(max_tap_error(id, {{1.0, 0.0}}) <= 1e-8);
}

TEST_CASE("identification is idempotent on the canceller's own output")
{
    const auto x = test::random_seq(2000, 2);
    LinModel m{{{0.3, 0.1}, {-0.2, 0.4}, {0.05, 0.0}, {0.0, -0.01}}};
    const auto y = apply_linear(m, x).signal;
    // Samples before the first full window are zero in y, which the fit ignores.
    const LinModel again = fit_linear(x, y, 4);
    CHECK(max_tap_error(again, m.taps) <= 1e-8);
}

TEST_CASE("apply_linear definition and warm-up")
{
    const auto x = test::random_seq(50, 3);
    const auto same = apply_linear(LinModel{{{1.0, 0.0}}}, x);
    CHECK(same.signal.samples == x.samples);
    CHECK(same.first_valid == 0);
    const auto delayed = apply_linear(LinModel{{{0.0, 0.0}, {1.0, 0.0}}}, x);
    CHECK(delayed.first_valid == 1);
    CHECK(delayed.signal[0] == cd{});
    for (std::size_t n = 1; n < x.size(); ++n) {
        CHECK(delayed.signal[n] == x[n - 1]);
    }
    CHECK_THROWS_AS(apply_linear(LinModel{std::vector<cd>(60, cd{1.0, 0.0})}, x), DataError);
}

TEST_CASE("apply_linear is linear")
{
    const auto x1 = test::random_seq(300, 4);
    const auto x2 = test::random_seq(300, 5);
    const LinModel m{{{0.7, 0.1}, {0.2, -0.3}, {-0.05, 0.02}}};
    const cd a{0.3, -1.2}, b{2.0, 0.5};
    ComplexSeq mix = x1;
    for (std::size_t i = 0; i < mix.size(); ++i) {
        mix[i] = a * x1[i] + b * x2[i];
    }
    const auto r = apply_linear(m, mix).signal;
    const auto r1 = apply_linear(m, x1).signal;
    const auto r2 = apply_linear(m, x2).signal;
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(std::abs(r[i] - (a * r1[i] + b * r2[i])) < 1e-12);
    }
}

TEST_CASE("instrumented counts are 3L mults and 7L-2 adds per sample")
{
    const auto x = test::random_seq(40, 6);
    std::mt19937_64 rng(60);
    for (int L = 1; L <= 10; ++L) {
        LinModel m;
        for (int l = 0; l < L; ++l) {
            m.taps.push_back(test::random_cd(rng));
        }
        OpCounter ops;
        const auto rec = apply_linear_counted(m, x, ops);
        const auto valid = x.size() - rec.first_valid;
        CHECK(ops.mul == valid * static_cast<std::uint64_t>(3 * L));
        CHECK(ops.add == valid * static_cast<std::uint64_t>(7 * L - 2));
        const auto plain = apply_linear(m, x).signal;
        for (std::size_t i = rec.first_valid; i < x.size(); ++i) {
            CHECK(std::abs(rec.signal[i] - plain[i]) < 1e-12);
        }
    }
}

TEST_CASE("argument errors")
{
    const auto x = test::random_seq(15, 7);
    CHECK_THROWS_AS(fit_linear(x, x, 4), DataError); // needs 16 samples
    CHECK_THROWS_AS(fit_linear(x, x, 0), ConfigError);
    CHECK_THROWS_AS(fit_linear(x, x.slice(0, 14), 2), DataError);
    ComplexSeq zeros = x;
    std::fill(zeros.samples.begin(), zeros.samples.end(), cd{});
    try {
        fit_linear(zeros, x, 2);
        FAIL("expected IllConditioned");
    } catch (const IllConditioned& e) {
        CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }
    CHECK_THROWS_AS(LinModel{}.validate(), ConfigError);
}

TEST_CASE("fixed-point FIR matches an explicit MAC oracle")
{
    const auto f = FxpFormat::make(16, 11);
    const auto x = test::random_seq(200, 9, 0.5);
    const std::vector<cd> h{{0.8, 0.1}, {-0.3, 0.2}, {0.1, 0.05}, {0.02, -0.04}, {0.01, 0.0}};
    const auto hq = quantize(std::span<const cd>(h), f);
    const auto xq = quantize(std::span<const cd>(x.samples), f);
    for (int lanes : {1, 2, 3, 5, 8}) {
        const auto out = apply_linear_fxp(hq, xq, lanes);
        for (std::size_t n = 0; n < 4; ++n) {
            CHECK(out[n] == FxpComplex{test::raw(0, f), test::raw(0, f)});
        }
        const std::size_t used = static_cast<std::size_t>(std::min(lanes, 5));
        for (std::size_t n = 4; n < x.size(); ++n) {
            std::vector<FxpComplex> acc(used);
            std::vector<bool> started(used, false);
            for (std::size_t l = 0; l < 5; ++l) {
                const auto p = cmul3(hq[l], xq[n - l]);
                const std::size_t lane = l % used;
                acc[lane] = started[lane] ? cadd(acc[lane], p) : p;
                started[lane] = true;
            }
            REQUIRE(out[n] == tree_sum(std::span<const FxpComplex>(acc)));
        }
    }
    // Wide enough formats track the float FIR closely.
    const auto f24 = FxpFormat::make(24, 19);
    const auto out = apply_linear_fxp(quantize(std::span<const cd>(h), f24), quantize(std::span<const cd>(x.samples), f24));
    const auto ref = apply_linear(LinModel{h}, x).signal;
    for (std::size_t n = 4; n < x.size(); ++n) {
        CHECK(std::abs(out[n].value() - ref[n]) < 1e-4);
    }
}

TEST_CASE("linear model JSON round trip")
{
    const LinModel m{{{0.1, 1.0 / 3.0}, {-2.5e-9, 0.7}}};
    const LinModel back = lin_from_json(nlohmann::ordered_json::parse(to_json(m).dump()));
    CHECK(back.taps == m.taps);
    auto j = to_json(m);
    j["L"] = 3;
    CHECK_THROWS_AS(lin_from_json(j), DataError);
    j = to_json(m);
    j["kind"] = "poly";
    CHECK_THROWS_AS(lin_from_json(j), DataError);
}
}
