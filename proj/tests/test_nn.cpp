#include "support.hpp"

#include <sic/config.hpp>
#include <sic/errors.hpp>
#include <sic/experiment.hpp>
#include <sic/metrics.hpp>
#include <sic/model_io.hpp>
#include <sic/nn.hpp>

#include <doctest.h>

#include <cstring>

using namespace sic;

namespace {

const Dataset& default_dataset()
{
    static const Dataset ds = dataset_from_config(load_run_config("", {}));
    return ds;
}

Dataset small_dataset(const TxChainConfig& tx)
{
    return make_dataset(tx, OfdmConfig{64, 4, 80e6}, 4096, 4);
}

TxChainConfig default_tx()
{
    TxChainConfig tx = load_run_config("", {}).tx;
    tx.seed = 7;
    return tx;
}

NNModel random_net(int L, int N_l, int N_h, std::uint64_t seed)
{
    NNModel m = NNModel::zeros(L, N_l, N_h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (auto& layer : m.layers) {
        for (auto& w : layer.w) {
            w = u(rng);
        }
        for (auto& b : layer.b) {
            b = 0.3 * u(rng);
        }
    }
    for (int l = 0; l < L; ++l) {
        m.lin.taps[static_cast<std::size_t>(l)] = cd{u(rng), u(rng)};
    }
    m.x_mean = cd{0.01, -0.02};
    m.x_var = 1.3;
    m.denorm_shift_re = -3;
    m.denorm_shift_im = -4;
    m.denorm_mean = cd{0.001, 0.002};
    return m;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST_SUITE("nncanc")
{
TEST_CASE("layer sizes and validation")
{
    const NNModel m = NNModel::zeros(4, 2, 34);
    CHECK(m.layer_sizes() == std::vector<int>{8, 34, 34, 2});
    REQUIRE(m.layers.size() == 3);
    CHECK(m.layers[0].act == Activation::relu);
    CHECK(m.layers[2].act == Activation::identity);
    NNModel bad = m;
    bad.layers[1].w.pop_back();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(NNModel::zeros(0, 1, 8), ConfigError);
}

TEST_CASE("zero network outputs zero")
{
    const NNModel m = NNModel::zeros(3, 2, 5);
    const std::vector<double> window{0.3, -1.0, 2.0, 0.5, -0.1, 0.7};
    const auto out = nn_forward(m, window);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);
    CHECK_THROWS_AS(nn_forward(m, std::vector<double>(4)), ConfigError);
}

TEST_CASE("hand-computed three-neuron network")
{
    NNModel m = NNModel::zeros(1, 1, 3);
    m.layers[0].w = {1, 0, 0, 1, 1, -1};
    m.layers[0].b = {0, 0, -0.5};
    m.layers[1].w = {1, 1, 1, 2, 0, -1};
    m.layers[1].b = {0.25, 0};
    // hidden = relu(0.5, -1, 1.5 - 0.5) = (0.5, 0, 1)
    const auto out = nn_forward(m, std::vector<double>{0.5, -1.0});
    CHECK(out[0] == 1.75);
    CHECK(out[1] == 0.0);

    m.denorm_shift_re = 2;
    m.denorm_shift_im = -1;
    m.denorm_mean = cd{0.5, 1.0};
    CHECK(nn_denormalize(m, {1.75, -2.0}) == cd{7.5, 0.0});
}

TEST_CASE("operation counts equal the closed form")
{
    const auto x = test::random_seq(40, 50);
    for (int L = 1; L <= 6; ++L) {
        for (int N_l = 1; N_l <= 3; ++N_l) {
            for (int N_h : {1, 2, 5, 8, 13, 16}) {
                const NNModel m = random_net(L, N_l, N_h, static_cast<std::uint64_t>(100 * L + 10 * N_l + N_h));
                OpCounter ops;
                const auto rec = apply_nn_counted(m, x, ops);
                const auto valid = x.size() - rec.first_valid;
                const auto c = complexity_nn(L, N_l, N_h);
                REQUIRE(ops.mul == valid * c.n_mul);
                REQUIRE(ops.add == valid * c.n_add);
                const auto plain = apply_nn(m, x).signal;
                for (std::size_t n = rec.first_valid; n < x.size(); ++n) {
                    REQUIRE(std::abs(rec.signal[n] - plain[n]) <= 1e-12);
                }
            }
        }
    }
    CHECK(complexity_nn(2, 1, 8) == ComplexityReport{70, 54, 0, 0});
    CHECK(complexity_nn(4, 1, 34) == ComplexityReport{402, 352, 0, 0});
}

TEST_CASE("hybrid output is the literal recomposition")
{
    const NNModel m = random_net(3, 2, 6, 51);
    const auto x = test::random_seq(64, 52);
    const auto hybrid = apply_nn(m, x);
    const auto lin = apply_linear(m.lin, x);
    CHECK(hybrid.first_valid == 2);
    std::vector<double> window(6);
    for (std::size_t n = hybrid.first_valid; n < x.size(); ++n) {
        nn_window(m, x, n, window);
        REQUIRE(hybrid.signal[n] == lin.signal[n] + nn_denormalize(m, nn_forward(m, window)));
    }
    std::vector<double> w(6);
    nn_window(m, x, 5, w);
    const cd v = (x[4] - m.x_mean) * (1.0 / std::sqrt(m.x_var));
    CHECK(w[2] == v.real());
    CHECK(w[3] == v.imag());
}

TEST_CASE("backpropagation matches central differences")
{
    for (const auto& [L, N_l, N_h] : {std::tuple{2, 1, 5}, std::tuple{3, 2, 4}, std::tuple{1, 3, 3}}) {
        const NNModel m = random_net(L, N_l, N_h, static_cast<std::uint64_t>(53 + N_l));
        std::mt19937_64 rng(54);
        std::normal_distribution<double> g;
        NNData d{Eigen::MatrixXd(2 * L, 25), Eigen::MatrixXd(2, 25)};
        for (Eigen::Index c = 0; c < 25; ++c) {
            for (int r = 0; r < 2 * L; ++r) {
                d.X(r, c) = g(rng);
            }
            d.T(0, c) = g(rng);
            d.T(1, c) = g(rng);
        }
        const NNGradients grad = nn_gradients(m, d);
        CHECK(grad.loss == doctest::Approx(nn_mse(m, d)).epsilon(1e-14));
        const double h = 1e-6;
        double worst = 0.0;
        auto check = [&](double analytic, auto&& perturb) {
            NNModel plus = m, minus = m;
            perturb(plus, h);
            perturb(minus, -h);
            const double fd = (nn_mse(plus, d) - nn_mse(minus, d)) / (2 * h);
            const double rel = std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
            worst = std::max(worst, rel);
        };
        for (std::size_t k = 0; k < m.layers.size(); ++k) {
            const auto& layer = m.layers[k];
            for (int o = 0; o < layer.n_out; ++o) {
                for (int i = 0; i < layer.n_in; ++i) {
                    const auto idx = static_cast<std::size_t>(o * layer.n_in + i);
                    check(grad.dW[k](o, i), [&](NNModel& p, double e) { p.layers[k].w[idx] += e; });
                }
                check(grad.db[k](o), [&](NNModel& p, double e) { p.layers[k].b[static_cast<std::size_t>(o)] += e; });
            }
        }
        CHECK(worst <= 1e-5);
    }
}

TEST_CASE("null residual trains to a negligible network output")
{
    TxChainConfig tx;
    tx.iq_gain_mismatch = 0.0;
    tx.iq_phase_mismatch = 0.0;
    tx.pa_coeffs = {PaTerm{1, 0, cd{0.8, 0.1}}};
    tx.si_channel = {cd{1.0, 0.0}, cd{0.2, -0.1}};
    tx.snr_db.reset();
    const Dataset ds = small_dataset(tx);
    TrainConfig cfg;
    cfg.epochs = 3;
    const auto res = train_nn(ds, 2, 1, 8, cfg);
    const NNModel& m = res.model;
    const auto hybrid = apply_nn(m, ds.x);
    const auto lin = apply_linear(m.lin, ds.x);
    double p_nn = 0.0, p_x = 0.0;
    for (std::size_t n = ds.split_index; n < ds.size(); ++n) {
        p_nn += std::norm(hybrid.signal[n] - lin.signal[n]);
        p_x += std::norm(ds.x[n]);
    }
    CHECK(p_nn < 1e-4 * p_x);
}

TEST_CASE("training log is reproduced by re-evaluating checkpoints")
{
    const Dataset ds = small_dataset(default_tx());
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.keep_checkpoints = true;
    const auto res = train_nn(ds, 2, 1, 8, cfg);
    REQUIRE(res.log.size() == 4);
    REQUIRE(res.checkpoints.size() == 4);
    for (std::size_t e = 0; e < 4; ++e) {
        const NNModel& cp = res.checkpoints[e];
        CHECK(res.log[e].epoch == static_cast<int>(e) + 1);
        CHECK(same_bits(nn_mse(cp, nn_data(cp, ds, 0, ds.split_index)), res.log[e].train_mse));
        CHECK(same_bits(nn_mse(cp, nn_data(cp, ds, ds.split_index, ds.size())), res.log[e].test_mse));
        CHECK(same_bits(test_cdb(ds, apply_nn(cp, ds.x).signal), res.log[e].c_db_total));
    }
    CHECK(res.log.back().train_mse < res.log.front().train_mse);

    // Same seed, same result.
    cfg.keep_checkpoints = false;
    const auto again = train_nn(ds, 2, 1, 8, cfg);
    CHECK(again.model.layers[0].w == res.model.layers[0].w);
}

TEST_CASE("denormalization uses power-of-two steps near the residual spread")
{
    const Dataset ds = small_dataset(default_tx());
    const NNModel m = init_nn(ds, 2, 1, 8, 3);
    const NNData d = nn_data(m, ds, 0, ds.split_index);
    const double var_re = (d.T.row(0).array() - d.T.row(0).mean()).square().mean();
    const double var_im = (d.T.row(1).array() - d.T.row(1).mean()).square().mean();
    // Nearest power of two to the spread puts each component within a factor 2 of variance 1/2.
    CHECK(var_re > 0.5 / 2.01);
    CHECK(var_re < 0.5 * 2.01);
    CHECK(var_im > 0.5 / 2.01);
    CHECK(var_im < 0.5 * 2.01);
}

TEST_CASE("divergence reports the epoch")
{
    const Dataset ds = small_dataset(default_tx());
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.learning_rate = 1e300;
    try {
        train_nn(ds, 2, 1, 8, cfg);
        FAIL("expected divergence");
    } catch (const TrainingDiverged& e) {
        CHECK(e.epoch() == 1);
        CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
        CHECK(e.exit_code() == 3);
    }
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train_nn(ds, 2, 1, 8, cfg), ConfigError);
    cfg.learning_rate = 0.004;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train_nn(ds, 2, 1, 8, cfg), ConfigError);
}

TEST_CASE("larger network beats the small one on the default dataset")
{
    const Dataset& ds = default_dataset();
    TrainConfig cfg;
    const auto equi = train_nn(ds, 2, 1, 8, cfg);
    const auto peak = train_nn(ds, 4, 1, 34, cfg);
    const double lin_db = test_cdb(ds, apply_linear(fit_linear_train(ds, 4), ds.x).signal);
    const double equi_db = test_cdb(ds, apply_nn(equi.model, ds.x).signal);
    const double peak_db = test_cdb(ds, apply_nn(peak.model, ds.x).signal);
    MESSAGE("linear " << lin_db << " dB, equi " << equi_db << " dB, peak " << peak_db << " dB");
    CHECK(equi_db > lin_db);
    CHECK(peak_db > equi_db);
    CHECK(peak_db - lin_db >= 5.0);

    const double q16 = nn_fxp_cdb(ds, equi.model, 16, kNnIntegerBits);
    CHECK(std::abs(q16 - equi_db) <= 0.2);
    CHECK(nn_fxp_cdb(ds, equi.model, 4, kNnIntegerBits) <= equi_db - 3.0);
}

TEST_CASE("fixed-point forward against a sequential oracle")
{
    const NNModel m = random_net(3, 2, 7, 55);
    const FxpFormat f = FxpFormat::make(18, 13);
    const NNFxpModel q = quantize_nn(m, f);
    CHECK(q.layers[0].w[4] == quantize(m.layers[0].w[4], f));
    // Output bias carries the folded mean: mean * 2^-shift.
    CHECK(q.layers.back().b[0] ==
          quantize(m.layers.back().b[0] + std::ldexp(m.denorm_mean.real(), -m.denorm_shift_re), f));

    std::mt19937_64 rng(56);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<FxpReal> window;
        for (int i = 0; i < 6; ++i) {
            window.push_back(test::random_fxp(rng, f));
        }
        std::vector<FxpReal> cur = window;
        for (const auto& layer : q.layers) {
            std::vector<FxpReal> next;
            for (int o = 0; o < layer.n_out; ++o) {
                std::vector<FxpReal> prods;
                for (int i = 0; i < layer.n_in; ++i) {
                    prods.push_back(fxp_mul(layer.w[static_cast<std::size_t>(o * layer.n_in + i)],
                                            cur[static_cast<std::size_t>(i)]));
                }
                FxpReal v = fxp_add(sum_sequential(std::span<const FxpReal>(prods)), layer.b[static_cast<std::size_t>(o)]);
                next.push_back(layer.act == Activation::relu ? fxp_relu(v) : v);
            }
            cur = next;
        }
        const auto out = nn_forward_fxp(q, window);
        REQUIRE(out[0] == cur[0]);
        REQUIRE(out[1] == cur[1]);
    }
}

TEST_CASE("network model JSON round trip is exact")
{
    const NNModel m = random_net(3, 2, 6, 57);
    const auto back = nn_from_json(nlohmann::ordered_json::parse(to_json(m).dump()));
    REQUIRE(back.layers.size() == m.layers.size());
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        for (std::size_t i = 0; i < m.layers[k].w.size(); ++i) {
            REQUIRE(same_bits(back.layers[k].w[i], m.layers[k].w[i]));
        }
        CHECK(back.layers[k].b == m.layers[k].b);
        CHECK(back.layers[k].act == m.layers[k].act);
    }
    CHECK(back.lin.taps == m.lin.taps);
    CHECK(back.denorm_shift_re == -3);
    CHECK(back.denorm_shift_im == -4);
    CHECK(back.denorm_mean == m.denorm_mean);
    CHECK(back.x_var == m.x_var);

    auto j = to_json(m);
    j["N_h"] = 5;
    CHECK_THROWS(nn_from_json(j));
}
}
