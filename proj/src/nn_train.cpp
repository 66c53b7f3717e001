#include <sic/metrics.hpp>
#include <sic/nn.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sic {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> weights(const DenseLayer& l) { return {l.w.data(), l.n_out, l.n_in}; }
Eigen::Map<RowMat> weights(DenseLayer& l) { return {l.w.data(), l.n_out, l.n_in}; }
Eigen::Map<const Eigen::VectorXd> bias(const DenseLayer& l) { return {l.b.data(), l.n_out}; }
Eigen::Map<Eigen::VectorXd> bias(DenseLayer& l) { return {l.b.data(), l.n_out}; }

/// Activations of every layer for the columns of X (acts[0] = X).
std::vector<Eigen::MatrixXd> forward_batch(const NNModel& m, const Eigen::MatrixXd& X)
{
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(m.layers.size() + 1);
    acts.push_back(X);
    for (const auto& layer : m.layers) {
        Eigen::MatrixXd z = weights(layer) * acts.back();
        z.colwise() += bias(layer);
        if (layer.act == Activation::relu) {
            z = z.cwiseMax(0.0);
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

NNGradients backward(const NNModel& m, const std::vector<Eigen::MatrixXd>& acts, const Eigen::MatrixXd& T)
{
    const auto n = static_cast<double>(T.cols());
    NNGradients g;
    const Eigen::MatrixXd err = acts.back() - T;
    g.loss = err.squaredNorm() / n;
    g.dW.resize(m.layers.size());
    g.db.resize(m.layers.size());
    Eigen::MatrixXd delta = (2.0 / n) * err;
    for (std::size_t k = m.layers.size(); k-- > 0;) {
        g.dW[k] = delta * acts[k].transpose();
        g.db[k] = delta.rowwise().sum();
        if (k > 0) {
            Eigen::MatrixXd back = weights(m.layers[k]).transpose() * delta;
            // ReLU derivative, taken as 0 at the kink.
            delta = back.cwiseProduct((acts[k].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

std::pair<cd, std::array<double, 2>> residual_stats(const std::vector<cd>& r)
{
    cd mean{};
    for (const auto& v : r) {
        mean += v;
    }
    mean /= static_cast<double>(r.size());
    double vre = 0.0, vim = 0.0;
    for (const auto& v : r) {
        vre += (v.real() - mean.real()) * (v.real() - mean.real());
        vim += (v.imag() - mean.imag()) * (v.imag() - mean.imag());
    }
    return {mean, {std::sqrt(vre / static_cast<double>(r.size())), std::sqrt(vim / static_cast<double>(r.size()))}};
}

int pow2_exponent(double std_component)
{
    // Each normalized component targets variance 1/2.
    if (!(std_component > 0.0)) {
        return 0;
    }
    return static_cast<int>(std::lround(std::log2(std_component * std::sqrt(2.0))));
}

} // namespace

void TrainConfig::validate() const
{
    if (batch_size < 1) {
        throw ConfigError("batch_size must be >= 1");
    }
    if (!(learning_rate > 0.0)) {
        throw ConfigError("learning_rate must be > 0");
    }
    if (epochs < 0) {
        throw ConfigError("epochs must be >= 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
        throw ConfigError("Adam parameters out of range");
    }
}

NNData nn_data(const NNModel& m, const Dataset& ds, std::size_t begin, std::size_t end)
{
    m.validate();
    end = std::min(end, ds.size());
    begin = std::max(begin, static_cast<std::size_t>(m.L - 1));
    if (begin >= end) {
        throw DataError("nn_data: empty sample range");
    }
    const Reconstruction lin = apply_linear(m.lin, ds.x);
    const auto cols = static_cast<Eigen::Index>(end - begin);
    NNData d{Eigen::MatrixXd(2 * m.L, cols), Eigen::MatrixXd(2, cols)};
    std::vector<double> window(static_cast<std::size_t>(2 * m.L));
    for (std::size_t n = begin; n < end; ++n) {
        const auto c = static_cast<Eigen::Index>(n - begin);
        nn_window(m, ds.x, n, window);
        for (int i = 0; i < 2 * m.L; ++i) {
            d.X(i, c) = window[static_cast<std::size_t>(i)];
        }
        const cd r = ds.y[n] - lin.signal[n] - m.denorm_mean;
        d.T(0, c) = std::ldexp(r.real(), -m.denorm_shift_re);
        d.T(1, c) = std::ldexp(r.imag(), -m.denorm_shift_im);
    }
    return d;
}

double nn_mse(const NNModel& m, const NNData& d)
{
    const auto acts = forward_batch(m, d.X);
    return (acts.back() - d.T).squaredNorm() / static_cast<double>(d.T.cols());
}

NNGradients nn_gradients(const NNModel& m, const NNData& d)
{
    m.validate();
    return backward(m, forward_batch(m, d.X), d.T);
}

NNModel init_nn(const Dataset& ds, int L, int N_l, int N_h, std::uint64_t seed)
{
    ds.validate();
    NNModel m = NNModel::zeros(L, N_l, N_h);
    m.x_mean = ds.norm.x_mean;
    m.x_var = ds.norm.x_var;

    const ComplexSeq xt = ds.x.slice(0, ds.split_index);
    const ComplexSeq yt = ds.y.slice(0, ds.split_index);
    m.lin = fit_linear(xt, yt, L);
    const Reconstruction rec = apply_linear(m.lin, xt);
    std::vector<cd> resid;
    for (std::size_t n = rec.first_valid; n < xt.size(); ++n) {
        resid.push_back(yt[n] - rec.signal[n]);
    }
    const auto [mean, stds] = residual_stats(resid);
    m.denorm_mean = mean;
    m.denorm_shift_re = pow2_exponent(stds[0]);
    m.denorm_shift_im = pow2_exponent(stds[1]);

    std::mt19937_64 rng(split_seed(seed, 0x696E6974ULL));
    for (auto& layer : m.layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.n_in + layer.n_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (auto& w : layer.w) {
            w = u(rng);
        }
    }
    return m;
}

TrainResult train_nn(const Dataset& ds, int L, int N_l, int N_h, const TrainConfig& cfg)
{
    cfg.validate();
    TrainResult res;
    res.model = init_nn(ds, L, N_l, N_h, cfg.seed);
    NNModel& m = res.model;

    const NNData train = nn_data(m, ds, 0, ds.split_index);
    const NNData test = nn_data(m, ds, ds.split_index, ds.size());
    const ComplexSeq y_test = ds.y.slice(ds.split_index, ds.size());

    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    for (const auto& layer : m.layers) {
        mW.push_back(Eigen::MatrixXd::Zero(layer.n_out, layer.n_in));
        vW.push_back(Eigen::MatrixXd::Zero(layer.n_out, layer.n_in));
        mb.push_back(Eigen::VectorXd::Zero(layer.n_out));
        vb.push_back(Eigen::VectorXd::Zero(layer.n_out));
    }

    const auto n_train = static_cast<std::size_t>(train.X.cols());
    std::vector<Eigen::Index> order(n_train);
    Eigen::MatrixXd xb(train.X.rows(), cfg.batch_size);
    Eigen::MatrixXd tb(2, cfg.batch_size);
    long step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::mt19937_64 rng(split_seed(cfg.seed, 0x1000ULL + static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = n_train; i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng() % i);
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.batch_size)) {
            const auto bs = static_cast<Eigen::Index>(std::min<std::size_t>(cfg.batch_size, n_train - start));
            xb.resize(train.X.rows(), bs);
            tb.resize(2, bs);
            for (Eigen::Index c = 0; c < bs; ++c) {
                const Eigen::Index src = order[start + static_cast<std::size_t>(c)];
                xb.col(c) = train.X.col(src);
                tb.col(c) = train.T.col(src);
            }
            const NNGradients g = backward(m, forward_batch(m, xb), tb);
            ++step;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < m.layers.size(); ++k) {
                mW[k] = cfg.beta1 * mW[k] + (1.0 - cfg.beta1) * g.dW[k];
                vW[k] = cfg.beta2 * vW[k] + (1.0 - cfg.beta2) * g.dW[k].cwiseAbs2();
                mb[k] = cfg.beta1 * mb[k] + (1.0 - cfg.beta1) * g.db[k];
                vb[k] = cfg.beta2 * vb[k] + (1.0 - cfg.beta2) * g.db[k].cwiseAbs2();
                weights(m.layers[k]) -= (cfg.learning_rate * (mW[k] / c1).array() /
                                         ((vW[k] / c2).array().sqrt() + cfg.eps))
                                            .matrix();
                bias(m.layers[k]) -=
                    (cfg.learning_rate * (mb[k] / c1).array() / ((vb[k] / c2).array().sqrt() + cfg.eps)).matrix();
            }
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.train_mse = nn_mse(m, train);
        entry.test_mse = nn_mse(m, test);
        if (!std::isfinite(entry.train_mse) || !std::isfinite(entry.test_mse)) {
            throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) + " (MSE is not finite)",
                                   epoch);
        }
        const Reconstruction rec = apply_nn(m, ds.x);
        entry.c_db_total = c_db(y_test, rec.signal.slice(ds.split_index, ds.size()));
        res.log.push_back(entry);
        if (cfg.keep_checkpoints) {
            res.checkpoints.push_back(m);
        }
    }
    return res;
}

} // namespace sic
