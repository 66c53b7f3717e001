#include <sic/nn.hpp>

#include <sic/counted.hpp>

#include <algorithm>
#include <cmath>

namespace sic {

std::vector<int> NNModel::layer_sizes() const
{
    std::vector<int> sizes;
    sizes.push_back(2 * L);
    for (int i = 0; i < N_l; ++i) {
        sizes.push_back(N_h);
    }
    sizes.push_back(2);
    return sizes;
}

void NNModel::validate() const
{
    if (L < 1 || N_l < 1 || N_h < 1) {
        throw ConfigError("NN dimensions must be positive (L=" + std::to_string(L) + ", N_l=" + std::to_string(N_l) +
                          ", N_h=" + std::to_string(N_h) + ")");
    }
    const auto sizes = layer_sizes();
    if (layers.size() + 1 != sizes.size()) {
        throw ConfigError("NN has " + std::to_string(layers.size()) + " layers, expected " +
                          std::to_string(sizes.size() - 1));
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& layer = layers[k];
        if (layer.n_in != sizes[k] || layer.n_out != sizes[k + 1] ||
            layer.w.size() != static_cast<std::size_t>(layer.n_in) * static_cast<std::size_t>(layer.n_out) ||
            layer.b.size() != static_cast<std::size_t>(layer.n_out)) {
            throw ConfigError("NN layer " + std::to_string(k + 1) + " has inconsistent shape");
        }
        const Activation expected = k + 1 == layers.size() ? Activation::identity : Activation::relu;
        if (layer.act != expected) {
            throw ConfigError("NN layer " + std::to_string(k + 1) + " has the wrong activation");
        }
    }
    if (lin.L() != L) {
        throw ConfigError("NN linear canceller has " + std::to_string(lin.L()) + " taps, expected L = " +
                          std::to_string(L));
    }
    if (!(x_var > 0.0)) {
        throw ConfigError("NN input variance must be positive");
    }
}

NNModel NNModel::zeros(int L, int N_l, int N_h)
{
    NNModel m;
    m.L = L;
    m.N_l = N_l;
    m.N_h = N_h;
    const auto sizes = m.layer_sizes();
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        DenseLayer layer;
        layer.n_in = sizes[k];
        layer.n_out = sizes[k + 1];
        layer.w.assign(static_cast<std::size_t>(layer.n_in) * static_cast<std::size_t>(layer.n_out), 0.0);
        layer.b.assign(static_cast<std::size_t>(layer.n_out), 0.0);
        layer.act = k + 2 == sizes.size() ? Activation::identity : Activation::relu;
        m.layers.push_back(std::move(layer));
    }
    m.lin.taps.assign(static_cast<std::size_t>(L), cd{});
    m.validate();
    return m;
}

void nn_window(const NNModel& m, const ComplexSeq& x, std::size_t n, std::span<double> out)
{
    const double inv = 1.0 / std::sqrt(m.x_var);
    for (int l = 0; l < m.L; ++l) {
        const cd v = (x[n - static_cast<std::size_t>(l)] - m.x_mean) * inv;
        out[2 * static_cast<std::size_t>(l)] = v.real();
        out[2 * static_cast<std::size_t>(l) + 1] = v.imag();
    }
}

namespace {

template <class Mul, class Add, class Relu>
std::array<double, 2> forward_impl(const NNModel& m, std::span<const double> window, Mul mul, Add add, Relu relu)
{
    if (window.size() != static_cast<std::size_t>(2 * m.L)) {
        throw ConfigError("nn_forward: window has " + std::to_string(window.size()) + " values, expected 2L = " +
                          std::to_string(2 * m.L));
    }
    std::vector<double> cur(window.begin(), window.end());
    std::vector<double> next;
    for (const auto& layer : m.layers) {
        next.assign(static_cast<std::size_t>(layer.n_out), 0.0);
        for (int o = 0; o < layer.n_out; ++o) {
            double acc = mul(layer.weight(o, 0), cur[0]);
            for (int i = 1; i < layer.n_in; ++i) {
                acc = add(acc, mul(layer.weight(o, i), cur[static_cast<std::size_t>(i)]));
            }
            acc = add(acc, layer.b[static_cast<std::size_t>(o)]);
            next[static_cast<std::size_t>(o)] = layer.act == Activation::relu ? relu(acc) : acc;
        }
        cur.swap(next);
    }
    return {cur[0], cur[1]};
}

} // namespace

std::array<double, 2> nn_forward(const NNModel& m, std::span<const double> window)
{
    return forward_impl(
        m, window, [](double a, double b) { return a * b; }, [](double a, double b) { return a + b; },
        [](double a) { return a > 0.0 ? a : 0.0; });
}

std::array<double, 2> nn_forward_counted(const NNModel& m, std::span<const double> window, OpCounter& ops)
{
    return forward_impl(
        m, window, [&ops](double a, double b) { return counted::mul(a, b, ops); },
        [&ops](double a, double b) { return counted::add(a, b, ops); },
        [&ops](double a) { return counted::relu(a, ops); });
}

cd nn_denormalize(const NNModel& m, const std::array<double, 2>& out)
{
    return cd{std::ldexp(out[0], m.denorm_shift_re), std::ldexp(out[1], m.denorm_shift_im)} + m.denorm_mean;
}

Reconstruction apply_nn(const NNModel& m, const ComplexSeq& x)
{
    m.validate();
    Reconstruction out = apply_linear(m.lin, x);
    std::vector<double> window(static_cast<std::size_t>(2 * m.L));
    for (std::size_t n = out.first_valid; n < x.size(); ++n) {
        nn_window(m, x, n, window);
        out.signal[n] += nn_denormalize(m, nn_forward(m, window));
    }
    return out;
}

Reconstruction apply_nn_counted(const NNModel& m, const ComplexSeq& x, OpCounter& ops)
{
    m.validate();
    Reconstruction out = apply_linear_counted(m.lin, x, ops);
    std::vector<double> window(static_cast<std::size_t>(2 * m.L));
    for (std::size_t n = out.first_valid; n < x.size(); ++n) {
        nn_window(m, x, n, window);
        const cd nn = nn_denormalize(m, nn_forward_counted(m, window, ops));
        out.signal[n] = counted::cadd(out.signal[n], nn, ops);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fixed point

FxpFormat nn_default_format(int total_bits)
{
    return FxpFormat::with_integer_bits(total_bits, std::min(total_bits, kNnIntegerBits));
}

NNFxpModel quantize_nn(const NNModel& m, FxpFormat fmt)
{
    m.validate();
    fmt.validate();
    NNFxpModel q;
    q.fmt = fmt;
    q.L = m.L;
    q.shift_re = m.denorm_shift_re;
    q.shift_im = m.denorm_shift_im;
    q.x_mean = m.x_mean;
    q.x_var = m.x_var;
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        const auto& layer = m.layers[k];
        NNFxpLayer ql;
        ql.n_in = layer.n_in;
        ql.n_out = layer.n_out;
        ql.act = layer.act;
        for (double w : layer.w) {
            ql.w.push_back(quantize(w, fmt));
        }
        std::vector<double> bias = layer.b;
        if (k + 1 == m.layers.size()) {
            bias[0] += std::ldexp(m.denorm_mean.real(), -m.denorm_shift_re);
            bias[1] += std::ldexp(m.denorm_mean.imag(), -m.denorm_shift_im);
        }
        for (double b : bias) {
            ql.b.push_back(quantize(b, fmt));
        }
        q.layers.push_back(std::move(ql));
    }
    for (const auto& t : m.lin.taps) {
        q.lin_taps.push_back(quantize(t, fmt));
    }
    return q;
}

NnFxpInputs quantize_nn_inputs(const NNFxpModel& m, const ComplexSeq& x)
{
    NnFxpInputs in;
    in.raw.reserve(x.size());
    in.normalized.reserve(x.size());
    const double inv = 1.0 / std::sqrt(m.x_var);
    for (const auto& s : x.samples) {
        in.raw.push_back(quantize(s, m.fmt));
        in.normalized.push_back(quantize((s - m.x_mean) * inv, m.fmt));
    }
    return in;
}

std::vector<FxpReal> nn_fxp_window(const NNFxpModel& m, const NnFxpInputs& in, std::size_t n)
{
    std::vector<FxpReal> w;
    w.reserve(static_cast<std::size_t>(2 * m.L));
    for (int l = 0; l < m.L; ++l) {
        const auto& v = in.normalized[n - static_cast<std::size_t>(l)];
        w.push_back(v.re);
        w.push_back(v.im);
    }
    return w;
}

std::array<FxpReal, 2> nn_forward_fxp(const NNFxpModel& m, std::span<const FxpReal> window, const NnReductionPlan& plan)
{
    if (m.layers.empty() || window.size() != static_cast<std::size_t>(m.layers.front().n_in)) {
        throw ConfigError("nn_forward_fxp: window size does not match the first layer");
    }
    std::vector<FxpReal> cur(window.begin(), window.end());
    std::vector<FxpReal> next;
    std::vector<FxpReal> acc;
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        const auto& layer = m.layers[k];
        const int requested = plan.at(k);
        if (requested < 1) {
            throw ConfigError("nn_forward_fxp: lanes must be >= 1");
        }
        const auto lanes = static_cast<std::size_t>(std::min(requested, layer.n_in));
        next.clear();
        for (int o = 0; o < layer.n_out; ++o) {
            acc.assign(lanes, FxpReal{0, m.fmt});
            for (int i = 0; i < layer.n_in; ++i) {
                const FxpReal prod =
                    fxp_mul(layer.w[static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.n_in) +
                                    static_cast<std::size_t>(i)],
                            cur[static_cast<std::size_t>(i)]);
                const std::size_t lane = static_cast<std::size_t>(i) % lanes;
                acc[lane] = static_cast<std::size_t>(i) < lanes ? prod : fxp_add(acc[lane], prod);
            }
            FxpReal v = fxp_add(tree_sum(std::span<const FxpReal>(acc)), layer.b[static_cast<std::size_t>(o)]);
            if (layer.act == Activation::relu) {
                v = fxp_relu(v);
            }
            next.push_back(v);
        }
        cur.swap(next);
    }
    return {cur[0], cur[1]};
}

FxpComplex nn_combine_fxp(const NNFxpModel& m, const FxpComplex& linear, const std::array<FxpReal, 2>& nn_out)
{
    const FxpComplex nn{fxp_shift(nn_out[0], m.shift_re), fxp_shift(nn_out[1], m.shift_im)};
    return cadd(linear, nn);
}

FxpComplex hybrid_fxp_at(const NNFxpModel& m, const NnFxpInputs& in, std::size_t n, const NnReductionPlan& plan,
                         int linear_lanes)
{
    std::vector<FxpComplex> lin_window(static_cast<std::size_t>(m.L));
    for (int l = 0; l < m.L; ++l) {
        lin_window[static_cast<std::size_t>(l)] = in.raw[n - static_cast<std::size_t>(l)];
    }
    const FxpComplex lin = linear_fxp_at(m.lin_taps, lin_window, linear_lanes);
    const auto window = nn_fxp_window(m, in, n);
    return nn_combine_fxp(m, lin, nn_forward_fxp(m, window, plan));
}

std::vector<FxpComplex> apply_nn_fxp(const NNFxpModel& m, const NnFxpInputs& in, const NnReductionPlan& plan,
                                     int linear_lanes)
{
    const FxpComplex zero{FxpReal{0, m.fmt}, FxpReal{0, m.fmt}};
    std::vector<FxpComplex> out(in.raw.size(), zero);
    for (std::size_t n = static_cast<std::size_t>(m.L - 1); n < in.raw.size(); ++n) {
        out[n] = hybrid_fxp_at(m, in, n, plan, linear_lanes);
    }
    return out;
}

} // namespace sic
