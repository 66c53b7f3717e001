#pragma once

// Hybrid neural-network canceller. A least-squares linear canceller removes the
// linear part of the self-interference; a feedforward network with ReLU hidden
// layers and an identity output layer models the remaining residual from the
// normalized input window
//   l0 = [Re x[n], Im x[n], Re x[n-1], Im x[n-1], ..., Re x[n-L+1], Im x[n-L+1]].
// The network output is denormalized with a power-of-two scale per component
// plus a mean offset and added to the linear reconstruction.

#include <sic/fxp.hpp>
#include <sic/linear.hpp>
#include <sic/signal.hpp>

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace sic {

enum class Activation
{
    relu,
    identity,
};

struct DenseLayer
{
    int n_in = 0;
    int n_out = 0;
    std::vector<double> w; ///< row-major n_out x n_in
    std::vector<double> b; ///< n_out
    Activation act = Activation::relu;

    double weight(int o, int i) const { return w[static_cast<std::size_t>(o) * static_cast<std::size_t>(n_in) + static_cast<std::size_t>(i)]; }
};

struct NNModel
{
    int L = 1;   ///< input window length (samples)
    int N_l = 1; ///< hidden layers
    int N_h = 1; ///< neurons per hidden layer
    std::vector<DenseLayer> layers; ///< N_l hidden layers followed by the 2-neuron output layer
    LinModel lin;

    cd x_mean{};       ///< input normalization: (x - x_mean) / sqrt(x_var)
    double x_var = 1.0;
    int denorm_shift_re = 0; ///< residual = 2^shift * output + denorm_mean, per component
    int denorm_shift_im = 0;
    cd denorm_mean{};

    /// Layer sizes NE_0 = 2L, NE_1..NE_{N_l} = N_h, NE_{N_l+1} = 2.
    std::vector<int> layer_sizes() const;
    /// Shape checks; throws ConfigError on a mismatch.
    void validate() const;

    /// Network with the right shapes and every weight, bias and tap zero.
    static NNModel zeros(int L, int N_l, int N_h);
};

/// Fills `out` (2L values) with the normalized window ending at sample n.
void nn_window(const NNModel& m, const ComplexSeq& x, std::size_t n, std::span<double> out);

/// Network output in normalized units.
std::array<double, 2> nn_forward(const NNModel& m, std::span<const double> window);

/// Same as nn_forward while tallying real operations: one multiplication per
/// weight, one addition per accumulation step, bias and ReLU.
std::array<double, 2> nn_forward_counted(const NNModel& m, std::span<const double> window, OpCounter& ops);

/// Maps a network output to signal units.
cd nn_denormalize(const NNModel& m, const std::array<double, 2>& out);

/// Hybrid reconstruction: apply_linear(x) + denormalized network output.
Reconstruction apply_nn(const NNModel& m, const ComplexSeq& x);

/// Hybrid reconstruction with operation counting (linear canceller, network and
/// the two combining additions; denormalization constants are folded).
Reconstruction apply_nn_counted(const NNModel& m, const ComplexSeq& x, OpCounter& ops);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig
{
    int batch_size = 32;
    double learning_rate = 0.004;
    int epochs = 50;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 1;
    bool keep_checkpoints = false; ///< store the model after every epoch

    void validate() const;
};

struct EpochLog
{
    int epoch = 0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    double c_db_total = 0.0; ///< hybrid cancellation on the test portion
};

struct TrainResult
{
    NNModel model;
    std::vector<EpochLog> log;
    std::vector<NNModel> checkpoints; ///< filled when keep_checkpoints is set
};

class TrainingDiverged : public DataError
{
public:
    TrainingDiverged(const std::string& what, int epoch) : DataError(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

/// Network inputs (2L x N) and normalized residual targets (2 x N).
struct NNData
{
    Eigen::MatrixXd X;
    Eigen::MatrixXd T;
};

/// Training pairs for samples [begin, end) of the dataset, with n >= L-1.
/// The residual is y - apply_linear(m.lin, x), mapped by the model's denormalization.
NNData nn_data(const NNModel& m, const Dataset& ds, std::size_t begin, std::size_t end);

/// Mean over samples of the squared error summed over both outputs.
double nn_mse(const NNModel& m, const NNData& d);

struct NNGradients
{
    double loss = 0.0;
    std::vector<Eigen::MatrixXd> dW; ///< per layer, n_out x n_in
    std::vector<Eigen::VectorXd> db;
};

/// Backpropagated gradient of nn_mse with respect to every weight and bias.
NNGradients nn_gradients(const NNModel& m, const NNData& d);

/// Two-step training: least-squares linear canceller on the training portion,
/// then mini-batch Adam on the normalized residual. Weights start from a
/// Glorot-uniform draw; the sample order of every epoch is a seeded shuffle.
TrainResult train_nn(const Dataset& ds, int L, int N_l, int N_h, const TrainConfig& cfg);

/// Initial model used by train_nn before any epoch (linear fit, statistics,
/// random weights). Exposed for tests.
NNModel init_nn(const Dataset& ds, int L, int N_l, int N_h, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Fixed-point inference

/// Partial-sum lanes per layer. Input i of a neuron is accumulated by lane
/// (i mod lanes) in ascending order; the lane sums go through tree_sum, then
/// the bias is added and the activation applied. Empty = one lane everywhere.
struct NnReductionPlan
{
    std::vector<int> lanes;

    int at(std::size_t layer) const { return layer < lanes.size() ? lanes[layer] : 1; }
};

struct NNFxpLayer
{
    int n_in = 0;
    int n_out = 0;
    std::vector<FxpReal> w; ///< row-major
    std::vector<FxpReal> b;
    Activation act = Activation::relu;
};

struct NNFxpModel
{
    FxpFormat fmt{};
    int L = 1;
    std::vector<NNFxpLayer> layers;
    std::vector<FxpComplex> lin_taps;
    int shift_re = 0;
    int shift_im = 0;
    cd x_mean{};
    double x_var = 1.0;
};

/// Integer bits (sign included) of the default network datapath format.
inline constexpr int kNnIntegerBits = 5;
FxpFormat nn_default_format(int total_bits);

/// Quantizes weights, biases and taps; the denormalization mean is folded into
/// the output-layer bias.
NNFxpModel quantize_nn(const NNModel& m, FxpFormat fmt);

struct NnFxpInputs
{
    std::vector<FxpComplex> raw;        ///< x, feeding the linear canceller
    std::vector<FxpComplex> normalized; ///< (x - mean)/sqrt(var), feeding the network
};

NnFxpInputs quantize_nn_inputs(const NNFxpModel& m, const ComplexSeq& x);

/// Network window for sample n from the quantized normalized inputs.
std::vector<FxpReal> nn_fxp_window(const NNFxpModel& m, const NnFxpInputs& in, std::size_t n);

/// Network output in normalized units; bias includes the folded mean.
std::array<FxpReal, 2> nn_forward_fxp(const NNFxpModel& m, std::span<const FxpReal> window,
                                      const NnReductionPlan& plan = {});

/// Linear output plus the network output shifted by the denormalization exponents.
FxpComplex nn_combine_fxp(const NNFxpModel& m, const FxpComplex& linear, const std::array<FxpReal, 2>& nn_out);

/// Full hybrid canceller for one output sample.
FxpComplex hybrid_fxp_at(const NNFxpModel& m, const NnFxpInputs& in, std::size_t n, const NnReductionPlan& plan = {},
                         int linear_lanes = 1);

/// Hybrid canceller over a sequence; outputs for n < L-1 are zero.
std::vector<FxpComplex> apply_nn_fxp(const NNFxpModel& m, const NnFxpInputs& in, const NnReductionPlan& plan = {},
                                     int linear_lanes = 1);

} // namespace sic
