#pragma once

// Building blocks shared by the CLI commands and the acceptance tests:
// train/test evaluation, fixed-point evaluation and sweep-cell selection.

#include <sic/config.hpp>
#include <sic/fxp.hpp>
#include <sic/linear.hpp>
#include <sic/nn.hpp>
#include <sic/poly.hpp>
#include <sic/signal.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sic {

Dataset dataset_from_config(const RunConfig& cfg);

/// C_dB of a reconstruction over the test portion [split, n).
double test_cdb(const Dataset& ds, const ComplexSeq& y_hat);
/// C_dB over the training portion, skipping samples before `first_valid`.
double train_cdb(const Dataset& ds, const ComplexSeq& y_hat, std::size_t first_valid);

/// Training-portion views of x and y.
ComplexSeq train_x(const Dataset& ds);
ComplexSeq train_y(const Dataset& ds);

LinModel fit_linear_train(const Dataset& ds, int L);
PolyModel fit_poly_train(const Dataset& ds, int P, int L);

ComplexSeq to_seq(std::span<const FxpComplex> v, double sample_rate_hz);

/// Fixed-point test C_dB at `total_bits` with the given integer bits.
double linear_fxp_cdb(const Dataset& ds, const LinModel& m, int total_bits, int integer_bits);
double poly_fxp_cdb(const Dataset& ds, const PolyModel& m, int total_bits, int integer_bits);
double nn_fxp_cdb(const Dataset& ds, const NNModel& m, int total_bits, int integer_bits);

struct SweepCell
{
    int a = 0; ///< L
    int b = 0; ///< P (poly) or N_h (network)
    double c_db = 0.0;
    std::uint64_t n_mul = 0;
    std::string error; ///< non-empty when the cell could not be evaluated
};

/// Smallest-multiplication cell whose C_dB is at least `threshold_db`; ties go
/// to the higher C_dB, then to the earlier cell. Failed cells are skipped.
std::optional<std::size_t> select_min_mult(std::span<const SweepCell> cells, double threshold_db);
/// Highest C_dB among evaluated cells; nullopt when none succeeded.
std::optional<double> max_cdb(std::span<const SweepCell> cells);

/// Runs `job(i)` for i in [0, n) on `workers` threads (0 = hardware
/// concurrency). Results are written by index, so ordering never depends on
/// scheduling. The exception of the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job);

} // namespace sic
