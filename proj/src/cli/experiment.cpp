#include <sic/errors.hpp>
#include <sic/experiment.hpp>
#include <sic/metrics.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace sic {

Dataset dataset_from_config(const RunConfig& cfg)
{
    TxChainConfig tx = cfg.tx;
    tx.seed = cfg.seed;
    return make_dataset(tx, cfg.ofdm, cfg.n_samples, cfg.resid_taps);
}

double test_cdb(const Dataset& ds, const ComplexSeq& y_hat)
{
    if (y_hat.size() != ds.size()) {
        throw DataError("reconstruction length " + std::to_string(y_hat.size()) + " does not match dataset length " +
                        std::to_string(ds.size()));
    }
    return c_db(ds.y.slice(ds.split_index, ds.size()), y_hat.slice(ds.split_index, ds.size()));
}

double train_cdb(const Dataset& ds, const ComplexSeq& y_hat, std::size_t first_valid)
{
    if (first_valid >= ds.split_index) {
        throw DataError("training portion shorter than the canceller window");
    }
    return c_db(ds.y.slice(first_valid, ds.split_index), y_hat.slice(first_valid, ds.split_index));
}

ComplexSeq train_x(const Dataset& ds) { return ds.x.slice(0, ds.split_index); }
ComplexSeq train_y(const Dataset& ds) { return ds.y.slice(0, ds.split_index); }

LinModel fit_linear_train(const Dataset& ds, int L) { return fit_linear(train_x(ds), train_y(ds), L); }

PolyModel fit_poly_train(const Dataset& ds, int P, int L) { return fit_poly(train_x(ds), train_y(ds), P, L); }

ComplexSeq to_seq(std::span<const FxpComplex> v, double sample_rate_hz)
{
    ComplexSeq s;
    s.sample_rate_hz = sample_rate_hz;
    s.samples.reserve(v.size());
    for (const auto& e : v) {
        s.samples.push_back(dequantize(e));
    }
    return s;
}

double linear_fxp_cdb(const Dataset& ds, const LinModel& m, int total_bits, int integer_bits)
{
    const auto fmt = FxpFormat::with_integer_bits(total_bits, std::min(total_bits, integer_bits));
    const auto taps = quantize(std::span<const cd>(m.taps), fmt);
    const auto xq = quantize(std::span<const cd>(ds.x.samples), fmt);
    return test_cdb(ds, to_seq(apply_linear_fxp(taps, xq), ds.x.sample_rate_hz));
}

double poly_fxp_cdb(const Dataset& ds, const PolyModel& m, int total_bits, int integer_bits)
{
    const auto fmt = FxpFormat::with_integer_bits(total_bits, std::min(total_bits, integer_bits));
    const PolyFxpModel q = quantize_poly(m, fmt, train_x(ds));
    std::vector<FxpComplex> xq;
    xq.reserve(ds.size());
    for (const auto& s : ds.x.samples) {
        xq.push_back(quantize_poly_input(q, s));
    }
    return test_cdb(ds, to_seq(apply_poly_fxp(q, xq), ds.x.sample_rate_hz));
}

double nn_fxp_cdb(const Dataset& ds, const NNModel& m, int total_bits, int integer_bits)
{
    const auto fmt = FxpFormat::with_integer_bits(total_bits, std::min(total_bits, integer_bits));
    const NNFxpModel q = quantize_nn(m, fmt);
    const NnFxpInputs in = quantize_nn_inputs(q, ds.x);
    return test_cdb(ds, to_seq(apply_nn_fxp(q, in), ds.x.sample_rate_hz));
}

std::optional<std::size_t> select_min_mult(std::span<const SweepCell> cells, double threshold_db)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        if (!c.error.empty() || !(c.c_db >= threshold_db)) {
            continue;
        }
        if (!best || c.n_mul < cells[*best].n_mul || (c.n_mul == cells[*best].n_mul && c.c_db > cells[*best].c_db)) {
            best = i;
        }
    }
    return best;
}

std::optional<double> max_cdb(std::span<const SweepCell> cells)
{
    std::optional<double> best;
    for (const auto& c : cells) {
        if (c.error.empty() && std::isfinite(c.c_db) && (!best || c.c_db > *best)) {
            best = c.c_db;
        }
    }
    return best;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job)
{
    std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers) : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::size_t first_index = n;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (i < first_index) {
                    first_index = i;
                    first_error = std::current_exception();
                }
            }
        }
    };
    if (threads == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(run);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace sic
