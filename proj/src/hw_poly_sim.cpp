#include <sic/hw.hpp>

#include <algorithm>

namespace sic {

namespace {

/// Basis-function unit: x^2 in the first cycle, then for each order p the
/// products x^2 * BF_{p-2,q-2} in batches of n_cpe_bf per cycle. Conjugates are
/// wiring and complete an order in the cycle its last product is formed.
class BfUnit
{
public:
    BfUnit(int P, int n_cpe_bf) : P_(P), n_bf_(n_cpe_bf) {}

    void start(const FxpComplex& x)
    {
        bf_.assign(static_cast<std::size_t>(bf_per_sample(P_)), x);
        bf_[static_cast<std::size_t>(bf_slot(1, 0))] = conj(x);
        x_ = x;
        p_ = 3;
        q_ = 2;
        first_ = true;
        done_ = false;
    }

    /// Advances one cycle; returns true once every basis function is formed.
    bool step()
    {
        if (done_) {
            return true;
        }
        if (first_) {
            first_ = false;
            if (P_ >= 3) {
                x2_ = cmul3(x_, x_);
            }
            done_ = P_ < 3;
            return done_;
        }
        for (int used = 0; used < n_bf_ && q_ <= p_; ++used, ++q_) {
            bf_[static_cast<std::size_t>(bf_slot(p_, q_))] = cmul3(x2_, bf_[static_cast<std::size_t>(bf_slot(p_ - 2, q_ - 2))]);
        }
        if (q_ > p_) {
            for (int q = 0; q <= (p_ - 1) / 2; ++q) {
                bf_[static_cast<std::size_t>(bf_slot(p_, q))] = conj(bf_[static_cast<std::size_t>(bf_slot(p_, p_ - q))]);
            }
            p_ += 2;
            q_ = (p_ + 1) / 2;
            done_ = p_ > P_;
        }
        return done_;
    }

    const std::vector<FxpComplex>& values() const { return bf_; }

private:
    int P_;
    int n_bf_;
    std::vector<FxpComplex> bf_;
    FxpComplex x_{};
    FxpComplex x2_{};
    int p_ = 3;
    int q_ = 2;
    bool first_ = true;
    bool done_ = false;
};

} // namespace

SimResult simulate_poly(const PolyFxpModel& m, const PolyHwConfig& cfg, std::span<const FxpComplex> xq, std::size_t n_end)
{
    cfg.validate();
    if (cfg.P != m.P || cfg.L != m.L) {
        throw ConfigError("simulate_poly: hardware config (P=" + std::to_string(cfg.P) + ", L=" + std::to_string(cfg.L) +
                          ") does not match the model (P=" + std::to_string(m.P) + ", L=" + std::to_string(m.L) + ")");
    }
    if (m.coeffs.size() != static_cast<std::size_t>(n_bf(m.P, m.L))) {
        throw DataError("simulate_poly: coefficient count does not match N_BF");
    }
    SimResult res;
    res.report = poly_hw_report(cfg);
    const std::size_t end = n_end == 0 ? xq.size() : std::min(n_end, xq.size());
    const auto first = static_cast<std::size_t>(m.L - 1);
    if (end <= first) {
        throw DataError("simulate_poly: no complete input window");
    }
    const FxpComplex zero{FxpReal{0, m.fmt}, FxpReal{0, m.fmt}};
    res.out.assign(xq.size(), zero);
    res.issue_cycle.assign(end - first, 0);
    res.output_cycle.assign(end - first, 0);

    const auto schedule = poly_term_schedule(m.P, m.L);
    const auto Ls = static_cast<std::size_t>(m.L);
    const std::size_t lanes = std::min<std::size_t>(static_cast<std::size_t>(cfg.n_cpe), schedule.size());
    std::vector<std::vector<std::size_t>> queue(lanes);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        queue[i % lanes].push_back(schedule[i]);
    }
    const std::uint64_t limit = 10 * static_cast<std::uint64_t>(*res.report.latency_analytical);

    BfBuffer<FxpComplex> buffer(m.P, m.L, zero);
    BfUnit bf_unit(m.P, cfg.n_cpe_bf);
    OpCounter ops;
    std::vector<FxpComplex> acc(lanes);
    std::vector<std::size_t> pos(lanes);
    std::uint64_t cycle = 0;
    for (std::size_t n = 0; n < end; ++n) {
        const std::uint64_t start = cycle;
        bf_unit.start(xq[n]);
        std::fill(pos.begin(), pos.end(), 0);
        bool fresh_ready = false;
        std::uint64_t last_mac = start;
        std::uint64_t idle = 0;
        for (;; ++cycle) {
            bool busy = false;
            bool progress = false;
            for (std::size_t j = 0; j < lanes; ++j) {
                if (pos[j] == queue[j].size()) {
                    continue;
                }
                busy = true;
                const std::size_t idx = queue[j][pos[j]];
                const std::size_t s = idx / Ls;
                const int l = static_cast<int>(idx % Ls);
                if (l == 0 && !fresh_ready) {
                    continue; // waits for the basis-function unit
                }
                const FxpComplex& bf = l == 0 ? bf_unit.values()[s] : buffer.at(l, s);
                const FxpComplex prod = cmul3(m.coeffs[idx], bf, &ops);
                acc[j] = pos[j] == 0 ? prod : cadd(acc[j], prod, &ops);
                ++pos[j];
                last_mac = cycle;
                progress = true;
            }
            // Basis functions formed in this cycle become usable in the next one.
            if (!fresh_ready && bf_unit.step()) {
                fresh_ready = true;
                progress = true;
            } else if (!fresh_ready) {
                progress = true;
            }
            if (!busy) {
                break;
            }
            idle = progress ? 0 : idle + 1;
            if (idle > limit) {
                throw ConstraintViolation("polynomial simulator deadlocked at cycle " + std::to_string(cycle) +
                                          " (sample " + std::to_string(n) + ")");
            }
        }
        // Adder tree in the cycle after the last MAC; the next sample starts there too.
        const FxpComplex y = tree_sum(std::span<const FxpComplex>(acc), &ops);
        cycle = last_mac + 1;
        if (n >= first) {
            res.out[n] = y;
            res.issue_cycle[n - first] = start;
            res.output_cycle[n - first] = cycle;
        }
        buffer.push(bf_unit.values());
    }

    const std::size_t count = end;
    res.report.latency_simulated = static_cast<int>(res.output_cycle[0] - res.issue_cycle[0] + 1);
    res.report.throughput_simulated = measured_throughput(res.output_cycle);
    if (ops.mul % count == 0 && ops.add % count == 0) {
        res.report.sim_ops_per_sample = OpCounter{ops.mul / count, ops.add / count};
    }
    return res;
}

} // namespace sic
