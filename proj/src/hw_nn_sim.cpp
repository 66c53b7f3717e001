#include <sic/hw.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace sic {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

struct Slot
{
    bool valid = false;
    std::size_t sample = 0;
    FxpReal value{};
};

/// Partial sums waiting in the register between the PE array and the output interface.
struct Pending
{
    std::size_t sample = 0;
    std::vector<int> neurons;
    std::vector<std::vector<FxpReal>> lanes; ///< per neuron
};

struct OutputParts
{
    std::optional<FxpReal> nn[2];
    std::uint64_t nn_cycle = 0;
    std::optional<FxpComplex> lin;
    std::uint64_t lin_cycle = 0;
};

class NnPipeline
{
public:
    NnPipeline(const NNFxpModel& m, const std::vector<StageConfig>& stages, int n_cpe_linear, const NnFxpInputs& in,
               std::size_t first, std::size_t end)
        : m_(m), in_(in), first_(first), end_(end), n_lin_(n_cpe_linear)
    {
        for (std::size_t k = 0; k < stages.size(); ++k) {
            Stage s;
            s.cfg = stages[k];
            s.layer = &m.layers[k];
            s.cycles = s.cfg.cycles();
            s.next = first;
            stages_.push_back(std::move(s));
        }
        links_.resize(stages.size());
        for (std::size_t k = 1; k < stages.size(); ++k) {
            links_[k].resize(static_cast<std::size_t>(stages[k].ne_in));
        }
        lin_steps_ = ceil_div(m.L, n_lin_);
        next_issue_ = first;
    }

    void run(std::uint64_t deadlock_limit, SimResult& res)
    {
        const std::size_t total = end_ - first_;
        res.issue_cycle.assign(total, 0);
        res.output_cycle.assign(total, 0);
        std::size_t done = 0;
        std::uint64_t last_progress = 0;
        for (cycle_ = 0; done < total; ++cycle_) {
            progress_ = false;
            for (std::size_t k = stages_.size(); k-- > 0;) {
                step_stage(k);
            }
            step_linear();
            issue(res);
            done += collect(res);
            if (progress_) {
                last_progress = cycle_;
            } else if (cycle_ - last_progress > deadlock_limit) {
                throw ConstraintViolation("network pipeline simulator deadlocked at cycle " + std::to_string(cycle_) +
                                          ":\n" + trace());
            }
        }
    }

    OpCounter ops;

private:
    struct Stage
    {
        StageConfig cfg;
        const NNFxpLayer* layer = nullptr;
        int cycles = 0;
        bool active = false;
        std::size_t sample = 0;
        std::size_t next = 0; ///< next sample this stage will take
        int step = 0;
        bool stepped = false;
        std::vector<FxpReal> latched;           ///< NBN input vector
        std::vector<std::vector<FxpReal>> acc;  ///< per neuron, per lane
        std::optional<Pending> pending;
    };

    FxpReal weight(const Stage& s, int o, int i) const
    {
        return s.layer->w[static_cast<std::size_t>(o) * static_cast<std::size_t>(s.cfg.ne_in) +
                          static_cast<std::size_t>(i)];
    }

    FxpReal accumulate(const FxpReal& acc, const FxpReal& prod, bool first)
    {
        return first ? prod : fxp_add(acc, prod, &ops);
    }

    /// Output interface: lane reduction, bias, activation, then write.
    bool drain(std::size_t k)
    {
        Stage& s = stages_[k];
        if (!s.pending) {
            return true;
        }
        const bool final = k + 1 == stages_.size();
        if (!final) {
            for (int o : s.pending->neurons) {
                if (links_[k + 1][static_cast<std::size_t>(o)].valid) {
                    return false;
                }
            }
        }
        for (std::size_t j = 0; j < s.pending->neurons.size(); ++j) {
            const int o = s.pending->neurons[j];
            FxpReal v = fxp_add(tree_sum(std::span<const FxpReal>(s.pending->lanes[j]), &ops),
                                s.layer->b[static_cast<std::size_t>(o)], &ops);
            if (s.layer->act == Activation::relu) {
                v = fxp_relu(v);
                ++ops.add;
            }
            if (final) {
                auto& parts = outputs_[s.pending->sample];
                parts.nn[o] = v;
                parts.nn_cycle = cycle_;
            } else {
                links_[k + 1][static_cast<std::size_t>(o)] = {true, s.pending->sample, v};
            }
        }
        s.pending.reset();
        progress_ = true;
        return true;
    }

    bool inputs_ready(std::size_t k, int i) const
    {
        const Slot& slot = links_[k][static_cast<std::size_t>(i)];
        return slot.valid && slot.sample == stages_[k].sample;
    }

    bool try_latch(std::size_t k)
    {
        Stage& s = stages_[k];
        if (k == 0) {
            return false; // stage 0 is fed by issue()
        }
        for (const auto& slot : links_[k]) {
            if (!slot.valid || slot.sample != s.next) {
                return false;
            }
        }
        s.latched.clear();
        for (auto& slot : links_[k]) {
            s.latched.push_back(slot.value);
            slot.valid = false;
        }
        begin_sample(s);
        return true;
    }

    void begin_sample(Stage& s)
    {
        s.active = true;
        s.sample = s.next++;
        s.step = 0;
        progress_ = true;
    }

    void mac_step(std::size_t k)
    {
        Stage& s = stages_[k];
        const StageConfig& c = s.cfg;
        const bool emits_now = emits(s);
        if (emits_now && s.pending) {
            return; // output register still occupied
        }
        if (c.schedule == Schedule::nbn) {
            if (c.n_pe <= c.ne_in) {
                const int cg = ceil_div(c.ne_in, c.n_pe);
                const int o = s.step / cg;
                const int sub = s.step % cg;
                if (sub == 0) {
                    s.acc.assign(1, std::vector<FxpReal>(static_cast<std::size_t>(c.n_pe)));
                }
                for (int j = 0; j < c.n_pe; ++j) {
                    const int i = sub * c.n_pe + j;
                    if (i >= c.ne_in) {
                        break;
                    }
                    const FxpReal prod = fxp_mul(weight(s, o, i), s.latched[static_cast<std::size_t>(i)], &ops);
                    auto& a = s.acc[0][static_cast<std::size_t>(j)];
                    a = accumulate(a, prod, sub == 0);
                }
                if (sub == cg - 1) {
                    s.pending = Pending{s.sample, {o}, {s.acc[0]}};
                }
            } else {
                const int kk = c.n_pe / c.ne_in;
                Pending p{s.sample, {}, {}};
                for (int g = 0; g < kk; ++g) {
                    const int o = s.step * kk + g;
                    if (o >= c.ne_out) {
                        break;
                    }
                    std::vector<FxpReal> lanes;
                    for (int i = 0; i < c.ne_in; ++i) {
                        lanes.push_back(fxp_mul(weight(s, o, i), s.latched[static_cast<std::size_t>(i)], &ops));
                    }
                    p.neurons.push_back(o);
                    p.lanes.push_back(std::move(lanes));
                }
                s.pending = std::move(p);
            }
        } else {
            if (c.n_pe <= c.ne_out) {
                const int cg = ceil_div(c.ne_out, c.n_pe);
                const int i = s.step / cg;
                const int sub = s.step % cg;
                if (!inputs_ready(k, i)) {
                    return;
                }
                if (s.step == 0) {
                    s.acc.assign(static_cast<std::size_t>(c.ne_out), std::vector<FxpReal>(1));
                }
                const FxpReal in = links_[k][static_cast<std::size_t>(i)].value;
                for (int j = 0; j < c.n_pe; ++j) {
                    const int o = sub * c.n_pe + j;
                    if (o >= c.ne_out) {
                        break;
                    }
                    const FxpReal prod = fxp_mul(weight(s, o, i), in, &ops);
                    auto& a = s.acc[static_cast<std::size_t>(o)][0];
                    a = accumulate(a, prod, i == 0);
                }
                if (sub == cg - 1) {
                    links_[k][static_cast<std::size_t>(i)].valid = false;
                }
            } else {
                const int kk = c.n_pe / c.ne_out;
                const int lanes = std::min(kk, c.ne_in);
                for (int g = 0; g < kk; ++g) {
                    const int i = s.step * kk + g;
                    if (i < c.ne_in && !inputs_ready(k, i)) {
                        return;
                    }
                }
                if (s.step == 0) {
                    s.acc.assign(static_cast<std::size_t>(c.ne_out), std::vector<FxpReal>(static_cast<std::size_t>(lanes)));
                }
                for (int g = 0; g < kk; ++g) {
                    const int i = s.step * kk + g;
                    if (i >= c.ne_in) {
                        break;
                    }
                    const FxpReal in = links_[k][static_cast<std::size_t>(i)].value;
                    for (int o = 0; o < c.ne_out; ++o) {
                        const FxpReal prod = fxp_mul(weight(s, o, i), in, &ops);
                        auto& a = s.acc[static_cast<std::size_t>(o)][static_cast<std::size_t>(g)];
                        a = accumulate(a, prod, s.step == 0);
                    }
                    links_[k][static_cast<std::size_t>(i)].valid = false;
                }
            }
            if (emits_now) {
                Pending p{s.sample, {}, {}};
                for (int o = 0; o < c.ne_out; ++o) {
                    p.neurons.push_back(o);
                    p.lanes.push_back(s.acc[static_cast<std::size_t>(o)]);
                }
                s.pending = std::move(p);
            }
        }
        s.stepped = true;
        progress_ = true;
        if (++s.step == s.cycles) {
            s.active = false;
        }
    }

    bool emits(const Stage& s) const
    {
        const StageConfig& c = s.cfg;
        if (c.schedule == Schedule::nbn) {
            if (c.n_pe <= c.ne_in) {
                const int cg = ceil_div(c.ne_in, c.n_pe);
                return s.step % cg == cg - 1;
            }
            return true;
        }
        return s.step == s.cycles - 1;
    }

    void step_stage(std::size_t k)
    {
        Stage& s = stages_[k];
        s.stepped = false;
        drain(k);
        if (!s.active && s.next < end_ && k > 0 && s.cfg.schedule == Schedule::nbn) {
            try_latch(k);
        }
        if (!s.active && s.next < end_ && s.cfg.schedule == Schedule::ibi) {
            begin_sample(s);
        }
        if (s.active) {
            mac_step(k);
        }
    }

    void step_linear()
    {
        lin_stepped_ = false;
        if (!lin_active_) {
            return;
        }
        const auto L = static_cast<std::size_t>(m_.L);
        for (int j = 0; j < n_lin_; ++j) {
            const std::size_t l = static_cast<std::size_t>(lin_step_ * n_lin_ + j);
            if (l >= L) {
                break;
            }
            const FxpComplex prod = cmul3(m_.lin_taps[l], in_.raw[lin_sample_ - l], &ops);
            auto& a = lin_acc_[static_cast<std::size_t>(j)];
            a = lin_step_ == 0 ? prod : cadd(a, prod, &ops);
        }
        lin_stepped_ = true;
        progress_ = true;
        if (++lin_step_ == lin_steps_) {
            const std::size_t lanes = std::min<std::size_t>(static_cast<std::size_t>(n_lin_), L);
            auto& parts = outputs_[lin_sample_];
            parts.lin = tree_sum(std::span<const FxpComplex>(lin_acc_.data(), lanes), &ops);
            parts.lin_cycle = cycle_;
            lin_active_ = false;
        }
    }

    void issue(SimResult& res)
    {
        Stage& s0 = stages_[0];
        if (next_issue_ >= end_ || s0.active || s0.stepped || lin_active_ || lin_stepped_) {
            return;
        }
        const std::size_t n = next_issue_++;
        res.issue_cycle[n - first_] = cycle_;
        s0.latched = nn_fxp_window(m_, in_, n);
        s0.next = n;
        begin_sample(s0);
        mac_step(0);
        lin_active_ = true;
        lin_sample_ = n;
        lin_step_ = 0;
        lin_acc_.assign(static_cast<std::size_t>(n_lin_), FxpComplex{});
        step_linear();
    }

    std::size_t collect(SimResult& res)
    {
        std::size_t done = 0;
        for (auto it = outputs_.begin(); it != outputs_.end();) {
            auto& parts = it->second;
            if (parts.lin && parts.nn[0] && parts.nn[1]) {
                res.out[it->first] = nn_combine_fxp(m_, *parts.lin, {*parts.nn[0], *parts.nn[1]});
                ops.add += 2;
                res.output_cycle[it->first - first_] = std::max(parts.lin_cycle, parts.nn_cycle);
                it = outputs_.erase(it);
                ++done;
            } else {
                ++it;
            }
        }
        return done;
    }

    std::string trace() const
    {
        std::ostringstream os;
        for (std::size_t k = 0; k < stages_.size(); ++k) {
            const Stage& s = stages_[k];
            os << "  layer " << k + 1 << " " << to_string(s.cfg.schedule) << ": active=" << s.active
               << " sample=" << s.sample << " step=" << s.step << "/" << s.cycles
               << " pending=" << (s.pending ? "yes" : "no") << "\n";
        }
        os << "  linear: active=" << lin_active_ << " next_issue=" << next_issue_ << "\n";
        return os.str();
    }

    const NNFxpModel& m_;
    const NnFxpInputs& in_;
    std::size_t first_;
    std::size_t end_;
    int n_lin_;
    std::vector<Stage> stages_;
    std::vector<std::vector<Slot>> links_; ///< links_[k] feeds stage k (k >= 1)
    std::map<std::size_t, OutputParts> outputs_;
    std::uint64_t cycle_ = 0;
    bool progress_ = false;

    bool lin_active_ = false;
    bool lin_stepped_ = false;
    std::size_t lin_sample_ = 0;
    int lin_step_ = 0;
    int lin_steps_ = 1;
    std::vector<FxpComplex> lin_acc_;
    std::size_t next_issue_ = 0;
};

} // namespace

Rational measured_throughput(const std::vector<std::uint64_t>& output_cycle)
{
    const std::size_t n = output_cycle.size();
    if (n < 2) {
        return Rational::make(0, 1);
    }
    const std::size_t h = n / 2;
    const std::size_t from = h == n - 1 ? 0 : h;
    return Rational::make(static_cast<std::int64_t>(n - 1 - from),
                          static_cast<std::int64_t>(output_cycle[n - 1] - output_cycle[from]));
}

SimResult simulate_nn_pipeline(const NNFxpModel& m, int N_l, int N_h, const NnHwConfig& cfg, const NnFxpInputs& in,
                               std::size_t n_end)
{
    SimResult res;
    res.report = nn_pipeline_report(m.L, N_l, N_h, cfg);
    if (m.layers.size() != res.report.stages.size()) {
        throw ConfigError("simulate_nn_pipeline: model has " + std::to_string(m.layers.size()) +
                          " layers, hardware config describes " + std::to_string(res.report.stages.size()));
    }
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        if (m.layers[k].n_in != res.report.stages[k].ne_in || m.layers[k].n_out != res.report.stages[k].ne_out) {
            throw ConfigError("simulate_nn_pipeline: layer " + std::to_string(k + 1) +
                              " shape does not match the hardware config");
        }
    }
    const std::size_t end = n_end == 0 ? in.raw.size() : std::min(n_end, in.raw.size());
    const auto first = static_cast<std::size_t>(m.L - 1);
    if (end <= first) {
        throw DataError("simulate_nn_pipeline: no complete input window");
    }
    const FxpComplex zero{FxpReal{0, m.fmt}, FxpReal{0, m.fmt}};
    res.out.assign(in.raw.size(), zero);

    int bound = res.report.latency_analytical.value_or(0);
    if (bound == 0) {
        bound = res.report.linear_latency;
        for (const auto& t : res.report.stage_timing) {
            bound += t.latency;
        }
    }
    NnPipeline pipe(m, res.report.stages, cfg.n_cpe_linear, in, first, end);
    pipe.run(10 * static_cast<std::uint64_t>(bound), res);

    const std::size_t count = end - first;
    res.report.latency_simulated = static_cast<int>(res.output_cycle[0] - res.issue_cycle[0] + 1);
    res.report.throughput_simulated = measured_throughput(res.output_cycle);
    if (pipe.ops.mul % count == 0 && pipe.ops.add % count == 0) {
        res.report.sim_ops_per_sample = OpCounter{pipe.ops.mul / count, pipe.ops.add / count};
    }
    return res;
}

} // namespace sic
