#include <sic/hw.hpp>

#include <json.hpp>

#include <iomanip>
#include <numeric>
#include <sstream>

namespace sic {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

} // namespace

Rational Rational::make(std::int64_t num, std::int64_t den)
{
    if (den <= 0 || num < 0) {
        throw ConfigError("Rational: invalid value " + std::to_string(num) + "/" + std::to_string(den));
    }
    const std::int64_t g = std::gcd(num, den);
    return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

std::string Rational::to_string() const
{
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

std::string to_string(Schedule s) { return s == Schedule::nbn ? "NBN" : "IBI"; }

void StageConfig::validate() const
{
    if (ne_in < 1 || ne_out < 1 || n_pe < 1) {
        throw ConstraintViolation("stage sizes and N_PE must be positive");
    }
    if (schedule == Schedule::nbn && n_pe > ne_in && n_pe % ne_in != 0) {
        throw ConstraintViolation("NBN stage with N_PE > NE_in requires N_PE = k * NE_in (N_PE=" +
                                  std::to_string(n_pe) + ", NE_in=" + std::to_string(ne_in) + ")");
    }
    if (schedule == Schedule::ibi && n_pe > ne_out && n_pe % ne_out != 0) {
        throw ConstraintViolation("IBI stage with N_PE > NE_out requires N_PE = k * NE_out (N_PE=" +
                                  std::to_string(n_pe) + ", NE_out=" + std::to_string(ne_out) + ")");
    }
}

int StageConfig::cycles() const
{
    validate();
    if (schedule == Schedule::nbn) {
        return n_pe <= ne_in ? ne_out * ceil_div(ne_in, n_pe) : ceil_div(ne_out, n_pe / ne_in);
    }
    return n_pe <= ne_out ? ne_in * ceil_div(ne_out, n_pe) : ceil_div(ne_in, n_pe / ne_out);
}

int StageConfig::lanes() const
{
    validate();
    if (schedule == Schedule::nbn) {
        return std::min(n_pe, ne_in);
    }
    return n_pe > ne_out ? std::min(n_pe / ne_out, ne_in) : 1;
}

StageTiming stage_latency(const StageConfig& s)
{
    StageTiming t;
    t.cycles = s.cycles();
    t.latency = t.cycles + 1;
    if (s.schedule == Schedule::nbn) {
        t.first_latency = (s.n_pe <= s.ne_in ? ceil_div(s.ne_in, s.n_pe) : 1) + 1;
    } else {
        t.first_latency = t.latency;
    }
    t.throughput = Rational::make(1, t.cycles);
    return t;
}

std::vector<StageConfig> nn_stages(int L, int N_l, int N_h, const NnHwConfig& cfg)
{
    if (L < 1 || N_l < 1 || N_h < 1) {
        throw ConfigError("NN dimensions must be positive");
    }
    if (cfg.n_pe.size() != static_cast<std::size_t>(N_l + 1)) {
        throw ConfigError("hardware config lists " + std::to_string(cfg.n_pe.size()) +
                          " PE counts, the network has " + std::to_string(N_l + 1) + " layers");
    }
    if (cfg.n_cpe_linear < 1) {
        throw ConstraintViolation("N_CPE of the linear canceller must be >= 1");
    }
    std::vector<StageConfig> stages;
    for (int k = 0; k <= N_l; ++k) {
        StageConfig s;
        s.schedule = k % 2 == 0 ? Schedule::nbn : Schedule::ibi;
        s.ne_in = k == 0 ? 2 * L : N_h;
        s.ne_out = k == N_l ? 2 : N_h;
        s.n_pe = cfg.n_pe[static_cast<std::size_t>(k)];
        s.validate();
        stages.push_back(s);
    }
    return stages;
}

NnReductionPlan nn_reduction_plan(const std::vector<StageConfig>& stages)
{
    NnReductionPlan plan;
    for (const auto& s : stages) {
        plan.lanes.push_back(s.lanes());
    }
    return plan;
}

void PolyHwConfig::validate() const
{
    check_order(P);
    if (L < 1) {
        throw ConfigError("poly hardware: L must be >= 1");
    }
    if (n_cpe < 1 || n_cpe_bf < 1) {
        throw ConstraintViolation("poly hardware: N_CPE and N_CPE_BF must be >= 1");
    }
    if (n_cpe_bf > (P + 1) / 2) {
        throw ConstraintViolation("poly hardware: N_CPE_BF <= (P+1)/2 required (N_CPE_BF=" + std::to_string(n_cpe_bf) +
                                  ", P=" + std::to_string(P) + ")");
    }
}

HwReport nn_pipeline_report(int L, int N_l, int N_h, const NnHwConfig& cfg)
{
    HwReport r;
    r.architecture = "nn";
    r.stages = nn_stages(L, N_l, N_h, cfg);
    r.linear_latency = ceil_div(L, cfg.n_cpe_linear);
    int worst = r.linear_latency;
    for (const auto& s : r.stages) {
        r.stage_timing.push_back(stage_latency(s));
        worst = std::max(worst, r.stage_timing.back().cycles);
    }
    r.throughput = Rational::make(1, worst);
    if (r.stages.size() % 2 == 0) {
        int sum = 0;
        for (std::size_t k = 0; k < r.stages.size(); k += 2) {
            sum += r.stage_timing[k].first_latency + r.stage_timing[k + 1].latency;
        }
        r.latency_analytical = std::max(r.linear_latency, sum);
    }
    r.ops = complexity_nn(L, N_l, N_h);
    r.clock_hz = cfg.clock_hz;
    return r;
}

HwReport poly_hw_report(const PolyHwConfig& cfg)
{
    cfg.validate();
    HwReport r;
    r.architecture = "poly";
    const int per = bf_per_sample(cfg.P);
    const int nbf = n_bf(cfg.P, cfg.L);
    int l_new = 1;
    for (int p = 3; p <= cfg.P; p += 2) {
        l_new += ceil_div(p + 1, 2 * cfg.n_cpe_bf);
    }
    const int l_old = ceil_div((cfg.L - 1) * per, cfg.n_cpe);
    const int l_poly = l_old >= l_new ? ceil_div(nbf, cfg.n_cpe) + 1 : l_new + ceil_div(per, cfg.n_cpe) + 1;
    r.bf_new_latency = l_new;
    r.bf_old_latency = l_old;
    r.latency_analytical = l_poly;
    r.throughput = Rational::make(1, l_poly - 1);
    r.ops = complexity_poly(cfg.L, cfg.P);
    r.clock_hz = cfg.clock_hz;
    return r;
}

std::string hw_report_json(const HwReport& r)
{
    nlohmann::ordered_json j;
    j["architecture"] = r.architecture;
    if (!r.stages.empty()) {
        auto& st = j["stages"] = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < r.stages.size(); ++k) {
            const auto& s = r.stages[k];
            const auto& t = r.stage_timing[k];
            st.push_back({{"layer", k + 1},
                          {"schedule", to_string(s.schedule)},
                          {"ne_in", s.ne_in},
                          {"ne_out", s.ne_out},
                          {"n_pe", s.n_pe},
                          {"cycles", t.cycles},
                          {"latency", t.latency},
                          {"first_latency", t.first_latency},
                          {"throughput", t.throughput.to_string()}});
        }
        j["linear_latency"] = r.linear_latency;
    }
    if (r.bf_new_latency) {
        j["bf_new_latency"] = *r.bf_new_latency;
        j["bf_old_latency"] = *r.bf_old_latency;
    }
    j["throughput_samples_per_cycle"] = r.throughput.to_string();
    j["latency_cycles"] = r.latency_analytical ? nlohmann::ordered_json(*r.latency_analytical) : nullptr;
    if (r.latency_simulated) {
        j["simulated"] = {{"latency_cycles", *r.latency_simulated},
                          {"throughput_samples_per_cycle", r.throughput_simulated->to_string()}};
        if (r.sim_ops_per_sample) {
            j["simulated"]["real_mults_per_sample"] = r.sim_ops_per_sample->mul;
            j["simulated"]["real_adds_per_sample"] = r.sim_ops_per_sample->add;
        }
    }
    j["complexity"] = {{"real_adds", r.ops.n_add}, {"real_mults", r.ops.n_mul}};
    if (r.architecture == "poly") {
        j["complexity"]["n_bf"] = r.ops.n_bf;
        j["complexity"]["n_mul_bf"] = r.ops.n_mul_bf;
    }
    if (r.clock_hz) {
        j["clock_hz"] = *r.clock_hz;
        if (r.latency_analytical) {
            j["latency_ns"] = *r.latency_analytical * 1e9 / *r.clock_hz;
        }
        j["throughput_msamples_per_s"] = r.throughput.value() * *r.clock_hz / 1e6;
    }
    return j.dump(2) + "\n";
}

std::string hw_report_text(const HwReport& r)
{
    std::ostringstream os;
    auto row = [&os](const std::string& name, const std::string& analytical, const std::string& simulated) {
        os << std::left << std::setw(32) << name << std::setw(14) << analytical << simulated << "\n";
    };
    os << "architecture: " << r.architecture << "\n";
    row("", "analytical", "simulated");
    row("Throughput (samples/cycle)", r.throughput.to_string(),
        r.throughput_simulated ? r.throughput_simulated->to_string() : "-");
    row("Latency (cycles)", r.latency_analytical ? std::to_string(*r.latency_analytical) : "n/a",
        r.latency_simulated ? std::to_string(*r.latency_simulated) : "-");
    row("Real additions / sample", std::to_string(r.ops.n_add),
        r.sim_ops_per_sample ? std::to_string(r.sim_ops_per_sample->add) : "-");
    row("Real multiplications / sample", std::to_string(r.ops.n_mul),
        r.sim_ops_per_sample ? std::to_string(r.sim_ops_per_sample->mul) : "-");
    if (r.bf_new_latency) {
        row("L_BF,new (cycles)", std::to_string(*r.bf_new_latency), "");
        row("L_BF,old (cycles)", std::to_string(*r.bf_old_latency), "");
    }
    for (std::size_t k = 0; k < r.stages.size(); ++k) {
        const auto& s = r.stages[k];
        const auto& t = r.stage_timing[k];
        std::ostringstream name;
        name << "Layer " << k + 1 << " " << to_string(s.schedule) << " (" << s.ne_in << "->" << s.ne_out
             << ", N_PE=" << s.n_pe << ")";
        row(name.str(), "L=" + std::to_string(t.latency) + " first=" + std::to_string(t.first_latency),
            "T=" + t.throughput.to_string());
    }
    if (!r.stages.empty()) {
        row("Linear canceller (cycles)", std::to_string(r.linear_latency), "");
    }
    return os.str();
}

} // namespace sic
