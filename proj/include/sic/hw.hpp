#pragma once

// Cycle models of the two canceller accelerators.
//
// Network accelerator: one macro-pipeline stage per layer, alternating
// neuron-by-neuron (NBN) and input-by-input (IBI) schedules starting with NBN,
// plus a linear-canceller unit running in parallel. Polynomial accelerator: a
// basis-function unit with N_CPE_BF complex multipliers feeding N_CPE complex
// MAC units that share a circular basis-function buffer.
//
// Both come in two levels: closed-form latency/throughput and a cycle-stepped
// simulator that also produces the fixed-point datapath output.

#include <sic/fxp.hpp>
#include <sic/metrics.hpp>
#include <sic/nn.hpp>
#include <sic/poly.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sic {

/// Exact non-negative rational (throughputs in samples/cycle).
struct Rational
{
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t num, std::int64_t den);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const;
    bool operator==(const Rational&) const = default;
};

enum class Schedule
{
    nbn,
    ibi,
};

std::string to_string(Schedule s);

struct StageConfig
{
    Schedule schedule = Schedule::nbn;
    int ne_in = 1;
    int ne_out = 1;
    int n_pe = 1;

    /// NBN with N_PE > NE_in needs N_PE = k NE_in; IBI with N_PE > NE_out needs
    /// N_PE = k NE_out. Throws ConstraintViolation quoting the rule.
    void validate() const;
    /// PE-array cycles per sample as issued by the stage controller:
    ///   NBN: NE_out * ceil(NE_in / N_PE), or ceil(NE_out / k) when N_PE = k NE_in;
    ///   IBI: NE_in * ceil(NE_out / N_PE), or ceil(NE_in / k) when N_PE = k NE_out.
    int cycles() const;
    /// Partial-sum lanes per neuron of this schedule (see NnReductionPlan).
    int lanes() const;
};

struct StageTiming
{
    int latency = 0;       ///< L_l: cycles until the last output of a sample is written
    int first_latency = 0; ///< L_{l,first}: cycles until the first output is written
    int cycles = 0;
    Rational throughput;   ///< 1 / cycles
};

StageTiming stage_latency(const StageConfig& s);

struct NnHwConfig
{
    std::vector<int> n_pe;  ///< one entry per layer (hidden layers and output layer)
    int n_cpe_linear = 1;
    std::optional<double> clock_hz;
};

/// Stage list for a network with the given dimensions.
std::vector<StageConfig> nn_stages(int L, int N_l, int N_h, const NnHwConfig& cfg);
NnReductionPlan nn_reduction_plan(const std::vector<StageConfig>& stages);

struct PolyHwConfig
{
    int P = 7;
    int L = 3;
    int n_cpe = 10;
    int n_cpe_bf = 3;
    std::optional<double> clock_hz;

    void validate() const;
};

struct HwReport
{
    std::string architecture; ///< "nn" or "poly"
    std::vector<StageConfig> stages;
    std::vector<StageTiming> stage_timing;
    int linear_latency = 0;
    Rational throughput;                     ///< analytical
    std::optional<int> latency_analytical;   ///< closed form when defined
    std::optional<int> bf_new_latency;       ///< poly only
    std::optional<int> bf_old_latency;       ///< poly only
    std::optional<int> latency_simulated;    ///< first sample through an empty pipeline
    std::optional<Rational> throughput_simulated;
    std::optional<OpCounter> sim_ops_per_sample;
    ComplexityReport ops;
    std::optional<double> clock_hz;
};

/// Closed-form report. The overall latency max(L_lin, sum over NBN/IBI pairs of
/// L_first(NBN) + L(IBI)) is only given when the stage count is even.
HwReport nn_pipeline_report(int L, int N_l, int N_h, const NnHwConfig& cfg);

/// Closed-form report:
///   L_BF,new = 1 + sum_{p=3..P} ceil((p+1) / (2 N_CPE_BF))
///   L_BF,old = ceil((L-1) N_BF / (L N_CPE))
///   L_poly = ceil(N_BF / N_CPE) + 1                 if L_BF,old >= L_BF,new
///          = L_BF,new + ceil(N_BF / (L N_CPE)) + 1  otherwise
///   T = 1 / (L_poly - 1)
HwReport poly_hw_report(const PolyHwConfig& cfg);

std::string hw_report_json(const HwReport& r);
/// Aligned text table with Throughput and Latency rows.
std::string hw_report_text(const HwReport& r);

struct SimResult
{
    std::vector<FxpComplex> out;             ///< same indexing as the reference evaluators
    std::vector<std::uint64_t> issue_cycle;  ///< per simulated sample
    std::vector<std::uint64_t> output_cycle; ///< per simulated sample
    HwReport report;
};

/// Output rate over the second half of a run: samples / cycles.
Rational measured_throughput(const std::vector<std::uint64_t>& output_cycle);

/// Simulates samples n = L-1 .. n_end-1 (n_end = 0 means all). The pipeline
/// input always has a sample waiting, so the measured interval is the
/// steady-state one. Throws ConstraintViolation on deadlock.
SimResult simulate_nn_pipeline(const NNFxpModel& m, int N_l, int N_h, const NnHwConfig& cfg, const NnFxpInputs& in,
                               std::size_t n_end = 0);

SimResult simulate_poly(const PolyFxpModel& m, const PolyHwConfig& cfg, std::span<const FxpComplex> xq,
                        std::size_t n_end = 0);

} // namespace sic
