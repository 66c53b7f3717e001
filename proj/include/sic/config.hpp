#pragma once

// Experiment configuration. A user file is merged onto the embedded defaults
// (config/defaults.json): objects merge key by key, arrays and scalars replace.
// Keys missing from the defaults and values of the wrong JSON type are
// rejected with the dotted path of the offending field.

#include <sic/hw.hpp>
#include <sic/nn.hpp>
#include <sic/signal.hpp>

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sic {

struct NnPreset
{
    int L = 2;
    int N_l = 1;
    int N_h = 8;
};

struct QuantConfig
{
    int nn_total_bits = 16;
    int poly_total_bits = 25;
    int nn_integer_bits = 5;
    int poly_integer_bits = 4;
    int q_min = 4;
    int q_max = 28;
    double tolerance_db = 0.5;
};

struct SweepConfig
{
    std::vector<int> poly_L;
    std::vector<int> poly_P;
    std::vector<int> nn_L;
    std::vector<int> nn_N_h;
    int nn_N_l = 1;
    int nn_epochs = 50;
    double selection_tolerance_db = 1.0;
    int workers = 0; ///< 0 = hardware concurrency
};

struct RunConfig
{
    std::uint64_t seed = 1;
    std::string output_dir;

    TxChainConfig tx;
    OfdmConfig ofdm;
    std::size_t n_samples = 20480;
    int resid_taps = 4;

    int linear_L = 4;
    int poly_P = 7;
    int poly_L = 3;
    std::map<std::string, NnPreset> nn_presets;
    TrainConfig train;

    QuantConfig quant;
    std::map<std::string, NnHwConfig> nn_hw; ///< keyed by preset name
    PolyHwConfig poly_hw;
    std::size_t hw_sim_samples = 1000;

    SweepConfig sweep;
    int psd_nfft = 1024;
    double psd_overlap = 0.5;

    nlohmann::json raw; ///< merged document
    std::string hash;   ///< config_hash(raw)

    const NnPreset& preset(const std::string& name) const;
    const NnHwConfig& hw_preset(const std::string& name) const;
};

nlohmann::json default_config_json();

/// Merges `user` onto `base`; `path` prefixes diagnostics.
nlohmann::json merge_config(const nlohmann::json& base, const nlohmann::json& user, const std::string& path = "");

/// Applies "a.b.c=value". The value is parsed as JSON and falls back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// FNV-1a 64 of the compact, key-sorted dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

/// Typed view of a merged document. Throws ConfigError naming the field.
RunConfig run_config_from_json(const nlohmann::json& doc);

/// Defaults, then the optional file, then overrides, then the seed (when given).
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides,
                          const std::optional<std::uint64_t>& seed = std::nullopt);

} // namespace sic
