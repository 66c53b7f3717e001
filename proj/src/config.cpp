#include <sic/config.hpp>
#include <sic/default_config.hpp>
#include <sic/errors.hpp>

#include <cstdio>
#include <fstream>

namespace sic {

using json = nlohmann::json;

namespace {

// Fields whose default is a number but which may be switched off with null.
bool nullable(const std::string& path) { return path == "dataset.tx.snr_db"; }

std::string type_name(const json& v)
{
    if (v.is_number_integer()) {
        return "integer";
    }
    return v.type_name();
}

bool compatible(const json& def, const json& val, const std::string& path)
{
    if (val.is_null()) {
        return nullable(path);
    }
    if (def.is_number_float()) {
        return val.is_number();
    }
    if (def.is_number_integer()) {
        return val.is_number_integer();
    }
    return def.type() == val.type();
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

class Reader
{
public:
    explicit Reader(const json& doc) : doc_(doc) {}

    const json& at(const std::string& path) const
    {
        const json* cur = &doc_;
        std::size_t start = 0;
        while (true) {
            const auto dot = path.find('.', start);
            const std::string key = path.substr(start, dot - start);
            if (!cur->is_object() || !cur->contains(key)) {
                throw ConfigError("config: missing field '" + path + "'");
            }
            cur = &(*cur)[key];
            if (dot == std::string::npos) {
                return *cur;
            }
            start = dot + 1;
        }
    }

    template <class T>
    T get(const std::string& path) const
    {
        try {
            return at(path).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError("config: field '" + path + "': " + e.what());
        }
    }

    int positive(const std::string& path) const
    {
        const int v = get<int>(path);
        if (v < 1) {
            throw ConfigError("config: field '" + path + "' must be >= 1, got " + std::to_string(v));
        }
        return v;
    }

    std::vector<int> int_list(const std::string& path) const
    {
        const auto v = get<std::vector<int>>(path);
        for (int e : v) {
            if (e < 1) {
                throw ConfigError("config: field '" + path + "' entries must be >= 1");
            }
        }
        return v;
    }

    cd complex(const json& v, const std::string& path) const
    {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ConfigError("config: field '" + path + "' must be a [re, im] pair");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

private:
    const json& doc_;
};

NnHwConfig nn_hw(const Reader& r, const std::string& path)
{
    NnHwConfig c;
    c.n_pe = r.int_list(path + ".n_pe");
    c.n_cpe_linear = r.positive(path + ".n_cpe_linear");
    c.clock_hz = r.get<double>(path + ".clock_hz");
    return c;
}

} // namespace

const NnPreset& RunConfig::preset(const std::string& name) const
{
    const auto it = nn_presets.find(name);
    if (it == nn_presets.end()) {
        throw ConfigError("unknown network preset '" + name + "'");
    }
    return it->second;
}

const NnHwConfig& RunConfig::hw_preset(const std::string& name) const
{
    const auto it = nn_hw.find(name);
    if (it == nn_hw.end()) {
        throw ConfigError("no hardware configuration for network preset '" + name + "'");
    }
    return it->second;
}

json default_config_json()
{
    return json::parse(config::kDefaultConfigJson);
}

json merge_config(const json& base, const json& user, const std::string& path)
{
    if (!user.is_object()) {
        throw ConfigError("config: '" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
    }
    json out = base;
    for (const auto& [key, val] : user.items()) {
        const std::string p = join(path, key);
        if (!base.contains(key)) {
            throw ConfigError("config: unknown key '" + p + "'");
        }
        const json& def = base[key];
        if (def.is_object()) {
            out[key] = merge_config(def, val, p);
        } else if (!compatible(def, val, p)) {
            throw ConfigError("config: field '" + p + "' expects " + type_name(def) + ", got " + type_name(val));
        } else {
            out[key] = val;
        }
    }
    return out;
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form key.path=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json patch = value;
    std::size_t end = path.size();
    while (true) {
        const auto dot = path.rfind('.', end - 1);
        const std::size_t start = dot == std::string::npos ? 0 : dot + 1;
        json wrap = json::object();
        wrap[path.substr(start, end - start)] = std::move(patch);
        patch = std::move(wrap);
        if (dot == std::string::npos) {
            break;
        }
        end = dot;
    }
    doc = merge_config(doc, patch);
}

std::string config_hash(const json& doc)
{
    // nlohmann::json keeps object keys sorted, so dump() is canonical.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : doc.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig run_config_from_json(const json& doc)
{
    const Reader r(doc);
    RunConfig c;
    c.seed = r.get<std::uint64_t>("seed");
    c.output_dir = r.get<std::string>("output_dir");

    c.n_samples = static_cast<std::size_t>(r.positive("dataset.n_samples"));
    c.ofdm.n_carriers = r.positive("dataset.n_carriers");
    c.ofdm.oversample = r.positive("dataset.oversample");
    c.ofdm.sample_rate_hz = r.get<double>("dataset.sample_rate_hz");
    c.resid_taps = r.positive("dataset.resid_taps");
    c.tx.iq_gain_mismatch = r.get<double>("dataset.tx.iq_gain_mismatch");
    c.tx.iq_phase_mismatch = r.get<double>("dataset.tx.iq_phase_mismatch");
    const json& snr = r.at("dataset.tx.snr_db");
    if (snr.is_null()) {
        c.tx.snr_db.reset();
    } else {
        c.tx.snr_db = snr.get<double>();
    }
    c.tx.pa_coeffs.clear();
    const json& pa = r.at("dataset.tx.pa_terms");
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const std::string p = "dataset.tx.pa_terms[" + std::to_string(i) + "]";
        const json& t = pa[i];
        if (!t.is_object() || !t.contains("p") || !t.contains("l") || !t.contains("coeff") ||
            !t["p"].is_number_integer() || !t["l"].is_number_integer() || t.size() != 3) {
            throw ConfigError("config: field '" + p + "' must be {\"p\": int, \"l\": int, \"coeff\": [re, im]}");
        }
        c.tx.pa_coeffs.push_back(PaTerm{t["p"].get<int>(), t["l"].get<int>(), r.complex(t["coeff"], p + ".coeff")});
    }
    c.tx.si_channel.clear();
    const json& ch = r.at("dataset.tx.si_channel");
    for (std::size_t i = 0; i < ch.size(); ++i) {
        c.tx.si_channel.push_back(r.complex(ch[i], "dataset.tx.si_channel[" + std::to_string(i) + "]"));
    }
    c.tx.seed = c.seed;
    try {
        c.tx.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("config: dataset.tx: ") + e.what());
    }
    if (!c.tx.has_linear_term()) {
        throw ConfigError("config: dataset.tx.pa_terms needs a nonzero (p=1, l=0) term");
    }

    c.linear_L = r.positive("linear.L");
    c.poly_P = r.positive("poly.P");
    c.poly_L = r.positive("poly.L");
    if (c.poly_P % 2 == 0) {
        throw ConfigError("config: field 'poly.P' must be odd");
    }
    for (const auto& [name, v] : r.at("nn.presets").items()) {
        (void)v;
        const std::string p = "nn.presets." + name;
        c.nn_presets[name] = NnPreset{r.positive(p + ".L"), r.positive(p + ".N_l"), r.positive(p + ".N_h")};
    }
    c.train.batch_size = r.positive("nn.train.batch_size");
    c.train.learning_rate = r.get<double>("nn.train.learning_rate");
    c.train.epochs = r.positive("nn.train.epochs");
    c.train.seed = c.seed;

    c.quant.nn_total_bits = r.positive("quant.nn_total_bits");
    c.quant.poly_total_bits = r.positive("quant.poly_total_bits");
    c.quant.nn_integer_bits = r.positive("quant.nn_integer_bits");
    c.quant.poly_integer_bits = r.positive("quant.poly_integer_bits");
    c.quant.q_min = r.positive("quant.q_min");
    c.quant.q_max = r.positive("quant.q_max");
    c.quant.tolerance_db = r.get<double>("quant.tolerance_db");
    if (c.quant.q_min < 2 || c.quant.q_max > 32 || c.quant.q_min > c.quant.q_max) {
        throw ConfigError("config: quant.q_min..quant.q_max must lie within 2..32 and be non-empty");
    }

    for (const auto& [name, v] : r.at("hardware").items()) {
        if (name == "poly" || name == "sim_samples") {
            continue;
        }
        (void)v;
        c.nn_hw[name] = nn_hw(r, "hardware." + name);
    }
    c.poly_hw.P = c.poly_P;
    c.poly_hw.L = c.poly_L;
    c.poly_hw.n_cpe = r.positive("hardware.poly.n_cpe");
    c.poly_hw.n_cpe_bf = r.positive("hardware.poly.n_cpe_bf");
    c.poly_hw.clock_hz = r.get<double>("hardware.poly.clock_hz");
    c.hw_sim_samples = static_cast<std::size_t>(r.positive("hardware.sim_samples"));

    c.sweep.poly_L = r.int_list("sweep.poly.L");
    c.sweep.poly_P = r.int_list("sweep.poly.P");
    c.sweep.nn_L = r.int_list("sweep.nn.L");
    c.sweep.nn_N_h = r.int_list("sweep.nn.N_h");
    c.sweep.nn_N_l = r.positive("sweep.nn.N_l");
    c.sweep.nn_epochs = r.positive("sweep.nn.epochs");
    c.sweep.selection_tolerance_db = r.get<double>("sweep.selection_tolerance_db");
    c.sweep.workers = r.get<int>("sweep.workers");

    c.psd_nfft = r.positive("eval.psd_nfft");
    c.psd_overlap = r.get<double>("eval.psd_overlap");
    if (c.psd_overlap < 0.0 || c.psd_overlap >= 1.0) {
        throw ConfigError("config: field 'eval.psd_overlap' must lie in [0, 1)");
    }

    c.raw = doc;
    c.hash = config_hash(doc);
    return c;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides,
                          const std::optional<std::uint64_t>& seed)
{
    json doc = default_config_json();
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) {
            throw ConfigError("cannot open config file " + path);
        }
        json user;
        try {
            user = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ConfigError(path + ": " + e.what());
        }
        try {
            doc = merge_config(doc, user);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ": " + e.what());
        }
    }
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    if (seed) {
        doc["seed"] = *seed;
    }
    return run_config_from_json(doc);
}

} // namespace sic
