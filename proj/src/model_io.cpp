#include <sic/model_io.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sic {

using ojson = nlohmann::ordered_json;

namespace {

template <class F>
auto field(const ojson& j, const char* key, const char* what, F get)
{
    if (!j.contains(key)) {
        throw DataError(std::string(what) + ": missing field '" + key + "'");
    }
    try {
        return get(j.at(key));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string(what) + ": bad field '" + key + "': " + e.what());
    }
}

int get_int(const ojson& j, const char* key, const char* what)
{
    return field(j, key, what, [](const ojson& v) { return v.get<int>(); });
}

double parse_decimal(const ojson& v)
{
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(s, &used);
        } catch (const std::exception&) {
            throw DataError("not a decimal number: '" + s + "'");
        }
        if (used != s.size()) {
            throw DataError("not a decimal number: '" + s + "'");
        }
        return d;
    }
    return v.get<double>();
}

ojson complex_json(cd v) { return ojson::array({v.real(), v.imag()}); }

cd complex_from(const ojson& v)
{
    if (!v.is_array() || v.size() != 2) {
        throw DataError("expected a [re, im] pair");
    }
    return {parse_decimal(v[0]), parse_decimal(v[1])};
}

void check_kind(const ojson& j, const char* kind)
{
    if (j.contains("kind") && j.at("kind") != kind) {
        throw DataError(std::string("model file holds a '") + j.at("kind").dump() + "' model, expected '" + kind + "'");
    }
}

} // namespace

std::string exact_decimal(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ojson to_json(const LinModel& m)
{
    ojson j;
    j["kind"] = "linear";
    j["L"] = m.L();
    j["taps"] = ojson::array();
    for (const auto& t : m.taps) {
        j["taps"].push_back(complex_json(t));
    }
    return j;
}

LinModel lin_from_json(const ojson& j)
{
    check_kind(j, "linear");
    const int L = get_int(j, "L", "linear model");
    LinModel m;
    field(j, "taps", "linear model", [&m](const ojson& v) {
        for (const auto& t : v) {
            m.taps.push_back(complex_from(t));
        }
        return 0;
    });
    if (m.L() != L) {
        throw DataError("linear model: L = " + std::to_string(L) + " but " + std::to_string(m.L()) + " taps given");
    }
    m.validate();
    return m;
}

ojson to_json(const PolyModel& m)
{
    ojson j;
    j["kind"] = "poly";
    j["P"] = m.P;
    j["L"] = m.L;
    j["coeffs"] = ojson::array();
    for (const auto& bf : bf_indices(m.P)) {
        for (int l = 0; l < m.L; ++l) {
            const cd c = m.coeff(bf.p, bf.q, l);
            j["coeffs"].push_back({{"p", bf.p}, {"q", bf.q}, {"l", l}, {"re", c.real()}, {"im", c.imag()}});
        }
    }
    return j;
}

PolyModel poly_from_json(const ojson& j)
{
    check_kind(j, "poly");
    PolyModel m;
    m.P = get_int(j, "P", "poly model");
    m.L = get_int(j, "L", "poly model");
    check_order(m.P);
    m.coeffs.assign(static_cast<std::size_t>(n_bf(m.P, m.L)), cd{});
    std::vector<bool> seen(m.coeffs.size(), false);
    field(j, "coeffs", "poly model", [&m, &seen](const ojson& v) {
        for (const auto& c : v) {
            const int p = c.at("p").get<int>();
            const int q = c.at("q").get<int>();
            const int l = c.at("l").get<int>();
            if (p < 1 || p > m.P || p % 2 == 0 || q < 0 || q > p || l < 0 || l >= m.L) {
                throw DataError("poly model: coefficient index (" + std::to_string(p) + "," + std::to_string(q) + "," +
                                std::to_string(l) + ") out of range");
            }
            const auto idx = m.index(p, q, l);
            if (seen[idx]) {
                throw DataError("poly model: duplicate coefficient (" + std::to_string(p) + "," + std::to_string(q) +
                                "," + std::to_string(l) + ")");
            }
            seen[idx] = true;
            m.coeffs[idx] = {parse_decimal(c.at("re")), parse_decimal(c.at("im"))};
        }
        return 0;
    });
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
            throw DataError("poly model: missing coefficient #" + std::to_string(i));
        }
    }
    return m;
}

ojson to_json(const NNModel& m)
{
    m.validate();
    ojson j;
    j["kind"] = "nn";
    j["L"] = m.L;
    j["N_l"] = m.N_l;
    j["N_h"] = m.N_h;
    j["layers"] = ojson::array();
    for (const auto& layer : m.layers) {
        ojson lj;
        lj["n_in"] = layer.n_in;
        lj["n_out"] = layer.n_out;
        lj["activation"] = layer.act == Activation::relu ? "relu" : "identity";
        lj["w"] = ojson::array();
        for (double w : layer.w) {
            lj["w"].push_back(exact_decimal(w));
        }
        lj["b"] = ojson::array();
        for (double b : layer.b) {
            lj["b"].push_back(exact_decimal(b));
        }
        j["layers"].push_back(std::move(lj));
    }
    ojson lin = ojson::array();
    for (const auto& t : m.lin.taps) {
        lin.push_back({exact_decimal(t.real()), exact_decimal(t.imag())});
    }
    j["lin"] = {{"L", m.lin.L()}, {"taps", lin}};
    j["x_mean"] = {exact_decimal(m.x_mean.real()), exact_decimal(m.x_mean.imag())};
    j["x_var"] = exact_decimal(m.x_var);
    j["denorm_shift"] = {m.denorm_shift_re, m.denorm_shift_im};
    j["denorm_mean"] = {exact_decimal(m.denorm_mean.real()), exact_decimal(m.denorm_mean.imag())};
    return j;
}

NNModel nn_from_json(const ojson& j)
{
    check_kind(j, "nn");
    NNModel m;
    m.L = get_int(j, "L", "nn model");
    m.N_l = get_int(j, "N_l", "nn model");
    m.N_h = get_int(j, "N_h", "nn model");
    try {
        for (const auto& lj : j.at("layers")) {
            DenseLayer layer;
            layer.n_in = lj.at("n_in").get<int>();
            layer.n_out = lj.at("n_out").get<int>();
            const auto act = lj.at("activation").get<std::string>();
            if (act != "relu" && act != "identity") {
                throw DataError("nn model: unknown activation '" + act + "'");
            }
            layer.act = act == "relu" ? Activation::relu : Activation::identity;
            for (const auto& w : lj.at("w")) {
                layer.w.push_back(parse_decimal(w));
            }
            for (const auto& b : lj.at("b")) {
                layer.b.push_back(parse_decimal(b));
            }
            m.layers.push_back(std::move(layer));
        }
        m.lin = lin_from_json(j.at("lin"));
        m.x_mean = complex_from(j.at("x_mean"));
        m.x_var = parse_decimal(j.at("x_var"));
        m.denorm_shift_re = j.at("denorm_shift").at(0).get<int>();
        m.denorm_shift_im = j.at("denorm_shift").at(1).get<int>();
        m.denorm_mean = complex_from(j.at("denorm_mean"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("nn model: ") + e.what());
    }
    try {
        m.validate();
    } catch (const ConfigError& e) {
        throw DataError(std::string("nn model: ") + e.what());
    }
    return m;
}

ojson read_json_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) {
        throw DataError("cannot open " + path);
    }
    try {
        return ojson::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) {
        throw DataError("cannot open " + path + " for writing");
    }
    f << text;
    if (!f) {
        throw DataError("write failed: " + path);
    }
}

} // namespace sic
