#include "cli/commands.hpp"

#include <sic/experiment.hpp>
#include <sic/hw.hpp>
#include <sic/metrics.hpp>
#include <sic/model_io.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace sic::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string num(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// JSON cannot hold inf/nan; such values become strings.
ojson jnum(double v)
{
    if (!std::isfinite(v)) {
        return num(v);
    }
    return v;
}

std::string hash_line(const Context& ctx) { return "# config_hash=" + ctx.cfg.hash; }

ojson complexity_json(const ComplexityReport& c, bool poly)
{
    ojson j{{"real_adds", c.n_add}, {"real_mults", c.n_mul}};
    if (poly) {
        j["n_bf"] = c.n_bf;
        j["n_mul_bf"] = c.n_mul_bf;
    }
    return j;
}

ojson with_hash(ojson model, const Context& ctx)
{
    model["config_hash"] = ctx.cfg.hash;
    return model;
}

void write_json(const fs::path& p, const ojson& j) { write_text_file(p.string(), j.dump(2) + "\n"); }

fs::path model_path(const Context& ctx, const std::string& name) { return ctx.models / ("model_" + name + ".json"); }

std::optional<ojson> read_model(const Context& ctx, const std::string& name)
{
    const fs::path p = model_path(ctx, name);
    if (!fs::exists(p)) {
        return std::nullopt;
    }
    return read_json_file(p.string());
}

void check_dims(const std::string& what, const std::string& field, int model_value, int config_value)
{
    if (model_value != config_value) {
        throw DataError(what + ": model has " + field + " = " + std::to_string(model_value) +
                        " but the configuration says " + std::to_string(config_value));
    }
}

void check_window(const Dataset& ds, const std::string& what, int L)
{
    if (static_cast<std::size_t>(L) > ds.split_index) {
        throw DataError(what + ": window length L = " + std::to_string(L) + " exceeds the training portion (" +
                        std::to_string(ds.split_index) + " samples)");
    }
}

LinModel load_linear(const Context& ctx, const Dataset& ds)
{
    const auto j = read_model(ctx, "linear");
    if (!j) {
        throw DataError("missing " + model_path(ctx, "linear").string() + " (run 'sic fit --kind linear')");
    }
    LinModel m = lin_from_json(*j);
    check_dims("model_linear.json", "L", m.L(), ctx.cfg.linear_L);
    check_window(ds, "model_linear.json", m.L());
    return m;
}

std::optional<PolyModel> load_poly(const Context& ctx, const Dataset& ds)
{
    const auto j = read_model(ctx, "poly");
    if (!j) {
        return std::nullopt;
    }
    PolyModel m = poly_from_json(*j);
    check_dims("model_poly.json", "P", m.P, ctx.cfg.poly_P);
    check_dims("model_poly.json", "L", m.L, ctx.cfg.poly_L);
    check_window(ds, "model_poly.json", m.L);
    return m;
}

std::optional<NNModel> load_nn(const Context& ctx, const Dataset& ds, const std::string& preset)
{
    const auto j = read_model(ctx, "nn_" + preset);
    if (!j) {
        return std::nullopt;
    }
    NNModel m = nn_from_json(*j);
    const std::string what = "model_nn_" + preset + ".json";
    const NnPreset& p = ctx.cfg.preset(preset);
    check_dims(what, "L", m.L, p.L);
    check_dims(what, "N_l", m.N_l, p.N_l);
    check_dims(what, "N_h", m.N_h, p.N_h);
    check_window(ds, what, m.L);
    return m;
}

ComplexSeq residual(const ComplexSeq& y, const ComplexSeq& y_hat)
{
    ComplexSeq r = y;
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] -= y_hat[i];
    }
    return r;
}

void write_psd(const Context& ctx, const Dataset& ds, const std::string& name, const ComplexSeq& full)
{
    const ComplexSeq test = full.slice(ds.split_index, ds.size());
    const Psd p = psd(test, ctx.cfg.psd_nfft, ctx.cfg.psd_overlap);
    write_text_file((ctx.out / ("psd_" + name + ".csv")).string(), psd_csv(p, hash_line(ctx)));
}

void print_line(const std::string& s) { std::cout << s << "\n"; }

std::vector<std::string> nn_preset_names(const Context& ctx)
{
    std::vector<std::string> names;
    for (const auto& [name, p] : ctx.cfg.nn_presets) {
        (void)p;
        names.push_back(name);
    }
    return names;
}

std::string matrix_csv(const Context& ctx, const std::string& corner, const std::vector<int>& rows,
                       const std::vector<int>& cols, const std::vector<SweepCell>& cells, bool mults)
{
    std::ostringstream os;
    os << hash_line(ctx) << "\n" << corner;
    for (int c : cols) {
        os << "," << c;
    }
    os << "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        os << rows[r];
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const SweepCell& cell = cells[r * cols.size() + c];
            os << ",";
            if (mults) {
                os << cell.n_mul;
            } else {
                os << (cell.error.empty() ? num(cell.c_db) : std::string("nan"));
            }
        }
        os << "\n";
    }
    return os.str();
}

ojson cell_json(const SweepCell& c, const char* b_name)
{
    return {{"L", c.a}, {b_name, c.b}, {"c_db", jnum(c.c_db)}, {"n_mul", c.n_mul}};
}

} // namespace

Dataset Context::dataset() const
{
    if (!data.empty()) {
        return load_dataset(data);
    }
    const fs::path p = out / "dataset.sicd";
    if (fs::exists(p)) {
        return load_dataset(p.string());
    }
    return dataset_from_config(cfg);
}

int cmd_gen(const Context& ctx)
{
    const Dataset ds = dataset_from_config(ctx.cfg);
    const fs::path p = ctx.out / "dataset.sicd";
    save_dataset(ds, p.string(), ctx.cfg.hash);

    const ComplexSeq noise = residual(ds.y, *ds.y_clean);
    const double snr = 10.0 * std::log10(ds.y_clean->mean_power() / noise.mean_power());
    ojson s;
    s["config_hash"] = ctx.cfg.hash;
    s["dataset"] = p.filename().string();
    s["n_samples"] = ds.size();
    s["split_index"] = ds.split_index;
    s["papr_db"] = papr_db(ds.x);
    s["tx_power"] = ds.x.mean_power();
    s["si_power"] = ds.y_clean->mean_power();
    s["rx_power"] = ds.y.mean_power();
    s["measured_snr_db"] = jnum(snr);
    write_json(ctx.out / "gen_summary.json", s);

    print_line("wrote " + p.string() + " (" + std::to_string(ds.size()) + " samples, split at " +
               std::to_string(ds.split_index) + ")");
    print_line("PAPR " + num(papr_db(ds.x)) + " dB, tx power " + num(ds.x.mean_power()) + ", SI power " +
               num(ds.y_clean->mean_power()) + ", measured SNR " + num(snr) + " dB");
    return 0;
}

int cmd_fit(const Context& ctx, CancellerKind kind)
{
    const Dataset ds = ctx.dataset();
    fs::path p;
    ComplexSeq y_hat;
    std::size_t first = 0;
    if (kind == CancellerKind::linear) {
        check_window(ds, "fit", ctx.cfg.linear_L);
        const LinModel m = fit_linear_train(ds, ctx.cfg.linear_L);
        p = model_path(ctx, "linear");
        write_json(p, with_hash(to_json(m), ctx));
        const auto rec = apply_linear(m, ds.x);
        y_hat = rec.signal;
        first = rec.first_valid;
    } else if (kind == CancellerKind::poly) {
        check_window(ds, "fit", ctx.cfg.poly_L);
        const PolyModel m = fit_poly_train(ds, ctx.cfg.poly_P, ctx.cfg.poly_L);
        p = model_path(ctx, "poly");
        write_json(p, with_hash(to_json(m), ctx));
        const auto rec = apply_poly(m, ds.x);
        y_hat = rec.signal;
        first = rec.first_valid;
    } else {
        throw ConfigError("fit handles linear and poly; use 'sic train --preset NAME' for networks");
    }
    print_line("wrote " + p.string());
    print_line("C_dB train " + num(train_cdb(ds, y_hat, first)) + " dB, test " + num(test_cdb(ds, y_hat)) + " dB");
    return 0;
}

int cmd_train(const Context& ctx, const std::string& preset)
{
    const NnPreset& p = ctx.cfg.preset(preset);
    const Dataset ds = ctx.dataset();
    check_window(ds, "train", p.L);
    const TrainResult res = train_nn(ds, p.L, p.N_l, p.N_h, ctx.cfg.train);

    const fs::path mp = model_path(ctx, "nn_" + preset);
    write_json(mp, with_hash(to_json(res.model), ctx));
    std::ostringstream log;
    log.precision(17);
    log << hash_line(ctx) << "\nepoch,train_mse,test_mse,c_db_test\n";
    for (const auto& e : res.log) {
        log << e.epoch << "," << e.train_mse << "," << e.test_mse << "," << e.c_db_total << "\n";
    }
    const fs::path lp = ctx.out / ("train_log_" + preset + ".csv");
    write_text_file(lp.string(), log.str());

    print_line("wrote " + mp.string() + " and " + lp.string());
    if (!res.log.empty()) {
        const auto& e = res.log.back();
        print_line("epoch " + std::to_string(e.epoch) + ": train MSE " + num(e.train_mse) + ", test MSE " +
                   num(e.test_mse) + ", C_dB test " + num(e.c_db_total) + " dB");
    }
    return 0;
}

int cmd_eval(const Context& ctx)
{
    const Dataset ds = ctx.dataset();
    const LinModel lin = load_linear(ctx, ds);
    const auto lin_rec = apply_linear(lin, ds.x);
    const double lin_db = test_cdb(ds, lin_rec.signal);

    ojson report;
    report["config_hash"] = ctx.cfg.hash;
    report["n_test_samples"] = ds.size() - ds.split_index;
    auto& cancellers = report["cancellers"] = ojson::array();
    std::vector<std::string> lines;

    auto add = [&](const std::string& name, ojson params, double total, double linear_only, double train,
                   const ComplexityReport& ops, bool poly) {
        ojson c;
        c["name"] = name;
        c["params"] = std::move(params);
        c["c_db_total"] = jnum(total);
        c["c_db_linear_only"] = jnum(linear_only);
        c["c_db_nonlinear_increment"] = jnum(total - linear_only);
        c["c_db_train"] = jnum(train);
        c["complexity"] = complexity_json(ops, poly);
        cancellers.push_back(std::move(c));
        lines.push_back(name + ": C_dB " + num(total) + " dB (linear-only " + num(linear_only) + ", nonlinear +" +
                        num(total - linear_only) + "), " + std::to_string(ops.n_mul) + " mults, " +
                        std::to_string(ops.n_add) + " adds");
    };

    add("linear", {{"L", lin.L()}}, lin_db, lin_db, train_cdb(ds, lin_rec.signal, lin_rec.first_valid),
        complexity_linear(lin.L()), false);
    write_psd(ctx, ds, "no_cancellation", ds.y);
    write_psd(ctx, ds, "linear", residual(ds.y, lin_rec.signal));

    if (const auto poly = load_poly(ctx, ds)) {
        const auto rec = apply_poly(*poly, ds.x);
        add("poly", {{"P", poly->P}, {"L", poly->L}}, test_cdb(ds, rec.signal), lin_db,
            train_cdb(ds, rec.signal, rec.first_valid), complexity_poly(poly->L, poly->P), true);
        write_psd(ctx, ds, "poly", residual(ds.y, rec.signal));
    } else {
        lines.push_back("poly: no model file, skipped");
    }

    for (const auto& preset : nn_preset_names(ctx)) {
        const auto nn = load_nn(ctx, ds, preset);
        if (!nn) {
            lines.push_back("nn_" + preset + ": no model file, skipped");
            continue;
        }
        const auto rec = apply_nn(*nn, ds.x);
        const auto own_lin = apply_linear(nn->lin, ds.x);
        add("nn_" + preset, {{"L", nn->L}, {"N_l", nn->N_l}, {"N_h", nn->N_h}}, test_cdb(ds, rec.signal),
            test_cdb(ds, own_lin.signal), train_cdb(ds, rec.signal, rec.first_valid),
            complexity_nn(nn->L, nn->N_l, nn->N_h), false);
        write_psd(ctx, ds, "nn_" + preset, residual(ds.y, rec.signal));
    }

    if (ds.y_clean) {
        const ComplexSeq noise = residual(ds.y, *ds.y_clean);
        report["noise_floor_c_db"] = jnum(test_cdb(ds, *ds.y_clean));
        write_psd(ctx, ds, "noise_floor", noise);
    }
    write_json(ctx.out / "eval_report.json", report);
    for (const auto& l : lines) {
        print_line(l);
    }
    if (report.contains("noise_floor_c_db")) {
        print_line("noise floor: C_dB " + num(test_cdb(ds, *ds.y_clean)) + " dB");
    }
    return 0;
}

int cmd_sweep(const Context& ctx, bool poly_family, bool nn_family)
{
    const SweepConfig& sw = ctx.cfg.sweep;
    if (poly_family && (sw.poly_L.empty() || sw.poly_P.empty())) {
        throw ConfigError("sweep: empty polynomial grid");
    }
    if (nn_family && (sw.nn_L.empty() || sw.nn_N_h.empty())) {
        throw ConfigError("sweep: empty network grid");
    }
    const Dataset ds = ctx.dataset();
    ojson sel;
    sel["config_hash"] = ctx.cfg.hash;
    sel["tolerance_db"] = sw.selection_tolerance_db;

    std::optional<double> poly_selected_db;
    if (poly_family) {
        std::vector<SweepCell> cells(sw.poly_L.size() * sw.poly_P.size());
        parallel_for(cells.size(), sw.workers, [&](std::size_t i) {
            SweepCell& c = cells[i];
            c.a = sw.poly_L[i / sw.poly_P.size()];
            c.b = sw.poly_P[i % sw.poly_P.size()];
            c.n_mul = complexity_poly(c.a, c.b).n_mul;
            try {
                const PolyModel m = fit_poly_train(ds, c.b, c.a);
                c.c_db = test_cdb(ds, apply_poly(m, ds.x).signal);
            } catch (const DataError& e) {
                c.error = e.what();
                c.c_db = std::nan("");
            }
        });
        write_text_file((ctx.out / "sweep_poly_cdb.csv").string(),
                        matrix_csv(ctx, "L\\P", sw.poly_L, sw.poly_P, cells, false));
        write_text_file((ctx.out / "sweep_poly_nmul.csv").string(),
                        matrix_csv(ctx, "L\\P", sw.poly_L, sw.poly_P, cells, true));
        ojson fam;
        const auto best = max_cdb(cells);
        if (!best) {
            throw DataError("sweep: every polynomial cell failed");
        }
        fam["max_c_db"] = *best;
        const auto pick = select_min_mult(cells, *best - sw.selection_tolerance_db);
        fam["selected"] = cell_json(cells[*pick], "P");
        poly_selected_db = cells[*pick].c_db;
        for (const auto& c : cells) {
            if (!c.error.empty()) {
                fam["failed"].push_back({{"L", c.a}, {"P", c.b}, {"error", c.error}});
                std::cerr << "warning: poly L=" << c.a << " P=" << c.b << ": " << c.error << "\n";
            }
        }
        sel["poly"] = std::move(fam);
        print_line("poly: max " + num(*best) + " dB, selected L=" + std::to_string(cells[*pick].a) +
                   " P=" + std::to_string(cells[*pick].b) + " (" + num(cells[*pick].c_db) + " dB, " +
                   std::to_string(cells[*pick].n_mul) + " mults)");
    }

    if (nn_family) {
        std::vector<SweepCell> cells(sw.nn_L.size() * sw.nn_N_h.size());
        parallel_for(cells.size(), sw.workers, [&](std::size_t i) {
            SweepCell& c = cells[i];
            c.a = sw.nn_L[i / sw.nn_N_h.size()];
            c.b = sw.nn_N_h[i % sw.nn_N_h.size()];
            c.n_mul = complexity_nn(c.a, sw.nn_N_l, c.b).n_mul;
            TrainConfig tc = ctx.cfg.train;
            tc.epochs = sw.nn_epochs;
            // Each cell owns a stream keyed by its grid coordinates, not its worker.
            tc.seed = split_seed(ctx.cfg.seed, (static_cast<std::uint64_t>(c.a) << 32) | static_cast<std::uint64_t>(c.b));
            try {
                const TrainResult r = train_nn(ds, c.a, sw.nn_N_l, c.b, tc);
                c.c_db = test_cdb(ds, apply_nn(r.model, ds.x).signal);
            } catch (const DataError& e) {
                c.error = e.what();
                c.c_db = std::nan("");
            }
        });
        write_text_file((ctx.out / "sweep_nn_cdb.csv").string(),
                        matrix_csv(ctx, "L\\N_h", sw.nn_L, sw.nn_N_h, cells, false));
        write_text_file((ctx.out / "sweep_nn_nmul.csv").string(),
                        matrix_csv(ctx, "L\\N_h", sw.nn_L, sw.nn_N_h, cells, true));
        ojson fam;
        const auto best = max_cdb(cells);
        if (!best) {
            throw DataError("sweep: every network cell failed");
        }
        fam["N_l"] = sw.nn_N_l;
        fam["max_c_db"] = *best;
        const auto peak = select_min_mult(cells, *best - sw.selection_tolerance_db);
        fam["peak"] = cell_json(cells[*peak], "N_h");
        print_line("nn: max " + num(*best) + " dB, peak L=" + std::to_string(cells[*peak].a) +
                   " N_h=" + std::to_string(cells[*peak].b) + " (" + num(cells[*peak].c_db) + " dB, " +
                   std::to_string(cells[*peak].n_mul) + " mults)");
        if (poly_selected_db) {
            const auto equi = select_min_mult(cells, *poly_selected_db - sw.selection_tolerance_db);
            fam["equi"] = equi ? cell_json(cells[*equi], "N_h") : ojson(nullptr);
            if (equi) {
                print_line("nn: equi L=" + std::to_string(cells[*equi].a) + " N_h=" + std::to_string(cells[*equi].b) +
                           " (" + num(cells[*equi].c_db) + " dB, " + std::to_string(cells[*equi].n_mul) + " mults)");
            } else {
                print_line("nn: no network reaches the selected polynomial canceller");
            }
        }
        for (const auto& c : cells) {
            if (!c.error.empty()) {
                fam["failed"].push_back({{"L", c.a}, {"N_h", c.b}, {"error", c.error}});
                std::cerr << "warning: nn L=" << c.a << " N_h=" << c.b << ": " << c.error << "\n";
            }
        }
        sel["nn"] = std::move(fam);
    }
    write_json(ctx.out / "sweep_selection.json", sel);
    return 0;
}

int cmd_qsweep(const Context& ctx)
{
    const Dataset ds = ctx.dataset();
    const QuantConfig& q = ctx.cfg.quant;

    struct Curve
    {
        std::string name;
        double float_db = 0.0;
        int integer_bits = 0;
        std::optional<int> nominal_q;
        std::function<double(int)> eval;
        std::vector<double> c_db;
    };
    std::vector<Curve> curves;

    const LinModel lin = load_linear(ctx, ds);
    curves.push_back({"linear", test_cdb(ds, apply_linear(lin, ds.x).signal), q.poly_integer_bits, std::nullopt,
                      [&](int bits) { return linear_fxp_cdb(ds, lin, bits, q.poly_integer_bits); }, {}});
    const auto poly = load_poly(ctx, ds);
    if (poly) {
        curves.push_back({"poly", test_cdb(ds, apply_poly(*poly, ds.x).signal), q.poly_integer_bits,
                          q.poly_total_bits, [&](int bits) { return poly_fxp_cdb(ds, *poly, bits, q.poly_integer_bits); },
                          {}});
    }
    std::vector<NNModel> nets;
    std::vector<std::string> net_names;
    for (const auto& preset : nn_preset_names(ctx)) {
        if (auto nn = load_nn(ctx, ds, preset)) {
            nets.push_back(std::move(*nn));
            net_names.push_back(preset);
        }
    }
    for (std::size_t k = 0; k < nets.size(); ++k) {
        const NNModel* m = &nets[k];
        curves.push_back({"nn_" + net_names[k], test_cdb(ds, apply_nn(*m, ds.x).signal), q.nn_integer_bits,
                          q.nn_total_bits, [&ds, m, &q](int bits) { return nn_fxp_cdb(ds, *m, bits, q.nn_integer_bits); },
                          {}});
    }

    std::vector<int> qs;
    for (int b = q.q_min; b <= q.q_max; ++b) {
        qs.push_back(b);
    }
    for (auto& c : curves) {
        c.c_db.assign(qs.size(), 0.0);
    }
    parallel_for(qs.size() * curves.size(), ctx.cfg.sweep.workers, [&](std::size_t i) {
        Curve& c = curves[i % curves.size()];
        c.c_db[i / curves.size()] = c.eval(qs[i / curves.size()]);
    });

    std::ostringstream csv;
    csv << hash_line(ctx) << "\nQ";
    for (const auto& c : curves) {
        csv << "," << c.name;
    }
    csv << "\n";
    for (std::size_t r = 0; r < qs.size(); ++r) {
        csv << qs[r];
        for (const auto& c : curves) {
            csv << "," << num(c.c_db[r]);
        }
        csv << "\n";
    }
    csv << "float";
    for (const auto& c : curves) {
        csv << "," << num(c.float_db);
    }
    csv << "\n";
    write_text_file((ctx.out / "qsweep.csv").string(), csv.str());

    ojson summary;
    summary["config_hash"] = ctx.cfg.hash;
    summary["tolerance_db"] = q.tolerance_db;
    for (const auto& c : curves) {
        ojson s;
        s["integer_bits"] = c.integer_bits;
        s["float_c_db"] = jnum(c.float_db);
        std::optional<int> min_q;
        for (std::size_t r = 0; r < qs.size(); ++r) {
            if (c.c_db[r] >= c.float_db - q.tolerance_db) {
                min_q = qs[r];
                break;
            }
        }
        s["min_q_within_tolerance"] = min_q ? ojson(*min_q) : ojson(nullptr);
        std::string line = c.name + ": float " + num(c.float_db) + " dB, smallest Q within " + num(q.tolerance_db) +
                           " dB: " + (min_q ? std::to_string(*min_q) : std::string("none"));
        if (c.nominal_q && *c.nominal_q >= q.q_min && *c.nominal_q <= q.q_max) {
            const double v = c.c_db[static_cast<std::size_t>(*c.nominal_q - q.q_min)];
            s["nominal_q"] = *c.nominal_q;
            s["nominal_c_db"] = jnum(v);
            line += ", Q=" + std::to_string(*c.nominal_q) + ": " + num(v) + " dB";
        }
        summary["cancellers"][c.name] = std::move(s);
        print_line(line);
    }
    write_json(ctx.out / "qsweep_summary.json", summary);
    return 0;
}

int cmd_hwreport(const Context& ctx)
{
    const Dataset ds = ctx.dataset();
    ojson report;
    report["config_hash"] = ctx.cfg.hash;
    std::ostringstream text;
    text << hash_line(ctx) << "\n";
    const std::size_t n_sim = ctx.cfg.hw_sim_samples;

    for (const auto& [preset, hw] : ctx.cfg.nn_hw) {
        const NnPreset& p = ctx.cfg.preset(preset);
        const auto loaded = load_nn(ctx, ds, preset);
        const NNModel m = loaded ? *loaded : init_nn(ds, p.L, p.N_l, p.N_h, ctx.cfg.seed);
        const NNFxpModel fm = quantize_nn(m, nn_default_format(ctx.cfg.quant.nn_total_bits));
        const NnFxpInputs in = quantize_nn_inputs(fm, ds.x);
        const std::size_t end = std::min(ds.size(), n_sim + static_cast<std::size_t>(p.L) - 1);
        const SimResult sim = simulate_nn_pipeline(fm, p.N_l, p.N_h, hw, in, end);
        const auto ref = apply_nn_fxp(fm, in, nn_reduction_plan(sim.report.stages), hw.n_cpe_linear);
        bool exact = true;
        for (std::size_t n = static_cast<std::size_t>(p.L) - 1; n < end; ++n) {
            exact = exact && sim.out[n].re.raw == ref[n].re.raw && sim.out[n].im.raw == ref[n].im.raw;
        }
        ojson j = ojson::parse(hw_report_json(sim.report));
        j["preset"] = preset;
        j["weights"] = loaded ? "model_nn_" + preset + ".json" : std::string("random");
        j["simulated_samples"] = end - (static_cast<std::size_t>(p.L) - 1);
        j["bit_exact_vs_reference"] = exact;
        report["nn"][preset] = std::move(j);
        text << "\n[nn " << preset << "] L=" << p.L << " N_l=" << p.N_l << " N_h=" << p.N_h
             << (loaded ? "" : " (random weights)") << "\n"
             << hw_report_text(sim.report) << "bit-exact vs reference: " << (exact ? "yes" : "NO") << "\n";
    }

    {
        const PolyHwConfig& hw = ctx.cfg.poly_hw;
        const auto loaded = load_poly(ctx, ds);
        const PolyModel m = loaded ? *loaded : fit_poly_train(ds, hw.P, hw.L);
        const PolyFxpModel fm =
            quantize_poly(m, poly_default_format(ctx.cfg.quant.poly_total_bits), train_x(ds));
        std::vector<FxpComplex> xq;
        for (const auto& s : ds.x.samples) {
            xq.push_back(quantize_poly_input(fm, s));
        }
        const std::size_t end = std::min(ds.size(), n_sim + static_cast<std::size_t>(hw.L) - 1);
        const SimResult sim = simulate_poly(fm, hw, xq, end);
        const auto ref = apply_poly_fxp(fm, std::span<const FxpComplex>(xq.data(), end), hw.n_cpe);
        bool exact = true;
        for (std::size_t n = static_cast<std::size_t>(hw.L) - 1; n < end; ++n) {
            exact = exact && sim.out[n].re.raw == ref[n].re.raw && sim.out[n].im.raw == ref[n].im.raw;
        }
        ojson j = ojson::parse(hw_report_json(sim.report));
        j["weights"] = loaded ? std::string("model_poly.json") : std::string("fitted");
        j["simulated_samples"] = end - (static_cast<std::size_t>(hw.L) - 1);
        j["bit_exact_vs_reference"] = exact;
        report["poly"] = std::move(j);
        text << "\n[poly] P=" << hw.P << " L=" << hw.L << " N_CPE=" << hw.n_cpe << " N_CPE_BF=" << hw.n_cpe_bf << "\n"
             << hw_report_text(sim.report) << "bit-exact vs reference: " << (exact ? "yes" : "NO") << "\n";
    }

    write_json(ctx.out / "hwreport.json", report);
    write_text_file((ctx.out / "hwreport.txt").string(), text.str());
    std::cout << text.str();
    return 0;
}

} // namespace sic::cli
