#include "cli/commands.hpp"

#include <sic/cli.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace sic::cli {

namespace {

struct Common
{
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::string models;
    std::string data;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c, bool reads_data)
{
    cmd->add_option("-c,--config", c.config, "JSON configuration merged onto the defaults");
    cmd->add_option("--seed", c.seed, "Overrides the configuration seed");
    cmd->add_option("-o,--out", c.out, "Output directory (default: $SIC_OUTPUT_ROOT, else output_dir)");
    cmd->add_option("--set", c.sets, "Override a configuration field, e.g. --set poly.L=4")->take_all();
    if (reads_data) {
        cmd->add_option("--data", c.data, "Dataset file (default: <out>/dataset.sicd, else generated)");
        cmd->add_option("--models", c.models, "Directory holding model files (default: <out>)");
    }
}

Context make_context(const CLI::App* cmd, const Common& c)
{
    std::optional<std::uint64_t> seed;
    if (cmd->count("--seed") > 0) {
        seed = c.seed;
    }
    Context ctx;
    ctx.cfg = load_run_config(c.config, c.sets, seed);
    if (!c.out.empty()) {
        ctx.out = c.out;
    } else if (const char* root = std::getenv("SIC_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
        ctx.out = root;
    } else {
        ctx.out = ctx.cfg.output_dir;
    }
    std::error_code ec;
    std::filesystem::create_directories(ctx.out, ec);
    if (ec || !std::filesystem::is_directory(ctx.out)) {
        throw DataError("cannot create output directory " + ctx.out.string() + (ec ? ": " + ec.message() : ""));
    }
    ctx.models = c.models.empty() ? ctx.out : std::filesystem::path(c.models);
    ctx.data = c.data;
    return ctx;
}

} // namespace

int run(int argc, const char* const* argv)
{
    CLI::App app{"Digital self-interference cancellation toolkit"};
    app.require_subcommand(1);

    Common common;
    std::string kind = "linear";
    std::string preset = "equi";
    std::string family = "all";

    auto* gen = app.add_subcommand("gen", "Generate the synthetic dataset");
    add_common(gen, common, false);

    auto* fit = app.add_subcommand("fit", "Fit a least-squares canceller (linear or poly)");
    add_common(fit, common, true);
    fit->add_option("--kind", kind, "linear | poly")->check(CLI::IsMember({"linear", "poly"}));

    auto* train = app.add_subcommand("train", "Train a network canceller preset");
    add_common(train, common, true);
    train->add_option("--preset", preset, "Network preset name (nn.presets)");

    auto* eval = app.add_subcommand("eval", "Evaluate every fitted canceller and write PSD curves");
    add_common(eval, common, true);

    auto* sweep = app.add_subcommand("sweep", "Grid sweep of poly (L, P) and network (L, N_h)");
    add_common(sweep, common, true);
    sweep->add_option("--family", family, "poly | nn | all")->check(CLI::IsMember({"poly", "nn", "all"}));

    auto* qsweep = app.add_subcommand("qsweep", "Fixed-point C_dB versus datapath width Q");
    add_common(qsweep, common, true);

    auto* hw = app.add_subcommand("hwreport", "Analytical and simulated accelerator timing");
    add_common(hw, common, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen(make_context(gen, common));
        }
        if (fit->parsed()) {
            return cmd_fit(make_context(fit, common), parse_canceller_kind(kind));
        }
        if (train->parsed()) {
            return cmd_train(make_context(train, common), preset);
        }
        if (eval->parsed()) {
            return cmd_eval(make_context(eval, common));
        }
        if (sweep->parsed()) {
            return cmd_sweep(make_context(sweep, common), family != "nn", family != "poly");
        }
        if (qsweep->parsed()) {
            return cmd_qsweep(make_context(qsweep, common));
        }
        if (hw->parsed()) {
            return cmd_hwreport(make_context(hw, common));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

} // namespace sic::cli
