#pragma once

#include <sic/config.hpp>
#include <sic/errors.hpp>
#include <sic/metrics.hpp>
#include <sic/signal.hpp>

#include <filesystem>
#include <string>

namespace sic::cli {

struct Context
{
    RunConfig cfg;
    std::filesystem::path out;    ///< every command writes here
    std::filesystem::path models; ///< where model files are read from (defaults to out)
    std::string data;             ///< explicit dataset path, or empty

    /// The explicit dataset, else <out>/dataset.sicd if present, else one
    /// generated in memory from the configuration.
    Dataset dataset() const;
};

int cmd_gen(const Context& ctx);
int cmd_fit(const Context& ctx, CancellerKind kind);
int cmd_train(const Context& ctx, const std::string& preset);
int cmd_eval(const Context& ctx);
int cmd_sweep(const Context& ctx, bool poly_family, bool nn_family);
int cmd_qsweep(const Context& ctx);
int cmd_hwreport(const Context& ctx);

} // namespace sic::cli
