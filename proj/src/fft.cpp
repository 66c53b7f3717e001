#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace sic::detail {

namespace {
// FFTW's planner is not thread safe; execution of a plan is.
std::mutex planner_mutex;
} // namespace

void fft_inplace(std::vector<std::complex<double>>& data, bool backward)
{
    if (data.empty()) {
        return;
    }
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, backward ? FFTW_BACKWARD : FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
}

} // namespace sic::detail
