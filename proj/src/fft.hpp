#pragma once

#include <complex>
#include <vector>

namespace sic::detail {

/// Unnormalized in-place DFT (backward = e^{+j...}). Any length.
void fft_inplace(std::vector<std::complex<double>>& data, bool backward);

} // namespace sic::detail
