#pragma once

#include <complex>
#include <vector>

namespace rootpipe {

/// Forward DFT of any length: mixed-radix Cooley-Tukey recursion, with a
/// direct transform for prime-length stages.
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& input);

}  // namespace rootpipe
