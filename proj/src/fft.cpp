#include "rootpipe/fft.hpp"

#include <cmath>
#include <numbers>

namespace rootpipe {

namespace {

using cd = std::complex<double>;

std::size_t smallest_factor(std::size_t n) {
    if (n % 2 == 0) return 2;
    for (std::size_t f = 3; f * f <= n; f += 2)
        if (n % f == 0) return f;
    return n;
}

std::vector<cd> transform(const std::vector<cd>& x) {
    const std::size_t n = x.size();
    if (n <= 1) return x;
    const std::size_t p = smallest_factor(n);
    std::vector<cd> out(n);
    if (p == n) {
        for (std::size_t k = 0; k < n; ++k) {
            cd acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                acc += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) /
                                                  static_cast<double>(n));
            out[k] = acc;
        }
        return out;
    }
    const std::size_t m = n / p;
    std::vector<std::vector<cd>> sub(p);
    for (std::size_t r = 0; r < p; ++r) {
        std::vector<cd> part(m);
        for (std::size_t j = 0; j < m; ++j) part[j] = x[j * p + r];
        sub[r] = transform(part);
    }
    for (std::size_t k = 0; k < n; ++k) {
        cd acc = 0.0;
        for (std::size_t r = 0; r < p; ++r)
            acc += sub[r][k % m] * std::polar(1.0, -2.0 * std::numbers::pi *
                                                       static_cast<double>((r * k) % n) /
                                                       static_cast<double>(n));
        out[k] = acc;
    }
    return out;
}

}  // namespace

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& input) {
    return transform(input);
}

}  // namespace rootpipe
