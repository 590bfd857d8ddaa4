#pragma once

#include <cmath>
#include <random>

namespace bnmimo {

namespace detail {

/// M x K matrix of i.i.d. CN(0, 1) entries.
template <class Rng>
ComplexMatrix complex_gaussian(Rng& rng, int rows, int cols) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    ComplexMatrix h(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            h(i, j) = {re, im};
        }
    }
    return h;
}

}  // namespace detail

template <class Rng>
std::vector<double> draw_channel(Rng& rng, const SystemParams& params, ComplexMatrix* raw) {
    ComplexMatrix h = detail::complex_gaussian(rng, params.M(), params.K());
    std::vector<double> eig = gram_eigenvalues(h);
    if (raw != nullptr) {
        *raw = std::move(h);
    }
    return eig;
}

}  // namespace bnmimo
