#pragma once

namespace bnmimo {

template <class Rng>
std::vector<double> draw_noise_levels(Rng& rng, const SystemParams& params) {
    const ComplexMatrix h = detail::complex_gaussian(rng, params.M(), params.K());
    const ComplexMatrix gram = h.adjoint() * h;
    const ComplexMatrix inv = gram.llt().solve(ComplexMatrix::Identity(params.K(), params.K()));
    std::vector<double> a(static_cast<std::size_t>(params.K()));
    for (int k = 0; k < params.K(); ++k) {
        a[static_cast<std::size_t>(k)] = params.sigma2() * inv(k, k).real();
    }
    return a;
}

}  // namespace bnmimo
