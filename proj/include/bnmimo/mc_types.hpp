#pragma once

#include <cstdint>

namespace bnmimo {

struct McConfig {
    std::int64_t samples = 100000;
    std::uint64_t seed = 20240601;
    std::int64_t batch_size = 4096;
    std::int64_t min_accepted = 1000;

    /// Throws DomainError unless samples >= batch_size >= 1 and samples >= 1000.
    void validate() const;
    std::int64_t batch_count() const { return (samples + batch_size - 1) / batch_size; }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_effective = 0;
    std::uint64_t seed = 0;
};

}  // namespace bnmimo
