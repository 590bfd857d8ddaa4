#pragma once

#include "bnmimo/bounds.hpp"

namespace bnmimo::detail {

/// NDT maximized over D with an explicit noise variance (0 allowed).
BoundResult ndt_maximize(const SystemParams& params, double sigma2);

/// TCI evaluation with the D = 0 limit when `infinite_c` is set.
TciResult tci_evaluate(const SystemParams& params, const TruncStats& stats, bool infinite_c);

}  // namespace bnmimo::detail
