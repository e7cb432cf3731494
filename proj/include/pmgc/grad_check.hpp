#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "pmgc/optimizer.hpp"

namespace pmgc {

// One loss evaluation. kink_gap is the smallest distance of any ReLU/clamp
// input to its kink during the forward pass (+inf when no such op ran); the
// checker uses it to detect probes whose finite-difference interval straddled
// a kink.
struct LossProbe {
    double value = 0.0;
    double kink_gap = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    int worst_index = -1;
    int excluded_entries = 0;  // kink-adjacent after one resample
    int resampled_entries = 0;
    int total_entries = 0;
    std::map<std::string, double> per_param_max;
};

using LossFn = std::function<LossProbe(const ParamStore&)>;
using GradFn = std::function<ParamStore(const ParamStore&)>;

// Compares analytic_grad against central finite differences
// (loss(p+h) - loss(p-h)) / 2h entry by entry. Entries whose probes come
// within kink_tol of a ReLU kink are re-evaluated at a jittered base point
// once, then excluded if still kink-adjacent. Relative error is
// |fd - g| / max(|fd|, |g|, 1e-8). Throws on a non-finite loss.
GradCheckReport grad_check(const LossFn& loss, const GradFn& analytic_grad,
                           const ParamStore& params, double step, double kink_tol = 1e-6,
                           std::uint64_t resample_seed = 0);

}  // namespace pmgc
