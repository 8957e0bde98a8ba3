#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "graphpb/tensor.hpp"

namespace graphpb {

// Central-finite-difference comparison against tape gradients. The numeric
// side never touches the tape: after the analytic pass the parameters are
// detached and the loss closure is re-evaluated as a plain forward.
struct GradCheckResult {
    double max_rel_error = 0.0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
    std::size_t entries_checked = 0;
};

// `loss_fn` must rebuild the loss from the current values of the pointed-to
// parameters on every call (they are the tensors perturbed and attached).
// Relative error uses |a - n| / max(1e-8, |a| + |n|).
inline GradCheckResult gradcheck(const std::vector<Tensor*>& params,
                                 const std::function<Tensor()>& loss_fn,
                                 double step = 1e-5) {
    Tape tape;
    for (Tensor* p : params) p->attach(tape);
    Tensor loss = loss_fn();
    tape.backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const Tensor* p : params) analytic.push_back(p->grad());
    for (Tensor* p : params) p->detach();

    GradCheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& data = params[pi]->values_mutable();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double orig = data[i];
            data[i] = orig + step;
            const double up = loss_fn().value();
            data[i] = orig - step;
            const double down = loss_fn().value();
            data[i] = orig;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[pi][i];
            const double rel =
                std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            ++result.entries_checked;
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.analytic_at_worst = a;
                result.numeric_at_worst = numeric;
            }
        }
    }
    return result;
}

}  // namespace graphpb
