#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "graphpb/errors.hpp"
#include "graphpb/tensor.hpp"

namespace graphpb {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Learning-rate annealing: exponential decay from `initial` to `final`,
// reaching `final` exactly at iteration `decay_iters` and constant after.
struct LrSchedule {
    double initial = 1e-3;
    double final_lr = 1e-5;
    int decay_iters = 5000;

    // iter is 1-based.
    double at(int iter) const {
        if (iter >= decay_iters || decay_iters <= 0) return final_lr;
        const double frac = static_cast<double>(iter) / static_cast<double>(decay_iters);
        return initial * std::pow(final_lr / initial, frac);
    }
};

// First/second moment estimates for one parameter tensor.
struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamMoments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One Adam update. `t` is the 1-based step count already including this step.
inline void adam_step(Tensor& param, const Tensor& grad, AdamMoments& state, int t,
                      double lr, const AdamConfig& cfg = {}) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols())
        throw ShapeMismatch("adam_step: param " + param.shape_string() + " vs grad " +
                            grad.shape_string());
    if (state.m.size() != param.size()) state = AdamMoments(param.size());
    auto& p = param.values_mutable();
    const auto& g = grad.values();
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < p.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

// Applies adam_step to a fixed parameter list each iteration, reading each
// parameter's gradient buffer. Holds non-owning pointers; the model must
// outlive the optimizer.
class AdamOptimizer {
  public:
    explicit AdamOptimizer(std::vector<Tensor*> params, AdamConfig cfg = {})
        : params_(std::move(params)), cfg_(cfg) {
        states_.reserve(params_.size());
        for (Tensor* p : params_) states_.emplace_back(p->size());
    }

    void step(double lr) {
        ++t_;
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Tensor grad = params_[i]->grad_tensor();
            adam_step(*params_[i], grad, states_[i], t_, lr, cfg_);
        }
    }

    int steps_taken() const { return t_; }

  private:
    std::vector<Tensor*> params_;
    AdamConfig cfg_;
    std::vector<AdamMoments> states_;
    int t_ = 0;
};

}  // namespace graphpb
