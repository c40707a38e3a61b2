#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bdc {

/// Adam with decoupled weight decay: the decay term is applied to the weights
/// directly (w -= lr * wd * w) instead of being folded into the gradient.
class AdamW {
public:
    struct Params {
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
        double weight_decay = 0.01;
    };

    AdamW(std::size_t parameter_count, Params params);

    void step(std::span<double> parameters, std::span<const double> gradients, double lr);

    std::size_t step_count() const noexcept { return step_; }
    const Params& params() const noexcept { return params_; }

private:
    Params params_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t step_ = 0;
};

/// base_lr * 0.5 * (1 + cos(pi * step / total_steps)), annealing to 0 at total_steps.
double cosine_annealing_lr(double base_lr, std::size_t step, std::size_t total_steps);

} // namespace bdc
