#include "bdc/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bdc/errors.hpp"

namespace bdc {

AdamW::AdamW(std::size_t parameter_count, Params params)
    : params_(params), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void AdamW::step(std::span<double> parameters, std::span<const double> gradients, double lr) {
    if (parameters.size() != m_.size() || gradients.size() != m_.size()) {
        throw DimensionError("AdamW::step: expected " + std::to_string(m_.size()) +
                             " parameters and gradients");
    }
    ++step_;
    const double b1 = params_.beta1;
    const double b2 = params_.beta2;
    const double t = static_cast<double>(step_);
    const double bias1 = 1.0 - std::pow(b1, t);
    const double bias2 = 1.0 - std::pow(b2, t);

    for (std::size_t i = 0; i < parameters.size(); ++i) {
        const double g = gradients[i];
        m_[i] = b1 * m_[i] + (1.0 - b1) * g;
        v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
        const double m_hat = m_[i] / bias1;
        const double v_hat = v_[i] / bias2;
        parameters[i] -= lr * params_.weight_decay * parameters[i];
        parameters[i] -= lr * m_hat / (std::sqrt(v_hat) + params_.epsilon);
    }
}

double cosine_annealing_lr(double base_lr, std::size_t step, std::size_t total_steps) {
    if (total_steps == 0) return base_lr;
    const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
    return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

} // namespace bdc
