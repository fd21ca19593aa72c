#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hoidet/model.hpp"

namespace hoidet {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction over the flattened parameter vector. Moment
/// buffers follow the parameter registration order, so optimizer state can
/// be serialized next to the parameters it belongs to.
class Adam {
  public:
    Adam() = default;
    Adam(AdamConfig config, std::size_t total_size)
        : config_(config), m_(total_size, 0.0), v_(total_size, 0.0) {}

    const AdamConfig& config() const { return config_; }
    std::uint64_t step_count() const { return step_; }
    std::vector<double>& m() { return m_; }
    std::vector<double>& v() { return v_; }
    const std::vector<double>& m() const { return m_; }
    const std::vector<double>& v() const { return v_; }
    void set_step(std::uint64_t s) { step_ = s; }

    void step(Parameters& params, const Parameters& grads) {
        if (params.total_size() != m_.size())
            throw std::invalid_argument("optimizer state does not match parameter count");
        ++step_;
        const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
        const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
        std::size_t off = 0;
        for (std::size_t t = 0; t < params.count(); ++t) {
            auto& p = params[t].data;
            const auto& g = grads[t].data;
            for (std::size_t i = 0; i < p.size(); ++i, ++off) {
                m_[off] = config_.beta1 * m_[off] + (1.0 - config_.beta1) * g[i];
                v_[off] = config_.beta2 * v_[off] + (1.0 - config_.beta2) * g[i] * g[i];
                const double mhat = m_[off] / c1;
                const double vhat = v_[off] / c2;
                p[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.epsilon);
            }
        }
    }

  private:
    AdamConfig config_;
    std::uint64_t step_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

}  // namespace hoidet
