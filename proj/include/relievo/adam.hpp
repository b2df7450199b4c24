#pragma once

#include <cmath>
#include <vector>

#include "relievo/params.hpp"

namespace relievo {

// Adam with bias correction. Moments persist across steps and are part of
// checkpoint state.
struct AdamHyper {
    real lr = 1e-4;
    real beta1 = 0.9;
    real beta2 = 0.999;
    real eps = 1e-8;
};

class Adam {
public:
    using Hyper = AdamHyper;

    explicit Adam(const ParamStore& params, Hyper hyper = {}) : hyper_(hyper) {
        m_.resize(params.count());
        v_.resize(params.count());
        for (int i = 0; i < params.count(); ++i) {
            m_[i].assign(params[i].size(), real(0));
            v_[i].assign(params[i].size(), real(0));
        }
    }

    void step(ParamStore& params) {
        ++t_;
        const real c1 = 1 - std::pow(hyper_.beta1, real(t_));
        const real c2 = 1 - std::pow(hyper_.beta2, real(t_));
        for (int i = 0; i < params.count(); ++i) {
            auto& p = params[i];
            auto& m = m_[i];
            auto& v = v_[i];
            for (size_t j = 0; j < p.size(); ++j) {
                const real g = p.g[j];
                m[j] = hyper_.beta1 * m[j] + (1 - hyper_.beta1) * g;
                v[j] = hyper_.beta2 * v[j] + (1 - hyper_.beta2) * g * g;
                p.v[j] -= hyper_.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + hyper_.eps);
            }
        }
    }

    Hyper& hyper() { return hyper_; }
    const Hyper& hyper() const { return hyper_; }
    long step_count() const { return t_; }
    void set_step_count(long t) { t_ = t; }
    std::vector<std::vector<real>>& moments1() { return m_; }
    std::vector<std::vector<real>>& moments2() { return v_; }

private:
    Hyper hyper_;
    long t_ = 0;
    std::vector<std::vector<real>> m_, v_;
};

}  // namespace relievo
