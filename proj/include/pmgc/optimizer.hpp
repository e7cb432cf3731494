#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pmgc/matrix.hpp"

namespace pmgc {

// Named parameter collection with deterministic (sorted) iteration order.
// Shapes are fixed at insert time; update() enforces that.
class ParamStore {
public:
    void insert(const std::string& name, Matrix2D value);
    void update(const std::string& name, Matrix2D value);  // shape-checked
    bool contains(const std::string& name) const { return items_.count(name) > 0; }
    Matrix2D& at(const std::string& name);
    const Matrix2D& at(const std::string& name) const;
    size_t size() const { return items_.size(); }

    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::map<std::string, Matrix2D> items_;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction. Moment matrices mirror the parameter shapes;
// the step counter advances by exactly 1 per step() call.
class AdamState {
public:
    AdamState(const ParamStore& params, AdamConfig cfg = {});

    void step(ParamStore& params, const ParamStore& grads);

    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const ParamStore& first_moment() const { return m_; }
    const ParamStore& second_moment() const { return v_; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    ParamStore m_;
    ParamStore v_;
};

// Free-function spelling of the update op.
inline void adam_step(ParamStore& params, const ParamStore& grads, AdamState& state) {
    state.step(params, grads);
}

}  // namespace pmgc
