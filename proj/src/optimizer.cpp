#include "pmgc/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace pmgc {

void ParamStore::insert(const std::string& name, Matrix2D value) {
    auto [it, ok] = items_.emplace(name, std::move(value));
    if (!ok) throw std::invalid_argument("ParamStore: duplicate name '" + name + "'");
}

void ParamStore::update(const std::string& name, Matrix2D value) {
    Matrix2D& cur = at(name);
    if (!cur.same_shape(value))
        throw std::invalid_argument("ParamStore: shape change for '" + name + "' (" +
                                    cur.shape_str() + " -> " + value.shape_str() + ")");
    cur = std::move(value);
}

Matrix2D& ParamStore::at(const std::string& name) {
    auto it = items_.find(name);
    if (it == items_.end()) throw std::invalid_argument("ParamStore: unknown name '" + name + "'");
    return it->second;
}

const Matrix2D& ParamStore::at(const std::string& name) const {
    auto it = items_.find(name);
    if (it == items_.end()) throw std::invalid_argument("ParamStore: unknown name '" + name + "'");
    return it->second;
}

AdamState::AdamState(const ParamStore& params, AdamConfig cfg) : cfg_(cfg) {
    for (const auto& [name, p] : params) {
        m_.insert(name, Matrix2D(p.rows, p.cols));
        v_.insert(name, Matrix2D(p.rows, p.cols));
    }
}

void AdamState::step(ParamStore& params, const ParamStore& grads) {
    if (grads.size() != params.size())
        throw std::invalid_argument("adam_step: gradient/parameter key sets differ");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& [name, p] : params) {
        if (!grads.contains(name))
            throw std::invalid_argument("adam_step: missing gradient for '" + name + "'");
        const Matrix2D& g = grads.at(name);
        if (!g.same_shape(p))
            throw std::invalid_argument("adam_step: gradient shape mismatch for '" + name + "'");
        if (!g.all_finite())
            throw std::runtime_error("adam_step: non-finite gradient for '" + name + "'");
        Matrix2D& m = m_.at(name);
        Matrix2D& v = v_.at(name);
        for (int i = 0; i < p.size(); ++i) {
            const double gi = g.data[i];
            m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * gi;
            v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * gi * gi;
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            p.data[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

}  // namespace pmgc
