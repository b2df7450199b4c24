#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "relievo/mat.hpp"

namespace relievo {

// Named parameter tensors with paired gradient accumulators.
class ParamStore {
public:
    struct Tensor {
        std::string name;
        int rows = 0, cols = 0;
        std::vector<real> v;  // values
        std::vector<real> g;  // gradient accumulator, same shape
        size_t size() const { return v.size(); }
    };

    int add(const std::string& name, int rows, int cols) {
        for (const auto& t : tensors_)
            if (t.name == name) throw std::runtime_error("duplicate parameter name: " + name);
        Tensor t;
        t.name = name;
        t.rows = rows;
        t.cols = cols;
        t.v.assign(static_cast<size_t>(rows) * cols, real(0));
        t.g.assign(t.v.size(), real(0));
        tensors_.push_back(std::move(t));
        return static_cast<int>(tensors_.size()) - 1;
    }

    Tensor& operator[](int id) { return tensors_.at(id); }
    const Tensor& operator[](int id) const { return tensors_.at(id); }

    int find(const std::string& name) const {
        for (size_t i = 0; i < tensors_.size(); ++i)
            if (tensors_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    int count() const { return static_cast<int>(tensors_.size()); }

    size_t param_count() const {
        size_t n = 0;
        for (const auto& t : tensors_) n += t.size();
        return n;
    }

    void zero_grads() {
        for (auto& t : tensors_) std::fill(t.g.begin(), t.g.end(), real(0));
    }

private:
    std::vector<Tensor> tensors_;
};

}  // namespace relievo
