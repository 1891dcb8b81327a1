#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "f2v/core/errors.hpp"

namespace f2v {

template <class T>
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;

  std::size_t size() const { return value.size(); }
};

// Named, ordered parameter blobs with matching gradient buffers.
template <class T>
class ParameterSet {
 public:
  int add(std::string name, std::vector<int> shape) {
    std::size_t count = 1;
    for (int d : shape) count *= static_cast<std::size_t>(d);
    params_.push_back({std::move(name), std::move(shape), std::vector<T>(count, T(0)), std::vector<T>(count, T(0))});
    return static_cast<int>(params_.size() - 1);
  }

  Parameter<T>& operator[](int i) { return params_[static_cast<std::size_t>(i)]; }
  const Parameter<T>& operator[](int i) const { return params_[static_cast<std::size_t>(i)]; }
  std::vector<Parameter<T>>& all() { return params_; }
  const std::vector<Parameter<T>>& all() const { return params_; }
  std::size_t count() const { return params_.size(); }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
  }

  Parameter<T>& find(const std::string& name) {
    for (auto& p : params_) {
      if (p.name == name) return p;
    }
    throw Error("no parameter named '" + name + "'");
  }

  void zero_grad() {
    for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), T(0));
  }

 private:
  std::vector<Parameter<T>> params_;
};

}  // namespace f2v
