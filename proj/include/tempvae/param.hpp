// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tempvae {

using Mat = Eigen::MatrixXd;

// One named trainable (or frozen) array together with its gradient and the
// Adam moment accumulators.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  Mat m;  // first moment
  Mat v;  // second moment
  bool trainable = true;
};

class ParamStore {
public:
  Parameter& add(std::string name, Eigen::Index rows, Eigen::Index cols,
                 bool trainable = true) {
    if (find(name) != nullptr)
      throw std::invalid_argument("duplicate parameter name: " + name);
    auto p = std::make_unique<Parameter>();
    p->name = std::move(name);
    p->value = Mat::Zero(rows, cols);
    p->grad = Mat::Zero(rows, cols);
    p->m = Mat::Zero(rows, cols);
    p->v = Mat::Zero(rows, cols);
    p->trainable = trainable;
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Parameter* find(std::string_view name) {
    for (auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }
  const Parameter* find(std::string_view name) const {
    return const_cast<ParamStore*>(this)->find(name);
  }

  void zero_grads() {
    for (auto& p : params_) p->grad.setZero();
  }

  std::size_t size() const { return params_.size(); }
  Parameter& at(std::size_t i) { return *params_[i]; }
  const Parameter& at(std::size_t i) const { return *params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace tempvae
