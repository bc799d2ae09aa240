// Copyright 2026 The tprlab Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tprlab/common.hpp"

namespace tprlab {

using RowMatrixMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMatrixMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

struct TensorInfo {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
  bool operator==(const TensorInfo&) const = default;
};

/// Named row-major tensors packed into one contiguous buffer. The flat view
/// is what optimizers, gradient checks and checkpoints operate on.
class ParameterSet {
 public:
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols);

  RowMatrixMap tensor(std::size_t i);
  ConstRowMatrixMap tensor(std::size_t i) const;
  const TensorInfo& info(std::size_t i) const { return tensors_.at(i); }
  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  std::size_t find(const std::string& name) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  /// Same layout, all values zero.
  ParameterSet zeros_like() const;
  void set_zero();
  bool all_finite() const;
  double squared_norm() const;

  bool operator==(const ParameterSet& other) const {
    return tensors_ == other.tensors_ && values_ == other.values_;
  }

 private:
  std::vector<TensorInfo> tensors_;
  std::vector<double> values_;
};

/// Adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  struct Options {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam(std::size_t n, Options opts);

  /// Descends along `grad` (gradient of a quantity to minimize).
  void step(std::span<double> params, std::span<const double> grad);
  long long steps() const { return t_; }

 private:
  Options opts_;
  std::vector<double> m_;
  std::vector<double> v_;
  long long t_ = 0;
};

/// Rescales `grad` in place so its L2 norm is at most `max_norm`; returns the
/// norm before clipping.
double clip_global_norm(std::span<double> grad, double max_norm);

/// A differentiable scalar function of a flat parameter vector. Writes the
/// gradient into `grad` (already sized, overwritten) and returns the value.
using DifferentiableFn = std::function<double(std::span<const double> params, std::span<double> grad)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::vector<std::size_t> indices;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Relative error between an analytic and a numeric derivative:
/// |a - n| / max(|a|, |n|), defined as 0 when both are exactly 0.
double relative_error(double analytic, double numeric);

/// Compares analytic derivatives against central finite differences at the
/// given parameter indices.
GradCheckReport grad_check(const DifferentiableFn& fn, std::vector<double> params,
                           std::span<const std::size_t> indices, double epsilon);

}  // namespace tprlab
