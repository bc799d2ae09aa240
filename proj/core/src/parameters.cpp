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

#include "tprlab/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "tprlab/error.hpp"

namespace tprlab {

std::size_t ParameterSet::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0 || cols < 0) throw ConfigError("negative tensor shape for " + name);
  TensorInfo t{std::move(name), rows, cols, values_.size()};
  values_.resize(values_.size() + t.size(), 0.0);
  tensors_.push_back(std::move(t));
  return tensors_.size() - 1;
}

RowMatrixMap ParameterSet::tensor(std::size_t i) {
  const auto& t = tensors_.at(i);
  return RowMatrixMap(values_.data() + t.offset, t.rows, t.cols);
}

ConstRowMatrixMap ParameterSet::tensor(std::size_t i) const {
  const auto& t = tensors_.at(i);
  return ConstRowMatrixMap(values_.data() + t.offset, t.rows, t.cols);
}

std::size_t ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    if (tensors_[i].name == name) return i;
  throw LookupError("no tensor named " + name);
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  out.tensors_ = tensors_;
  out.values_.assign(values_.size(), 0.0);
  return out;
}

void ParameterSet::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

bool ParameterSet::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ParameterSet::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

Adam::Adam(std::size_t n, Options opts) : opts_(opts), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw ContractViolation("Adam::step: size mismatch");
  ++t_;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step = opts_.lr * std::sqrt(c2) / c1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    params[i] -= step * m_[i] / (std::sqrt(v_[i]) + opts_.eps * std::sqrt(c2));
  }
}

double clip_global_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max(std::abs(analytic), std::abs(numeric));
  if (denom == 0.0) return 0.0;
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const DifferentiableFn& fn, std::vector<double> params,
                           std::span<const std::size_t> indices, double epsilon) {
  GradCheckReport report;
  std::vector<double> grad(params.size(), 0.0), scratch(params.size(), 0.0);
  fn(params, grad);
  for (std::size_t idx : indices) {
    if (idx >= params.size()) throw LookupError("grad_check index out of range");
    const double saved = params[idx];
    params[idx] = saved + epsilon;
    const double up = fn(params, scratch);
    params[idx] = saved - epsilon;
    const double down = fn(params, scratch);
    params[idx] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err = relative_error(grad[idx], numeric);
    report.max_relative_error = std::max(report.max_relative_error, err);
    report.indices.push_back(idx);
    report.analytic.push_back(grad[idx]);
    report.numeric.push_back(numeric);
    ++report.checked;
  }
  return report;
}

}  // namespace tprlab
