// Copyright 2026 The rrlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "model/internal.hpp"
#include "rrlab/error.hpp"

namespace rrlab::model {
namespace {

void CheckCongruent(const Parameters& params, const Gradients& grads) {
  if (params.arrays.size() != grads.arrays.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient has " + std::to_string(grads.arrays.size()) +
                                               " arrays, parameters have " +
                                               std::to_string(params.arrays.size()));
  }
  for (size_t i = 0; i < params.arrays.size(); ++i) {
    if (params.arrays[i].rows() != grads.arrays[i].rows() ||
        params.arrays[i].cols() != grads.arrays[i].cols()) {
      throw Error(ErrorCode::kShapeMismatch, "gradient shape differs for " + params.names[i]);
    }
  }
}

}  // namespace

void ApplyUpdate(Parameters& params, const Gradients& grads, Optimizer& opt) {
  CheckCongruent(params, grads);
  for (size_t i = 0; i < grads.arrays.size(); ++i) {
    if (!grads.arrays[i].allFinite()) {
      throw Error(ErrorCode::kNonFinite, "non-finite gradient in " + params.names[i]);
    }
  }
  std::vector<Matrix> updated(params.arrays.size());
  std::vector<Matrix> m, v;
  if (opt.mode == OptimizerMode::kSgd) {
    for (size_t i = 0; i < params.arrays.size(); ++i) {
      updated[i] = params.arrays[i] - opt.lr * grads.arrays[i];
    }
  } else {
    const bool fresh = opt.m.empty();
    const int64_t t = opt.step + 1;
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t));
    m.resize(params.arrays.size());
    v.resize(params.arrays.size());
    for (size_t i = 0; i < params.arrays.size(); ++i) {
      const Matrix& g = grads.arrays[i];
      const Matrix zero = Matrix::Zero(g.rows(), g.cols());
      const Matrix& m0 = fresh ? zero : opt.m[i];
      const Matrix& v0 = fresh ? zero : opt.v[i];
      m[i] = opt.beta1 * m0 + (1.0 - opt.beta1) * g;
      v[i] = opt.beta2 * v0 + (1.0 - opt.beta2) * g.cwiseProduct(g);
      updated[i] = params.arrays[i].array() -
                   opt.lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + opt.epsilon);
    }
  }
  for (size_t i = 0; i < updated.size(); ++i) {
    if (!updated[i].allFinite()) {
      throw Error(ErrorCode::kNonFinite, "update would make " + params.names[i] + " non-finite");
    }
  }
  params.arrays = std::move(updated);
  if (opt.mode == OptimizerMode::kAdam) {
    opt.m = std::move(m);
    opt.v = std::move(v);
  }
  ++opt.step;
  params.Touch();
}

GradCheckReport CheckGradients(const Parameters& params,
                               std::span<const GradCheckExample> examples, double epsilon,
                               double floor, size_t max_per_array) {
  if (examples.empty()) throw Error(ErrorCode::kInvalidArgument, "no gradient-check examples");
  const double n = static_cast<double>(examples.size());
  Gradients analytic = params.ZerosLike();
  for (const auto& ex : examples) {
    ActivationCache cache;
    ForwardTeacherForced(params, ex.input_ids, ex.target_ids, &cache);
    AddInto(analytic, Backward(params, cache, 1.0 / n));
  }
  Parameters probe = params;
  auto mean_loss = [&]() {
    double total = 0.0;
    for (const auto& ex : examples) {
      total += ForwardTeacherForced(probe, ex.input_ids, ex.target_ids).loss;
    }
    return total / n;
  };
  GradCheckReport report;
  for (size_t a = 0; a < probe.arrays.size(); ++a) {
    Matrix& arr = probe.arrays[a];
    Eigen::Index stride = 1;
    if (max_per_array > 0 && static_cast<size_t>(arr.size()) > max_per_array) {
      stride = (arr.size() + static_cast<Eigen::Index>(max_per_array) - 1) /
               static_cast<Eigen::Index>(max_per_array);
    }
    for (Eigen::Index i = 0; i < arr.size(); i += stride) {
      const double saved = arr.data()[i];
      arr.data()[i] = saved + epsilon;
      const double plus = mean_loss();
      arr.data()[i] = saved - epsilon;
      const double minus = mean_loss();
      arr.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double exact = analytic.arrays[a].data()[i];
      const double denom = std::max({std::abs(exact), std::abs(numeric), floor});
      const double rel = std::abs(exact - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = probe.names[a];
        report.worst_index = static_cast<size_t>(i);
      }
    }
  }
  return report;
}

}  // namespace rrlab::model
