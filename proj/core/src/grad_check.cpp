// Copyright 2026 The cyclegan-vc3 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cvc3/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cvc3/errors.hpp"

namespace cvc3 {

namespace {

double evaluate(const std::function<Tensor()>& closure) {
  const Tensor out = closure();
  if (out.numel() != 1) throw ShapeError("grad_check: closure must return a scalar");
  const double v = out.item();
  if (!std::isfinite(v)) throw NumericError("grad_check: closure produced a non-finite value");
  return v;
}

}  // namespace

GradCheckReport grad_check_report(const std::function<Tensor()>& closure,
                                  std::span<Tensor> inputs, double eps) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  Tensor out;
  try {
    out = closure();
  } catch (const NumericError& e) {
    throw NumericError(std::string("grad_check: ") + e.what());
  }
  if (out.numel() != 1 || !std::isfinite(out.item())) {
    throw NumericError("grad_check: closure produced a non-finite or non-scalar value");
  }
  out.backward();

  std::vector<std::vector<double>> analytic;
  for (const auto& t : inputs) {
    std::vector<double> g(t.numel(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), g.begin());
    for (double v : g) {
      if (!std::isfinite(v)) throw NumericError("grad_check: non-finite analytic gradient");
    }
    analytic.push_back(std::move(g));
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].data_mut();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double plus = evaluate(closure);
      values[i] = saved - eps;
      const double minus = evaluate(closure);
      values[i] = saved;
      const double fd = (plus - minus) / (2.0 * eps);
      const double ad = analytic[k][i];
      const double err = std::fabs(ad - fd) / std::max(1e-8, std::fabs(ad) + std::fabs(fd));
      if (err > report.max_rel_error) report = {err, k, i};
    }
  }
  return report;
}

double grad_check(const std::function<Tensor()>& closure, std::span<Tensor> inputs, double eps) {
  return grad_check_report(closure, inputs, eps).max_rel_error;
}

}  // namespace cvc3
