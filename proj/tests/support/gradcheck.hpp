// tests/support/gradcheck.hpp

// Copyright 2026  The npads Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "npads/mlp.hpp"

namespace npads::testing {

// Gradients below this magnitude are compared in absolute terms: central
// differences cannot resolve them relative to roundoff in the loss.
inline constexpr double kGradFloor = 1e-6;

// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor = kGradFloor);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "layer L weight (i,j)" of the worst entry
};

// Compares `analytic` against central differences of `loss` for every
// parameter of `net`. `loss` must read `net` (by reference) on each call.
GradCheckResult check_mlp_gradient(Mlp& net, const MlpGrads& analytic, const std::function<double()>& loss,
                                   double h = 1e-5);

// Central-difference gradient of `loss` with respect to every entry of `x`.
Mat numeric_input_gradient(Mat& x, const std::function<double()>& loss, double h = 1e-5);

}  // namespace npads::testing

namespace npads::testing {

// Worst relative error per objective over encoder/decoder/generator
// parameters of small random nets (dims 12-8-4-8-12).
struct ObjectiveGradReport {
  GradCheckResult kr;
  GradCheckResult np;
  GradCheckResult auc;
  double max_rel_error() const;
};

ObjectiveGradReport check_objective_gradients(std::uint64_t seed, double h = 1e-5);

}  // namespace npads::testing
