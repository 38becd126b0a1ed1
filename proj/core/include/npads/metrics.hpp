// core/include/npads/metrics.hpp

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

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace npads {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

using RocCurve = std::vector<RocPoint>;

// Sweeps the threshold over the pooled unique scores (a score >= threshold is
// flagged). Starts at (0, 0), ends at (1, 1); tied scores produce diagonal
// segments. Throws DataError if either list is empty.
RocCurve roc_curve(std::span<const double> normal_scores, std::span<const double> anomalous_scores);

// P(anomalous score > normal score) with ties counted 1/2.
double auc_rank(std::span<const double> normal_scores, std::span<const double> anomalous_scores);

// Trapezoidal area under a ROC polyline on FPR in [0, max_fpr].
double roc_area(const RocCurve& roc, double max_fpr = 1.0);

// Area on FPR in [0, p] divided by p.
double pauc(const RocCurve& roc, double p = 0.1);

// TPR at FPR == rho, interpolating linearly from the last point with FPR <= rho.
double rho_tpr(const RocCurve& roc, double rho = 0.05);

struct EvalReport {
  std::string condition;  // e.g. "anr=-15" or "pooled"
  double anr_db = std::numeric_limits<double>::quiet_NaN();
  std::string category;
  std::size_t num_normal = 0;
  std::size_t num_anomalous = 0;
  RocCurve roc;
  double auc = 0.0;
  double pauc = 0.0;
  double pauc_p = 0.1;
  double rho_tpr = 0.0;
  double rho = 0.05;
};

EvalReport evaluate_scores(std::span<const double> normal_scores, std::span<const double> anomalous_scores,
                           double rho = 0.05, double p = 0.1);

// JSON array of reports (ROC points excluded; those go to CSV).
std::string reports_to_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> reports_from_json(std::string_view json);

// "fpr,tpr" with one point per line.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc);

}  // namespace npads
