// core/src/metrics.cpp

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

#include "npads/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "json.hpp"
#include "npads/error.hpp"

namespace npads {

RocCurve roc_curve(std::span<const double> normal_scores, std::span<const double> anomalous_scores) {
  if (normal_scores.empty() || anomalous_scores.empty()) throw DataError("roc: empty score list");
  std::vector<double> neg(normal_scores.begin(), normal_scores.end());
  std::vector<double> pos(anomalous_scores.begin(), anomalous_scores.end());
  std::sort(neg.begin(), neg.end(), std::greater<>());
  std::sort(pos.begin(), pos.end(), std::greater<>());

  const double nn = static_cast<double>(neg.size());
  const double np = static_cast<double>(pos.size());
  RocCurve roc{{0.0, 0.0}};
  std::size_t i = 0, j = 0;
  while (i < neg.size() || j < pos.size()) {
    // next threshold: the largest score not yet passed
    double t = -std::numeric_limits<double>::infinity();
    if (i < neg.size()) t = std::max(t, neg[i]);
    if (j < pos.size()) t = std::max(t, pos[j]);
    while (i < neg.size() && neg[i] >= t) ++i;
    while (j < pos.size() && pos[j] >= t) ++j;
    roc.push_back({static_cast<double>(i) / nn, static_cast<double>(j) / np});
  }
  return roc;
}

double auc_rank(std::span<const double> normal_scores, std::span<const double> anomalous_scores) {
  if (normal_scores.empty() || anomalous_scores.empty()) throw DataError("auc: empty score list");
  std::vector<double> neg(normal_scores.begin(), normal_scores.end());
  std::sort(neg.begin(), neg.end());
  // twice the pair credit, kept integral
  std::uint64_t credit2 = 0;
  for (double a : anomalous_scores) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), a);
    const auto hi = std::upper_bound(lo, neg.end(), a);
    credit2 += 2 * static_cast<std::uint64_t>(lo - neg.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(credit2) /
         (2.0 * static_cast<double>(neg.size()) * static_cast<double>(anomalous_scores.size()));
}

double roc_area(const RocCurve& roc, double max_fpr) {
  double area = 0.0;
  for (std::size_t k = 1; k < roc.size(); ++k) {
    const RocPoint a = roc[k - 1];
    const RocPoint b = roc[k];
    if (a.fpr >= max_fpr) break;
    if (b.fpr <= max_fpr) {
      area += 0.5 * (a.tpr + b.tpr) * (b.fpr - a.fpr);
    } else {
      const double t = (max_fpr - a.fpr) / (b.fpr - a.fpr);
      const double tpr_at = a.tpr + t * (b.tpr - a.tpr);
      area += 0.5 * (a.tpr + tpr_at) * (max_fpr - a.fpr);
      break;
    }
  }
  return area;
}

double pauc(const RocCurve& roc, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DataError("pauc: p must lie in (0, 1]");
  return roc_area(roc, p) / p;
}

double rho_tpr(const RocCurve& roc, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DataError("rho_tpr: rho must lie in (0, 1)");
  if (roc.empty()) throw DataError("rho_tpr: empty ROC");
  std::size_t last = 0;
  for (std::size_t k = 0; k < roc.size(); ++k)
    if (roc[k].fpr <= rho) last = k;
  const RocPoint a = roc[last];
  if (a.fpr == rho || last + 1 == roc.size()) return a.tpr;
  const RocPoint b = roc[last + 1];
  return a.tpr + (rho - a.fpr) / (b.fpr - a.fpr) * (b.tpr - a.tpr);
}

EvalReport evaluate_scores(std::span<const double> normal_scores, std::span<const double> anomalous_scores,
                           double rho, double p) {
  EvalReport r;
  r.num_normal = normal_scores.size();
  r.num_anomalous = anomalous_scores.size();
  r.roc = roc_curve(normal_scores, anomalous_scores);
  r.auc = auc_rank(normal_scores, anomalous_scores);
  r.pauc_p = p;
  r.pauc = pauc(r.roc, p);
  r.rho = rho;
  r.rho_tpr = rho_tpr(r.roc, rho);
  return r;
}

std::string reports_to_json(const std::vector<EvalReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["condition"] = r.condition;
    if (std::isnan(r.anr_db))
      j["anr_db"] = nullptr;
    else
      j["anr_db"] = r.anr_db;
    j["category"] = r.category;
    j["num_normal"] = r.num_normal;
    j["num_anomalous"] = r.num_anomalous;
    j["auc"] = r.auc;
    j["pauc"] = r.pauc;
    j["pauc_p"] = r.pauc_p;
    j["rho_tpr"] = r.rho_tpr;
    j["rho"] = r.rho;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<EvalReport> reports_from_json(std::string_view text) {
  std::vector<EvalReport> out;
  try {
    const auto arr = nlohmann::json::parse(text);
    for (const auto& j : arr) {
      EvalReport r;
      r.condition = j.at("condition").get<std::string>();
      r.anr_db = j.at("anr_db").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("anr_db").get<double>();
      r.category = j.at("category").get<std::string>();
      r.num_normal = j.at("num_normal").get<std::size_t>();
      r.num_anomalous = j.at("num_anomalous").get<std::size_t>();
      r.auc = j.at("auc").get<double>();
      r.pauc = j.at("pauc").get<double>();
      r.pauc_p = j.at("pauc_p").get<double>();
      r.rho_tpr = j.at("rho_tpr").get<double>();
      r.rho = j.at("rho").get<double>();
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("eval report json: ") + e.what());
  }
  return out;
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw DataError("cannot write " + path.string());
  std::fprintf(f, "fpr,tpr\n");
  for (const auto& p : roc) std::fprintf(f, "%.17g,%.17g\n", p.fpr, p.tpr);
  std::fclose(f);
}

}  // namespace npads
