// core/src/gmm.cpp

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

#include "npads/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "npads/binary_io.hpp"
#include "npads/error.hpp"

namespace npads {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Per-component constant ln w_k - 0.5 * sum_d ln(2 pi var_kd).
Vec log_norm_consts(const DiagGmm& gmm) {
  const Eigen::Index k = gmm.weights.size();
  Vec c(k);
  for (Eigen::Index i = 0; i < k; ++i)
    c(i) = std::log(gmm.weights(i)) -
           0.5 * (static_cast<double>(gmm.dim()) * kLog2Pi + gmm.variances.row(i).array().log().sum());
  return c;
}

// Component log-densities for every row: N x K.
Mat component_log_densities(const DiagGmm& gmm, const Mat& x) {
  const Vec consts = log_norm_consts(gmm);
  const Eigen::Index k = gmm.weights.size();
  Mat out(x.rows(), k);
  const Mat inv_var = gmm.variances.array().inverse().matrix();
  for (Eigen::Index j = 0; j < k; ++j) {
    const RowVec mu = gmm.means.row(j);
    const RowVec iv = inv_var.row(j);
    out.col(j) = (consts(j) - 0.5 * ((x.rowwise() - mu).array().square().rowwise() * iv.array()).rowwise().sum())
                     .matrix();
  }
  return out;
}

double log_sum_exp(const Eigen::Ref<const RowVec>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

void check_dims(const DiagGmm& gmm, Eigen::Index r) {
  if (static_cast<std::size_t>(r) != gmm.dim())
    throw DataError("gmm: latent has dimension " + std::to_string(r) + ", mixture expects " +
                    std::to_string(gmm.dim()));
}

// E-step: fills responsibilities (N x K) and returns mean log-likelihood.
double e_step(const DiagGmm& gmm, const Mat& x, Mat& resp) {
  resp = component_log_densities(gmm, x);
  double total = 0.0;
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    const double lse = log_sum_exp(resp.row(n));
    resp.row(n) = (resp.row(n).array() - lse).exp().matrix();
    total += lse;
  }
  return total / static_cast<double>(x.rows());
}

// M-step; returns the number of reseeded components.
int m_step(DiagGmm& gmm, const Mat& x, const Mat& resp, const EmOptions& opts) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = resp.cols();
  const Vec nk = resp.colwise().sum().transpose();
  int reseeded = 0;

  Vec point_ll;  // computed lazily if a component needs reseeding
  const RowVec global_mean = x.colwise().mean();
  const RowVec global_var =
      ((x.rowwise() - global_mean).array().square().colwise().mean()).max(opts.variance_floor).matrix();

  for (Eigen::Index j = 0; j < k; ++j) {
    if (nk(j) < 1e-10 * static_cast<double>(n)) {
      // Empty component: move it onto the worst-explained point.
      if (point_ll.size() == 0) point_ll = log_pdf_rows(gmm, x);
      Eigen::Index worst = 0;
      point_ll.minCoeff(&worst);
      gmm.means.row(j) = x.row(worst);
      gmm.variances.row(j) = global_var;
      gmm.weights(j) = 1.0 / static_cast<double>(n);
      ++reseeded;
      continue;
    }
    const RowVec mu = (resp.col(j).transpose() * x) / nk(j);
    const RowVec var =
        (resp.col(j).transpose() * (x.rowwise() - mu).array().square().matrix()) / nk(j);
    gmm.means.row(j) = mu;
    gmm.variances.row(j) = var.array().max(opts.variance_floor).matrix();
    gmm.weights(j) = nk(j) / static_cast<double>(n);
  }
  gmm.weights /= gmm.weights.sum();
  return reseeded;
}

EmResult run_em(DiagGmm gmm, const Mat& x, const EmOptions& opts) {
  EmResult r;
  Mat resp;
  double ll = e_step(gmm, x, resp);
  r.loglik.push_back(ll);
  for (int it = 0; it < opts.max_iters; ++it) {
    r.reseeded += m_step(gmm, x, resp, opts);
    const double next = e_step(gmm, x, resp);
    r.loglik.push_back(next);
    ++r.iterations;
    const double change = std::abs(next - ll) / std::max(std::abs(ll), 1e-300);
    ll = next;
    if (change < opts.rel_tol) break;
  }
  if (!std::isfinite(ll)) throw NumericalError("em: non-finite log-likelihood");
  r.gmm = std::move(gmm);
  return r;
}

}  // namespace

void DiagGmm::validate(double variance_floor) const {
  const Eigen::Index k = weights.size();
  if (k == 0) throw DataError("gmm: no components");
  if (means.rows() != k || variances.rows() != k || variances.cols() != means.cols())
    throw DataError("gmm: inconsistent parameter shapes");
  if ((weights.array() <= 0.0).any()) throw DataError("gmm: non-positive weight");
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw DataError("gmm: weights do not sum to 1");
  if ((variances.array() < variance_floor).any()) throw DataError("gmm: variance below floor");
}

double log_pdf(const DiagGmm& gmm, const Eigen::Ref<const Vec>& z) { return GmmDensity(gmm).log_pdf(z); }

GmmDensity::GmmDensity(const DiagGmm& gmm)
    : consts_(log_norm_consts(gmm)), means_(gmm.means), inv_var_(gmm.variances.array().inverse().matrix()) {}

double GmmDensity::log_pdf(const Eigen::Ref<const Vec>& z) const {
  if (static_cast<std::size_t>(z.size()) != dim())
    throw DataError("gmm: latent has dimension " + std::to_string(z.size()) + ", mixture expects " +
                    std::to_string(dim()));
  const Eigen::Index k = consts_.size();
  RowVec comp(k);
  for (Eigen::Index j = 0; j < k; ++j)
    comp(j) = consts_(j) - 0.5 * ((z.transpose() - means_.row(j)).array().square() * inv_var_.row(j).array()).sum();
  return log_sum_exp(comp);
}

Vec log_pdf_rows(const DiagGmm& gmm, const Mat& latents) {
  check_dims(gmm, latents.cols());
  const Mat comp = component_log_densities(gmm, latents);
  Vec out(latents.rows());
  for (Eigen::Index n = 0; n < latents.rows(); ++n) out(n) = log_sum_exp(comp.row(n));
  return out;
}

EmResult em_fit(const Mat& latents, std::size_t num_components, const EmOptions& opts, Rng& rng) {
  const Eigen::Index n = latents.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(num_components);
  if (k < 1) throw DataError("em_fit: need at least one component");
  if (n < k) throw DataError("em_fit: fewer samples (" + std::to_string(n) + ") than components (" +
                             std::to_string(k) + ")");

  // k-means++ seeding of the means.
  DiagGmm gmm;
  gmm.means.resize(k, latents.cols());
  gmm.means.row(0) = latents.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  Vec d2 = (latents.rowwise() - gmm.means.row(0)).rowwise().squaredNorm();
  for (Eigen::Index j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    }
    gmm.means.row(j) = latents.row(pick);
    d2 = d2.cwiseMin((latents.rowwise() - gmm.means.row(j)).rowwise().squaredNorm());
  }

  const RowVec mean = latents.colwise().mean();
  const RowVec var =
      ((latents.rowwise() - mean).array().square().colwise().mean()).max(opts.variance_floor).matrix();
  gmm.variances = var.replicate(k, 1);
  gmm.weights = Vec::Constant(k, 1.0 / static_cast<double>(k));
  return run_em(std::move(gmm), latents, opts);
}

EmResult em_refine(const DiagGmm& start, const Mat& latents, const EmOptions& opts) {
  check_dims(start, latents.cols());
  if (static_cast<std::size_t>(latents.rows()) < start.num_components())
    throw DataError("em_refine: fewer samples than components");
  return run_em(start, latents, opts);
}

void write_gmm(std::ostream& out, const DiagGmm& gmm) {
  binio::put<std::uint64_t>(out, gmm.num_components());
  binio::put<std::uint64_t>(out, gmm.dim());
  binio::put_doubles(out, gmm.weights.data(), static_cast<std::size_t>(gmm.weights.size()));
  binio::put_doubles(out, gmm.means.data(), static_cast<std::size_t>(gmm.means.size()));
  binio::put_doubles(out, gmm.variances.data(), static_cast<std::size_t>(gmm.variances.size()));
}

DiagGmm read_gmm(std::istream& in) {
  const auto k = binio::get<std::uint64_t>(in);
  const auto r = binio::get<std::uint64_t>(in);
  if (k == 0 || k > 4096 || r == 0 || r > 65536) throw DataError("gmm block: dims out of range");
  DiagGmm gmm;
  gmm.weights.resize(static_cast<Eigen::Index>(k));
  gmm.means.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r));
  gmm.variances.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r));
  binio::get_doubles(in, gmm.weights.data(), k);
  binio::get_doubles(in, gmm.means.data(), k * r);
  binio::get_doubles(in, gmm.variances.data(), k * r);
  gmm.validate(0.0);
  return gmm;
}

}  // namespace npads
