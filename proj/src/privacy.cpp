// Copyright 2026 The ldpsgd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "ldpsgd/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ldpsgd {

PrivacyParams::PrivacyParams(double epsilon) : epsilon_(epsilon) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    throw ValidationError("privacy epsilon must be finite and positive, got " +
                          std::to_string(epsilon));
  }
}

PrivacyParams PrivacyParams::no_noise() {
  PrivacyParams params;
  params.epsilon_ = std::numeric_limits<double>::infinity();
  params.no_noise_ = true;
  return params;
}

LaplaceMechanism::LaplaceMechanism(double sensitivity,
                                   const PrivacyParams& params)
    : sensitivity_(sensitivity), params_(params) {
  if (!std::isfinite(sensitivity) || sensitivity <= 0.0) {
    throw ValidationError("Laplace sensitivity must be finite and positive");
  }
  scale_ = params.is_no_noise() ? 0.0 : sensitivity / params.epsilon();
}

double LaplaceMechanism::density(double x) const {
  return std::exp(-std::abs(x) / scale_) / (2.0 * scale_);
}

double LaplaceMechanism::quantile(double u) const {
  const double centered = u - 0.5;
  const double tail = std::log1p(-2.0 * std::abs(centered));
  return centered < 0.0 ? scale_ * tail : -scale_ * tail;
}

double laplace_noise(const LaplaceMechanism& mech, Rng& rng) {
  if (mech.params().is_no_noise()) return 0.0;
  return mech.quantile(uniform01(rng));
}

void privatize_vector_laplace_inplace(Vector& g, double l1_sensitivity,
                                      const PrivacyParams& params, Rng& rng) {
  if (!g.allFinite()) {
    throw ValidationError("cannot privatize a non-finite gradient");
  }
  if (params.is_no_noise()) return;
  const LaplaceMechanism mech(l1_sensitivity, params);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    g[k] += mech.quantile(uniform01(rng));
  }
}

Vector privatize_vector_laplace(const Vector& g, double l1_sensitivity,
                                const PrivacyParams& params, Rng& rng) {
  Vector out = g;
  privatize_vector_laplace_inplace(out, l1_sensitivity, params, rng);
  return out;
}

RandomizedResponse::RandomizedResponse(const PrivacyParams& params)
    : params_(params) {
  if (params.is_no_noise()) {
    keep_ = 1.0;
    flip_ = 0.0;
    denom_ = 1.0;
    return;
  }
  const double e = std::exp(params.epsilon());
  keep_ = e / (e + 1.0);
  flip_ = 1.0 / (e + 1.0);
  denom_ = std::tanh(0.5 * params.epsilon());
}

double RandomizedResponse::probability(int out, int in) const {
  return out == in ? keep_ : flip_;
}

int RandomizedResponse::respond(int bit, Rng& rng) const {
  if (params_.is_no_noise()) return bit;
  return uniform01(rng) < keep_ ? bit : 1 - bit;
}

double RandomizedResponse::debias(int noisy_bit) const {
  return (noisy_bit - flip_) / denom_;
}

int randomized_response(int bit, const PrivacyParams& params, Rng& rng) {
  if (bit != 0 && bit != 1) {
    throw ValidationError("randomized response expects a bit in {0, 1}");
  }
  return RandomizedResponse(params).respond(bit, rng);
}

double debias_rr(int noisy_bit, const PrivacyParams& params) {
  if (!params.is_no_noise() && params.epsilon() < 1e-6) {
    throw ValidationError("epsilon below 1e-6 makes RR debiasing unstable");
  }
  return RandomizedResponse(params).debias(noisy_bit);
}

void BudgetLedger::recompute() {
  double sum = 0.0;
  double max = 0.0;
  double sequential = 0.0;
  double parallel_max = 0.0;
  for (const LedgerEntry& e : entries_) {
    sum += e.epsilon;
    max = std::max(max, e.epsilon);
    if (e.mode == CompositionMode::kSequential) {
      sequential += e.epsilon;
    } else {
      parallel_max = std::max(parallel_max, e.epsilon);
    }
  }
  total_sequential_ = sum;
  total_parallel_ = max;
  effective_ = sequential + parallel_max;
}

nlohmann::json BudgetLedger::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const LedgerEntry& e : entries_) {
    entries.push_back(
        {{"mechanism", e.mechanism_id},
         {"epsilon", e.epsilon},
         {"disjoint", e.disjoint},
         {"mode", e.mode == CompositionMode::kSequential ? "sequential"
                                                         : "parallel"}});
  }
  return {{"entries", entries},
          {"total_sequential", total_sequential_},
          {"total_parallel", total_parallel_},
          {"effective_epsilon", effective_}};
}

BudgetLedger compose(BudgetLedger ledger, LedgerEntry entry,
                     CompositionMode mode) {
  if (!(entry.epsilon > 0.0) || !std::isfinite(entry.epsilon)) {
    throw ValidationError("ledger entries need a finite positive epsilon");
  }
  if (mode == CompositionMode::kParallel && !entry.disjoint) {
    throw ValidationError("parallel composition of '" + entry.mechanism_id +
                          "' requires disjoint data");
  }
  entry.mode = mode;
  ledger.entries_.push_back(std::move(entry));
  ledger.recompute();
  return ledger;
}

}  // namespace ldpsgd
