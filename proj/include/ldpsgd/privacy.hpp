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
#ifndef LDPSGD_PRIVACY_HPP_
#define LDPSGD_PRIVACY_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldpsgd/common.hpp"
#include "ldpsgd/rng.hpp"

namespace ldpsgd {

// Privacy budget. `no_noise` stands in for epsilon = infinity: every
// mechanism becomes the identity and consumes no randomness.
class PrivacyParams {
 public:
  // Throws ValidationError unless epsilon is finite and positive.
  explicit PrivacyParams(double epsilon);

  static PrivacyParams no_noise();

  double epsilon() const { return epsilon_; }
  bool is_no_noise() const { return no_noise_; }

 private:
  PrivacyParams() = default;

  double epsilon_ = 0.0;
  bool no_noise_ = false;
};

// Adds Lap(0, sensitivity / epsilon) noise. Samples by inverse CDF from a
// single uniform draw.
class LaplaceMechanism {
 public:
  LaplaceMechanism(double sensitivity, const PrivacyParams& params);

  double sensitivity() const { return sensitivity_; }
  const PrivacyParams& params() const { return params_; }
  // b = sensitivity / epsilon; zero in no-noise mode.
  double scale() const { return scale_; }

  // Density of the added noise, (1/2b) exp(-|x|/b).
  double density(double x) const;

  // Inverse CDF of Lap(0, b) at u in (0, 1).
  double quantile(double u) const;

 private:
  double sensitivity_;
  PrivacyParams params_;
  double scale_;
};

double laplace_noise(const LaplaceMechanism& mech, Rng& rng);

// Coordinate-wise Laplace mechanism with the L1 sensitivity as the scale
// numerator. Throws ValidationError on non-finite input.
Vector privatize_vector_laplace(const Vector& g, double l1_sensitivity,
                                const PrivacyParams& params, Rng& rng);
// In-place variant for the hot loop.
void privatize_vector_laplace_inplace(Vector& g, double l1_sensitivity,
                                      const PrivacyParams& params, Rng& rng);

// Randomized response on one bit with keep probability
// p = e^eps / (e^eps + 1).
class RandomizedResponse {
 public:
  explicit RandomizedResponse(const PrivacyParams& params);

  const PrivacyParams& params() const { return params_; }
  double keep_probability() const { return keep_; }
  double flip_probability() const { return flip_; }

  // P(output = out | input = in).
  double probability(int out, int in) const;

  int respond(int bit, Rng& rng) const;

  // Affine rescaling (noisy - (1 - p)) / (2p - 1), conditionally unbiased
  // for the true bit.
  double debias(int noisy_bit) const;

 private:
  PrivacyParams params_;
  double keep_;
  double flip_;
  double denom_;  // 2p - 1
};

int randomized_response(int bit, const PrivacyParams& params, Rng& rng);

// Rejects epsilon < 1e-6, where 2p - 1 loses all precision.
double debias_rr(int noisy_bit, const PrivacyParams& params);

// Budget accounting under sequential and parallel composition.
enum class CompositionMode { kSequential, kParallel };

struct LedgerEntry {
  std::string mechanism_id;
  double epsilon = 0.0;
  // Set when the entry acts on data disjoint from every other parallel
  // entry. Required for parallel composition.
  bool disjoint = false;
  CompositionMode mode = CompositionMode::kSequential;
};

class BudgetLedger {
 public:
  const std::vector<LedgerEntry>& entries() const { return entries_; }

  // Sum of all epsilons: the bound when every mechanism sees the same data.
  double total_sequential() const { return total_sequential_; }
  // Max of all epsilons: the bound when every mechanism sees disjoint data.
  double total_parallel() const { return total_parallel_; }
  // Sequential entries add; the parallel group contributes its maximum.
  double effective_epsilon() const { return effective_; }

  nlohmann::json to_json() const;

 private:
  friend BudgetLedger compose(BudgetLedger ledger, LedgerEntry entry,
                              CompositionMode mode);
  void recompute();

  std::vector<LedgerEntry> entries_;
  double total_sequential_ = 0.0;
  double total_parallel_ = 0.0;
  double effective_ = 0.0;
};

// Returns the ledger with `entry` appended under `mode`. Throws
// ValidationError for non-positive epsilon, or for parallel composition of
// an entry that is not flagged disjoint.
BudgetLedger compose(BudgetLedger ledger, LedgerEntry entry,
                     CompositionMode mode);

}  // namespace ldpsgd

#endif  // LDPSGD_PRIVACY_HPP_
