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
#ifndef LDPSGD_BOOTSTRAP_HPP_
#define LDPSGD_BOOTSTRAP_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "ldpsgd/common.hpp"
#include "ldpsgd/rng.hpp"
#include "ldpsgd/sgd.hpp"

namespace ldpsgd {

// Bounded mean-zero, unit-variance multiplier laws.
enum class MultiplierLaw { kUniformSqrt3, kRademacher };

std::string to_string(MultiplierLaw law);
MultiplierLaw multiplier_law_from_string(const std::string& name);

double draw_multiplier(MultiplierLaw law, Rng& rng);

struct BlockLayout {
  std::uint64_t block_length = 0;  // l
  std::uint64_t num_blocks = 0;    // m
  std::optional<std::string> warning;
};

// l = floor(n^beta) (or the explicit l), m = floor(n / l). Warns when the
// schedule exponent gamma is not below beta, since the block length then
// grows too slowly relative to the step sizes. Throws ValidationError for
// n < 4 or m < 2.
BlockLayout block_layout(std::uint64_t n, std::optional<double> beta,
                         std::optional<std::uint64_t> block_length,
                         double schedule_gamma);
// floor(n^beta) with a guard against pow() landing just below an integer.
std::uint64_t block_length_for(std::uint64_t n, double beta);

struct BootstrapConfig {
  std::uint64_t replicates = 500;  // B
  std::optional<double> beta = 0.75;
  std::optional<std::uint64_t> block_length;
  double alpha = 0.05;
  MultiplierLaw multiplier = MultiplierLaw::kUniformSqrt3;
  std::uint64_t seed = 0;

  void validate() const;
};

// The B bootstrap draws, one column per replicate (d x B).
struct BootstrapDraws {
  Matrix draws;

  std::uint64_t count() const { return static_cast<std::uint64_t>(draws.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(draws.rows()); }
};

struct ConfidenceInterval {
  Vector lower;
  Vector upper;
  double level = 0.0;  // 1 - 2 alpha

  Vector length() const { return upper - lower; }
  bool covers(std::size_t k, double value) const {
    const auto i = static_cast<Eigen::Index>(k);
    return lower[i] <= value && value <= upper[i];
  }
};

// (1 / (m l)) sum_j multiplier_j (block_sum_j - l theta_bar). Throws
// ValidationError for an unfinalized trace or a multiplier count != m.
Vector bootstrap_replicate(const IterateTrace& trace, const Vector& theta_bar,
                           std::span<const double> multipliers);

// B replicates; replicate b draws its multipliers from the substream
// (derive_seed(config.seed, b), streams::kBootstrap), so the result does not
// depend on `workers`.
BootstrapDraws run_bootstrap(const IterateTrace& trace,
                             const Vector& theta_bar,
                             const BootstrapConfig& config,
                             std::size_t workers = 1);

// Per-coordinate order statistic of rank ceil(level * B).
Vector empirical_quantile(const BootstrapDraws& draws, double level);

ConfidenceInterval confidence_interval(const Vector& theta_bar,
                                       const Vector& q_alpha,
                                       const Vector& q_one_minus_alpha,
                                       double alpha);

// Percentile interval from draws: [theta_bar + q_alpha, theta_bar + q_{1-alpha}].
ConfidenceInterval bootstrap_ci(const Vector& theta_bar,
                                const BootstrapDraws& draws, double alpha);

// Centering used by the batch-mean covariance.
enum class SigmaMode {
  kOverallMean,  // deviations of block means from theta_bar
  kBlockMeans,   // deviations from the average of the block means
};

// Batch-mean covariance (l / (m - 1)) sum_j (b_j - c)(b_j - c)^T with
// b_j = block_sum_j / l.
Matrix batch_mean_covariance(const IterateTrace& trace,
                             SigmaMode mode = SigmaMode::kOverallMean);

// theta_bar +- z_{1-alpha} sqrt(Sigma_kk / n).
ConfidenceInterval batch_mean_ci(const IterateTrace& trace, double alpha,
                                 SigmaMode mode = SigmaMode::kOverallMean);

void write_draws_csv(std::ostream& out, const BootstrapDraws& draws);
nlohmann::json draws_to_json(const BootstrapDraws& draws);
nlohmann::json interval_to_json(const ConfidenceInterval& ci);

}  // namespace ldpsgd

#endif  // LDPSGD_BOOTSTRAP_HPP_
