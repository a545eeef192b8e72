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
#ifndef LDPSGD_SGD_HPP_
#define LDPSGD_SGD_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ldpsgd/common.hpp"
#include "ldpsgd/data.hpp"
#include "ldpsgd/privacy.hpp"
#include "ldpsgd/rng.hpp"

namespace ldpsgd {

// Step sizes eta_i = c * i^(-gamma) with c > 0 and 1/2 < gamma < 1.
class LearningRateSchedule {
 public:
  LearningRateSchedule(double c, double gamma);

  double c() const { return c_; }
  double gamma() const { return gamma_; }

  double operator()(std::uint64_t i) const;

 private:
  double c_;
  double gamma_;
};

double step_size(const LearningRateSchedule& schedule, std::uint64_t i);

enum class PrivacyMode { kNone, kCentralDp, kLocalDp };

struct RunConfig {
  std::uint64_t n = 1;
  Vector theta0;  // dimension d; zero vector unless overridden
  std::uint64_t batch_size = 1;
  PrivacyMode privacy_mode = PrivacyMode::kNone;

  static RunConfig zeros(std::uint64_t n, std::size_t dim);
  void validate() const;
};

// Noisy gradient g(X, theta) of a model.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;
  virtual std::size_t dim() const = 0;
  virtual std::size_t sample_width() const = 0;
  virtual void gradient(std::span<const double> row, const Vector& theta,
                        Vector& out) const = 0;
};

// A gradient oracle paired with an epsilon-LDP randomization A(g).
class PrivateGradientOracle : public GradientOracle {
 public:
  virtual const PrivacyParams& privacy() const = 0;
  // L1 sensitivity of g, used for the central-DP mini-batch noise.
  virtual double l1_sensitivity() const = 0;
  virtual void private_gradient(std::span<const double> row,
                                const Vector& theta, Rng& rng,
                                Vector& out) const = 0;
};

struct CheckpointSpec {
  std::uint64_t index = 0;
  std::uint64_t block_length = 1;
};

struct TraceSpec {
  std::uint64_t block_length = 1;
  std::vector<CheckpointSpec> checkpoints;
};

// Summary of the first `index` iterates with its own block layout.
struct Checkpoint {
  std::uint64_t index = 0;
  std::uint64_t block_length = 0;
  std::uint64_t num_blocks = 0;
  Vector mean;
  Matrix block_sums;  // d x num_blocks
};

// Streaming accumulators over the iterates theta_1..theta_n: running mean,
// the m = floor(n / l) block sums, the sum of trailing iterates past m*l and
// optional checkpoints. Memory does not depend on n.
class IterateTrace {
 public:
  IterateTrace(std::size_t dim, std::uint64_t n, const TraceSpec& spec);

  // Builds a finalized trace from stored iterates. Test and replay helper.
  static IterateTrace from_iterates(const std::vector<Vector>& iterates,
                                    std::uint64_t block_length);

  // Finalized trace over the first `index` iterates of checkpoint `which`.
  IterateTrace checkpoint_trace(std::size_t which) const;

  void observe(const Vector& theta);

  std::size_t dim() const { return dim_; }
  std::uint64_t n() const { return n_; }
  std::uint64_t block_length() const { return block_length_; }
  std::uint64_t num_blocks() const { return num_blocks_; }
  std::uint64_t iterates_seen() const { return seen_; }
  bool finalized() const { return seen_ == n_; }

  const Matrix& block_sums() const { return block_sums_; }
  const Vector& running_mean() const { return mean_; }
  const Vector& trailing_sum() const { return trailing_; }
  const std::vector<Checkpoint>& checkpoints() const { return checkpoints_; }

 private:
  IterateTrace() = default;

  std::size_t dim_ = 0;
  std::uint64_t n_ = 0;
  std::uint64_t block_length_ = 1;
  std::uint64_t num_blocks_ = 0;
  std::uint64_t seen_ = 0;
  Matrix block_sums_;
  Vector mean_;
  Vector trailing_;
  Vector current_;
  std::vector<Checkpoint> checkpoints_;
  std::vector<Vector> checkpoint_current_;
  std::size_t next_checkpoint_ = 0;
};

struct RunResult {
  Vector theta_bar;
  IterateTrace trace;
};

// Called with (i, theta_i) after every update.
using IterateCallback = std::function<void(std::uint64_t, const Vector&)>;

// Plain SGD with Polyak-Ruppert averaging. Throws ValidationError when the
// data run out before n samples and NumericalError on a non-finite gradient.
RunResult run_sgd(const GradientOracle& oracle, SampleSource& data,
                  const LearningRateSchedule& schedule,
                  const RunConfig& config, const TraceSpec& trace_spec,
                  const IterateCallback& on_iterate = {});

// LDP-SGD: every gradient passes through the oracle's epsilon-LDP mechanism
// before the update. Each sample is read once.
RunResult run_ldp_sgd(const PrivateGradientOracle& oracle, SampleSource& data,
                      const LearningRateSchedule& schedule,
                      const RunConfig& config, const TraceSpec& trace_spec,
                      Rng& rng, const IterateCallback& on_iterate = {});

// Mini-batch SGD over s = config.batch_size samples per step. The privacy
// mode selects no noise, one central Laplace draw scaled by 1/s, or
// per-sample local privatization before averaging.
RunResult run_minibatch(const PrivateGradientOracle& oracle,
                        SampleSource& data,
                        const LearningRateSchedule& schedule,
                        const RunConfig& config, const TraceSpec& trace_spec,
                        Rng& rng, const IterateCallback& on_iterate = {});
// Non-private oracles only support PrivacyMode::kNone.
RunResult run_minibatch(const GradientOracle& oracle, SampleSource& data,
                        const LearningRateSchedule& schedule,
                        const RunConfig& config, const TraceSpec& trace_spec,
                        const IterateCallback& on_iterate = {});

struct BaseCaseCheck {
  std::uint64_t b0 = 0;
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Base-case inequality of the step-size induction for eigenvalue lambda:
// b0 is the smallest integer with b0^gamma >= 2 lambda c, and
//   lhs = sum_{j<=b0} lambda^2 eta_j^2 prod_{k=j+1}^{b0} (1 - lambda eta_k)^2
//   rhs = lambda eta_{b0} / 2.
BaseCaseCheck check_base_case(const LearningRateSchedule& schedule,
                              double lambda);

// The condition only asks for some b0 with b0^gamma >= 2 lambda c. Searches
// b0 upward from the smallest admissible value until the inequality holds;
// returns the last evaluation (holds = false) if none does up to max_b0.
BaseCaseCheck find_base_case(const LearningRateSchedule& schedule,
                             double lambda, std::uint64_t max_b0 = 100000);

// |sum_{j<=b} lambda eta_j prod_{k>j}^{b} (1 - lambda eta_k)
//    - (1 - prod_{k<=b} (1 - lambda eta_k))|
double verify_sum_identity(const LearningRateSchedule& schedule,
                           double lambda, std::uint64_t b);

// Geometric checkpoint grid starting at `first`: floor(first * ratio^k),
// deduplicated, capped at n, always ending with n.
std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t first,
                                                 std::uint64_t n,
                                                 double ratio = 1.1);

}  // namespace ldpsgd

#endif  // LDPSGD_SGD_HPP_
