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
#include "ldpsgd/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ldpsgd {

LearningRateSchedule::LearningRateSchedule(double c, double gamma)
    : c_(c), gamma_(gamma) {
  if (!std::isfinite(c) || c <= 0.0) {
    throw ValidationError("learning-rate scale c must be positive");
  }
  if (!(gamma > 0.5 && gamma < 1.0)) {
    throw ValidationError("learning-rate exponent gamma must lie in (0.5, 1)");
  }
}

double LearningRateSchedule::operator()(std::uint64_t i) const {
  return c_ * std::pow(static_cast<double>(i), -gamma_);
}

double step_size(const LearningRateSchedule& schedule, std::uint64_t i) {
  return schedule(i);
}

RunConfig RunConfig::zeros(std::uint64_t n, std::size_t dim) {
  RunConfig config;
  config.n = n;
  config.theta0 = Vector::Zero(static_cast<Eigen::Index>(dim));
  return config;
}

void RunConfig::validate() const {
  if (n < 1) throw ValidationError("iteration count n must be at least 1");
  if (theta0.size() < 1) throw ValidationError("theta0 must be non-empty");
  if (batch_size < 1) throw ValidationError("batch size must be at least 1");
  if (!theta0.allFinite()) throw ValidationError("theta0 must be finite");
}

// ---------------------------------------------------------------------------
// IterateTrace

IterateTrace::IterateTrace(std::size_t dim, std::uint64_t n,
                           const TraceSpec& spec)
    : dim_(dim), n_(n), block_length_(spec.block_length) {
  if (dim == 0) throw ValidationError("trace dimension must be positive");
  if (spec.block_length < 1) {
    throw ValidationError("block length must be at least 1");
  }
  const auto d = static_cast<Eigen::Index>(dim);
  num_blocks_ = n / block_length_;
  block_sums_ = Matrix::Zero(d, static_cast<Eigen::Index>(num_blocks_));
  mean_ = Vector::Zero(d);
  trailing_ = Vector::Zero(d);
  current_ = Vector::Zero(d);

  std::vector<CheckpointSpec> specs = spec.checkpoints;
  std::sort(specs.begin(), specs.end(),
            [](const CheckpointSpec& a, const CheckpointSpec& b) {
              return a.index < b.index;
            });
  for (const CheckpointSpec& cp : specs) {
    if (cp.index < 1 || cp.index > n) {
      throw ValidationError("checkpoint " + std::to_string(cp.index) +
                            " lies outside 1.." + std::to_string(n));
    }
    if (cp.block_length < 1) {
      throw ValidationError("checkpoint block length must be at least 1");
    }
    if (!checkpoints_.empty() && checkpoints_.back().index == cp.index) {
      continue;
    }
    Checkpoint c;
    c.index = cp.index;
    c.block_length = cp.block_length;
    c.num_blocks = cp.index / cp.block_length;
    c.mean = Vector::Zero(d);
    c.block_sums = Matrix::Zero(d, static_cast<Eigen::Index>(c.num_blocks));
    checkpoints_.push_back(std::move(c));
    checkpoint_current_.push_back(Vector::Zero(d));
  }
}

IterateTrace IterateTrace::from_iterates(const std::vector<Vector>& iterates,
                                         std::uint64_t block_length) {
  if (iterates.empty()) throw ValidationError("no iterates given");
  IterateTrace trace(static_cast<std::size_t>(iterates.front().size()),
                     iterates.size(), TraceSpec{block_length, {}});
  for (const Vector& theta : iterates) trace.observe(theta);
  return trace;
}

IterateTrace IterateTrace::checkpoint_trace(std::size_t which) const {
  const Checkpoint& c = checkpoints_.at(which);
  if (seen_ < c.index) {
    throw ValidationError("checkpoint " + std::to_string(c.index) +
                          " has not been reached");
  }
  IterateTrace t;
  t.dim_ = dim_;
  t.n_ = c.index;
  t.block_length_ = c.block_length;
  t.num_blocks_ = c.num_blocks;
  t.seen_ = c.index;
  t.block_sums_ = c.block_sums;
  t.mean_ = c.mean;
  t.trailing_ =
      c.mean * static_cast<double>(c.index) - c.block_sums.rowwise().sum();
  t.current_ = Vector::Zero(static_cast<Eigen::Index>(dim_));
  return t;
}

void IterateTrace::observe(const Vector& theta) {
  if (seen_ >= n_) {
    throw ValidationError("trace already holds all " + std::to_string(n_) +
                          " iterates");
  }
  const std::uint64_t i = ++seen_;
  const double inv = 1.0 / static_cast<double>(i);
  mean_ = (static_cast<double>(i - 1) * inv) * mean_ + inv * theta;

  if (i <= num_blocks_ * block_length_) {
    current_ += theta;
    if (i % block_length_ == 0) {
      block_sums_.col(static_cast<Eigen::Index>(i / block_length_ - 1)) =
          current_;
      current_.setZero();
    }
  } else {
    trailing_ += theta;
  }

  for (std::size_t k = next_checkpoint_; k < checkpoints_.size(); ++k) {
    Checkpoint& c = checkpoints_[k];
    if (i <= c.num_blocks * c.block_length) {
      Vector& cur = checkpoint_current_[k];
      cur += theta;
      if (i % c.block_length == 0) {
        c.block_sums.col(static_cast<Eigen::Index>(i / c.block_length - 1)) =
            cur;
        cur.setZero();
      }
    }
    if (i == c.index) {
      c.mean = mean_;
      next_checkpoint_ = k + 1;
    }
  }
}

// ---------------------------------------------------------------------------
// Runners

namespace {

void check_shapes(std::size_t dim, std::size_t width, const SampleSource& data,
                  const RunConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(config.theta0.size()) != dim) {
    throw ValidationError("theta0 has dimension " +
                          std::to_string(config.theta0.size()) +
                          " but the oracle expects " + std::to_string(dim));
  }
  if (data.width() != width) {
    throw ValidationError("sample rows have width " +
                          std::to_string(data.width()) +
                          " but the oracle expects " + std::to_string(width));
  }
}

void read_row(SampleSource& data, std::span<double> row, std::uint64_t i) {
  if (!data.next(row)) {
    throw ValidationError("data stream exhausted at iteration " +
                          std::to_string(i));
  }
}

// Shared recursion theta_i = theta_{i-1} - eta_i * direction_i.
template <class Direction>
RunResult run_recursion(std::size_t dim, const LearningRateSchedule& schedule,
                        const RunConfig& config, const TraceSpec& trace_spec,
                        const IterateCallback& on_iterate,
                        Direction&& direction) {
  IterateTrace trace(dim, config.n, trace_spec);
  Vector theta = config.theta0;
  Vector step(static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 1; i <= config.n; ++i) {
    direction(i, theta, step);
    if (!step.allFinite()) {
      throw NumericalError("non-finite gradient at iteration " +
                           std::to_string(i));
    }
    theta.noalias() -= schedule(i) * step;
    trace.observe(theta);
    if (on_iterate) on_iterate(i, theta);
  }
  Vector theta_bar = trace.running_mean();
  return RunResult{std::move(theta_bar), std::move(trace)};
}

void check_budget(const PrivateGradientOracle& oracle) {
  if (!(oracle.privacy().epsilon() > 0.0)) {
    throw ValidationError("private oracle declares a non-positive budget");
  }
}

}  // namespace

RunResult run_sgd(const GradientOracle& oracle, SampleSource& data,
                  const LearningRateSchedule& schedule,
                  const RunConfig& config, const TraceSpec& trace_spec,
                  const IterateCallback& on_iterate) {
  check_shapes(oracle.dim(), oracle.sample_width(), data, config);
  std::vector<double> row(oracle.sample_width());
  return run_recursion(
      oracle.dim(), schedule, config, trace_spec, on_iterate,
      [&](std::uint64_t i, const Vector& theta, Vector& out) {
        read_row(data, row, i);
        oracle.gradient(row, theta, out);
      });
}

RunResult run_ldp_sgd(const PrivateGradientOracle& oracle, SampleSource& data,
                      const LearningRateSchedule& schedule,
                      const RunConfig& config, const TraceSpec& trace_spec,
                      Rng& rng, const IterateCallback& on_iterate) {
  check_budget(oracle);
  check_shapes(oracle.dim(), oracle.sample_width(), data, config);
  std::vector<double> row(oracle.sample_width());
  return run_recursion(
      oracle.dim(), schedule, config, trace_spec, on_iterate,
      [&](std::uint64_t i, const Vector& theta, Vector& out) {
        read_row(data, row, i);
        oracle.private_gradient(row, theta, rng, out);
      });
}

namespace {

// Incremental batch mean: exact for a constant batch and for s = 1.
template <class Sample>
void batch_mean(std::uint64_t s, Vector& mean, Vector& scratch,
                Sample&& sample) {
  mean.setZero();
  for (std::uint64_t k = 1; k <= s; ++k) {
    sample(scratch);
    mean += (scratch - mean) / static_cast<double>(k);
  }
}

}  // namespace

RunResult run_minibatch(const PrivateGradientOracle& oracle,
                        SampleSource& data,
                        const LearningRateSchedule& schedule,
                        const RunConfig& config, const TraceSpec& trace_spec,
                        Rng& rng, const IterateCallback& on_iterate) {
  if (config.privacy_mode != PrivacyMode::kNone) check_budget(oracle);
  check_shapes(oracle.dim(), oracle.sample_width(), data, config);
  std::vector<double> row(oracle.sample_width());
  Vector scratch(static_cast<Eigen::Index>(oracle.dim()));
  const std::uint64_t s = config.batch_size;
  const double inv_s = 1.0 / static_cast<double>(s);
  std::uint64_t read = 0;
  const auto next_row = [&]() { read_row(data, row, ++read); };

  switch (config.privacy_mode) {
    case PrivacyMode::kNone:
      return run_recursion(
          oracle.dim(), schedule, config, trace_spec, on_iterate,
          [&](std::uint64_t, const Vector& theta, Vector& out) {
            batch_mean(s, out, scratch, [&](Vector& g) {
              next_row();
              oracle.gradient(row, theta, g);
            });
          });
    case PrivacyMode::kCentralDp: {
      const LaplaceMechanism mech(oracle.l1_sensitivity(), oracle.privacy());
      return run_recursion(
          oracle.dim(), schedule, config, trace_spec, on_iterate,
          [&](std::uint64_t, const Vector& theta, Vector& out) {
            batch_mean(s, out, scratch, [&](Vector& g) {
              next_row();
              oracle.gradient(row, theta, g);
            });
            for (Eigen::Index k = 0; k < out.size(); ++k) {
              out[k] += laplace_noise(mech, rng) * inv_s;
            }
          });
    }
    case PrivacyMode::kLocalDp:
      return run_recursion(
          oracle.dim(), schedule, config, trace_spec, on_iterate,
          [&](std::uint64_t, const Vector& theta, Vector& out) {
            batch_mean(s, out, scratch, [&](Vector& g) {
              next_row();
              oracle.private_gradient(row, theta, rng, g);
            });
          });
  }
  throw ValidationError("unknown privacy mode");
}

RunResult run_minibatch(const GradientOracle& oracle, SampleSource& data,
                        const LearningRateSchedule& schedule,
                        const RunConfig& config, const TraceSpec& trace_spec,
                        const IterateCallback& on_iterate) {
  if (config.privacy_mode != PrivacyMode::kNone) {
    throw ValidationError("private mini-batch modes need a private oracle");
  }
  check_shapes(oracle.dim(), oracle.sample_width(), data, config);
  std::vector<double> row(oracle.sample_width());
  Vector scratch(static_cast<Eigen::Index>(oracle.dim()));
  std::uint64_t read = 0;
  return run_recursion(
      oracle.dim(), schedule, config, trace_spec, on_iterate,
      [&](std::uint64_t, const Vector& theta, Vector& out) {
        batch_mean(config.batch_size, out, scratch, [&](Vector& g) {
          read_row(data, row, ++read);
          oracle.gradient(row, theta, g);
        });
      });
}

// ---------------------------------------------------------------------------
// Step-size diagnostics

namespace {

std::uint64_t smallest_admissible_b0(const LearningRateSchedule& schedule,
                                     double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("eigenvalue lambda must be positive");
  }
  const double target = 2.0 * lambda * schedule.c();
  auto b0 = static_cast<std::uint64_t>(
      std::max(1.0, std::floor(std::pow(target, 1.0 / schedule.gamma()))));
  while (b0 > 1 &&
         std::pow(static_cast<double>(b0 - 1), schedule.gamma()) >= target) {
    --b0;
  }
  while (std::pow(static_cast<double>(b0), schedule.gamma()) < target) ++b0;
  return b0;
}

BaseCaseCheck evaluate_base_case(const LearningRateSchedule& schedule,
                                 double lambda, std::uint64_t b0) {
  BaseCaseCheck out;
  out.b0 = b0;
  double tail = 1.0;  // prod_{k=j+1}^{b0} (1 - lambda eta_k)^2
  for (std::uint64_t j = b0; j >= 1; --j) {
    const double eta = schedule(j);
    out.lhs += lambda * lambda * eta * eta * tail;
    const double factor = 1.0 - lambda * eta;
    tail *= factor * factor;
  }
  out.rhs = lambda * schedule(b0) / 2.0;
  out.holds = out.lhs >= out.rhs;
  return out;
}

}  // namespace

BaseCaseCheck check_base_case(const LearningRateSchedule& schedule,
                              double lambda) {
  return evaluate_base_case(schedule, lambda,
                            smallest_admissible_b0(schedule, lambda));
}

BaseCaseCheck find_base_case(const LearningRateSchedule& schedule,
                             double lambda, std::uint64_t max_b0) {
  std::uint64_t b0 = smallest_admissible_b0(schedule, lambda);
  BaseCaseCheck out = evaluate_base_case(schedule, lambda, b0);
  // O(b^2) overall; the admissible b0 is small for practical schedules.
  while (!out.holds && b0 < max_b0) {
    out = evaluate_base_case(schedule, lambda, ++b0);
  }
  return out;
}

double verify_sum_identity(const LearningRateSchedule& schedule,
                           double lambda, std::uint64_t b) {
  if (b < 1) throw ValidationError("identity check needs b >= 1");
  double sum = 0.0;
  double tail = 1.0;  // prod_{k=j+1}^{b} (1 - lambda eta_k)
  for (std::uint64_t j = b; j >= 1; --j) {
    const double eta = schedule(j);
    sum += lambda * eta * tail;
    tail *= 1.0 - lambda * eta;
  }
  return std::abs(sum - (1.0 - tail));
}

std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t first,
                                                 std::uint64_t n,
                                                 double ratio) {
  if (first < 1 || first > n) {
    throw ValidationError("first checkpoint must lie in 1..n");
  }
  if (!(ratio > 1.0)) throw ValidationError("checkpoint ratio must exceed 1");
  std::vector<std::uint64_t> grid;
  for (double x = static_cast<double>(first); x < static_cast<double>(n);
       x *= ratio) {
    const auto k = static_cast<std::uint64_t>(std::floor(x));
    if (grid.empty() || grid.back() != k) grid.push_back(k);
  }
  if (grid.empty() || grid.back() != n) grid.push_back(n);
  return grid;
}

}  // namespace ldpsgd
