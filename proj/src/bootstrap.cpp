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
#include "ldpsgd/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>

namespace ldpsgd {
namespace {

constexpr double kSqrt3 = 1.7320508075688772;

Matrix centered_block_sums(const IterateTrace& trace,
                           const Vector& theta_bar) {
  const double l = static_cast<double>(trace.block_length());
  return trace.block_sums().colwise() - l * theta_bar;
}

void check_finalized(const IterateTrace& trace, const Vector& theta_bar) {
  if (!trace.finalized()) {
    throw ValidationError("bootstrap needs a finalized trace (" +
                          std::to_string(trace.iterates_seen()) + " of " +
                          std::to_string(trace.n()) + " iterates seen)");
  }
  if (static_cast<std::size_t>(theta_bar.size()) != trace.dim()) {
    throw ValidationError("theta_bar dimension does not match the trace");
  }
}

}  // namespace

std::string to_string(MultiplierLaw law) {
  switch (law) {
    case MultiplierLaw::kUniformSqrt3:
      return "uniform_sqrt3";
    case MultiplierLaw::kRademacher:
      return "rademacher";
  }
  return "unknown";
}

MultiplierLaw multiplier_law_from_string(const std::string& name) {
  if (name == "uniform_sqrt3" || name == "uniform") {
    return MultiplierLaw::kUniformSqrt3;
  }
  if (name == "rademacher") return MultiplierLaw::kRademacher;
  throw ValidationError("unknown multiplier law '" + name +
                        "' (expected uniform_sqrt3 or rademacher)");
}

double draw_multiplier(MultiplierLaw law, Rng& rng) {
  switch (law) {
    case MultiplierLaw::kUniformSqrt3:
      return kSqrt3 * (2.0 * uniform01(rng) - 1.0);
    case MultiplierLaw::kRademacher:
      return (rng() >> 63) != 0 ? 1.0 : -1.0;
  }
  return 0.0;
}

std::uint64_t block_length_for(std::uint64_t n, double beta) {
  const double exact = std::pow(static_cast<double>(n), beta);
  auto l = static_cast<std::uint64_t>(std::floor(exact));
  // pow() may land a hair below an exact integer power, e.g. 16^0.75.
  if (std::abs(exact - std::round(exact)) < 1e-9 * std::max(1.0, exact)) {
    l = static_cast<std::uint64_t>(std::llround(exact));
  }
  return std::max<std::uint64_t>(l, 1);
}

BlockLayout block_layout(std::uint64_t n, std::optional<double> beta,
                         std::optional<std::uint64_t> block_length,
                         double schedule_gamma) {
  if (n < 4) throw ValidationError("block bootstrap needs n >= 4");
  BlockLayout layout;
  if (block_length) {
    if (*block_length < 1) throw ValidationError("block length must be >= 1");
    layout.block_length = *block_length;
  } else if (beta) {
    if (!(*beta > 0.0 && *beta < 1.0)) {
      throw ValidationError("block exponent beta must lie in (0, 1)");
    }
    layout.block_length = block_length_for(n, *beta);
    if (schedule_gamma >= *beta) {
      layout.warning = "schedule exponent gamma = " +
                       std::to_string(schedule_gamma) +
                       " is not below block exponent beta = " +
                       std::to_string(*beta) +
                       "; bootstrap consistency is not guaranteed";
    }
  } else {
    throw ValidationError("either beta or an explicit block length is needed");
  }
  layout.num_blocks = n / layout.block_length;
  if (layout.num_blocks < 2) {
    throw ValidationError("layout l = " + std::to_string(layout.block_length) +
                          " leaves fewer than 2 blocks for n = " +
                          std::to_string(n));
  }
  return layout;
}

void BootstrapConfig::validate() const {
  if (replicates < 2) throw ValidationError("bootstrap needs B >= 2");
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw ValidationError("alpha must lie in (0, 0.5)");
  }
  if (!beta && !block_length) {
    throw ValidationError("either beta or an explicit block length is needed");
  }
}

Vector bootstrap_replicate(const IterateTrace& trace, const Vector& theta_bar,
                           std::span<const double> multipliers) {
  check_finalized(trace, theta_bar);
  if (multipliers.size() != trace.num_blocks()) {
    throw ValidationError("expected " + std::to_string(trace.num_blocks()) +
                          " multipliers, got " +
                          std::to_string(multipliers.size()));
  }
  const Eigen::Map<const Vector> weights(
      multipliers.data(), static_cast<Eigen::Index>(multipliers.size()));
  const double ml = static_cast<double>(trace.num_blocks()) *
                    static_cast<double>(trace.block_length());
  return centered_block_sums(trace, theta_bar) * weights / ml;
}

BootstrapDraws run_bootstrap(const IterateTrace& trace,
                             const Vector& theta_bar,
                             const BootstrapConfig& config,
                             std::size_t workers) {
  config.validate();
  check_finalized(trace, theta_bar);
  const std::uint64_t m = trace.num_blocks();
  if (m < 1) throw ValidationError("trace has no complete block");
  const Matrix centered = centered_block_sums(trace, theta_bar);
  const double ml =
      static_cast<double>(m) * static_cast<double>(trace.block_length());
  const auto replicates = static_cast<Eigen::Index>(config.replicates);

  BootstrapDraws out;
  out.draws.resize(centered.rows(), replicates);
  const auto fill = [&](Eigen::Index begin, Eigen::Index end) {
    Vector weights(static_cast<Eigen::Index>(m));
    for (Eigen::Index b = begin; b < end; ++b) {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(b)),
              streams::kBootstrap);
      for (Eigen::Index j = 0; j < weights.size(); ++j) {
        weights[j] = draw_multiplier(config.multiplier, rng);
      }
      out.draws.col(b).noalias() = centered * weights / ml;
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, config.replicates);
  if (workers == 1) {
    fill(0, replicates);
  } else {
    std::vector<std::jthread> pool;
    const Eigen::Index chunk =
        (replicates + static_cast<Eigen::Index>(workers) - 1) /
        static_cast<Eigen::Index>(workers);
    for (Eigen::Index begin = 0; begin < replicates; begin += chunk) {
      pool.emplace_back(fill, begin, std::min(begin + chunk, replicates));
    }
  }
  if (!out.draws.allFinite()) {
    throw NumericalError("non-finite bootstrap draw");
  }
  return out;
}

Vector empirical_quantile(const BootstrapDraws& draws, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("quantile level must lie in (0, 1)");
  }
  const std::uint64_t count = draws.count();
  if (count < 2) throw ValidationError("quantiles need at least 2 draws");
  const double position = level * static_cast<double>(count);
  auto rank = static_cast<std::uint64_t>(
      std::ceil(position - 1e-9 * std::max(1.0, position)));
  rank = std::clamp<std::uint64_t>(rank, 1, count);

  Vector q(draws.draws.rows());
  std::vector<double> column(count);
  for (Eigen::Index k = 0; k < draws.draws.rows(); ++k) {
    for (std::uint64_t b = 0; b < count; ++b) {
      column[b] = draws.draws(k, static_cast<Eigen::Index>(b));
    }
    std::sort(column.begin(), column.end());
    q[k] = column[rank - 1];
  }
  return q;
}

ConfidenceInterval confidence_interval(const Vector& theta_bar,
                                       const Vector& q_alpha,
                                       const Vector& q_one_minus_alpha,
                                       double alpha) {
  if (q_alpha.size() != theta_bar.size() ||
      q_one_minus_alpha.size() != theta_bar.size()) {
    throw ValidationError("quantile and estimate dimensions differ");
  }
  if ((q_alpha.array() > q_one_minus_alpha.array()).any()) {
    throw NumericalError("crossed bootstrap quantiles");
  }
  return ConfidenceInterval{theta_bar + q_alpha, theta_bar + q_one_minus_alpha,
                            1.0 - 2.0 * alpha};
}

ConfidenceInterval bootstrap_ci(const Vector& theta_bar,
                                const BootstrapDraws& draws, double alpha) {
  return confidence_interval(theta_bar, empirical_quantile(draws, alpha),
                             empirical_quantile(draws, 1.0 - alpha), alpha);
}

Matrix batch_mean_covariance(const IterateTrace& trace, SigmaMode mode) {
  if (!trace.finalized()) {
    throw ValidationError("batch means need a finalized trace");
  }
  const std::uint64_t m = trace.num_blocks();
  if (m < 2) throw ValidationError("batch means need at least 2 blocks");
  const double l = static_cast<double>(trace.block_length());
  const Matrix means = trace.block_sums() / l;
  const Vector center = mode == SigmaMode::kOverallMean
                            ? trace.running_mean()
                            : Vector(means.rowwise().mean());
  const Matrix dev = means.colwise() - center;
  return (l / static_cast<double>(m - 1)) * (dev * dev.transpose());
}

ConfidenceInterval batch_mean_ci(const IterateTrace& trace, double alpha,
                                 SigmaMode mode) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw ValidationError("alpha must lie in (0, 0.5)");
  }
  const Matrix sigma = batch_mean_covariance(trace, mode);
  const double z = boost::math::quantile(
      boost::math::normal_distribution<double>(), 1.0 - alpha);
  const Vector half =
      z * (sigma.diagonal() / static_cast<double>(trace.n())).cwiseSqrt();
  const Vector& center = trace.running_mean();
  return ConfidenceInterval{center - half, center + half, 1.0 - 2.0 * alpha};
}

void write_draws_csv(std::ostream& out, const BootstrapDraws& draws) {
  out << "replicate,coord,value\n";
  char buf[64];
  for (Eigen::Index b = 0; b < draws.draws.cols(); ++b) {
    for (Eigen::Index k = 0; k < draws.draws.rows(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", draws.draws(k, b));
      out << b << ',' << k << ',' << buf << '\n';
    }
  }
}

nlohmann::json draws_to_json(const BootstrapDraws& draws) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index b = 0; b < draws.draws.cols(); ++b) {
    rows.push_back(std::vector<double>(draws.draws.col(b).data(),
                                       draws.draws.col(b).data() +
                                           draws.draws.rows()));
  }
  return {{"dim", draws.dim()}, {"count", draws.count()}, {"draws", rows}};
}

nlohmann::json interval_to_json(const ConfidenceInterval& ci) {
  return {{"level", ci.level},
          {"lower", std::vector<double>(ci.lower.data(),
                                        ci.lower.data() + ci.lower.size())},
          {"upper", std::vector<double>(ci.upper.data(),
                                        ci.upper.data() + ci.upper.size())}};
}

}  // namespace ldpsgd
