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
#ifndef LDPSGD_EXPERIMENT_HPP_
#define LDPSGD_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldpsgd/bootstrap.hpp"
#include "ldpsgd/common.hpp"
#include "ldpsgd/models.hpp"
#include "ldpsgd/privacy.hpp"
#include "ldpsgd/sgd.hpp"

namespace ldpsgd {

enum class ModelKind { kQuantile, kQuantReg };
enum class Method { kBlockBootstrap, kBatchMean };

std::string to_string(ModelKind kind);
std::string to_string(Method method);
ModelKind model_kind_from_string(const std::string& name);
Method method_from_string(const std::string& name);

// One Monte Carlo study. Serializes to and from JSON without loss.
struct ExperimentSpec {
  ModelKind model = ModelKind::kQuantile;
  double tau = 0.5;
  Vector beta_star = QuantRegModel::default_beta();  // quantreg only
  Method method = Method::kBlockBootstrap;
  std::uint64_t n = 100000;
  std::optional<double> privacy_epsilon = 1.0;  // nullopt: no-noise mode
  double c = 1.0;
  double gamma = 0.51;
  std::uint64_t bootstrap_replicates = 500;
  std::optional<double> beta = 0.75;
  std::optional<std::uint64_t> block_length;
  double alpha = 0.05;
  MultiplierLaw multiplier = MultiplierLaw::kUniformSqrt3;
  std::uint64_t replications = 200;
  std::uint64_t master_seed = 20240601;
  bool strict = true;
  std::string rows_csv;     // optional output path
  std::string report_json;  // optional output path

  // Throws ValidationError on any invalid field.
  void validate() const;

  PrivacyParams privacy() const;
  LearningRateSchedule schedule() const;
  BootstrapConfig bootstrap_config(std::uint64_t seed) const;
  std::unique_ptr<EstimationProblem> problem() const;

  nlohmann::json to_json() const;
  static ExperimentSpec from_json(const nlohmann::json& j);
};

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b);

// Applies the named profile: "desk" (n = 1e5, M = 200) or "paper"
// (n = 1e6, M = 500).
void apply_profile(ExperimentSpec& spec, const std::string& profile);

struct ReplicationResult {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  Vector theta_bar;
  ConfidenceInterval ci;
  std::vector<bool> covered;
  Vector length;
  double wall_time = 0.0;  // seconds; not serialized
};

struct ReplicationFailure {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct CoordinateSummary {
  std::string name;
  double true_value = 0.0;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double mean_length = 0.0;
  double length_se = 0.0;
};

struct Report {
  ExperimentSpec spec;
  std::uint64_t block_length = 0;
  std::uint64_t num_blocks = 0;
  std::optional<std::string> layout_warning;
  BudgetLedger ledger;
  std::vector<CoordinateSummary> coordinates;
  std::vector<ReplicationResult> rows;
  std::vector<ReplicationFailure> failures;

  // Aggregate header with the spec echo. Per-replication rows go to CSV.
  nlohmann::json to_json() const;
  void write_rows_csv(std::ostream& out) const;
  std::string to_text() const;
};

// Coverage and length statistics over successful rows:
//   coverage = #covered / M, se = sqrt(p (1 - p) / M),
//   length se = sample sd / sqrt(M).
std::vector<CoordinateSummary> summarize(
    const std::vector<ReplicationResult>& rows,
    const std::vector<std::string>& names, const Vector& truth);

// Reads rows back from write_rows_csv output.
std::vector<ReplicationResult> read_rows_csv(std::istream& in, std::size_t dim);

using ProgressCallback = std::function<void(std::uint64_t done,
                                            std::uint64_t total)>;

// Replication r is seeded by derive_seed(master_seed, r) and runs data
// generation, LDP-SGD, the interval for spec.method and the coverage check.
// The result does not depend on `workers`. In strict mode the first failing
// replication aborts the run.
Report run_experiment(const ExperimentSpec& spec, std::size_t workers = 1,
                      const ProgressCallback& progress = {});

// Runs specs that differ only in method over shared replications, one report
// per spec in input order. Each report equals run_experiment(spec).
std::vector<Report> run_method_group(const std::vector<ExperimentSpec>& specs,
                                     std::size_t workers = 1,
                                     const ProgressCallback& progress = {});

struct TrajectoryRow {
  std::uint64_t iteration = 0;
  Method method = Method::kBlockBootstrap;
  std::size_t coord = 0;
  double theta_bar = 0.0;
  std::optional<double> lower;  // empty when fewer than 2 blocks fit
  std::optional<double> upper;
};

// One replication of `spec` with checkpoints; at each checkpoint k the
// estimate over the first k iterates and BB and BM intervals with
// l_k = floor(k^beta). Throws ValidationError for an empty grid or a
// checkpoint beyond n.
std::vector<TrajectoryRow> export_trajectory(
    const ExperimentSpec& spec, const std::vector<std::uint64_t>& checkpoints,
    std::uint64_t replication = 0);

void write_trajectory_csv(std::ostream& out,
                          const std::vector<TrajectoryRow>& rows);

struct ComparisonCell {
  std::string model;
  double tau = 0.0;
  std::uint64_t n = 0;
  std::string coordinate;
  Method method = Method::kBlockBootstrap;
  CoordinateSummary summary;
};

struct ComparisonTable {
  std::vector<ComparisonCell> cells;

  nlohmann::json to_json() const;
  // Blocks per (model, tau); rows per method and coordinate; columns per n.
  std::string to_text() const;
};

// Merges reports into one table. Throws ValidationError if two reports fill
// the same cell or differ in anything other than method, n and tau.
ComparisonTable compare_methods(const std::vector<Report>& reports);

}  // namespace ldpsgd

#endif  // LDPSGD_EXPERIMENT_HPP_
