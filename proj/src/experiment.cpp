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
#include "ldpsgd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

namespace ldpsgd {
namespace {

std::string format(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, value);
  return buf;
}

std::string exact(double value) { return format("%.17g", value); }

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. Exceptions are
// caught by the caller-supplied fn; this helper does not propagate them.
void parallel_for(std::uint64_t count, std::size_t workers,
                  const std::function<void(std::uint64_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, count));
  if (workers == 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::uint64_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

struct SgdOutcome {
  std::uint64_t seed = 0;
  Vector theta_bar;
  std::optional<IterateTrace> trace;
};

SgdOutcome run_sgd_replication(const ExperimentSpec& spec,
                               const EstimationProblem& problem,
                               const PrivateGradientOracle& oracle,
                               std::uint64_t index,
                               const TraceSpec& trace_spec) {
  SgdOutcome out;
  out.seed = derive_seed(spec.master_seed, index);
  auto data = problem.make_data(Rng(out.seed, streams::kData), spec.n);
  Rng privacy_rng(out.seed, streams::kPrivacy);
  RunResult run =
      run_ldp_sgd(oracle, *data, spec.schedule(),
                  RunConfig::zeros(spec.n, problem.dim()), trace_spec,
                  privacy_rng);
  out.theta_bar = std::move(run.theta_bar);
  out.trace = std::move(run.trace);
  return out;
}

ConfidenceInterval interval_for(const ExperimentSpec& spec,
                                const IterateTrace& trace,
                                const Vector& theta_bar, std::uint64_t seed) {
  if (spec.method == Method::kBlockBootstrap) {
    const BootstrapDraws draws =
        run_bootstrap(trace, theta_bar, spec.bootstrap_config(seed));
    return bootstrap_ci(theta_bar, draws, spec.alpha);
  }
  return batch_mean_ci(trace, spec.alpha);
}

ReplicationResult make_result(std::uint64_t index, std::uint64_t seed,
                              const Vector& theta_bar, ConfidenceInterval ci,
                              const Vector& truth) {
  ReplicationResult r;
  r.index = index;
  r.seed = seed;
  r.theta_bar = theta_bar;
  r.length = ci.length();
  for (Eigen::Index k = 0; k < truth.size(); ++k) {
    r.covered.push_back(ci.covers(static_cast<std::size_t>(k), truth[k]));
  }
  r.ci = std::move(ci);
  return r;
}

BudgetLedger ledger_for(const ExperimentSpec& spec) {
  BudgetLedger ledger;
  if (!spec.privacy_epsilon) return ledger;
  // Every individual contributes one sample to one gradient evaluation, so
  // the per-sample mechanisms act on disjoint data.
  LedgerEntry entry;
  entry.mechanism_id = spec.model == ModelKind::kQuantile
                           ? "randomized_response(per-sample)"
                           : "laplace(per-sample)";
  entry.epsilon = *spec.privacy_epsilon;
  entry.disjoint = true;
  return compose(ledger, entry, CompositionMode::kParallel);
}

bool same_except(const ExperimentSpec& a, const ExperimentSpec& b,
                 const std::set<std::string>& ignored) {
  nlohmann::json ja = a.to_json();
  nlohmann::json jb = b.to_json();
  for (const std::string& key : ignored) {
    ja.erase(key);
    jb.erase(key);
  }
  return ja == jb;
}

}  // namespace

// ---------------------------------------------------------------------------
// Enums

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kQuantile ? "quantile" : "quantreg";
}

std::string to_string(Method method) {
  return method == Method::kBlockBootstrap ? "BB" : "BM";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "quantile") return ModelKind::kQuantile;
  if (name == "quantreg") return ModelKind::kQuantReg;
  throw ValidationError("unknown model '" + name +
                        "' (expected quantile or quantreg)");
}

Method method_from_string(const std::string& name) {
  if (name == "BB" || name == "bb") return Method::kBlockBootstrap;
  if (name == "BM" || name == "bm") return Method::kBatchMean;
  throw ValidationError("unknown method '" + name + "' (expected BB or BM)");
}

// ---------------------------------------------------------------------------
// ExperimentSpec

void ExperimentSpec::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ValidationError("tau must lie in (0, 1)");
  }
  if (model == ModelKind::kQuantReg && beta_star.size() < 1) {
    throw ValidationError("beta_star must be non-empty");
  }
  if (replications < 1) throw ValidationError("replications must be >= 1");
  privacy();
  schedule();
  bootstrap_config(0).validate();
  block_layout(n, beta, block_length, gamma);
}

PrivacyParams ExperimentSpec::privacy() const {
  return privacy_epsilon ? PrivacyParams(*privacy_epsilon)
                         : PrivacyParams::no_noise();
}

LearningRateSchedule ExperimentSpec::schedule() const {
  return LearningRateSchedule(c, gamma);
}

BootstrapConfig ExperimentSpec::bootstrap_config(std::uint64_t seed) const {
  BootstrapConfig config;
  config.replicates = bootstrap_replicates;
  config.beta = beta;
  config.block_length = block_length;
  config.alpha = alpha;
  config.multiplier = multiplier;
  config.seed = seed;
  return config;
}

std::unique_ptr<EstimationProblem> ExperimentSpec::problem() const {
  if (model == ModelKind::kQuantile) {
    return std::make_unique<QuantileModel>(tau);
  }
  return std::make_unique<QuantRegModel>(tau, beta_star);
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json j;
  j["model"] = to_string(model);
  j["tau"] = tau;
  j["beta_star"] = to_std(beta_star);
  j["method"] = to_string(method);
  j["n"] = n;
  j["privacy_epsilon"] =
      privacy_epsilon ? nlohmann::json(*privacy_epsilon) : nlohmann::json();
  j["c"] = c;
  j["gamma"] = gamma;
  j["bootstrap_replicates"] = bootstrap_replicates;
  j["beta"] = beta ? nlohmann::json(*beta) : nlohmann::json();
  j["block_length"] =
      block_length ? nlohmann::json(*block_length) : nlohmann::json();
  j["alpha"] = alpha;
  j["multiplier"] = to_string(multiplier);
  j["replications"] = replications;
  j["master_seed"] = master_seed;
  j["strict"] = strict;
  j["rows_csv"] = rows_csv;
  j["report_json"] = report_json;
  return j;
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKnown = {
      "model",        "tau",        "beta_star",  "method",
      "n",            "privacy_epsilon",          "c",
      "gamma",        "bootstrap_replicates",     "beta",
      "block_length", "alpha",      "multiplier", "replications",
      "master_seed",  "strict",     "rows_csv",   "report_json"};
  if (!j.is_object()) throw ValidationError("experiment spec must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.count(key)) {
      throw ValidationError("unknown experiment spec field '" + key + "'");
    }
  }
  ExperimentSpec s;
  try {
    if (j.contains("model")) s.model = model_kind_from_string(j["model"]);
    if (j.contains("tau")) s.tau = j["tau"].get<double>();
    if (j.contains("beta_star")) {
      const auto values = j["beta_star"].get<std::vector<double>>();
      s.beta_star = Eigen::Map<const Vector>(
          values.data(), static_cast<Eigen::Index>(values.size()));
    }
    if (j.contains("method")) s.method = method_from_string(j["method"]);
    if (j.contains("n")) s.n = j["n"].get<std::uint64_t>();
    if (j.contains("privacy_epsilon")) {
      s.privacy_epsilon =
          j["privacy_epsilon"].is_null()
              ? std::nullopt
              : std::optional<double>(j["privacy_epsilon"].get<double>());
    }
    if (j.contains("c")) s.c = j["c"].get<double>();
    if (j.contains("gamma")) s.gamma = j["gamma"].get<double>();
    if (j.contains("bootstrap_replicates")) {
      s.bootstrap_replicates = j["bootstrap_replicates"].get<std::uint64_t>();
    }
    if (j.contains("beta")) {
      s.beta = j["beta"].is_null()
                   ? std::nullopt
                   : std::optional<double>(j["beta"].get<double>());
    }
    if (j.contains("block_length")) {
      s.block_length =
          j["block_length"].is_null()
              ? std::nullopt
              : std::optional<std::uint64_t>(
                    j["block_length"].get<std::uint64_t>());
    }
    if (j.contains("alpha")) s.alpha = j["alpha"].get<double>();
    if (j.contains("multiplier")) {
      s.multiplier = multiplier_law_from_string(j["multiplier"]);
    }
    if (j.contains("replications")) {
      s.replications = j["replications"].get<std::uint64_t>();
    }
    if (j.contains("master_seed")) {
      s.master_seed = j["master_seed"].get<std::uint64_t>();
    }
    if (j.contains("strict")) s.strict = j["strict"].get<bool>();
    if (j.contains("rows_csv")) s.rows_csv = j["rows_csv"].get<std::string>();
    if (j.contains("report_json")) {
      s.report_json = j["report_json"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed experiment spec: ") +
                          e.what());
  }
  return s;
}

bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
  return a.to_json() == b.to_json();
}

void apply_profile(ExperimentSpec& spec, const std::string& profile) {
  if (profile == "desk") {
    spec.n = 100000;
    spec.replications = 200;
  } else if (profile == "paper") {
    spec.n = 1000000;
    spec.replications = 500;
  } else {
    throw ValidationError("unknown profile '" + profile +
                          "' (expected desk or paper)");
  }
}

// ---------------------------------------------------------------------------
// Aggregation

std::vector<CoordinateSummary> summarize(
    const std::vector<ReplicationResult>& rows,
    const std::vector<std::string>& names, const Vector& truth) {
  std::vector<CoordinateSummary> out;
  const double count = static_cast<double>(rows.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    CoordinateSummary s;
    s.name = names[k];
    s.true_value = truth[static_cast<Eigen::Index>(k)];
    if (!rows.empty()) {
      double covered = 0.0;
      double length_sum = 0.0;
      for (const ReplicationResult& r : rows) {
        covered += r.covered[k] ? 1.0 : 0.0;
        length_sum += r.length[static_cast<Eigen::Index>(k)];
      }
      s.coverage = covered / count;
      s.coverage_se = std::sqrt(s.coverage * (1.0 - s.coverage) / count);
      s.mean_length = length_sum / count;
      if (rows.size() > 1) {
        double ss = 0.0;
        for (const ReplicationResult& r : rows) {
          const double dev = r.length[static_cast<Eigen::Index>(k)] -
                             s.mean_length;
          ss += dev * dev;
        }
        s.length_se = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
      }
    }
    out.push_back(s);
  }
  return out;
}

nlohmann::json Report::to_json() const {
  nlohmann::json coords = nlohmann::json::array();
  for (const CoordinateSummary& s : coordinates) {
    coords.push_back({{"name", s.name},
                      {"true_value", s.true_value},
                      {"coverage", s.coverage},
                      {"coverage_se", s.coverage_se},
                      {"mean_length", s.mean_length},
                      {"length_se", s.length_se}});
  }
  nlohmann::json failed = nlohmann::json::array();
  for (const ReplicationFailure& f : failures) {
    failed.push_back(
        {{"index", f.index}, {"seed", f.seed}, {"message", f.message}});
  }
  nlohmann::json j;
  j["spec"] = spec.to_json();
  j["layout"] = {{"block_length", block_length},
                 {"num_blocks", num_blocks},
                 {"warning", layout_warning ? nlohmann::json(*layout_warning)
                                            : nlohmann::json()}};
  j["privacy_ledger"] = ledger.to_json();
  j["replications_ok"] = rows.size();
  j["failures"] = failed;
  j["coordinates"] = coords;

  // Closed-form reference for the interval length.
  const auto problem = spec.problem();
  const AsymptoticCov cov = problem->asymptotic_cov(spec.privacy());
  const double z = boost::math::quantile(
      boost::math::normal_distribution<double>(), 1.0 - spec.alpha);
  std::vector<double> nominal;
  for (Eigen::Index k = 0; k < cov.sigma.rows(); ++k) {
    nominal.push_back(2.0 * z *
                      std::sqrt(cov.sigma(k, k) / static_cast<double>(spec.n)));
  }
  j["asymptotic"] = {
      {"sigma_diagonal", to_std(cov.sigma.diagonal())},
      {"nominal_length", nominal},
      {"note", spec.model == ModelKind::kQuantile
                   ? "S_LDP = p(1-p)/(2p-1)^2 = e^eps/(e^eps-1)^2, the "
                     "variance of the debiased randomized response"
                   : "S_LDP = 2 b^2 I with b = 2 max(tau,1-tau) m d / eps"}};
  return j;
}

void Report::write_rows_csv(std::ostream& out) const {
  out << "replication,seed,coord,theta_bar,lower,upper,length,covered\n";
  for (const ReplicationResult& r : rows) {
    for (Eigen::Index k = 0; k < r.theta_bar.size(); ++k) {
      out << r.index << ',' << r.seed << ',' << k << ','
          << exact(r.theta_bar[k]) << ',' << exact(r.ci.lower[k]) << ','
          << exact(r.ci.upper[k]) << ',' << exact(r.length[k]) << ','
          << (r.covered[static_cast<std::size_t>(k)] ? 1 : 0) << '\n';
    }
  }
}

std::vector<ReplicationResult> read_rows_csv(std::istream& in,
                                             std::size_t dim) {
  std::string line;
  if (!std::getline(in, line)) return {};
  std::vector<ReplicationResult> rows;
  std::vector<double> fields(8);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!parse_csv_row(line, fields)) {
      throw ValidationError("malformed replication row: " + line);
    }
    const auto coord = static_cast<Eigen::Index>(fields[2]);
    if (coord == 0) {
      ReplicationResult r;
      r.index = static_cast<std::uint64_t>(fields[0]);
      // Seeds above 2^53 lose precision through the double parser.
      std::istringstream(line.substr(line.find(',') + 1)) >> r.seed;
      const auto d = static_cast<Eigen::Index>(dim);
      r.theta_bar = Vector::Zero(d);
      r.ci.lower = Vector::Zero(d);
      r.ci.upper = Vector::Zero(d);
      r.length = Vector::Zero(d);
      r.covered.assign(dim, false);
      rows.push_back(std::move(r));
    }
    if (rows.empty() || coord >= static_cast<Eigen::Index>(dim)) {
      throw ValidationError("replication rows out of order");
    }
    ReplicationResult& r = rows.back();
    r.theta_bar[coord] = fields[3];
    r.ci.lower[coord] = fields[4];
    r.ci.upper[coord] = fields[5];
    r.length[coord] = fields[6];
    r.covered[static_cast<std::size_t>(coord)] = fields[7] != 0.0;
  }
  return rows;
}

std::string Report::to_text() const {
  std::ostringstream out;
  out << "model=" << to_string(spec.model) << " tau=" << spec.tau
      << " n=" << spec.n << " eps="
      << (spec.privacy_epsilon ? format("%g", *spec.privacy_epsilon)
                               : std::string("none"))
      << " method=" << to_string(spec.method) << " M=" << rows.size();
  if (spec.method == Method::kBlockBootstrap) {
    out << " B=" << spec.bootstrap_replicates;
  }
  out << " l=" << block_length << " m=" << num_blocks << "\n";
  if (layout_warning) out << "warning: " << *layout_warning << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %10s  %-18s %-24s\n", "coord",
                "true", "cover (se)", "length (se)");
  out << line;
  for (const CoordinateSummary& s : coordinates) {
    const std::string cover = format("%.3f", s.coverage) + " (" +
                              format("%.3f", s.coverage_se) + ")";
    const std::string length = format("%.4g", s.mean_length) + " (" +
                               format("%.2g", s.length_se) + ")";
    std::snprintf(line, sizeof(line), "%-8s %10.4f  %-18s %-24s\n",
                  s.name.c_str(), s.true_value, cover.c_str(),
                  length.c_str());
    out << line;
  }
  if (!failures.empty()) {
    out << failures.size() << " replication(s) failed and were excluded\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Engine

std::vector<Report> run_method_group(const std::vector<ExperimentSpec>& specs,
                                     std::size_t workers,
                                     const ProgressCallback& progress) {
  if (specs.empty()) return {};
  const ExperimentSpec& base = specs.front();
  for (const ExperimentSpec& s : specs) {
    s.validate();
    if (!same_except(base, s, {"method", "rows_csv", "report_json"})) {
      throw ValidationError("specs in a method group may differ only in method");
    }
  }
  const auto problem = base.problem();
  const auto oracle = problem->make_oracle(base.privacy());
  const BlockLayout layout =
      block_layout(base.n, base.beta, base.block_length, base.gamma);
  const Vector truth = problem->true_parameter();
  const TraceSpec trace_spec{layout.block_length, {}};

  const std::uint64_t total = base.replications;
  std::vector<std::vector<std::optional<ReplicationResult>>> results(
      specs.size(),
      std::vector<std::optional<ReplicationResult>>(total));
  std::vector<std::optional<ReplicationFailure>> failures(total);
  std::atomic<std::uint64_t> done{0};
  std::mutex progress_mutex;

  parallel_for(total, workers, [&](std::uint64_t r) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const SgdOutcome sgd =
          run_sgd_replication(base, *problem, *oracle, r, trace_spec);
      for (std::size_t s = 0; s < specs.size(); ++s) {
        ConfidenceInterval ci =
            interval_for(specs[s], *sgd.trace, sgd.theta_bar, sgd.seed);
        results[s][r] =
            make_result(r, sgd.seed, sgd.theta_bar, std::move(ci), truth);
        results[s][r]->wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
      }
    } catch (const std::exception& e) {
      failures[r] = ReplicationFailure{r, derive_seed(base.master_seed, r),
                                       e.what()};
    }
    const std::uint64_t finished = ++done;
    if (progress) {
      const std::lock_guard<std::mutex> lock(progress_mutex);
      progress(finished, total);
    }
  });

  std::vector<ReplicationFailure> failed;
  for (const auto& f : failures) {
    if (f) failed.push_back(*f);
  }
  if (!failed.empty() && base.strict) {
    const ReplicationFailure& f = failed.front();
    throw NumericalError("replication " + std::to_string(f.index) +
                         " (seed " + std::to_string(f.seed) +
                         ") failed: " + f.message);
  }

  std::vector<Report> reports;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    Report report;
    report.spec = specs[s];
    report.block_length = layout.block_length;
    report.num_blocks = layout.num_blocks;
    report.layout_warning = layout.warning;
    report.ledger = ledger_for(specs[s]);
    for (auto& r : results[s]) {
      if (r) report.rows.push_back(std::move(*r));
    }
    report.failures = failed;
    report.coordinates =
        summarize(report.rows, problem->coordinate_names(), truth);
    reports.push_back(std::move(report));
  }
  return reports;
}

Report run_experiment(const ExperimentSpec& spec, std::size_t workers,
                      const ProgressCallback& progress) {
  return std::move(run_method_group({spec}, workers, progress).front());
}

// ---------------------------------------------------------------------------
// Trajectory

std::vector<TrajectoryRow> export_trajectory(
    const ExperimentSpec& spec, const std::vector<std::uint64_t>& checkpoints,
    std::uint64_t replication) {
  spec.validate();
  if (checkpoints.empty()) {
    throw ValidationError("trajectory needs at least one checkpoint");
  }
  if (!spec.beta) {
    throw ValidationError("trajectory needs the block exponent beta");
  }
  TraceSpec trace_spec;
  trace_spec.block_length =
      block_layout(spec.n, spec.beta, spec.block_length, spec.gamma)
          .block_length;
  for (std::uint64_t k : checkpoints) {
    if (k < 1 || k > spec.n) {
      throw ValidationError("checkpoint " + std::to_string(k) +
                            " lies outside 1.." + std::to_string(spec.n));
    }
    const std::uint64_t l =
        (k == spec.n) ? trace_spec.block_length
                      : block_length_for(k, *spec.beta);
    trace_spec.checkpoints.push_back({k, l});
  }

  const auto problem = spec.problem();
  const auto oracle = problem->make_oracle(spec.privacy());
  const SgdOutcome sgd =
      run_sgd_replication(spec, *problem, *oracle, replication, trace_spec);
  const IterateTrace& trace = *sgd.trace;

  std::vector<TrajectoryRow> rows;
  for (std::size_t c = 0; c < trace.checkpoints().size(); ++c) {
    const IterateTrace sub = trace.checkpoint_trace(c);
    const Vector& mean = sub.running_mean();
    std::optional<ConfidenceInterval> intervals[2];
    if (sub.num_blocks() >= 2) {
      intervals[0] = bootstrap_ci(
          mean,
          run_bootstrap(sub, mean, spec.bootstrap_config(sgd.seed)),
          spec.alpha);
      intervals[1] = batch_mean_ci(sub, spec.alpha);
    }
    const Method methods[2] = {Method::kBlockBootstrap, Method::kBatchMean};
    for (int m = 0; m < 2; ++m) {
      for (Eigen::Index k = 0; k < mean.size(); ++k) {
        TrajectoryRow row;
        row.iteration = sub.n();
        row.method = methods[m];
        row.coord = static_cast<std::size_t>(k);
        row.theta_bar = mean[k];
        if (intervals[m]) {
          row.lower = intervals[m]->lower[k];
          row.upper = intervals[m]->upper[k];
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_trajectory_csv(std::ostream& out,
                          const std::vector<TrajectoryRow>& rows) {
  out << "iteration,method,coord,theta_bar,ci_lower,ci_upper\n";
  for (const TrajectoryRow& r : rows) {
    out << r.iteration << ',' << to_string(r.method) << ',' << r.coord << ','
        << exact(r.theta_bar) << ',' << (r.lower ? exact(*r.lower) : "")
        << ',' << (r.upper ? exact(*r.upper) : "") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Comparison

ComparisonTable compare_methods(const std::vector<Report>& reports) {
  ComparisonTable table;
  if (reports.empty()) return table;
  std::set<std::tuple<std::string, double, std::uint64_t, std::string>> seen;
  for (const Report& report : reports) {
    if (!same_except(reports.front().spec, report.spec,
                     {"method", "n", "tau", "rows_csv", "report_json"})) {
      throw ValidationError(
          "reports to compare must differ only in method, n and tau");
    }
    const std::string model = to_string(report.spec.model);
    const std::string method = to_string(report.spec.method);
    if (!seen.insert({model, report.spec.tau, report.spec.n, method})
             .second) {
      throw ValidationError("two reports share model " + model + ", tau " +
                            format("%g", report.spec.tau) + ", n " +
                            std::to_string(report.spec.n) + " and method " +
                            method);
    }
    for (const CoordinateSummary& s : report.coordinates) {
      table.cells.push_back({model, report.spec.tau, report.spec.n, s.name,
                             report.spec.method, s});
    }
  }
  return table;
}

nlohmann::json ComparisonTable::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const ComparisonCell& c : cells) {
    out.push_back({{"model", c.model},
                   {"tau", c.tau},
                   {"n", c.n},
                   {"coordinate", c.coordinate},
                   {"method", to_string(c.method)},
                   {"coverage", c.summary.coverage},
                   {"coverage_se", c.summary.coverage_se},
                   {"mean_length", c.summary.mean_length},
                   {"length_se", c.summary.length_se}});
  }
  return out;
}

std::string ComparisonTable::to_text() const {
  std::vector<std::pair<std::string, double>> groups;
  std::vector<std::uint64_t> ns;
  for (const ComparisonCell& c : cells) {
    if (std::find(groups.begin(), groups.end(),
                  std::make_pair(c.model, c.tau)) == groups.end()) {
      groups.emplace_back(c.model, c.tau);
    }
    if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
  }
  std::sort(ns.begin(), ns.end());

  std::ostringstream out;
  char buf[96];
  for (const auto& [model, tau] : groups) {
    out << model << " tau=" << format("%g", tau) << "\n";
    std::snprintf(buf, sizeof(buf), "%-4s %-8s %-8s", "", "coord", "");
    out << buf;
    for (std::uint64_t n : ns) {
      std::snprintf(buf, sizeof(buf), " %22llu",
                    static_cast<unsigned long long>(n));
      out << buf;
    }
    out << "\n";
    // Row order: method, then coordinate in first-seen order.
    std::vector<std::pair<Method, std::string>> keys;
    for (const ComparisonCell& c : cells) {
      if (c.model != model || c.tau != tau) continue;
      const auto key = std::make_pair(c.method, c.coordinate);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        keys.push_back(key);
      }
    }
    std::stable_sort(keys.begin(), keys.end(),
                     [](const auto& a, const auto& b) {
                       return a.first < b.first;
                     });
    for (const auto& [method, coord] : keys) {
      for (int line = 0; line < 2; ++line) {
        std::snprintf(buf, sizeof(buf), "%-4s %-8s %-8s",
                      line == 0 ? to_string(method).c_str() : "",
                      line == 0 ? coord.c_str() : "",
                      line == 0 ? "cover:" : "length:");
        out << buf;
        for (std::uint64_t n : ns) {
          std::string cell = "-";
          for (const ComparisonCell& c : cells) {
            if (c.model == model && c.tau == tau && c.n == n &&
                c.method == method && c.coordinate == coord) {
              cell = line == 0 ? format("%.3f", c.summary.coverage) + " (" +
                                     format("%.3f", c.summary.coverage_se) +
                                     ")"
                               : format("%.4g", c.summary.mean_length) +
                                     " (" +
                                     format("%.2g", c.summary.length_se) +
                                     ")";
            }
          }
          std::snprintf(buf, sizeof(buf), " %22s", cell.c_str());
          out << buf;
        }
        out << "\n";
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace ldpsgd
