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
// Command-line front end: experiments, trajectories, method comparison,
// step-size diagnostics, data generation and CSV replay.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ldpsgd/bootstrap.hpp"
#include "ldpsgd/common.hpp"
#include "ldpsgd/data.hpp"
#include "ldpsgd/experiment.hpp"
#include "ldpsgd/models.hpp"
#include "ldpsgd/sgd.hpp"

namespace {

using namespace ldpsgd;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct SpecFlags {
  std::string spec_path;
  std::string profile;
  std::optional<std::string> model;
  std::optional<double> tau;
  std::optional<std::uint64_t> n;
  std::optional<std::string> eps;
  std::optional<double> gamma;
  std::optional<double> c;
  std::optional<double> beta;
  std::optional<std::uint64_t> block_length;
  std::optional<std::uint64_t> bootstrap_replicates;
  std::optional<double> alpha;
  std::optional<std::string> multiplier;
  std::optional<std::uint64_t> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  bool lenient = false;
};

void add_spec_options(CLI::App* app, SpecFlags& f) {
  app->add_option("--spec", f.spec_path, "JSON experiment spec");
  app->add_option("--profile", f.profile, "desk (n=1e5, M=200) or paper (n=1e6, M=500)")
      ->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--model", f.model, "quantile or quantreg");
  app->add_option("--tau", f.tau, "quantile level");
  app->add_option("--n", f.n, "SGD iterations (samples)");
  app->add_option("--eps", f.eps, "privacy epsilon, or 'none' for no noise");
  app->add_option("--gamma", f.gamma, "step-size exponent");
  app->add_option("--c", f.c, "step-size scale");
  app->add_option("--beta", f.beta, "block exponent, l = floor(n^beta)");
  app->add_option("--l", f.block_length, "explicit block length");
  app->add_option("--B", f.bootstrap_replicates, "bootstrap replicates");
  app->add_option("--alpha", f.alpha, "tail level; intervals have level 1-2*alpha");
  app->add_option("--multiplier", f.multiplier, "uniform_sqrt3 or rademacher");
  app->add_option("--reps", f.reps, "Monte Carlo replications");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--method", f.method, "BB (block bootstrap) or BM (batch mean)");
  app->add_flag("--lenient", f.lenient,
                "exclude failed replications instead of aborting");
}

constexpr std::uint64_t kPaperScaleN = 10000000;

// Precedence: profile defaults, then the spec file, then individual flags.
ExperimentSpec build_spec(const SpecFlags& f) {
  ExperimentSpec spec;
  if (!f.profile.empty()) apply_profile(spec, f.profile);
  if (!f.spec_path.empty()) {
    std::ifstream in(f.spec_path);
    if (!in) throw ValidationError("cannot open spec file " + f.spec_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(f.spec_path + ": " + e.what());
    }
    if (!j.is_object()) {
      throw ValidationError(f.spec_path + ": expected a JSON object");
    }
    nlohmann::json merged = spec.to_json();
    merged.update(j);
    spec = ExperimentSpec::from_json(merged);
  }
  if (f.model) spec.model = model_kind_from_string(*f.model);
  if (f.tau) spec.tau = *f.tau;
  if (f.n) spec.n = *f.n;
  if (f.eps) {
    if (*f.eps == "none" || *f.eps == "inf") {
      spec.privacy_epsilon.reset();
    } else {
      try {
        spec.privacy_epsilon = std::stod(*f.eps);
      } catch (const std::exception&) {
        throw ValidationError("--eps expects a number or 'none'");
      }
    }
  }
  if (f.gamma) spec.gamma = *f.gamma;
  if (f.c) spec.c = *f.c;
  if (f.beta) {
    spec.beta = *f.beta;
    spec.block_length.reset();
  }
  if (f.block_length) spec.block_length = *f.block_length;
  if (f.bootstrap_replicates) spec.bootstrap_replicates = *f.bootstrap_replicates;
  if (f.alpha) spec.alpha = *f.alpha;
  if (f.multiplier) spec.multiplier = multiplier_law_from_string(*f.multiplier);
  if (f.reps) spec.replications = *f.reps;
  if (f.seed) spec.master_seed = *f.seed;
  if (f.method) spec.method = method_from_string(*f.method);
  if (f.lenient) spec.strict = false;
  spec.validate();
  if (spec.n >= kPaperScaleN && f.profile != "paper") {
    throw ValidationError(
        "n >= 1e7 is a paper-scale run; pass --profile paper to confirm");
  }
  return spec;
}

std::size_t default_workers() {
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << contents;
}

void write_outputs(const Report& report, const std::string& rows_csv,
                   const std::string& report_json) {
  if (!rows_csv.empty()) {
    std::ostringstream rows;
    report.write_rows_csv(rows);
    write_file(rows_csv, rows.str());
  }
  if (!report_json.empty()) {
    write_file(report_json, report.to_json().dump(2) + "\n");
  }
}

ProgressCallback progress_printer(bool enabled) {
  if (!enabled) return {};
  return [](std::uint64_t done, std::uint64_t total) {
    if (done == total || done % 10 == 0) {
      std::cerr << "\r" << done << "/" << total << " replications"
                << (done == total ? "\n" : "") << std::flush;
    }
  };
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse list item '" + item + "'");
    }
  }
  if (values.empty()) throw ValidationError("empty list");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally private SGD with block-bootstrap confidence intervals"};
  app.require_subcommand(1);
  std::size_t workers = default_workers();
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  // run
  SpecFlags run_flags;
  std::string run_rows, run_json;
  bool run_progress = false;
  auto* run = app.add_subcommand("run", "Monte Carlo coverage experiment");
  add_spec_options(run, run_flags);
  run->add_option("--rows-csv", run_rows, "per-replication rows (CSV)");
  run->add_option("--report-json", run_json, "aggregate report (JSON)");
  run->add_flag("--progress", run_progress, "print progress to stderr");

  // trajectory
  SpecFlags traj_flags;
  std::uint64_t traj_first = 10;
  double traj_ratio = 1.1;
  std::uint64_t traj_rep = 0;
  std::string traj_out;
  auto* traj = app.add_subcommand("trajectory",
                                  "estimate and interval bounds along the run");
  add_spec_options(traj, traj_flags);
  traj->add_option("--first", traj_first, "first checkpoint");
  traj->add_option("--ratio", traj_ratio, "geometric checkpoint ratio");
  traj->add_option("--replication", traj_rep, "replication index to trace");
  traj->add_option("--out", traj_out, "CSV output path (default stdout)");

  // compare
  SpecFlags cmp_flags;
  std::string cmp_methods = "BB,BM";
  std::string cmp_ns, cmp_taus, cmp_json;
  bool cmp_progress = false;
  auto* cmp = app.add_subcommand("compare", "BB vs BM coverage table");
  add_spec_options(cmp, cmp_flags);
  cmp->add_option("--methods", cmp_methods, "comma-separated methods");
  cmp->add_option("--n-list", cmp_ns, "comma-separated sample sizes");
  cmp->add_option("--tau-list", cmp_taus, "comma-separated quantile levels");
  cmp->add_option("--json", cmp_json, "write the merged table as JSON");
  cmp->add_flag("--progress", cmp_progress, "print progress to stderr");

  // check-conditions
  std::string chk_c = "1", chk_gamma = "0.51", chk_lambda = "0.1,0.5,1,2";
  std::uint64_t chk_b = 10000;
  auto* chk = app.add_subcommand("check-conditions",
                                 "step-size base case and sum identity");
  chk->add_option("--c-list", chk_c, "comma-separated step-size scales");
  chk->add_option("--gamma-list", chk_gamma, "comma-separated exponents");
  chk->add_option("--lambda-list", chk_lambda, "comma-separated eigenvalues");
  chk->add_option("--b", chk_b, "sum-identity horizon")->check(CLI::PositiveNumber);

  // gen-data
  std::string gen_model = "quantile", gen_out;
  double gen_tau = 0.5;
  std::uint64_t gen_n = 1000, gen_seed = 1;
  bool gen_binary = false;
  auto* gen = app.add_subcommand("gen-data", "write model samples for replay");
  gen->add_option("--model", gen_model, "quantile or quantreg");
  gen->add_option("--tau", gen_tau, "quantile level");
  gen->add_option("--n", gen_n, "number of rows");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--out", gen_out, "output path (default stdout)");
  gen->add_flag("--binary", gen_binary, "packed float64 rows instead of CSV");

  // fit
  SpecFlags fit_flags;
  std::string fit_data;
  bool fit_binary = false;
  auto* fit = app.add_subcommand("fit",
                                 "LDP-SGD and an interval on a sample file");
  add_spec_options(fit, fit_flags);
  fit->add_option("--data", fit_data, "sample file (rows as from gen-data)")
      ->required();
  fit->add_flag("--binary", fit_binary, "the file holds packed float64 rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*run) {
      const ExperimentSpec spec = build_spec(run_flags);
      const Report report =
          run_experiment(spec, workers, progress_printer(run_progress));
      std::cout << report.to_text();
      write_outputs(report, run_rows.empty() ? spec.rows_csv : run_rows,
                    run_json.empty() ? spec.report_json : run_json);
    } else if (*traj) {
      const ExperimentSpec spec = build_spec(traj_flags);
      const auto grid = geometric_checkpoints(traj_first, spec.n, traj_ratio);
      const auto rows = export_trajectory(spec, grid, traj_rep);
      if (traj_out.empty()) {
        write_trajectory_csv(std::cout, rows);
      } else {
        std::ostringstream out;
        write_trajectory_csv(out, rows);
        write_file(traj_out, out.str());
      }
    } else if (*cmp) {
      const ExperimentSpec base = build_spec(cmp_flags);
      std::vector<Method> methods;
      std::stringstream list(cmp_methods);
      for (std::string item; std::getline(list, item, ',');) {
        methods.push_back(method_from_string(item));
      }
      const std::vector<double> taus =
          cmp_taus.empty() ? std::vector<double>{base.tau} : parse_list(cmp_taus);
      std::vector<double> ns = cmp_ns.empty()
                                   ? std::vector<double>{static_cast<double>(base.n)}
                                   : parse_list(cmp_ns);
      std::vector<Report> reports;
      for (double tau : taus) {
        for (double n : ns) {
          std::vector<ExperimentSpec> group;
          for (Method m : methods) {
            ExperimentSpec s = base;
            s.tau = tau;
            s.n = static_cast<std::uint64_t>(n);
            s.method = m;
            group.push_back(s);
          }
          for (Report& r :
               run_method_group(group, workers, progress_printer(cmp_progress))) {
            reports.push_back(std::move(r));
          }
        }
      }
      const ComparisonTable table = compare_methods(reports);
      std::cout << table.to_text();
      if (!cmp_json.empty()) write_file(cmp_json, table.to_json().dump(2) + "\n");
    } else if (*chk) {
      std::cout << "c,gamma,lambda,b0,lhs,rhs,holds,first_holding_b0,identity_b,identity_residual\n";
      for (double c : parse_list(chk_c)) {
        for (double gamma : parse_list(chk_gamma)) {
          const LearningRateSchedule schedule(c, gamma);
          for (double lambda : parse_list(chk_lambda)) {
            const BaseCaseCheck base = check_base_case(schedule, lambda);
            const BaseCaseCheck found = find_base_case(schedule, lambda);
            const double residual = verify_sum_identity(schedule, lambda, chk_b);
            char line[256];
            std::snprintf(line, sizeof(line),
                          "%g,%g,%g,%llu,%.6f,%.6f,%s,%s,%llu,%.3e\n", c, gamma,
                          lambda, static_cast<unsigned long long>(base.b0),
                          base.lhs, base.rhs, base.holds ? "true" : "false",
                          found.holds ? std::to_string(found.b0).c_str() : "none",
                          static_cast<unsigned long long>(chk_b), residual);
            std::cout << line;
          }
        }
      }
    } else if (*gen) {
      const ModelKind kind = model_kind_from_string(gen_model);
      std::unique_ptr<EstimationProblem> problem;
      if (kind == ModelKind::kQuantile) {
        problem = std::make_unique<QuantileModel>(gen_tau);
      } else {
        problem = std::make_unique<QuantRegModel>(gen_tau);
      }
      auto source = problem->make_data(Rng(gen_seed, streams::kData), gen_n);
      std::ofstream file;
      if (!gen_out.empty()) {
        file.open(gen_out, std::ios::binary);
        if (!file) throw ValidationError("cannot write " + gen_out);
      }
      std::ostream& out = gen_out.empty() ? std::cout : file;
      std::vector<double> row(source->width());
      if (!gen_binary) {
        if (kind == ModelKind::kQuantile) {
          out << "x\n";
        } else {
          for (std::size_t k = 0; k + 1 < row.size(); ++k) out << 'x' << k << ',';
          out << "y\n";
        }
      }
      char buf[32];
      while (source->next(row)) {
        if (gen_binary) {
          out.write(reinterpret_cast<const char*>(row.data()),
                    static_cast<std::streamsize>(row.size() * sizeof(double)));
          continue;
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
          std::snprintf(buf, sizeof(buf), "%.17g", row[k]);
          out << (k ? "," : "") << buf;
        }
        out << '\n';
      }
    } else if (*fit) {
      const ExperimentSpec spec = build_spec(fit_flags);
      const auto problem = spec.problem();
      const auto oracle = problem->make_oracle(spec.privacy());
      std::unique_ptr<SampleSource> data;
      if (fit_binary) {
        data = std::make_unique<BinarySampleSource>(fit_data, oracle->sample_width());
      } else {
        data = std::make_unique<CsvSampleSource>(fit_data, oracle->sample_width());
      }
      const BlockLayout layout =
          block_layout(spec.n, spec.beta, spec.block_length, spec.gamma);
      if (layout.warning) std::cerr << "warning: " << *layout.warning << "\n";
      Rng privacy_rng(spec.master_seed, streams::kPrivacy);
      const RunResult result =
          run_ldp_sgd(*oracle, *data, spec.schedule(),
                      RunConfig::zeros(spec.n, problem->dim()),
                      TraceSpec{layout.block_length, {}}, privacy_rng);
      const ConfidenceInterval ci =
          spec.method == Method::kBlockBootstrap
              ? bootstrap_ci(result.theta_bar,
                             run_bootstrap(result.trace, result.theta_bar,
                                           spec.bootstrap_config(spec.master_seed),
                                           workers),
                             spec.alpha)
              : batch_mean_ci(result.trace, spec.alpha);
      nlohmann::json out;
      out["theta_bar"] = std::vector<double>(
          result.theta_bar.data(), result.theta_bar.data() + result.theta_bar.size());
      out["interval"] = interval_to_json(ci);
      out["method"] = to_string(spec.method);
      out["block_length"] = layout.block_length;
      out["num_blocks"] = layout.num_blocks;
      std::cout << out.dump(2) << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
