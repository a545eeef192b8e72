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
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "doctest.h"
#include "ldpsgd/data.hpp"
#include "ldpsgd/sgd.hpp"
#include "test_oracles.hpp"

using namespace ldpsgd;
using ldpsgd::testing::LinearOracle;

namespace {

std::vector<double> gaussian_values(std::size_t count, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(count);
  for (double& x : v) x = normal(gen);
  return v;
}

Matrix random_spd(Eigen::Index d, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = unif(gen);
  return a * a.transpose() / static_cast<double>(d) +
         0.3 * Matrix::Identity(d, d);
}

// theta_i - theta* = prod_{j<=i}(I - eta_j G)(theta0 - theta*)
//                    - sum_{j<=i} eta_j prod_{k=j+1}^{i}(I - eta_k G) xi_j
std::vector<Vector> product_formula(const Matrix& g, const Vector& theta_star,
                                    const Vector& theta0,
                                    const std::vector<Vector>& xi,
                                    const LearningRateSchedule& eta) {
  const Eigen::Index d = g.rows();
  const Matrix id = Matrix::Identity(d, d);
  std::vector<Vector> out;
  for (std::size_t i = 1; i <= xi.size(); ++i) {
    Matrix head = id;
    for (std::size_t j = 1; j <= i; ++j) head = (id - eta(j) * g) * head;
    Vector value = head * (theta0 - theta_star);
    for (std::size_t j = 1; j <= i; ++j) {
      Matrix tail = id;
      for (std::size_t k = j + 1; k <= i; ++k) tail = (id - eta(k) * g) * tail;
      value -= eta(j) * tail * xi[j - 1];
    }
    out.push_back(value + theta_star);
  }
  return out;
}

class ZeroOracle : public GradientOracle {
 public:
  explicit ZeroOracle(std::size_t d) : d_(d) {}
  std::size_t dim() const override { return d_; }
  std::size_t sample_width() const override { return 1; }
  void gradient(std::span<const double>, const Vector&,
                Vector& out) const override {
    out.setZero();
  }

 private:
  std::size_t d_;
};

class NanOracle : public GradientOracle {
 public:
  std::size_t dim() const override { return 1; }
  std::size_t sample_width() const override { return 1; }
  void gradient(std::span<const double> row, const Vector&,
                Vector& out) const override {
    out[0] = row[0] > 2.5 ? std::nan("") : 0.0;
  }
};

}  // namespace

TEST_CASE("step sizes") {
  const LearningRateSchedule s(1.0, 0.51);
  CHECK(step_size(s, 1) == 1.0);
  CHECK(step_size(s, 2) == doctest::Approx(std::pow(2.0, -0.51)));
  CHECK(step_size(s, 2) == doctest::Approx(0.702).epsilon(1e-3));
  CHECK(step_size(LearningRateSchedule(2.0, 0.75), 16) ==
        doctest::Approx(0.25).epsilon(1e-15));

  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::uint64_t> pick(1, 100000000);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint64_t i = pick(gen);
    CHECK(s(i + 1) < s(i));
  }

  CHECK_THROWS_AS(LearningRateSchedule(0.0, 0.6), ValidationError);
  CHECK_THROWS_AS(LearningRateSchedule(1.0, 0.5), ValidationError);
  CHECK_THROWS_AS(LearningRateSchedule(1.0, 1.0), ValidationError);
}

TEST_CASE("run_sgd on hand-checkable recursions") {
  const LearningRateSchedule s(1.0, 0.51);
  SUBCASE("g = theta collapses to zero after one unit step") {
    LinearOracle oracle(Matrix::Identity(1, 1), Vector::Zero(1));
    VectorSampleSource data(1, {0.0, 0.0});
    RunConfig config = RunConfig::zeros(2, 1);
    config.theta0[0] = 1.0;
    std::vector<double> iterates;
    const RunResult r = run_sgd(oracle, data, s, config, TraceSpec{1, {}},
                                [&](std::uint64_t, const Vector& theta) {
                                  iterates.push_back(theta[0]);
                                });
    CHECK(iterates == std::vector<double>{0.0, 0.0});
    CHECK(r.theta_bar[0] == 0.0);
  }
  SUBCASE("zero gradient keeps theta0") {
    ZeroOracle oracle(3);
    VectorSampleSource data(1, std::vector<double>(50, 1.0));
    RunConfig config = RunConfig::zeros(50, 3);
    config.theta0 << 0.5, -2.0, 7.0;
    const RunResult r = run_sgd(oracle, data, s, config, TraceSpec{5, {}});
    CHECK((r.theta_bar - config.theta0).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("run_sgd matches the product formula on linear models") {
  std::mt19937_64 gen(17);
  for (Eigen::Index d = 1; d <= 4; ++d) {
    for (double gamma : {0.51, 0.75}) {
      const std::size_t n = 200;
      const LearningRateSchedule s(0.8, gamma);
      const Matrix g = random_spd(d, gen);
      Vector theta_star = Vector::LinSpaced(d, -1.0, 1.0);
      const auto values = gaussian_values(n * d, static_cast<unsigned>(d));
      std::vector<Vector> xi;
      for (std::size_t i = 0; i < n; ++i) {
        xi.push_back(Eigen::Map<const Vector>(values.data() + i * d, d));
      }
      RunConfig config = RunConfig::zeros(n, static_cast<std::size_t>(d));
      config.theta0 = Vector::Constant(d, 2.0);

      LinearOracle oracle(g, theta_star);
      VectorSampleSource data(static_cast<std::size_t>(d), values);
      std::vector<Vector> iterates;
      const RunResult r = run_sgd(
          oracle, data, s, config, TraceSpec{10, {}},
          [&](std::uint64_t, const Vector& theta) { iterates.push_back(theta); });

      const auto expected = product_formula(g, theta_star, config.theta0, xi, s);
      double worst = 0.0;
      Vector mean = Vector::Zero(d);
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, (iterates[i] - expected[i]).cwiseAbs().maxCoeff());
        mean += expected[i];
      }
      CHECK(worst < 1e-10);
      CHECK((r.theta_bar - mean / n).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("streaming trace agrees with stored iterates") {
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<std::uint64_t> pick_n(4, 1000);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t n = pick_n(gen);
    std::uniform_int_distribution<std::uint64_t> pick_l(1, n / 2);
    const std::uint64_t l = pick_l(gen);
    const Eigen::Index d = 1 + trial % 4;
    const auto values = gaussian_values(n * d, 1000 + trial);

    LinearOracle oracle(random_spd(d, gen), Vector::Zero(d));
    VectorSampleSource data(static_cast<std::size_t>(d), values);
    const LearningRateSchedule s(1.0, 0.6);
    const std::uint64_t k = 1 + n / 3;
    const std::uint64_t lk = std::max<std::uint64_t>(1, k / 3);
    std::vector<Vector> stored;
    const RunResult r =
        run_sgd(oracle, data, s, RunConfig::zeros(n, d),
                TraceSpec{l, {{k, lk}, {n, l}}},
                [&](std::uint64_t, const Vector& theta) { stored.push_back(theta); });
    const IterateTrace& t = r.trace;
    REQUIRE(t.finalized());
    const std::uint64_t m = n / l;
    CHECK(t.num_blocks() == m);
    CHECK(static_cast<std::uint64_t>(t.block_sums().cols()) == m);

    Vector total = Vector::Zero(d);
    for (const Vector& v : stored) total += v;
    CHECK((t.running_mean() - total / double(n)).cwiseAbs().maxCoeff() < 1e-12);
    for (std::uint64_t j = 0; j < m; ++j) {
      Vector block = Vector::Zero(d);
      for (std::uint64_t b = j * l; b < (j + 1) * l; ++b) block += stored[b];
      CHECK((t.block_sums().col(j) - block).cwiseAbs().maxCoeff() < 1e-12);
    }
    Vector trailing = Vector::Zero(d);
    for (std::uint64_t b = m * l; b < n; ++b) trailing += stored[b];
    CHECK((t.trailing_sum() - trailing).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((t.running_mean() * double(n) -
           (t.block_sums().rowwise().sum() + t.trailing_sum()))
              .cwiseAbs()
              .maxCoeff() < 1e-9);

    // Checkpoint at k uses its own layout over the first k iterates.
    const IterateTrace sub = t.checkpoint_trace(0);
    CHECK(sub.n() == k);
    CHECK(sub.num_blocks() == k / lk);
    Vector prefix = Vector::Zero(d);
    for (std::uint64_t b = 0; b < k; ++b) prefix += stored[b];
    CHECK((sub.running_mean() - prefix / double(k)).cwiseAbs().maxCoeff() < 1e-12);
    for (std::uint64_t j = 0; j < sub.num_blocks(); ++j) {
      Vector block = Vector::Zero(d);
      for (std::uint64_t b = j * lk; b < (j + 1) * lk; ++b) block += stored[b];
      CHECK((sub.block_sums().col(j) - block).cwiseAbs().maxCoeff() < 1e-12);
    }
    // A checkpoint at n with the main layout reproduces the main trace bit
    // for bit.
    const IterateTrace full = t.checkpoint_trace(1);
    CHECK(full.block_sums() == t.block_sums());
    CHECK(full.running_mean() == t.running_mean());
  }
}

TEST_CASE("trace validation") {
  CHECK_THROWS_AS(IterateTrace(1, 10, TraceSpec{0, {}}), ValidationError);
  CHECK_THROWS_AS(IterateTrace(1, 10, TraceSpec{2, {{11, 2}}}), ValidationError);
  IterateTrace t(1, 2, TraceSpec{1, {{2, 1}}});
  CHECK_THROWS_AS(t.checkpoint_trace(0), ValidationError);
  t.observe(Vector::Ones(1));
  t.observe(Vector::Ones(1));
  CHECK_THROWS_AS(t.observe(Vector::Ones(1)), ValidationError);
}

TEST_CASE("runner errors") {
  const LearningRateSchedule s(1.0, 0.51);
  LinearOracle oracle(Matrix::Identity(1, 1), Vector::Zero(1));
  SUBCASE("data exhaustion") {
    VectorSampleSource data(1, {0.1, 0.2});
    CHECK_THROWS_WITH_AS(
        run_sgd(oracle, data, s, RunConfig::zeros(3, 1), TraceSpec{1, {}}),
        doctest::Contains("iteration 3"), ValidationError);
  }
  SUBCASE("non-finite gradient reports the iteration") {
    NanOracle nan_oracle;
    VectorSampleSource data(1, {1.0, 2.0, 3.0, 4.0});
    CHECK_THROWS_WITH_AS(
        run_sgd(nan_oracle, data, s, RunConfig::zeros(4, 1), TraceSpec{1, {}}),
        doctest::Contains("iteration 3"), NumericalError);
  }
  SUBCASE("dimension mismatch") {
    VectorSampleSource data(1, {0.1, 0.2});
    CHECK_THROWS_AS(
        run_sgd(oracle, data, s, RunConfig::zeros(2, 2), TraceSpec{1, {}}),
        ValidationError);
  }
  SUBCASE("bad config") {
    VectorSampleSource data(1, {0.1});
    RunConfig config = RunConfig::zeros(1, 1);
    config.batch_size = 0;
    CHECK_THROWS_AS(run_sgd(oracle, data, s, config, TraceSpec{1, {}}),
                    ValidationError);
  }
}

TEST_CASE("ldp-sgd reduces to sgd without noise and is deterministic") {
  const LearningRateSchedule s(1.0, 0.51);
  const auto values = gaussian_values(3000, 4);
  const RunConfig config = RunConfig::zeros(1000, 3);
  LinearOracle clean(2.0 * Matrix::Identity(3, 3), Vector::Ones(3));
  VectorSampleSource d1(3, values), d2(3, values), d3(3, values);
  Rng rng(1, 2);
  const RunResult plain = run_sgd(clean, d1, s, config, TraceSpec{10, {}});
  const RunResult quiet = run_ldp_sgd(clean, d2, s, config, TraceSpec{10, {}}, rng);
  CHECK(plain.theta_bar == quiet.theta_bar);
  CHECK(plain.trace.block_sums() == quiet.trace.block_sums());

  LinearOracle noisy(2.0 * Matrix::Identity(3, 3), Vector::Ones(3),
                     PrivacyParams(1.0), 2.0);
  VectorSampleSource e1(3, values), e2(3, values);
  Rng r1(8, 2), r2(8, 2);
  std::vector<Vector> a, b;
  run_ldp_sgd(noisy, e1, s, config, TraceSpec{10, {}}, r1,
              [&](std::uint64_t, const Vector& t) { a.push_back(t); });
  run_ldp_sgd(noisy, e2, s, config, TraceSpec{10, {}}, r2,
              [&](std::uint64_t, const Vector& t) { b.push_back(t); });
  CHECK(a == b);
}

TEST_CASE("ldp-sgd single step") {
  const LearningRateSchedule s(0.7, 0.51);
  LinearOracle noisy(Matrix::Identity(1, 1), Vector::Zero(1),
                     PrivacyParams(1.0), 1.0);
  VectorSampleSource data(1, {0.25});
  RunConfig config = RunConfig::zeros(1, 1);
  config.theta0[0] = 3.0;
  Rng rng(4, 4);
  const RunResult r = run_ldp_sgd(noisy, data, s, config, TraceSpec{1, {}}, rng);

  Rng replay(4, 4);
  Vector g(1);
  noisy.private_gradient(std::vector<double>{0.25}, config.theta0, replay, g);
  CHECK(r.theta_bar[0] == 3.0 - 0.7 * g[0]);
}

TEST_CASE("mini-batch with s = 1 reduces to the single-sample runners") {
  const LearningRateSchedule s(1.0, 0.51);
  const auto values = gaussian_values(400, 6);
  LinearOracle noisy(Matrix::Identity(2, 2), Vector::Zero(2),
                     PrivacyParams(1.0), 1.0);
  RunConfig config = RunConfig::zeros(200, 2);

  VectorSampleSource a(2, values), b(2, values);
  const RunResult single = run_sgd(noisy, a, s, config, TraceSpec{7, {}});
  Rng unused(0, 0);
  const RunResult batch = run_minibatch(noisy, b, s, config, TraceSpec{7, {}}, unused);
  CHECK(single.theta_bar == batch.theta_bar);
  CHECK(single.trace.block_sums() == batch.trace.block_sums());

  config.privacy_mode = PrivacyMode::kLocalDp;
  VectorSampleSource c(2, values), e(2, values);
  Rng r1(3, 1), r2(3, 1);
  const RunResult ldp = run_ldp_sgd(noisy, c, s, config, TraceSpec{7, {}}, r1);
  const RunResult ldp_batch = run_minibatch(noisy, e, s, config, TraceSpec{7, {}}, r2);
  CHECK(ldp.theta_bar == ldp_batch.theta_bar);
}

TEST_CASE("mini-batch of a deterministic gradient ignores s") {
  const LearningRateSchedule s(1.0, 0.51);
  LinearOracle oracle(Matrix::Identity(1, 1), Vector::Zero(1));
  RunConfig config = RunConfig::zeros(50, 1);
  config.theta0[0] = 0.1;
  std::vector<double> reference;
  {
    VectorSampleSource data(1, std::vector<double>(50, 0.0));
    run_minibatch(oracle, data, s, config, TraceSpec{5, {}},
                  [&](std::uint64_t, const Vector& t) { reference.push_back(t[0]); });
  }
  for (std::uint64_t batch : {2, 3, 5, 7}) {
    config.batch_size = batch;
    VectorSampleSource data(1, std::vector<double>(50 * batch, 0.0));
    std::vector<double> iterates;
    run_minibatch(oracle, data, s, config, TraceSpec{5, {}},
                  [&](std::uint64_t, const Vector& t) { iterates.push_back(t[0]); });
    CHECK(iterates == reference);
  }
  config.privacy_mode = PrivacyMode::kCentralDp;
  VectorSampleSource data(1, std::vector<double>(400, 0.0));
  CHECK_THROWS_AS(run_minibatch(oracle, data, s, config, TraceSpec{5, {}}),
                  ValidationError);
}

TEST_CASE("central vs local mini-batch noise variance") {
  // Zero clean gradient at theta = 0, so theta_{i-1} - theta_i = eta_i * noise.
  const std::uint64_t steps = 100000;
  const std::uint64_t batch = 5;
  const LearningRateSchedule s(1.0, 0.51);
  LinearOracle oracle(Matrix::Zero(1, 1), Vector::Zero(1), PrivacyParams(1.0),
                      1.0);
  const auto noise_variance = [&](PrivacyMode mode) {
    RunConfig config = RunConfig::zeros(steps, 1);
    config.batch_size = batch;
    config.privacy_mode = mode;
    VectorSampleSource data(1, std::vector<double>(steps * batch, 0.0));
    Rng rng(12, static_cast<std::uint64_t>(mode));
    double prev = 0.0, sum = 0.0, sum_sq = 0.0;
    run_minibatch(oracle, data, s, config, TraceSpec{1000, {}}, rng,
                  [&](std::uint64_t i, const Vector& t) {
                    const double noise = (prev - t[0]) / s(i);
                    prev = t[0];
                    sum += noise;
                    sum_sq += noise * noise;
                  });
    const double mean = sum / steps;
    return sum_sq / steps - mean * mean;
  };
  const double laplace_var = 2.0;  // b = 1
  const double central = noise_variance(PrivacyMode::kCentralDp);
  const double local = noise_variance(PrivacyMode::kLocalDp);
  CHECK(central == doctest::Approx(laplace_var / (batch * batch)).epsilon(0.05));
  CHECK(local == doctest::Approx(laplace_var / batch).epsilon(0.05));
  CHECK(central / local == doctest::Approx(1.0 / batch).epsilon(0.05));
}

namespace {

// Independent O(b^2) evaluation with explicit products.
double naive_base_case_lhs(double c, double gamma, double lambda,
                           std::uint64_t b0) {
  double lhs = 0.0;
  for (std::uint64_t j = 1; j <= b0; ++j) {
    const double eta_j = c * std::pow(double(j), -gamma);
    double prod = 1.0;
    for (std::uint64_t k = j + 1; k <= b0; ++k) {
      const double f = 1.0 - lambda * c * std::pow(double(k), -gamma);
      prod *= f * f;
    }
    lhs += lambda * lambda * eta_j * eta_j * prod;
  }
  return lhs;
}

}  // namespace

TEST_CASE("base-case condition") {
  // b0 = ceil(2^(1/0.51)) = ceil(3.89) = 4
  CHECK(std::pow(2.0, 1.0 / 0.51) == doctest::Approx(3.89).epsilon(1e-3));
  const BaseCaseCheck r = check_base_case(LearningRateSchedule(1.0, 0.51), 1.0);
  CHECK(r.b0 == 4);
  CHECK(r.lhs == doctest::Approx(naive_base_case_lhs(1.0, 0.51, 1.0, 4)).epsilon(1e-14));
  CHECK(r.lhs == doctest::Approx(0.354).epsilon(2e-3));
  CHECK(r.rhs == doctest::Approx(std::pow(4.0, -0.51) / 2.0).epsilon(1e-15));
  CHECK(r.rhs == doctest::Approx(0.246).epsilon(3e-3));
  CHECK(r.holds);

  const BaseCaseCheck half = check_base_case(LearningRateSchedule(0.5, 0.51), 1.0);
  CHECK(half.b0 == 1);
  CHECK(half.lhs == 0.25);
  CHECK(half.rhs == 0.25);
  CHECK(half.holds);

  CHECK_THROWS_AS(check_base_case(LearningRateSchedule(1.0, 0.51), 0.0),
                  ValidationError);
}

TEST_CASE("base case over the default eigenvalue grid") {
  const LearningRateSchedule s(1.0, 0.51);
  // Frozen from the naive evaluation: smallest b0 >= (2 lambda)^(1/gamma)
  // where the inequality holds.
  const struct {
    double lambda;
    std::uint64_t b0;
  } grid[] = {{0.1, 9}, {0.5, 1}, {1.0, 4}, {2.0, 16}};
  for (const auto& point : grid) {
    const BaseCaseCheck found = find_base_case(s, point.lambda);
    CHECK(found.holds);
    CHECK(found.b0 == point.b0);
    CHECK(found.lhs == doctest::Approx(naive_base_case_lhs(1.0, 0.51, point.lambda,
                                                           point.b0))
                           .epsilon(1e-13));
    CHECK(found.lhs > 0.0);
    CHECK(found.rhs > 0.0);
  }
  // The smallest admissible b0 alone is not enough for lambda = 0.1.
  const BaseCaseCheck literal = check_base_case(s, 0.1);
  CHECK(literal.b0 == 1);
  CHECK_FALSE(literal.holds);
}

TEST_CASE("base case terms stay positive") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> c_dist(0.1, 3.0), g_dist(0.51, 0.99),
      l_dist(0.01, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const BaseCaseCheck r =
        check_base_case(LearningRateSchedule(c_dist(gen), g_dist(gen)), l_dist(gen));
    CHECK(r.lhs > 0.0);
    CHECK(r.rhs > 0.0);
  }
}

TEST_CASE("sum identity") {
  CHECK(verify_sum_identity(LearningRateSchedule(0.3, 0.6), 0.7, 1) < 1e-15);
  CHECK(verify_sum_identity(LearningRateSchedule(1.0, 0.51), 1.0, 100) < 1e-12);
  CHECK(verify_sum_identity(LearningRateSchedule(1.0, 0.75), 0.5, 10000) < 1e-10);
  for (std::uint64_t b = 1; b <= 10000; b *= 10) {
    CHECK(verify_sum_identity(LearningRateSchedule(1.0, 0.51), 2.0, b) < 1e-10);
  }
  CHECK_THROWS_AS(verify_sum_identity(LearningRateSchedule(1.0, 0.51), 1.0, 0),
                  ValidationError);
}

TEST_CASE("geometric checkpoint grid") {
  const auto grid = geometric_checkpoints(10, 1000000);
  CHECK(grid.front() == 10);
  CHECK(grid.back() == 1000000);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
  CHECK(grid.size() < 150);
  CHECK(geometric_checkpoints(5, 5) == std::vector<std::uint64_t>{5});
  CHECK_THROWS_AS(geometric_checkpoints(0, 5), ValidationError);
  CHECK_THROWS_AS(geometric_checkpoints(2, 5, 1.0), ValidationError);
}

TEST_CASE("file-backed sample sources") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string csv = (dir / "ldpsgd_test_rows.csv").string();
  {
    std::ofstream out(csv);
    out << "x0,y\n1.5,2\n-3e-2, 4\n\n5,6\n";
  }
  CsvSampleSource source(csv, 2);
  std::vector<double> row(2);
  REQUIRE(source.next(row));
  CHECK(row == std::vector<double>{1.5, 2.0});
  REQUIRE(source.next(row));
  CHECK(row == std::vector<double>{-0.03, 4.0});
  REQUIRE(source.next(row));
  CHECK(row == std::vector<double>{5.0, 6.0});
  CHECK_FALSE(source.next(row));

  {
    std::ofstream out(csv);
    out << "1,2\n3\n";
  }
  CsvSampleSource short_row(csv, 2);
  REQUIRE(short_row.next(row));
  CHECK_THROWS_AS(short_row.next(row), ValidationError);

  const std::string bin = (dir / "ldpsgd_test_rows.bin").string();
  {
    std::ofstream out(bin, std::ios::binary);
    const double values[] = {1.0, 2.0, 3.0, 4.0};
    out.write(reinterpret_cast<const char*>(values), sizeof(values));
  }
  BinarySampleSource binary(bin, 2);
  REQUIRE(binary.next(row));
  CHECK(row == std::vector<double>{1.0, 2.0});
  REQUIRE(binary.next(row));
  CHECK(row == std::vector<double>{3.0, 4.0});
  CHECK_FALSE(binary.next(row));

  CHECK_THROWS_AS(CsvSampleSource("/nonexistent/rows.csv", 1), ValidationError);
  std::filesystem::remove(csv);
  std::filesystem::remove(bin);
}
