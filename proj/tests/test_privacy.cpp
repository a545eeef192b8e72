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
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ldpsgd/privacy.hpp"

using namespace ldpsgd;

namespace {

struct Moments {
  double mean;
  double variance;
};

template <class Draw>
Moments sample_moments(int count, Draw&& draw) {
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < count; ++i) {
    const double x = draw();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / count;
  return {mean, (sum_sq - count * mean * mean) / (count - 1)};
}

}  // namespace

TEST_CASE("privacy params reject non-positive budgets") {
  CHECK_THROWS_AS(PrivacyParams(0.0), ValidationError);
  CHECK_THROWS_AS(PrivacyParams(-1.0), ValidationError);
  CHECK_THROWS_AS(PrivacyParams(std::nan("")), ValidationError);
  CHECK(PrivacyParams::no_noise().is_no_noise());
  CHECK(PrivacyParams(0.5).epsilon() == 0.5);
}

TEST_CASE("laplace noise moments") {
  Rng rng(11, 0);
  const LaplaceMechanism unit(1.0, PrivacyParams(1.0));
  const Moments m1 =
      sample_moments(1000000, [&] { return laplace_noise(unit, rng); });
  CHECK(std::abs(m1.mean) < 0.005);
  CHECK(m1.variance == doctest::Approx(2.0).epsilon(0.02));

  const LaplaceMechanism wide(2.0, PrivacyParams(1.0));
  CHECK(wide.scale() == 2.0);
  const Moments m2 =
      sample_moments(1000000, [&] { return laplace_noise(wide, rng); });
  CHECK(m2.variance == doctest::Approx(8.0).epsilon(0.02));
}

TEST_CASE("laplace density ratio is bounded by e^eps on a grid") {
  for (double eps : {0.1, 0.5, 1.0, 3.0}) {
    for (double delta : {0.5, 1.0, 4.0}) {
      const LaplaceMechanism mech(delta, PrivacyParams(eps));
      double worst = 0.0;
      for (int iy = -20; iy <= 20; ++iy) {
        const double y = 0.1 * iy;
        for (int is = -10; is <= 10; ++is) {
          const double y2 = y + delta * is / 10.0;  // |y - y2| <= delta
          for (int it = -200; it <= 200; ++it) {
            const double t = 0.05 * it;
            const double ratio = mech.density(t - y) / mech.density(t - y2);
            worst = std::max(worst, ratio);
          }
        }
      }
      CHECK(worst <= std::exp(eps) * (1 + 1e-12));
      // The bound is attained when |y - y'| = delta and t is outside both.
      CHECK(worst == doctest::Approx(std::exp(eps)).epsilon(1e-9));
    }
  }
}

TEST_CASE("laplace inverse cdf is symmetric and median-zero") {
  const LaplaceMechanism mech(1.0, PrivacyParams(1.0));
  CHECK(mech.quantile(0.5) == 0.0);
  for (double u : {0.01, 0.2, 0.4}) {
    CHECK(mech.quantile(u) == doctest::Approx(-mech.quantile(1.0 - u)));
  }
  // CDF of Lap(0,1) at log(0.5) is 0.25.
  CHECK(mech.quantile(0.25) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("vector privatization") {
  Rng rng(3, 0);
  Vector g(2);
  g << 1.0, -1.0;
  CHECK(privatize_vector_laplace(g, 4.0, PrivacyParams::no_noise(), rng) == g);

  Vector bad = g;
  bad[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(privatize_vector_laplace(bad, 1.0, PrivacyParams(1.0), rng),
                  ValidationError);

  // Quantile-regression sensitivity 2 * 0.5 * 1 * 4 = 4 per coordinate.
  const LaplaceMechanism qr(2.0 * 0.5 * 1.0 * 4.0, PrivacyParams(1.0));
  CHECK(qr.scale() == 4.0);

  const int count = 100000;
  Vector sum = Vector::Zero(2);
  for (int i = 0; i < count; ++i) {
    sum += privatize_vector_laplace(g, 1.0, PrivacyParams(1.0), rng);
  }
  const Vector mean = sum / count;
  // CLT bound: 4 * (scale * sqrt 2) / sqrt(count) with scale 1.
  const double bound = 4.0 * std::sqrt(2.0) / std::sqrt(double(count));
  CHECK(std::abs(mean[0] - 1.0) < bound);
  CHECK(std::abs(mean[1] + 1.0) < bound);
}

TEST_CASE("randomized response keep probability") {
  const double p = std::exp(1.0) / (1.0 + std::exp(1.0));
  CHECK(p == doctest::Approx(0.7311).epsilon(1e-4));
  const RandomizedResponse rr(PrivacyParams(1.0));
  CHECK(rr.keep_probability() == doctest::Approx(p).epsilon(1e-15));

  Rng rng(5, 0);
  const int trials = 1000000;
  int kept = 0;
  for (int i = 0; i < trials; ++i) {
    kept += randomized_response(i & 1, PrivacyParams(1.0), rng) == (i & 1);
  }
  // Binomial sd sqrt(p(1-p)/1e6) ~ 4.4e-4; the tolerance is ~4.5 sd.
  CHECK(std::abs(double(kept) / trials - p) < 0.002);

  CHECK_THROWS_AS(randomized_response(2, PrivacyParams(1.0), rng),
                  ValidationError);
}

TEST_CASE("randomized response becomes a fair coin as eps -> 0") {
  const RandomizedResponse rr(PrivacyParams(1e-9));
  CHECK(rr.keep_probability() == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(rr.probability(1, 1) == doctest::Approx(rr.probability(1, 0)));
}

TEST_CASE("randomized response likelihood ratio equals e^eps") {
  for (double eps : {0.01, 0.5, 1.0, 2.0, 5.0}) {
    const RandomizedResponse rr{PrivacyParams(eps)};
    double worst = 0.0;
    for (int out : {0, 1}) {
      for (int in : {0, 1}) {
        for (int in2 : {0, 1}) {
          worst = std::max(worst, rr.probability(out, in) /
                                      rr.probability(out, in2));
        }
      }
    }
    CHECK(worst == doctest::Approx(std::exp(eps)).epsilon(1e-14));
    CHECK(rr.keep_probability() / rr.flip_probability() ==
          doctest::Approx(std::exp(eps)).epsilon(1e-14));
  }
}

TEST_CASE("debiased randomized response") {
  const double p = std::exp(1.0) / (1.0 + std::exp(1.0));
  // Oracle: the affine map evaluated directly from p.
  const double one = (1.0 - (1.0 - p)) / (2.0 * p - 1.0);
  const double zero = (0.0 - (1.0 - p)) / (2.0 * p - 1.0);
  CHECK(one == doctest::Approx(1.5820).epsilon(1e-4));
  CHECK(zero == doctest::Approx(-0.5820).epsilon(1e-4));
  CHECK(debias_rr(1, PrivacyParams(1.0)) == doctest::Approx(one).epsilon(1e-14));
  CHECK(debias_rr(0, PrivacyParams(1.0)) == doctest::Approx(zero).epsilon(1e-14));

  CHECK_THROWS_AS(debias_rr(1, PrivacyParams(1e-7)), ValidationError);
  CHECK(debias_rr(1, PrivacyParams::no_noise()) == 1.0);
  CHECK(debias_rr(0, PrivacyParams::no_noise()) == 0.0);

  // Two-point conditional expectation given the true bit.
  for (double eps : {0.1, 1.0, 3.0}) {
    const RandomizedResponse rr{PrivacyParams(eps)};
    for (int bit : {0, 1}) {
      const double expectation =
          rr.probability(1, bit) * rr.debias(1) +
          rr.probability(0, bit) * rr.debias(0);
      CHECK(expectation == doctest::Approx(bit).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("budget ledger composition") {
  BudgetLedger seq;
  seq = compose(seq, {"a", 0.5, false}, CompositionMode::kSequential);
  seq = compose(seq, {"b", 0.5, false}, CompositionMode::kSequential);
  CHECK(seq.total_sequential() == 1.0);
  CHECK(seq.effective_epsilon() == 1.0);

  BudgetLedger par;
  par = compose(par, {"a", 0.5, true}, CompositionMode::kParallel);
  par = compose(par, {"b", 0.8, true}, CompositionMode::kParallel);
  CHECK(par.total_parallel() == 0.8);
  CHECK(par.effective_epsilon() == 0.8);
  CHECK(par.total_sequential() >= par.total_parallel());

  CHECK_THROWS_AS(compose(par, {"c", 0.3, false}, CompositionMode::kParallel),
                  ValidationError);
  CHECK_THROWS_AS(compose(par, {"c", 0.0, true}, CompositionMode::kSequential),
                  ValidationError);

  // LDP-SGD: n individuals, each touched once at budget eps.
  BudgetLedger sgd;
  for (int i = 0; i < 1000; ++i) {
    sgd = compose(sgd, {"sample", 1.0, true}, CompositionMode::kParallel);
  }
  CHECK(sgd.effective_epsilon() == 1.0);
  CHECK(sgd.to_json()["effective_epsilon"] == 1.0);
}

TEST_CASE("ledger totals are permutation invariant") {
  std::vector<LedgerEntry> entries;
  for (int i = 0; i < 12; ++i) {
    entries.push_back({"m" + std::to_string(i), 0.05 * (i + 1), true,
                       CompositionMode::kSequential});
  }
  std::mt19937 shuffle_rng(9);
  const auto build = [&](const std::vector<LedgerEntry>& list) {
    BudgetLedger ledger;
    for (const LedgerEntry& e : list) {
      ledger = compose(ledger, e, e.mode);
    }
    return ledger;
  };
  for (auto& e : entries) {
    if (e.epsilon > 0.3) e.mode = CompositionMode::kParallel;
  }
  const BudgetLedger ref = build(entries);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(entries.begin(), entries.end(), shuffle_rng);
    const BudgetLedger ledger = build(entries);
    CHECK(ledger.total_sequential() ==
          doctest::Approx(ref.total_sequential()).epsilon(1e-14));
    CHECK(ledger.total_parallel() == ref.total_parallel());
    CHECK(ledger.effective_epsilon() ==
          doctest::Approx(ref.effective_epsilon()).epsilon(1e-14));
  }
}
