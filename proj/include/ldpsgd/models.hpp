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
#ifndef LDPSGD_MODELS_HPP_
#define LDPSGD_MODELS_HPP_

#include <memory>
#include <string>
#include <vector>

#include "ldpsgd/common.hpp"
#include "ldpsgd/data.hpp"
#include "ldpsgd/privacy.hpp"
#include "ldpsgd/rng.hpp"
#include "ldpsgd/sgd.hpp"

namespace ldpsgd {

// Sandwich covariance Sigma = G^-1 (S_sgd + S_ldp) G^-1 of the averaged
// iterates.
struct AsymptoticCov {
  Matrix sigma;
  Matrix s_sgd;
  Matrix s_ldp;
  Matrix g_matrix;
};

// ---------------------------------------------------------------------------
// Quantile estimation: g(X, theta) = -tau + 1{X <= theta}, privatized by
// randomized response on the indicator.

double quantile_gradient(double x, double theta, double tau);

double quantile_private_gradient(double x, double theta, double tau,
                                 const PrivacyParams& params, Rng& rng);

AsymptoticCov closed_form_sigma_quantile(double tau,
                                         const PrivacyParams& params,
                                         double density_at_quantile);

class QuantileOracle : public PrivateGradientOracle {
 public:
  QuantileOracle(double tau, const PrivacyParams& params);

  std::size_t dim() const override { return 1; }
  std::size_t sample_width() const override { return 1; }
  void gradient(std::span<const double> row, const Vector& theta,
                Vector& out) const override;

  const PrivacyParams& privacy() const override { return rr_.params(); }
  // The gradient ranges over [-tau, 1 - tau].
  double l1_sensitivity() const override { return 1.0; }
  void private_gradient(std::span<const double> row, const Vector& theta,
                        Rng& rng, Vector& out) const override;

 private:
  double tau_;
  RandomizedResponse rr_;
};

// ---------------------------------------------------------------------------
// Linear quantile regression: g(Z, beta) = (-tau + 1{y - X'beta <= 0}) X,
// privatized by coordinate-wise Laplace noise.

Vector quantreg_gradient(const Vector& x, double y, const Vector& beta,
                         double tau);

// Throws ValidationError when some |X_k| exceeds m_bound.
Vector quantreg_private_gradient(const Vector& x, double y, const Vector& beta,
                                 double tau, const PrivacyParams& params,
                                 double m_bound, std::size_t d, Rng& rng);

// L1 sensitivity 2 max(tau, 1 - tau) m d of the regression gradient.
double quantreg_sensitivity(double tau, double m_bound, std::size_t d);

AsymptoticCov closed_form_sigma_quantreg(double tau,
                                         const PrivacyParams& params,
                                         double m_bound, std::size_t d,
                                         const Matrix& sigma_x,
                                         double density_at_zero);

class QuantRegOracle : public PrivateGradientOracle {
 public:
  QuantRegOracle(double tau, std::size_t d, double m_bound,
                 const PrivacyParams& params);

  std::size_t dim() const override { return d_; }
  // d covariates followed by the response.
  std::size_t sample_width() const override { return d_ + 1; }
  void gradient(std::span<const double> row, const Vector& theta,
                Vector& out) const override;

  const PrivacyParams& privacy() const override { return params_; }
  double l1_sensitivity() const override { return sensitivity_; }
  void private_gradient(std::span<const double> row, const Vector& theta,
                        Rng& rng, Vector& out) const override;

 private:
  double tau_;
  std::size_t d_;
  double m_bound_;
  PrivacyParams params_;
  double sensitivity_;
  LaplaceMechanism mech_;
};

// ---------------------------------------------------------------------------
// Data generators

// Standard normal truncated to [-1, 1] by rejection.
double truncated_standard_normal(Rng& rng);

// Variance 1 - 2 phi(1) / (2 Phi(1) - 1) of the truncated normal above.
double truncated_normal_variance();

// n i.i.d. N(0, 1) rows of width 1.
class QuantileDataSource : public SampleSource {
 public:
  QuantileDataSource(Rng rng, std::uint64_t n);

  std::size_t width() const override { return 1; }
  bool next(std::span<double> row) override;

 private:
  Rng rng_;
  std::uint64_t remaining_;
};

// n rows (1, X_1..X_{d-1}, y) with truncated-normal covariates and
// y = X'beta + e, e ~ N(0, 1) shifted so that its tau-quantile is 0.
class QuantRegDataSource : public SampleSource {
 public:
  QuantRegDataSource(Rng rng, std::uint64_t n, Vector beta, double tau);

  std::size_t width() const override {
    return static_cast<std::size_t>(beta_.size()) + 1;
  }
  bool next(std::span<double> row) override;

 private:
  Rng rng_;
  std::uint64_t remaining_;
  Vector beta_;
  double error_shift_;
};

std::unique_ptr<SampleSource> generate_quantile_data(Rng rng, std::uint64_t n);
std::unique_ptr<SampleSource> generate_quantreg_data(Rng rng, std::uint64_t n,
                                                     const Vector& beta,
                                                     double tau);

// ---------------------------------------------------------------------------
// Problems as seen by the experiment harness.

class EstimationProblem {
 public:
  virtual ~EstimationProblem() = default;
  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Vector true_parameter() const = 0;
  virtual std::vector<std::string> coordinate_names() const = 0;
  virtual std::unique_ptr<SampleSource> make_data(Rng rng,
                                                  std::uint64_t n) const = 0;
  virtual std::unique_ptr<PrivateGradientOracle> make_oracle(
      const PrivacyParams& params) const = 0;
  virtual AsymptoticCov asymptotic_cov(const PrivacyParams& params) const = 0;
};

// tau-quantile of N(0, 1).
class QuantileModel : public EstimationProblem {
 public:
  explicit QuantileModel(double tau);

  double tau() const { return tau_; }
  double x_tau() const { return x_tau_; }
  double density_at_quantile() const { return density_; }

  std::string name() const override { return "quantile"; }
  std::size_t dim() const override { return 1; }
  Vector true_parameter() const override;
  std::vector<std::string> coordinate_names() const override;
  std::unique_ptr<SampleSource> make_data(Rng rng,
                                          std::uint64_t n) const override;
  std::unique_ptr<PrivateGradientOracle> make_oracle(
      const PrivacyParams& params) const override;
  AsymptoticCov asymptotic_cov(const PrivacyParams& params) const override;

 private:
  double tau_;
  double x_tau_;
  double density_;
};

// Intercept plus d - 1 truncated-normal covariates on [-1, 1], so m = 1.
class QuantRegModel : public EstimationProblem {
 public:
  explicit QuantRegModel(double tau = 0.5,
                         Vector beta_star = default_beta());

  static Vector default_beta();

  double tau() const { return tau_; }
  const Vector& beta_star() const { return beta_; }
  double m_bound() const { return 1.0; }
  const Matrix& sigma_x() const { return sigma_x_; }
  double density_at_zero() const { return density_; }

  std::string name() const override { return "quantreg"; }
  std::size_t dim() const override {
    return static_cast<std::size_t>(beta_.size());
  }
  Vector true_parameter() const override { return beta_; }
  std::vector<std::string> coordinate_names() const override;
  std::unique_ptr<SampleSource> make_data(Rng rng,
                                          std::uint64_t n) const override;
  std::unique_ptr<PrivateGradientOracle> make_oracle(
      const PrivacyParams& params) const override;
  AsymptoticCov asymptotic_cov(const PrivacyParams& params) const override;

 private:
  double tau_;
  Vector beta_;
  Matrix sigma_x_;
  double density_;
};

}  // namespace ldpsgd

#endif  // LDPSGD_MODELS_HPP_
