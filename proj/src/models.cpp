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
#include "ldpsgd/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace ldpsgd {
namespace {

const boost::math::normal_distribution<double> kStandardNormal;

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ValidationError("quantile level tau must lie in (0, 1)");
  }
}

Matrix sandwich(const Matrix& g, const Matrix& s) {
  const Matrix g_inv = g.inverse();
  Matrix sigma = g_inv * s * g_inv;
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace

// ---------------------------------------------------------------------------
// Quantile

double quantile_gradient(double x, double theta, double tau) {
  return -tau + (x <= theta ? 1.0 : 0.0);
}

double quantile_private_gradient(double x, double theta, double tau,
                                 const PrivacyParams& params, Rng& rng) {
  const RandomizedResponse rr(params);
  return -tau + rr.debias(rr.respond(x <= theta ? 1 : 0, rng));
}

AsymptoticCov closed_form_sigma_quantile(double tau,
                                         const PrivacyParams& params,
                                         double density_at_quantile) {
  check_tau(tau);
  if (!(density_at_quantile > 0.0)) {
    throw ValidationError("density at the quantile must be positive");
  }
  const RandomizedResponse rr(params);
  const double denom = rr.keep_probability() - rr.flip_probability();
  AsymptoticCov cov;
  cov.s_sgd = Matrix::Constant(1, 1, tau * (1.0 - tau));
  cov.s_ldp = Matrix::Constant(
      1, 1, rr.keep_probability() * rr.flip_probability() / (denom * denom));
  cov.g_matrix = Matrix::Constant(1, 1, density_at_quantile);
  cov.sigma = (cov.s_sgd + cov.s_ldp) /
              (density_at_quantile * density_at_quantile);
  return cov;
}

QuantileOracle::QuantileOracle(double tau, const PrivacyParams& params)
    : tau_(tau), rr_(params) {
  check_tau(tau);
}

void QuantileOracle::gradient(std::span<const double> row, const Vector& theta,
                              Vector& out) const {
  out[0] = quantile_gradient(row[0], theta[0], tau_);
}

void QuantileOracle::private_gradient(std::span<const double> row,
                                      const Vector& theta, Rng& rng,
                                      Vector& out) const {
  const int bit = row[0] <= theta[0] ? 1 : 0;
  out[0] = -tau_ + rr_.debias(rr_.respond(bit, rng));
}

// ---------------------------------------------------------------------------
// Quantile regression

Vector quantreg_gradient(const Vector& x, double y, const Vector& beta,
                         double tau) {
  if (x.size() != beta.size()) {
    throw ValidationError("covariate and coefficient dimensions differ");
  }
  const double residual = y - x.dot(beta);
  return (-tau + (residual <= 0.0 ? 1.0 : 0.0)) * x;
}

double quantreg_sensitivity(double tau, double m_bound, std::size_t d) {
  return 2.0 * std::max(tau, 1.0 - tau) * m_bound * static_cast<double>(d);
}

Vector quantreg_private_gradient(const Vector& x, double y, const Vector& beta,
                                 double tau, const PrivacyParams& params,
                                 double m_bound, std::size_t d, Rng& rng) {
  if (static_cast<std::size_t>(x.size()) != d) {
    throw ValidationError("covariate vector does not have dimension d");
  }
  if (x.cwiseAbs().maxCoeff() > m_bound) {
    throw ValidationError("covariate exceeds the declared bound m");
  }
  Vector g = quantreg_gradient(x, y, beta, tau);
  privatize_vector_laplace_inplace(g, quantreg_sensitivity(tau, m_bound, d),
                                   params, rng);
  return g;
}

AsymptoticCov closed_form_sigma_quantreg(double tau,
                                         const PrivacyParams& params,
                                         double m_bound, std::size_t d,
                                         const Matrix& sigma_x,
                                         double density_at_zero) {
  check_tau(tau);
  const auto dd = static_cast<Eigen::Index>(d);
  if (sigma_x.rows() != dd || sigma_x.cols() != dd) {
    throw ValidationError("Sigma_X must be d x d");
  }
  if (!(density_at_zero > 0.0)) {
    throw ValidationError("error density at zero must be positive");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_x);
  if (eig.eigenvalues().minCoeff() <= 1e-12 * eig.eigenvalues().maxCoeff()) {
    throw ValidationError("Sigma_X is singular");
  }
  AsymptoticCov cov;
  cov.s_sgd = tau * (1.0 - tau) * sigma_x;
  if (params.is_no_noise()) {
    cov.s_ldp = Matrix::Zero(dd, dd);
  } else {
    // Laplace variance 2 b^2 with b = L1 sensitivity / epsilon.
    const double b = quantreg_sensitivity(tau, m_bound, d) / params.epsilon();
    cov.s_ldp = 2.0 * b * b * Matrix::Identity(dd, dd);
  }
  cov.g_matrix = density_at_zero * sigma_x;
  cov.sigma = sandwich(cov.g_matrix, cov.s_sgd + cov.s_ldp);
  return cov;
}

QuantRegOracle::QuantRegOracle(double tau, std::size_t d, double m_bound,
                               const PrivacyParams& params)
    : tau_(tau),
      d_(d),
      m_bound_(m_bound),
      params_(params),
      sensitivity_(quantreg_sensitivity(tau, m_bound, d)),
      mech_(sensitivity_, params) {
  check_tau(tau);
  if (d == 0) throw ValidationError("regression dimension must be positive");
}

void QuantRegOracle::gradient(std::span<const double> row, const Vector& theta,
                              Vector& out) const {
  const Eigen::Map<const Vector> x(row.data(), static_cast<Eigen::Index>(d_));
  const double residual = row[d_] - x.dot(theta);
  out = (-tau_ + (residual <= 0.0 ? 1.0 : 0.0)) * x;
}

void QuantRegOracle::private_gradient(std::span<const double> row,
                                      const Vector& theta, Rng& rng,
                                      Vector& out) const {
  for (std::size_t k = 0; k < d_; ++k) {
    if (std::abs(row[k]) > m_bound_) {
      throw ValidationError("covariate exceeds the declared bound m");
    }
  }
  gradient(row, theta, out);
  if (params_.is_no_noise()) return;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    out[k] += mech_.quantile(uniform01(rng));
  }
}

// ---------------------------------------------------------------------------
// Generators

double truncated_standard_normal(Rng& rng) {
  while (true) {
    const double z = standard_normal(rng);
    if (z >= -1.0 && z <= 1.0) return z;
  }
}

double truncated_normal_variance() {
  const double phi1 = boost::math::pdf(kStandardNormal, 1.0);
  const double mass = 2.0 * boost::math::cdf(kStandardNormal, 1.0) - 1.0;
  return 1.0 - 2.0 * phi1 / mass;
}

QuantileDataSource::QuantileDataSource(Rng rng, std::uint64_t n)
    : rng_(rng), remaining_(n) {}

bool QuantileDataSource::next(std::span<double> row) {
  if (remaining_ == 0) return false;
  --remaining_;
  row[0] = standard_normal(rng_);
  return true;
}

QuantRegDataSource::QuantRegDataSource(Rng rng, std::uint64_t n, Vector beta,
                                       double tau)
    : rng_(rng),
      remaining_(n),
      beta_(std::move(beta)),
      error_shift_(boost::math::quantile(kStandardNormal, tau)) {
  if (beta_.size() < 1) throw ValidationError("beta must be non-empty");
}

bool QuantRegDataSource::next(std::span<double> row) {
  if (remaining_ == 0) return false;
  --remaining_;
  const auto d = static_cast<std::size_t>(beta_.size());
  row[0] = 1.0;
  double mean = beta_[0];
  for (std::size_t k = 1; k < d; ++k) {
    row[k] = truncated_standard_normal(rng_);
    mean += row[k] * beta_[static_cast<Eigen::Index>(k)];
  }
  row[d] = mean + standard_normal(rng_) - error_shift_;
  return true;
}

std::unique_ptr<SampleSource> generate_quantile_data(Rng rng,
                                                     std::uint64_t n) {
  return std::make_unique<QuantileDataSource>(rng, n);
}

std::unique_ptr<SampleSource> generate_quantreg_data(Rng rng, std::uint64_t n,
                                                     const Vector& beta,
                                                     double tau) {
  return std::make_unique<QuantRegDataSource>(rng, n, beta, tau);
}

// ---------------------------------------------------------------------------
// Problems

QuantileModel::QuantileModel(double tau) : tau_(tau) {
  check_tau(tau);
  x_tau_ = boost::math::quantile(kStandardNormal, tau);
  density_ = boost::math::pdf(kStandardNormal, x_tau_);
}

Vector QuantileModel::true_parameter() const {
  return Vector::Constant(1, x_tau_);
}

std::vector<std::string> QuantileModel::coordinate_names() const {
  return {"theta"};
}

std::unique_ptr<SampleSource> QuantileModel::make_data(Rng rng,
                                                       std::uint64_t n) const {
  return generate_quantile_data(rng, n);
}

std::unique_ptr<PrivateGradientOracle> QuantileModel::make_oracle(
    const PrivacyParams& params) const {
  return std::make_unique<QuantileOracle>(tau_, params);
}

AsymptoticCov QuantileModel::asymptotic_cov(
    const PrivacyParams& params) const {
  return closed_form_sigma_quantile(tau_, params, density_);
}

QuantRegModel::QuantRegModel(double tau, Vector beta_star)
    : tau_(tau), beta_(std::move(beta_star)) {
  check_tau(tau);
  if (beta_.size() < 1) throw ValidationError("beta must be non-empty");
  const Eigen::Index d = beta_.size();
  // Intercept second moment 1; independent symmetric covariates have zero
  // cross moments.
  sigma_x_ = Matrix::Identity(d, d) * truncated_normal_variance();
  sigma_x_(0, 0) = 1.0;
  density_ = boost::math::pdf(kStandardNormal,
                              boost::math::quantile(kStandardNormal, tau));
}

Vector QuantRegModel::default_beta() {
  Vector beta(4);
  beta << 0.0, 0.0, 1.0, -1.0;
  return beta;
}

std::vector<std::string> QuantRegModel::coordinate_names() const {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < beta_.size(); ++k) {
    names.push_back("beta" + std::to_string(k));
  }
  return names;
}

std::unique_ptr<SampleSource> QuantRegModel::make_data(Rng rng,
                                                       std::uint64_t n) const {
  return generate_quantreg_data(rng, n, beta_, tau_);
}

std::unique_ptr<PrivateGradientOracle> QuantRegModel::make_oracle(
    const PrivacyParams& params) const {
  return std::make_unique<QuantRegOracle>(tau_, dim(), m_bound(), params);
}

AsymptoticCov QuantRegModel::asymptotic_cov(
    const PrivacyParams& params) const {
  return closed_form_sigma_quantreg(tau_, params, m_bound(), dim(), sigma_x_,
                                    density_);
}

}  // namespace ldpsgd
