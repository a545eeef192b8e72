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
#ifndef LDPSGD_COMMON_HPP_
#define LDPSGD_COMMON_HPP_

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ldpsgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Invalid inputs or configuration. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or a numerically unusable state. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ldpsgd

#endif  // LDPSGD_COMMON_HPP_
