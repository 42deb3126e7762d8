// SPDX-License-Identifier: Apache-2.0
//
// fluidcap: sum-capacity maximization for fluid-antenna multiple access channels
// Copyright (C) 2026 The fluidcap authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace fluidcap
{

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718055994530942;

// Tolerance shared by every PSD / trace feasibility check.
inline constexpr double kPsdTol = 1e-9;

// ---- Error hierarchy -----------------------------------------------------
//
// Every error raised by the library derives from fluidcap::Error. The CLI maps
// NonConvergence to exit code 3 and every other Error to exit code 2.

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (shape mismatch, non-Hermitian input, infeasible Q).
class ContractViolation : public Error
{
public:
    explicit ContractViolation(const std::string &what) : Error("contract violation: " + what) {}
};

// Input lies outside the mathematical domain of the operation.
class DomainError : public Error
{
public:
    explicit DomainError(const std::string &what) : Error("domain error: " + what) {}
};

// Two paths share the same angle of departure, so the two-path closed form is undefined.
class DegeneratePaths : public DomainError
{
public:
    explicit DegeneratePaths(const std::string &what) : DomainError(what) {}
};

class InvalidConfig : public Error
{
public:
    explicit InvalidConfig(const std::string &what) : Error("invalid config: " + what) {}
};

class WrongSolver : public Error
{
public:
    explicit WrongSolver(const std::string &what) : Error("wrong solver: " + what) {}
};

// Exhaustive search would exceed its combinatorial guard.
class BudgetExceeded : public Error
{
public:
    explicit BudgetExceeded(const std::string &what) : Error("budget exceeded: " + what) {}
};

// Not enough free grid points remain to place every antenna.
class InfeasibleMapping : public Error
{
public:
    explicit InfeasibleMapping(const std::string &what) : Error("infeasible mapping: " + what) {}
};

class IoError : public Error
{
public:
    explicit IoError(const std::string &what) : Error("I/O error: " + what) {}
};

class NonConvergence : public Error
{
public:
    explicit NonConvergence(const std::string &what) : Error("nonconvergence: " + what) {}
};

// Nonconvergence that carries the best iterate reached before the cap.
template <class Best>
class NonConvergenceWith : public NonConvergence
{
public:
    NonConvergenceWith(const std::string &what, Best best) : NonConvergence(what), best_(std::move(best)) {}
    const Best &best() const noexcept { return best_; }

private:
    Best best_;
};

} // namespace fluidcap
