// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

#include "rme/types.hpp"

namespace rme {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cholesky factorization of a symmetric positive (semi)definite matrix. The
/// plain matrix is tried first; on failure a diagonal jitter of 1e-9 times the
/// mean diagonal is added and grown tenfold up to 1e-3 before NumericalError.
class JitteredCholesky {
public:
    explicit JitteredCholesky(const Matrix& a);

    Vector solve(const Vector& b) const { return llt_.solve(b); }
    /// Relative jitter that was needed (0 when none).
    double jitter() const { return jitter_; }

private:
    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
};

}  // namespace rme
