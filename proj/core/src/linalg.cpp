// SPDX-License-Identifier: Apache-2.0

#include "rme/linalg.hpp"

#include <cmath>

#include <fmt/format.h>

namespace rme {

JitteredCholesky::JitteredCholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("matrix must be square");
    if (!a.allFinite()) throw NumericalError("matrix contains non-finite entries");
    llt_.compute(a);
    if (llt_.info() == Eigen::Success) return;

    const double scale = a.rows() > 0 ? std::max(a.diagonal().mean(), 1e-300) : 1.0;
    for (double rel = 1e-9; rel <= 1e-3 * 1.0000001; rel *= 10.0) {
        Matrix shifted = a;
        shifted.diagonal().array() += rel * scale;
        llt_.compute(shifted);
        if (llt_.info() == Eigen::Success) {
            jitter_ = rel;
            return;
        }
    }
    throw NumericalError(fmt::format(
        "{} x {} covariance is not positive definite even with 1e-3 relative jitter "
        "(mean diagonal {})",
        a.rows(), a.cols(), scale));
}

}  // namespace rme
