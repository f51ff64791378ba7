#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace nva {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raised when a numerical safeguard is exhausted; the harness records the run as failed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline bool is_positive_definite(const Matrix& a) {
    if (a.rows() != a.cols() || !a.allFinite()) return false;
    Eigen::LLT<Matrix> llt(a);
    return llt.info() == Eigen::Success;
}

inline Matrix spd_inverse(const Matrix& a) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite");
    return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

}  // namespace nva
