#include "epl/numerics/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "epl/error.hpp"

namespace epl::numerics {

Matrix direct_solve(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols()) throw InvalidInput("direct_solve: matrix is not square");
    if (b.rows() != a.rows()) throw InvalidInput("direct_solve: right-hand side has the wrong number of rows");
    if (!a.allFinite() || !b.allFinite()) throw InvalidInput("direct_solve: non-finite input");
    if (a.rows() == 0) return Matrix(0, b.cols());

    Eigen::PartialPivLU<Matrix> lu(a);
    const double scale = a.cwiseAbs().maxCoeff();
    const double threshold = static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() * scale;
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    Eigen::Index worst = 0;
    const double smallest = pivots.minCoeff(&worst);
    if (!(smallest > threshold)) {
        std::ostringstream os;
        os << "direct_solve: matrix is singular to working precision (pivot " << worst << " = " << smallest
           << ", threshold " << threshold << ")";
        throw SingularMatrix(os.str(), static_cast<long>(worst), smallest);
    }
    return lu.solve(b);
}

double condition_number(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw InvalidInput("condition_number: need a non-empty square matrix");
    Eigen::BDCSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv.minCoeff();
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv.maxCoeff() / smin;
}

} // namespace epl::numerics
