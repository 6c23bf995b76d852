#include "epl/jacobian.hpp"

#include "epl/error.hpp"

namespace epl::game {

StructuredJacobian::StructuredJacobian(int n_firms, int n_states)
    : n_firms_(n_firms), n_states_(n_states),
      own_(n_firms, Matrix::Zero(n_states * kNumActions, n_states * kNumActions)),
      cross_(static_cast<std::size_t>(n_firms) * n_firms * n_states, Eigen::Matrix2d::Zero()) {}

bool StructuredJacobian::structurally_nonzero(Eigen::Index row, Eigen::Index col) const {
    const Eigen::Index block = static_cast<Eigen::Index>(n_states_) * kNumActions;
    if (row / block == col / block) return true;
    return (row % block) / kNumActions == (col % block) / kNumActions;
}

Vector StructuredJacobian::apply(const Vector& d) const {
    if (d.size() != dim()) throw InvalidInput("StructuredJacobian::apply: dimension mismatch");
    const Eigen::Index block = static_cast<Eigen::Index>(n_states_) * kNumActions;
    Vector out(dim());
    for (int j = 0; j < n_firms_; ++j) {
        out.segment(j * block, block).noalias() = own_[j] * d.segment(j * block, block);
        for (int l = 0; l < n_firms_; ++l) {
            if (l == j) continue;
            for (int x = 0; x < n_states_; ++x) {
                out.segment<2>(j * block + 2 * x) += cross_block(j, l, x) * d.segment<2>(l * block + 2 * x);
            }
        }
    }
    return out;
}

Matrix StructuredJacobian::to_dense() const {
    const Eigen::Index block = static_cast<Eigen::Index>(n_states_) * kNumActions;
    Matrix dense = Matrix::Zero(dim(), dim());
    for (int j = 0; j < n_firms_; ++j) {
        dense.block(j * block, j * block, block, block) = own_[j];
        for (int l = 0; l < n_firms_; ++l) {
            if (l == j) continue;
            for (int x = 0; x < n_states_; ++x) {
                dense.block<2, 2>(j * block + 2 * x, l * block + 2 * x) = cross_block(j, l, x);
            }
        }
    }
    return dense;
}

std::size_t StructuredJacobian::stored_entries() const {
    const std::size_t J = n_firms_;
    const std::size_t X = n_states_;
    const std::size_t A = kNumActions;
    return X * X * J * A * A + X * (J * J - J) * A * A;
}

} // namespace epl::game
