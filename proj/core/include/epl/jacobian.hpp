#pragma once

#include <vector>

#include "epl/game.hpp"

namespace epl::game {

/// grad_v G stored by its block structure:
///   own blocks   d G^j / d v^j      dense (|X||A| x |X||A|), one per firm
///   cross blocks d G^j(x,.) / d v^l(x,.)   |A| x |A|, same state only, l != j
/// Every entry outside these blocks is structurally zero.
class StructuredJacobian {
public:
    StructuredJacobian(int n_firms, int n_states);

    int n_firms() const { return n_firms_; }
    int n_states() const { return n_states_; }
    int dim() const { return n_firms_ * n_states_ * kNumActions; }

    Matrix& own_block(int j) { return own_[j]; }
    const Matrix& own_block(int j) const { return own_[j]; }

    Eigen::Matrix2d& cross_block(int j, int l, int x) { return cross_[cross_slot(j, l, x)]; }
    const Eigen::Matrix2d& cross_block(int j, int l, int x) const { return cross_[cross_slot(j, l, x)]; }

    /// True when entry (row, col) of the flattened Jacobian can be nonzero.
    bool structurally_nonzero(Eigen::Index row, Eigen::Index col) const;

    Vector apply(const Vector& d) const;
    Matrix to_dense() const;

    /// J (|X||A|)^2 + J (J-1) |X| |A|^2.
    std::size_t stored_entries() const;

private:
    std::size_t cross_slot(int j, int l, int x) const {
        return (static_cast<std::size_t>(j) * n_firms_ + l) * n_states_ + x;
    }

    int n_firms_;
    int n_states_;
    std::vector<Matrix> own_;
    std::vector<Eigen::Matrix2d> cross_;  // diagonal slots (l == j) unused
};

} // namespace epl::game
