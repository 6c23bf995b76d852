#pragma once

// Stationary dynamic entry/exit game with logit private shocks.
//
// Layout conventions used everywhere in the library:
//   state index   x = (s - 1) * 2^J + sum_j a_prev^j * 2^(j-1)     (s is 1-based)
//   value index   (j, x, a) -> (j * |X| + x) * 2 + a                 (firm-major)
//   parameters    (fc_1, ..., fc_J, rs, rn, ec)

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace epl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace game {

inline constexpr int kNumActions = 2;

/// Row-stochastic market-size chain: 0.8 stay, 0.1 to each neighbour; the mass
/// that would leave the grid at an edge stays put.
Matrix default_size_transition(int n_sizes);

struct GameConfig {
    int n_firms = 5;
    int n_sizes = 5;
    double beta = 0.95;
    Matrix size_transition = default_size_transition(5);
    bool include_euler = true;

    /// Throws InvalidInput when any invariant is violated.
    void validate() const;

    int n_states() const { return n_sizes << n_firms; }
    int n_values() const { return n_firms * n_states() * kNumActions; }
    int n_params() const { return n_firms + 3; }
};

/// Structural parameters ordered (fc_1..fc_J, rs, rn, ec).
class Theta {
public:
    explicit Theta(int n_firms);
    Theta(int n_firms, Vector values);

    /// fc_j = -2 + 0.1 j, rs = 1, rn = 4, ec = 1.
    static Theta reference(int n_firms);

    int n_firms() const { return n_firms_; }
    int size() const { return static_cast<int>(values_.size()); }

    double& fc(int j) { return values_[j]; }
    double fc(int j) const { return values_[j]; }
    double& rs() { return values_[n_firms_]; }
    double rs() const { return values_[n_firms_]; }
    double& rn() { return values_[n_firms_ + 1]; }
    double rn() const { return values_[n_firms_ + 1]; }
    double& ec() { return values_[n_firms_ + 2]; }
    double ec() const { return values_[n_firms_ + 2]; }

    const Vector& values() const { return values_; }
    Vector& values() { return values_; }

private:
    int n_firms_;
    Vector values_;
};

struct State {
    int s = 1;                   // market size, 1..|S|
    std::uint32_t lagged = 0;    // bit j = a_prev of firm j (0-based firm)

    int lagged_action(int j) const { return static_cast<int>((lagged >> j) & 1u); }
};

int state_index(const State& state, int n_firms);
State decode_state(int x, int n_firms);

/// A J x |X| x |A| array stored flat in firm-major order.
class FirmStateActionArray {
public:
    FirmStateActionArray() = default;
    FirmStateActionArray(int n_firms, int n_states);
    FirmStateActionArray(int n_firms, int n_states, Vector flat);

    int n_firms() const { return n_firms_; }
    int n_states() const { return n_states_; }

    static Eigen::Index offset(int n_states, int j, int x, int a) {
        return (static_cast<Eigen::Index>(j) * n_states + x) * kNumActions + a;
    }

    double& operator()(int j, int x, int a) { return flat_[offset(n_states_, j, x, a)]; }
    double operator()(int j, int x, int a) const { return flat_[offset(n_states_, j, x, a)]; }

    const Vector& flat() const { return flat_; }
    Vector& flat() { return flat_; }

protected:
    int n_firms_ = 0;
    int n_states_ = 0;
    Vector flat_;
};

/// Choice-specific values v[j][x][a]; the nuisance vector Y is `flat()`.
class ValueFunction : public FirmStateActionArray {
public:
    using FirmStateActionArray::FirmStateActionArray;
};

/// Conditional choice probabilities; each (j, x) row lies on the simplex.
class CCPs : public FirmStateActionArray {
public:
    using FirmStateActionArray::FirmStateActionArray;
};

/// G(theta, v) = H theta + z at a fixed v.
struct LinearDecomposition {
    Matrix H;
    Vector z;
};

class StructuredJacobian;

/// Logit probabilities from a single row of values, max-subtracted.
void softmax_row(double v0, double v1, double& p0, double& p1);

/// McFadden surplus: logsumexp(v_row) (+ Euler-Mascheroni when requested).
double surplus(double v0, double v1, bool include_euler);

/// Per-period payoff features h with u-bar = h' theta. `actions` holds the
/// current action profile (bit l = a^l); the bit for firm j itself is ignored.
Vector flow_utility_features(const State& x, int j, int a_j, std::uint32_t actions, int n_firms);

/// Precomputed tables plus every model map of the game. Immutable after
/// construction; all members are safe to call concurrently.
class Game {
public:
    explicit Game(GameConfig config);

    const GameConfig& config() const { return config_; }
    int n_firms() const { return config_.n_firms; }
    int n_sizes() const { return config_.n_sizes; }
    int n_states() const { return config_.n_states(); }
    int n_values() const { return config_.n_values(); }
    int n_params() const { return config_.n_params(); }
    int n_rival_profiles() const { return 1 << (config_.n_firms - 1); }

    ValueFunction zero_values() const { return ValueFunction(n_firms(), n_states()); }
    ValueFunction as_values(const Vector& flat) const;

    /// Full action profile (as a bit mask) for firm j choosing a_j while the
    /// rivals play rival profile r (bit i of r is the i-th rival in firm order).
    std::uint32_t action_profile(int j, int a_j, int r) const {
        return profile_table_[(static_cast<std::size_t>(j) * kNumActions + a_j) * n_rival_profiles() + r];
    }
    int rivals_active(int r) const { return rival_count_[r]; }

    CCPs choice_probs(const ValueFunction& v) const;

    /// Probability of each rival profile r at state x under the rivals' CCPs.
    void rival_profile_probs(const CCPs& p, int j, int x, double* out) const;

    /// E over rivals of the flow-utility features (K-vector).
    Vector expected_features(const CCPs& p, int j, int x, int a_j) const;
    double expected_utility(const ValueFunction& v, const Theta& theta, int j, int x, int a_j) const;

    /// f^j(. | x, a_j) over next states; sums to one.
    Vector transition_probs(const CCPs& p, int j, int x, int a_j) const;
    Vector transition_probs(const ValueFunction& v, int j, int x, int a_j) const;

    /// Transition kernel of the state when every firm plays its CCPs.
    Matrix state_kernel(const CCPs& p) const;

    ValueFunction phi(const Theta& theta, const ValueFunction& v) const;
    Vector constraint_G(const Theta& theta, const ValueFunction& v) const;
    Vector constraint_G(const Theta& theta, const Vector& y) const;
    LinearDecomposition build_H_z(const ValueFunction& v) const;
    StructuredJacobian analytic_jacobian(const Theta& theta, const ValueFunction& v) const;

private:
    // Sum over s' of f_s(s'|s) * surplus(v^j(s', m)), indexed [s * 2^J + m].
    void continuation_table(const ValueFunction& v, int j, std::vector<double>& out) const;
    void check_dims(const ValueFunction& v) const;
    void check_theta(const Theta& theta) const;

    GameConfig config_;
    std::vector<std::uint32_t> profile_table_;
    std::vector<int> rival_count_;
    std::vector<double> log_crowding_;  // ln(1 + #active rivals) per rival profile
};

} // namespace game
} // namespace epl
