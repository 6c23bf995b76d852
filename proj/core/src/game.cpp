#include "epl/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "epl/error.hpp"
#include "epl/jacobian.hpp"

namespace epl::game {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

} // namespace

Matrix default_size_transition(int n_sizes) {
    if (n_sizes < 1) throw InvalidInput("n_sizes must be >= 1");
    Matrix f = Matrix::Zero(n_sizes, n_sizes);
    for (int s = 0; s < n_sizes; ++s) {
        f(s, s) = 0.8;
        for (int t : {s - 1, s + 1}) {
            if (t >= 0 && t < n_sizes) {
                f(s, t) += 0.1;
            } else {
                f(s, s) += 0.1;
            }
        }
    }
    return f;
}

void GameConfig::validate() const {
    if (n_firms < 1 || n_firms > 16) throw InvalidInput("n_firms must be in [1, 16]");
    if (n_sizes < 1) throw InvalidInput("n_sizes must be >= 1");
    if (!(beta >= 0.0 && beta < 1.0)) throw InvalidInput("beta must satisfy 0 <= beta < 1");
    if (size_transition.rows() != n_sizes || size_transition.cols() != n_sizes) {
        std::ostringstream os;
        os << "size_transition must be " << n_sizes << "x" << n_sizes << ", got "
           << size_transition.rows() << "x" << size_transition.cols();
        throw InvalidInput(os.str());
    }
    for (int s = 0; s < n_sizes; ++s) {
        if ((size_transition.row(s).array() < 0.0).any() || !size_transition.row(s).allFinite()) {
            throw InvalidInput("size_transition row " + std::to_string(s + 1) + " has a negative or non-finite entry");
        }
        if (std::abs(size_transition.row(s).sum() - 1.0) > 1e-12) {
            throw InvalidInput("size_transition row " + std::to_string(s + 1) + " does not sum to 1");
        }
    }
}

Theta::Theta(int n_firms) : n_firms_(n_firms), values_(Vector::Zero(n_firms + 3)) {
    if (n_firms < 1) throw InvalidInput("Theta needs at least one firm");
}

Theta::Theta(int n_firms, Vector values) : n_firms_(n_firms), values_(std::move(values)) {
    if (n_firms < 1) throw InvalidInput("Theta needs at least one firm");
    if (values_.size() != n_firms + 3) {
        throw InvalidInput("Theta must have J+3 = " + std::to_string(n_firms + 3) + " entries, got " +
                           std::to_string(values_.size()));
    }
    if (!all_finite(values_)) throw InvalidInput("Theta has non-finite entries");
}

Theta Theta::reference(int n_firms) {
    Theta t(n_firms);
    for (int j = 0; j < n_firms; ++j) t.fc(j) = -2.0 + 0.1 * (j + 1);
    t.rs() = 1.0;
    t.rn() = 4.0;
    t.ec() = 1.0;
    return t;
}

int state_index(const State& state, int n_firms) {
    return ((state.s - 1) << n_firms) + static_cast<int>(state.lagged);
}

State decode_state(int x, int n_firms) {
    State st;
    st.s = (x >> n_firms) + 1;
    st.lagged = static_cast<std::uint32_t>(x) & ((1u << n_firms) - 1u);
    return st;
}

FirmStateActionArray::FirmStateActionArray(int n_firms, int n_states)
    : n_firms_(n_firms), n_states_(n_states),
      flat_(Vector::Zero(static_cast<Eigen::Index>(n_firms) * n_states * kNumActions)) {}

FirmStateActionArray::FirmStateActionArray(int n_firms, int n_states, Vector flat)
    : n_firms_(n_firms), n_states_(n_states), flat_(std::move(flat)) {
    if (flat_.size() != static_cast<Eigen::Index>(n_firms) * n_states * kNumActions) {
        throw InvalidInput("flat array has " + std::to_string(flat_.size()) + " entries, expected " +
                           std::to_string(n_firms * n_states * kNumActions));
    }
}

void softmax_row(double v0, double v1, double& p0, double& p1) {
    const double m = std::max(v0, v1);
    const double e0 = std::exp(v0 - m);
    const double e1 = std::exp(v1 - m);
    const double total = e0 + e1;
    p0 = e0 / total;
    p1 = e1 / total;
}

double surplus(double v0, double v1, bool include_euler) {
    if (!std::isfinite(v0) || !std::isfinite(v1)) throw InvalidInput("surplus: non-finite value");
    const double m = std::max(v0, v1);
    const double lse = m + std::log1p(std::exp(-std::abs(v0 - v1)));
    return include_euler ? lse + std::numbers::egamma : lse;
}

Vector flow_utility_features(const State& x, int j, int a_j, std::uint32_t actions, int n_firms) {
    Vector h = Vector::Zero(n_firms + 3);
    if (a_j == 0) return h;
    int rivals = 0;
    for (int l = 0; l < n_firms; ++l) {
        if (l != j && ((actions >> l) & 1u)) ++rivals;
    }
    h[j] = 1.0;
    h[n_firms] = static_cast<double>(x.s);
    h[n_firms + 1] = -std::log(1.0 + rivals);
    h[n_firms + 2] = -(1.0 - x.lagged_action(j));
    return h;
}

Game::Game(GameConfig config) : config_(std::move(config)) {
    config_.validate();
    const int J = config_.n_firms;
    const int R = n_rival_profiles();
    profile_table_.resize(static_cast<std::size_t>(J) * kNumActions * R);
    rival_count_.resize(R);
    log_crowding_.resize(R);
    for (int r = 0; r < R; ++r) {
        rival_count_[r] = std::popcount(static_cast<unsigned>(r));
        log_crowding_[r] = std::log(1.0 + rival_count_[r]);
    }
    for (int j = 0; j < J; ++j) {
        for (int a = 0; a < kNumActions; ++a) {
            for (int r = 0; r < R; ++r) {
                std::uint32_t mask = static_cast<std::uint32_t>(a) << j;
                int i = 0;
                for (int l = 0; l < J; ++l) {
                    if (l == j) continue;
                    mask |= static_cast<std::uint32_t>((r >> i) & 1) << l;
                    ++i;
                }
                profile_table_[(static_cast<std::size_t>(j) * kNumActions + a) * R + r] = mask;
            }
        }
    }
}

ValueFunction Game::as_values(const Vector& flat) const { return ValueFunction(n_firms(), n_states(), flat); }

void Game::check_dims(const ValueFunction& v) const {
    if (v.n_firms() != n_firms() || v.n_states() != n_states()) {
        throw InvalidInput("value function dimensions do not match the game");
    }
}

void Game::check_theta(const Theta& theta) const {
    if (theta.n_firms() != n_firms()) throw InvalidInput("theta dimension does not match the game");
}

CCPs Game::choice_probs(const ValueFunction& v) const {
    check_dims(v);
    if (!v.flat().allFinite()) throw InvalidInput("choice_probs: non-finite value function");
    CCPs p(n_firms(), n_states());
    const Eigen::Index rows = v.flat().size() / kNumActions;
    for (Eigen::Index i = 0; i < rows; ++i) {
        softmax_row(v.flat()[2 * i], v.flat()[2 * i + 1], p.flat()[2 * i], p.flat()[2 * i + 1]);
    }
    return p;
}

void Game::rival_profile_probs(const CCPs& p, int j, int x, double* out) const {
    out[0] = 1.0;
    int size = 1;
    for (int l = 0; l < n_firms(); ++l) {
        if (l == j) continue;
        const double p0 = p(l, x, 0);
        const double p1 = p(l, x, 1);
        for (int r = 0; r < size; ++r) {
            out[r + size] = out[r] * p1;
            out[r] *= p0;
        }
        size *= 2;
    }
}

Vector Game::expected_features(const CCPs& p, int j, int x, int a_j) const {
    const int J = n_firms();
    Vector h = Vector::Zero(n_params());
    if (a_j == 0) return h;
    std::vector<double> prob(n_rival_profiles());
    rival_profile_probs(p, j, x, prob.data());
    double crowd = 0.0;
    for (int r = 0; r < n_rival_profiles(); ++r) crowd += prob[r] * log_crowding_[r];
    const State st = decode_state(x, J);
    h[j] = 1.0;
    h[J] = static_cast<double>(st.s);
    h[J + 1] = -crowd;
    h[J + 2] = -(1.0 - st.lagged_action(j));
    return h;
}

double Game::expected_utility(const ValueFunction& v, const Theta& theta, int j, int x, int a_j) const {
    check_theta(theta);
    return expected_features(choice_probs(v), j, x, a_j).dot(theta.values());
}

Vector Game::transition_probs(const CCPs& p, int j, int x, int a_j) const {
    const int J = n_firms();
    const int s = x >> J;
    Vector f = Vector::Zero(n_states());
    std::vector<double> prob(n_rival_profiles());
    rival_profile_probs(p, j, x, prob.data());
    for (int r = 0; r < n_rival_profiles(); ++r) {
        const std::uint32_t m = action_profile(j, a_j, r);
        for (int sn = 0; sn < n_sizes(); ++sn) {
            f[(sn << J) + static_cast<int>(m)] += prob[r] * config_.size_transition(s, sn);
        }
    }
    return f;
}

Vector Game::transition_probs(const ValueFunction& v, int j, int x, int a_j) const {
    return transition_probs(choice_probs(v), j, x, a_j);
}

Matrix Game::state_kernel(const CCPs& p) const {
    const int J = n_firms();
    const int profiles = 1 << J;
    Matrix M = Matrix::Zero(n_states(), n_states());
    std::vector<double> prob(profiles);
    for (int x = 0; x < n_states(); ++x) {
        prob[0] = 1.0;
        int size = 1;
        for (int l = 0; l < J; ++l) {
            for (int m = 0; m < size; ++m) {
                prob[m + size] = prob[m] * p(l, x, 1);
                prob[m] *= p(l, x, 0);
            }
            size *= 2;
        }
        const int s = x >> J;
        for (int sn = 0; sn < n_sizes(); ++sn) {
            const double fs = config_.size_transition(s, sn);
            if (fs == 0.0) continue;
            for (int m = 0; m < profiles; ++m) M(x, (sn << J) + m) += fs * prob[m];
        }
    }
    return M;
}

void Game::continuation_table(const ValueFunction& v, int j, std::vector<double>& out) const {
    const int J = n_firms();
    const int lags = 1 << J;
    std::vector<double> S(n_states());
    for (int x = 0; x < n_states(); ++x) S[x] = surplus(v(j, x, 0), v(j, x, 1), config_.include_euler);
    out.assign(n_states(), 0.0);
    for (int s = 0; s < n_sizes(); ++s) {
        for (int sn = 0; sn < n_sizes(); ++sn) {
            const double fs = config_.size_transition(s, sn);
            if (fs == 0.0) continue;
            for (int m = 0; m < lags; ++m) out[(s << J) + m] += fs * S[(sn << J) + m];
        }
    }
}

Vector Game::constraint_G(const Theta& theta, const Vector& y) const {
    return constraint_G(theta, as_values(y));
}

Vector Game::constraint_G(const Theta& theta, const ValueFunction& v) const {
    return v.flat() - phi(theta, v).flat();
}

ValueFunction Game::phi(const Theta& theta, const ValueFunction& v) const {
    check_dims(v);
    check_theta(theta);
    const int J = n_firms();
    const int R = n_rival_profiles();
    const double beta = config_.beta;
    const CCPs p = choice_probs(v);
    ValueFunction out(J, n_states());
    std::vector<double> cont;
    std::vector<double> prob(R);
    for (int j = 0; j < J; ++j) {
        continuation_table(v, j, cont);
        for (int x = 0; x < n_states(); ++x) {
            const State st = decode_state(x, J);
            const int base = (st.s - 1) << J;
            rival_profile_probs(p, j, x, prob.data());
            double crowd = 0.0;
            double c0 = 0.0;
            double c1 = 0.0;
            for (int r = 0; r < R; ++r) {
                crowd += prob[r] * log_crowding_[r];
                c0 += prob[r] * cont[base + static_cast<int>(action_profile(j, 0, r))];
                c1 += prob[r] * cont[base + static_cast<int>(action_profile(j, 1, r))];
            }
            const double flow = theta.fc(j) + theta.rs() * st.s - theta.rn() * crowd -
                                theta.ec() * (1.0 - st.lagged_action(j));
            out(j, x, 0) = beta * c0;
            out(j, x, 1) = flow + beta * c1;
        }
    }
    return out;
}

LinearDecomposition Game::build_H_z(const ValueFunction& v) const {
    check_dims(v);
    const int J = n_firms();
    const int R = n_rival_profiles();
    const double beta = config_.beta;
    const CCPs p = choice_probs(v);
    LinearDecomposition out{Matrix::Zero(n_values(), n_params()), Vector(n_values())};
    std::vector<double> cont;
    std::vector<double> prob(R);
    for (int j = 0; j < J; ++j) {
        continuation_table(v, j, cont);
        for (int x = 0; x < n_states(); ++x) {
            const State st = decode_state(x, J);
            const int base = (st.s - 1) << J;
            rival_profile_probs(p, j, x, prob.data());
            double crowd = 0.0;
            double c0 = 0.0;
            double c1 = 0.0;
            for (int r = 0; r < R; ++r) {
                crowd += prob[r] * log_crowding_[r];
                c0 += prob[r] * cont[base + static_cast<int>(action_profile(j, 0, r))];
                c1 += prob[r] * cont[base + static_cast<int>(action_profile(j, 1, r))];
            }
            const Eigen::Index row0 = FirmStateActionArray::offset(n_states(), j, x, 0);
            const Eigen::Index row1 = row0 + 1;
            out.H(row1, j) = -1.0;
            out.H(row1, J) = -static_cast<double>(st.s);
            out.H(row1, J + 1) = crowd;
            out.H(row1, J + 2) = 1.0 - st.lagged_action(j);
            out.z[row0] = v(j, x, 0) - beta * c0;
            out.z[row1] = v(j, x, 1) - beta * c1;
        }
    }
    return out;
}

StructuredJacobian Game::analytic_jacobian(const Theta& theta, const ValueFunction& v) const {
    check_dims(v);
    check_theta(theta);
    const int J = n_firms();
    const int R = n_rival_profiles();
    const int X = n_states();
    const double beta = config_.beta;
    const CCPs p = choice_probs(v);
    StructuredJacobian jac(J, X);
    std::vector<double> cont;
    std::vector<double> prob(R);
    std::vector<double> payoff(static_cast<std::size_t>(kNumActions) * R);

    for (int j = 0; j < J; ++j) {
        continuation_table(v, j, cont);
        Matrix& own = jac.own_block(j);
        own.setIdentity();
        for (int x = 0; x < X; ++x) {
            const State st = decode_state(x, J);
            const int s = st.s - 1;
            const int base = s << J;
            rival_profile_probs(p, j, x, prob.data());

            // Own-firm channel: beta * f^j(x'|x,a) * dS/dv^j(x',a'), with dS/dv = Lambda^j.
            for (int a = 0; a < kNumActions; ++a) {
                const Eigen::Index row = static_cast<Eigen::Index>(x) * kNumActions + a;
                for (int r = 0; r < R; ++r) {
                    const int m = static_cast<int>(action_profile(j, a, r));
                    for (int sn = 0; sn < n_sizes(); ++sn) {
                        const double w = beta * prob[r] * config_.size_transition(s, sn);
                        if (w == 0.0) continue;
                        const int xn = (sn << J) + m;
                        own(row, 2 * xn) -= w * p(j, xn, 0);
                        own(row, 2 * xn + 1) -= w * p(j, xn, 1);
                    }
                }
            }

            // Rival channel: Lambda^l(x,.) enters both expected payoff and transition.
            const double flow_base = theta.fc(j) + theta.rs() * st.s - theta.ec() * (1.0 - st.lagged_action(j));
            for (int r = 0; r < R; ++r) {
                payoff[r] = beta * cont[base + static_cast<int>(action_profile(j, 0, r))];
                payoff[R + r] = flow_base - theta.rn() * log_crowding_[r] +
                                beta * cont[base + static_cast<int>(action_profile(j, 1, r))];
            }
            int i = 0;
            for (int l = 0; l < J; ++l) {
                if (l == j) continue;
                Eigen::Matrix2d& block = jac.cross_block(j, l, x);
                for (int a = 0; a < kNumActions; ++a) {
                    for (int at = 0; at < kNumActions; ++at) {
                        const double pl = p(l, x, at);
                        double d = 0.0;
                        for (int r = 0; r < R; ++r) {
                            const double indicator = ((r >> i) & 1) == at ? 1.0 : 0.0;
                            d += prob[r] * (indicator - pl) * payoff[a * R + r];
                        }
                        block(a, at) = -d;
                    }
                }
                ++i;
            }
        }
    }
    return jac;
}

} // namespace epl::game
