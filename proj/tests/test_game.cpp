#include <doctest.h>

#include <cmath>
#include <numbers>

#include "epl/data/equilibrium.hpp"
#include "epl/error.hpp"
#include "epl/jacobian.hpp"
#include "support.hpp"

using namespace epl;
using namespace epl::game;
using epl::test::Rng;

namespace {

// Euler-Mascheroni from the asymptotic expansion of the harmonic numbers,
// H_n - ln n - 1/(2n) + 1/(12 n^2) - 1/(120 n^4), in long double.
double euler_gamma_oracle() {
    const long n = 100000;
    long double h = 0.0L;
    for (long k = n; k >= 1; --k) h += 1.0L / static_cast<long double>(k);
    const long double nn = n;
    return static_cast<double>(h - std::log(nn) - 1.0L / (2 * nn) + 1.0L / (12 * nn * nn) -
                               1.0L / (120 * nn * nn * nn * nn));
}

// Phi by enumerating every rival action profile and next market size.
double phi_brute(const Game& g, const Theta& th, const ValueFunction& v, int j, int x, int a) {
    const int J = g.n_firms();
    const State st = decode_state(x, J);
    const Matrix& fs = g.config().size_transition;
    double total = 0.0;
    for (std::uint32_t profile = 0; profile < (1u << J); ++profile) {
        if (static_cast<int>((profile >> j) & 1u) != a) continue;
        double prob = 1.0;
        int active = 0;
        for (int l = 0; l < J; ++l) {
            if (l == j) continue;
            const int al = static_cast<int>((profile >> l) & 1u);
            const double p1 = test::logit_one(v(l, x, 0), v(l, x, 1));
            prob *= al ? p1 : 1.0 - p1;
            active += al;
        }
        double value = a ? test::payoff_enter(th, j, st.s, active, st.lagged_action(j)) : 0.0;
        for (int s2 = 1; s2 <= g.n_sizes(); ++s2) {
            const int x2 = state_index(State{s2, profile}, J);
            const double m = std::max(v(j, x2, 0), v(j, x2, 1));
            const double surplus =
                m + std::log(std::exp(v(j, x2, 0) - m) + std::exp(v(j, x2, 1) - m)) + std::numbers::egamma;
            value += g.config().beta * fs(st.s - 1, s2 - 1) * surplus;
        }
        total += prob * value;
    }
    return total;
}

Matrix fd_jacobian(const Game& g, const Theta& th, const Vector& y, double h) {
    const Eigen::Index m = y.size();
    Matrix out(m, m);
    for (Eigen::Index c = 0; c < m; ++c) {
        Vector yp = y, ym = y;
        yp[c] += h;
        ym[c] -= h;
        out.col(c) = (g.constraint_G(th, yp) - g.constraint_G(th, ym)) / (2 * h);
    }
    return out;
}

} // namespace

TEST_CASE("state index round-trips over the whole state space") {
    for (int J : {1, 2, 3, 5}) {
        for (int S : {1, 2, 5}) {
            for (int x = 0; x < (S << J); ++x) {
                const State st = decode_state(x, J);
                CHECK(st.s >= 1);
                CHECK(st.s <= S);
                CHECK(state_index(st, J) == x);
            }
        }
    }
    CHECK(state_index(State{2, 0b101u}, 3) == 8 + 5);
}

TEST_CASE("softmax_row closed forms and overflow safety") {
    double p0 = 0, p1 = 0;
    softmax_row(0.0, 0.0, p0, p1);
    CHECK(p0 == doctest::Approx(0.5));
    CHECK(p1 == doctest::Approx(0.5));
    softmax_row(std::log(3.0), 0.0, p0, p1);
    CHECK(p0 == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(p1 == doctest::Approx(0.25).epsilon(1e-14));
    softmax_row(1000.0, 0.0, p0, p1);
    CHECK(std::isfinite(p0));
    CHECK(p1 < 1e-300);
    CHECK(p0 == 1.0);
}

TEST_CASE("surplus matches log-sum-exp plus the Euler-Mascheroni constant") {
    CHECK(surplus(0.0, 0.0, false) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const double c = test::uniform(rng, -500, 500);
        CHECK(surplus(c, c, false) == doctest::Approx(c + std::log(2.0)).epsilon(1e-14));
    }
    const double gamma = euler_gamma_oracle();
    CHECK(std::abs(gamma - 0.5772156649015329) < 1e-13);
    CHECK(std::abs(surplus(0.0, 0.0, true) - (std::log(2.0) + gamma)) < 1e-12);
    CHECK(std::isfinite(surplus(800.0, -800.0, true)));
}

TEST_CASE("flow utility features by direct substitution") {
    // J = 2, firm 1, s = 3, own lagged action 1, rival active
    const Vector f = flow_utility_features(State{3, 0b01u}, 0, 1, 0b10u, 2);
    REQUIRE(f.size() == 5);
    CHECK(f[0] == 1.0);
    CHECK(f[1] == 0.0);
    CHECK(f[2] == 3.0);
    CHECK(f[3] == doctest::Approx(-std::log(2.0)));
    CHECK(f[4] == 0.0);
    // s = 1, new entrant, rival inactive
    const Vector e = flow_utility_features(State{1, 0u}, 0, 1, 0u, 2);
    CHECK(e[0] == 1.0);
    CHECK(e[2] == 1.0);
    CHECK(e[3] == 0.0);
    CHECK(e[4] == -1.0);
    // staying out pays nothing
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const State st{1 + static_cast<int>(rng() % 5), static_cast<std::uint32_t>(rng() % 32)};
        CHECK(flow_utility_features(st, static_cast<int>(rng() % 5), 0, static_cast<std::uint32_t>(rng() % 32), 5)
                  .isZero());
    }
}

TEST_CASE("choice probabilities lie on the simplex") {
    const Game g(test::small_config(3, 3));
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const CCPs p = g.choice_probs(test::random_values(g, rng, 20.0));
        for (int j = 0; j < 3; ++j) {
            for (int x = 0; x < g.n_states(); ++x) {
                CHECK(p(j, x, 0) >= 0.0);
                CHECK(p(j, x, 1) >= 0.0);
                CHECK(std::abs(p(j, x, 0) + p(j, x, 1) - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("expected utility agrees with brute-force enumeration and with the features") {
    const Game g(test::small_config(3, 2));
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const Theta th = test::random_theta(rng, 3);
        const ValueFunction v = test::random_values(g, rng);
        const CCPs p = g.choice_probs(v);
        for (int j = 0; j < 3; ++j) {
            for (int x = 0; x < g.n_states(); ++x) {
                const State st = decode_state(x, 3);
                double brute = 0.0;
                for (std::uint32_t rivals = 0; rivals < 8; ++rivals) {
                    if ((rivals >> j) & 1u) continue;
                    double prob = 1.0;
                    int active = 0;
                    for (int l = 0; l < 3; ++l) {
                        if (l == j) continue;
                        const int al = static_cast<int>((rivals >> l) & 1u);
                        const double p1 = test::logit_one(v(l, x, 0), v(l, x, 1));
                        prob *= al ? p1 : 1.0 - p1;
                        active += al;
                    }
                    brute += prob * test::payoff_enter(th, j, st.s, active, st.lagged_action(j));
                }
                CHECK(g.expected_utility(v, th, j, x, 1) == doctest::Approx(brute).epsilon(1e-12));
                CHECK(g.expected_utility(v, th, j, x, 0) == 0.0);
                CHECK(g.expected_features(p, j, x, 1).dot(th.values()) == doctest::Approx(brute).epsilon(1e-12));
            }
        }
    }
    // zero parameters give zero utility everywhere
    const ValueFunction v = test::random_values(g, rng);
    CHECK(g.expected_utility(v, Theta(3), 1, 4, 1) == 0.0);
}

TEST_CASE("single firm: expected utility is the payoff itself") {
    const Game g(test::small_config(1, 3));
    Rng rng(2);
    const Theta th = test::random_theta(rng, 1);
    const ValueFunction v = test::random_values(g, rng);
    for (int x = 0; x < g.n_states(); ++x) {
        const State st = decode_state(x, 1);
        CHECK(g.expected_utility(v, th, 0, x, 1) ==
              doctest::Approx(test::payoff_enter(th, 0, st.s, 0, st.lagged_action(0))));
    }
}

TEST_CASE("transition probabilities: stochastic, and equal to enumeration") {
    const Game g(test::small_config(3, 3));
    Rng rng(9);
    const ValueFunction v = test::random_values(g, rng);
    const CCPs p = g.choice_probs(v);
    const Matrix& fs = g.config().size_transition;
    for (int j = 0; j < 3; ++j) {
        for (int x = 0; x < g.n_states(); ++x) {
            for (int a = 0; a < 2; ++a) {
                const Vector f = g.transition_probs(p, j, x, a);
                CHECK(std::abs(f.sum() - 1.0) < 1e-12);
                CHECK((f.array() >= 0.0).all());
                Vector brute = Vector::Zero(g.n_states());
                const State st = decode_state(x, 3);
                for (std::uint32_t profile = 0; profile < 8; ++profile) {
                    if (static_cast<int>((profile >> j) & 1u) != a) continue;
                    double prob = 1.0;
                    for (int l = 0; l < 3; ++l) {
                        if (l == j) continue;
                        prob *= ((profile >> l) & 1u) ? p(l, x, 1) : p(l, x, 0);
                    }
                    for (int s2 = 1; s2 <= 3; ++s2) brute[state_index(State{s2, profile}, 3)] += prob * fs(st.s - 1, s2 - 1);
                }
                CHECK((f - brute).lpNorm<Eigen::Infinity>() < 1e-14);
            }
        }
    }
}

TEST_CASE("single firm: transitions reduce to the size chain with the own action carried over") {
    const Game g(test::small_config(1, 4));
    Rng rng(4);
    const CCPs p = g.choice_probs(test::random_values(g, rng));
    for (int x = 0; x < g.n_states(); ++x) {
        const State st = decode_state(x, 1);
        for (int a = 0; a < 2; ++a) {
            const Vector f = g.transition_probs(p, 0, x, a);
            for (int x2 = 0; x2 < g.n_states(); ++x2) {
                const State nx = decode_state(x2, 1);
                const double expect = nx.lagged_action(0) == a ? g.config().size_transition(st.s - 1, nx.s - 1) : 0.0;
                CHECK(f[x2] == doctest::Approx(expect));
            }
        }
    }
}

TEST_CASE("Phi matches a brute-force evaluation") {
    const Game g(test::small_config(3, 2));
    Rng rng(21);
    for (int trial = 0; trial < 3; ++trial) {
        const Theta th = test::random_theta(rng, 3);
        const ValueFunction v = test::random_values(g, rng);
        const ValueFunction phi = g.phi(th, v);
        for (int j = 0; j < 3; ++j) {
            for (int x = 0; x < g.n_states(); ++x) {
                for (int a = 0; a < 2; ++a) {
                    CHECK(phi(j, x, a) == doctest::Approx(phi_brute(g, th, v, j, x, a)).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("Phi and G degenerate cases") {
    Rng rng(13);
    const Game myopic(test::small_config(2, 3, 0.0));
    const ValueFunction v = test::random_values(myopic, rng);
    CHECK(myopic.phi(Theta(2), v).flat().isZero());
    CHECK((myopic.constraint_G(Theta(2), v) - v.flat()).isZero());
    const Theta th = test::random_theta(rng, 2);
    const ValueFunction phi = myopic.phi(th, v);
    for (int j = 0; j < 2; ++j) {
        for (int x = 0; x < myopic.n_states(); ++x) {
            for (int a = 0; a < 2; ++a) {
                CHECK(phi(j, x, a) == doctest::Approx(myopic.expected_utility(v, th, j, x, a)));
            }
        }
    }
}

TEST_CASE("G vanishes at a solved equilibrium") {
    const Game g(GameConfig{});
    const Theta th = Theta::reference(5);
    const auto eq = data::solve_equilibrium(g, th);
    CHECK(eq.residual <= 1e-12);
    CHECK((g.phi(th, eq.v).flat() - eq.v.flat()).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(g.constraint_G(th, eq.v).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("linearity identity G = H theta + z (property)") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const int J = 1 + static_cast<int>(rng() % 3);
        const int S = 1 + static_cast<int>(rng() % 3);
        const Game g(test::small_config(J, S, test::uniform(rng, 0.0, 0.99)));
        const ValueFunction v = test::random_values(g, rng, 5.0);
        const auto hz = g.build_H_z(v);
        CHECK(hz.H.cols() == J + 3);
        for (int k = 0; k < 5; ++k) {
            const Theta th(J, test::random_vector(rng, J + 3, -5, 5));
            const Vector G = g.constraint_G(th, v);
            CHECK((G - (hz.H * th.values() + hz.z)).lpNorm<Eigen::Infinity>() <=
                  1e-10 * (1.0 + G.lpNorm<Eigen::Infinity>()));
        }
        // rows for "stay out" carry no parameters
        for (int j = 0; j < J; ++j) {
            for (int x = 0; x < g.n_states(); ++x) {
                CHECK(hz.H.row(FirmStateActionArray::offset(g.n_states(), j, x, 0)).isZero());
            }
        }
    }
    const Game five(GameConfig{});
    CHECK(five.build_H_z(five.zero_values()).H.cols() == 8);
}

TEST_CASE("analytic Jacobian equals central finite differences") {
    Rng rng(29);
    for (auto [J, S] : {std::pair{2, 2}, std::pair{2, 3}, std::pair{1, 4}}) {
        const Game g(test::small_config(J, S));
        for (int trial = 0; trial < 3; ++trial) {
            const Theta th = test::random_theta(rng, J);
            const ValueFunction v = test::random_values(g, rng);
            REQUIRE(g.n_values() <= 64);
            const Matrix analytic = g.analytic_jacobian(th, v).to_dense();
            const Matrix fd = fd_jacobian(g, th, v.flat(), 1e-6);
            CHECK((analytic - fd).cwiseAbs().maxCoeff() <= 1e-6);
        }
    }
}

TEST_CASE("structured Jacobian: sparsity pattern, storage, and matrix-vector products") {
    const Game g(test::small_config(3, 2));
    Rng rng(31);
    const Theta th = test::random_theta(rng, 3);
    const ValueFunction v = test::random_values(g, rng);
    const StructuredJacobian jac = g.analytic_jacobian(th, v);
    const Matrix dense = jac.to_dense();
    const int X = g.n_states();
    for (Eigen::Index r = 0; r < dense.rows(); ++r) {
        for (Eigen::Index c = 0; c < dense.cols(); ++c) {
            const int jr = static_cast<int>(r / (2 * X)), xr = static_cast<int>((r / 2) % X);
            const int jc = static_cast<int>(c / (2 * X)), xc = static_cast<int>((c / 2) % X);
            const bool expected = jr == jc || xr == xc;
            CHECK(jac.structurally_nonzero(r, c) == expected);
            if (!expected) CHECK(dense(r, c) == 0.0);
        }
    }
    CHECK(jac.stored_entries() == static_cast<std::size_t>(3 * (2 * X) * (2 * X) + 3 * 2 * X * 4));
    for (int trial = 0; trial < 5; ++trial) {
        const Vector d = test::random_vector(rng, g.n_values());
        CHECK((jac.apply(d) - dense * d).lpNorm<Eigen::Infinity>() <= 1e-12 * (1 + (dense * d).norm()));
    }
}

TEST_CASE("myopic game: own blocks are the identity") {
    const Game g(test::small_config(2, 2, 0.0));
    Rng rng(37);
    const StructuredJacobian jac = g.analytic_jacobian(test::random_theta(rng, 2), test::random_values(g, rng));
    for (int j = 0; j < 2; ++j) CHECK(jac.own_block(j).isIdentity(0.0));
    const Game single(test::small_config(1, 3, 0.0));
    CHECK(single.analytic_jacobian(Theta::reference(1), single.zero_values()).to_dense().isIdentity(0.0));
}

TEST_CASE("configuration validation") {
    GameConfig c;
    CHECK_NOTHROW(c.validate());
    c.beta = 1.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = GameConfig{};
    c.size_transition(0, 0) += 0.1;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = GameConfig{};
    c.n_sizes = 4;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = GameConfig{};
    c.n_firms = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);

    const Game g(GameConfig{});
    CHECK_THROWS_AS(g.constraint_G(Theta(4), g.zero_values()), InvalidInput);
    CHECK_THROWS_AS(g.constraint_G(Theta(5), Vector::Zero(3)), InvalidInput);
}

TEST_CASE("default size chain") {
    const Matrix f = default_size_transition(5);
    CHECK(f(0, 0) == doctest::Approx(0.9));
    CHECK(f(0, 1) == doctest::Approx(0.1));
    CHECK(f(2, 1) == doctest::Approx(0.1));
    CHECK(f(2, 2) == doctest::Approx(0.8));
    CHECK(f(4, 4) == doctest::Approx(0.9));
    for (int i = 0; i < 5; ++i) CHECK(f.row(i).sum() == doctest::Approx(1.0));
    CHECK(default_size_transition(1)(0, 0) == 1.0);
}
