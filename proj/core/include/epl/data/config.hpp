#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "epl/game.hpp"

namespace epl::data {

/// Everything a run needs: the game, the data-generating parameters and the
/// Monte Carlo design. Read from line-oriented `key = value` text.
struct RunConfig {
    game::GameConfig game;
    game::Theta theta_true = game::Theta::reference(5);
    int n_obs = 1600;
    std::uint64_t seed = 1;

    // Monte Carlo design; ignored by single-dataset commands.
    int reps = 100;
    std::vector<std::string> methods{"epl-anal", "epl-krylov", "epl-jf"};
    std::vector<int> k_list{1, 2, 3, 0};  // 0 = iterate to convergence
};

/// J = |S| = 5, beta = 0.95, default size chain, reference theta, N = 1600.
RunConfig reference_config();

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
std::string format_config(const RunConfig& cfg);

/// FNV-1a over the canonical text of the game and theta.
std::uint64_t fingerprint(const game::GameConfig& game, const game::Theta& theta);

} // namespace epl::data
