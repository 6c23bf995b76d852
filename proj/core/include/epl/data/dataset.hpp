#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epl/game.hpp"

namespace epl::data {

struct Observation {
    int state = 0;               // index into the state space
    std::uint32_t actions = 0;   // bit j = a^j

    int action(int j) const { return static_cast<int>((actions >> j) & 1u); }
    bool operator==(const Observation&) const = default;
};

struct Dataset {
    int n_firms = 0;
    int n_sizes = 0;
    std::vector<Observation> observations;
    std::uint64_t seed = 0;
    std::uint64_t fingerprint = 0;
    std::optional<game::Theta> theta_true;

    std::size_t size() const { return observations.size(); }
};

/// Cross-section of N i.i.d. draws: x from the ergodic distribution of the
/// equilibrium at theta_true (selected from v0 = 0), then independent actions
/// from each firm's CCP at x. Uses std::mt19937_64 seeded with `seed`.
Dataset simulate_dataset(const game::Game& game, const game::Theta& theta_true, int n_obs, std::uint64_t seed);

/// CSV with header obs_id,s,a_prev_1..a_prev_J,a_1..a_J.
void write_dataset_csv(const Dataset& data, std::ostream& out);
Dataset read_dataset_csv(std::istream& in);

/// Writes `path` plus a `path.meta` key = value sidecar holding seed,
/// fingerprint, n_sizes and theta_true. Reading picks the sidecar up if present.
void write_dataset(const Dataset& data, const std::string& path);
Dataset read_dataset(const std::string& path);

/// Throws InvalidInput unless every observation fits the game.
void check_dataset(const game::Game& game, const Dataset& data);

} // namespace epl::data
