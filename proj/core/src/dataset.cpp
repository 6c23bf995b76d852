#include "epl/data/dataset.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "epl/data/config.hpp"
#include "epl/data/equilibrium.hpp"
#include "epl/error.hpp"

namespace epl::data {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::string> expected_header(int n_firms) {
    std::vector<std::string> h{"obs_id", "s"};
    for (int j = 1; j <= n_firms; ++j) h.push_back("a_prev_" + std::to_string(j));
    for (int j = 1; j <= n_firms; ++j) h.push_back("a_" + std::to_string(j));
    return h;
}

long long parse_int(const std::string& field, const std::string& column, long line) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("dataset line " + std::to_string(line) + ": column '" + column + "' is not an integer: '" +
                             field + "'",
                         line);
    }
    return v;
}

} // namespace

Dataset simulate_dataset(const game::Game& game, const game::Theta& theta_true, int n_obs, std::uint64_t seed) {
    if (n_obs < 1) throw InvalidInput("simulate_dataset: n_obs must be >= 1");
    const auto eq = solve_equilibrium(game, theta_true);
    const game::CCPs p = game.choice_probs(eq.v);
    const Vector pi = stationary_distribution(game, p);

    std::vector<double> cdf(pi.size());
    double acc = 0.0;
    for (Eigen::Index x = 0; x < pi.size(); ++x) {
        acc += pi[x];
        cdf[x] = acc;
    }

    Dataset data;
    data.n_firms = game.n_firms();
    data.n_sizes = game.n_sizes();
    data.seed = seed;
    data.fingerprint = fingerprint(game.config(), theta_true);
    data.theta_true = theta_true;
    data.observations.reserve(n_obs);

    std::mt19937_64 rng(seed);
    for (int i = 0; i < n_obs; ++i) {
        const double u = uniform01(rng) * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        Observation obs;
        obs.state = static_cast<int>(it - cdf.begin());
        for (int j = 0; j < game.n_firms(); ++j) {
            if (uniform01(rng) < p(j, obs.state, 1)) obs.actions |= 1u << j;
        }
        data.observations.push_back(obs);
    }
    return data;
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    const auto header = expected_header(data.n_firms);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    std::size_t id = 1;
    for (const auto& obs : data.observations) {
        const game::State st = game::decode_state(obs.state, data.n_firms);
        out << id++ << ',' << st.s;
        for (int j = 0; j < data.n_firms; ++j) out << ',' << st.lagged_action(j);
        for (int j = 0; j < data.n_firms; ++j) out << ',' << obs.action(j);
        out << '\n';
    }
}

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("dataset: empty file", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv(line);

    int n_firms = 0;
    for (const auto& col : header) {
        if (col.rfind("a_prev_", 0) == 0) ++n_firms;
    }
    if (n_firms == 0) {
        if (header.empty() || header[0] != "obs_id") throw ParseError("dataset: missing column 'obs_id'", 1);
        if (header.size() < 2 || header[1] != "s") throw ParseError("dataset: missing column 's'", 1);
        throw ParseError("dataset: missing column 'a_prev_1'", 1);
    }
    const auto expected = expected_header(n_firms);
    for (std::size_t c = 0; c < expected.size(); ++c) {
        if (c >= header.size() || header[c] != expected[c]) {
            throw ParseError("dataset: missing column '" + expected[c] + "'", 1);
        }
    }
    if (header.size() != expected.size()) throw ParseError("dataset: unexpected column '" + header[expected.size()] + "'", 1);

    Dataset data;
    data.n_firms = n_firms;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != expected.size()) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(expected.size()) + " fields, got " + std::to_string(fields.size()),
                             line_no);
        }
        parse_int(fields[0], "obs_id", line_no);
        const auto s = parse_int(fields[1], "s", line_no);
        if (s < 1) throw ParseError("dataset line " + std::to_string(line_no) + ": market size must be >= 1", line_no);
        game::State st;
        st.s = static_cast<int>(s);
        Observation obs;
        for (int j = 0; j < n_firms; ++j) {
            const auto lag = parse_int(fields[2 + j], expected[2 + j], line_no);
            const auto act = parse_int(fields[2 + n_firms + j], expected[2 + n_firms + j], line_no);
            if ((lag != 0 && lag != 1) || (act != 0 && act != 1)) {
                throw ParseError("dataset line " + std::to_string(line_no) + ": actions must be 0 or 1", line_no);
            }
            st.lagged |= static_cast<std::uint32_t>(lag) << j;
            obs.actions |= static_cast<std::uint32_t>(act) << j;
        }
        obs.state = game::state_index(st, n_firms);
        data.n_sizes = std::max(data.n_sizes, st.s);
        data.observations.push_back(obs);
    }
    if (data.observations.empty()) throw ParseError("dataset: no observations", line_no);
    return data;
}

void write_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
    write_dataset_csv(data, out);

    std::ofstream meta(path + ".meta", std::ios::binary);
    if (!meta) throw InvalidInput("cannot open '" + path + ".meta' for writing");
    meta << std::setprecision(17);
    meta << "n_firms = " << data.n_firms << '\n';
    meta << "n_sizes = " << data.n_sizes << '\n';
    meta << "seed = " << data.seed << '\n';
    meta << "fingerprint = " << data.fingerprint << '\n';
    if (data.theta_true) {
        meta << "theta_true = ";
        const Vector& t = data.theta_true->values();
        for (Eigen::Index i = 0; i < t.size(); ++i) meta << (i ? ", " : "") << t[i];
        meta << '\n';
    }
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open dataset '" + path + "'");
    Dataset data = read_dataset_csv(in);

    std::ifstream meta(path + ".meta");
    if (!meta) return data;
    std::string line;
    while (std::getline(meta, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(' ') + 1);
        value.erase(0, value.find_first_not_of(' '));
        if (key == "n_sizes") {
            data.n_sizes = std::max(data.n_sizes, std::stoi(value));
        } else if (key == "seed") {
            data.seed = std::stoull(value);
        } else if (key == "fingerprint") {
            data.fingerprint = std::stoull(value);
        } else if (key == "theta_true") {
            std::vector<double> vals;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
            data.theta_true = game::Theta(data.n_firms, Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
        }
    }
    return data;
}

void check_dataset(const game::Game& game, const Dataset& data) {
    if (data.n_firms != game.n_firms()) {
        throw InvalidInput("dataset has " + std::to_string(data.n_firms) + " firms, game has " +
                           std::to_string(game.n_firms()));
    }
    if (data.observations.empty()) throw InvalidInput("dataset is empty");
    for (const auto& obs : data.observations) {
        if (obs.state < 0 || obs.state >= game.n_states()) {
            throw InvalidInput("dataset observation outside the state space (market size too large?)");
        }
        if (obs.actions >> game.n_firms()) throw InvalidInput("dataset observation has an invalid action profile");
    }
}

} // namespace epl::data
