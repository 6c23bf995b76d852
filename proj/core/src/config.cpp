#include "epl/data/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "epl/error.hpp"

namespace epl::data {

namespace {

struct Entry {
    std::string value;
    long line = 0;
    bool used = false;
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const Entry& e) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("config: '" + key + "' expects a number, got '" + e.value + "'", e.line);
    }
}

long long to_integer(const std::string& key, const Entry& e) {
    long long v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ParseError("config: '" + key + "' expects an integer, got '" + e.value + "'", e.line);
    }
    return v;
}

bool to_bool(const std::string& key, const Entry& e) {
    if (e.value == "1" || e.value == "true" || e.value == "on" || e.value == "yes") return true;
    if (e.value == "0" || e.value == "false" || e.value == "off" || e.value == "no") return false;
    throw ParseError("config: '" + key + "' expects a boolean, got '" + e.value + "'", e.line);
}

} // namespace

RunConfig reference_config() { return RunConfig{}; }

RunConfig parse_config(std::istream& in) {
    std::map<std::string, Entry> entries;
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("config: expected 'key = value'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("config: empty key", line_no);
        if (entries.count(key)) throw ParseError("config: duplicate key '" + key + "'", line_no);
        entries[key] = Entry{value, line_no, false};
    }

    auto take = [&](const std::string& key) -> Entry* {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    };

    RunConfig cfg;
    if (auto* e = take("n_firms")) cfg.game.n_firms = static_cast<int>(to_integer("n_firms", *e));
    if (auto* e = take("n_sizes")) cfg.game.n_sizes = static_cast<int>(to_integer("n_sizes", *e));
    if (auto* e = take("beta")) cfg.game.beta = to_double("beta", *e);
    if (auto* e = take("include_euler")) cfg.game.include_euler = to_bool("include_euler", *e);
    if (cfg.game.n_firms < 1 || cfg.game.n_firms > 16) throw InvalidInput("config: n_firms must be in [1, 16]");
    if (cfg.game.n_sizes < 1) throw InvalidInput("config: n_sizes must be >= 1");

    const int J = cfg.game.n_firms;
    const int S = cfg.game.n_sizes;
    cfg.game.size_transition = game::default_size_transition(S);
    for (int k = 1; k <= S; ++k) {
        const std::string key = "size_transition_row_" + std::to_string(k);
        if (auto* e = take(key)) {
            const auto items = split_list(e->value);
            if (static_cast<int>(items.size()) != S) {
                throw ParseError("config: '" + key + "' needs " + std::to_string(S) + " entries", e->line);
            }
            for (int c = 0; c < S; ++c) cfg.game.size_transition(k - 1, c) = to_double(key, Entry{items[c], e->line});
        }
    }

    cfg.theta_true = game::Theta::reference(J);
    for (int j = 1; j <= J; ++j) {
        const std::string key = "theta_fc_" + std::to_string(j);
        if (auto* e = take(key)) cfg.theta_true.fc(j - 1) = to_double(key, *e);
    }
    if (auto* e = take("theta_rs")) cfg.theta_true.rs() = to_double("theta_rs", *e);
    if (auto* e = take("theta_rn")) cfg.theta_true.rn() = to_double("theta_rn", *e);
    if (auto* e = take("theta_ec")) cfg.theta_true.ec() = to_double("theta_ec", *e);
    if (auto* e = take("n_obs")) cfg.n_obs = static_cast<int>(to_integer("n_obs", *e));
    if (auto* e = take("seed")) cfg.seed = static_cast<std::uint64_t>(to_integer("seed", *e));
    if (auto* e = take("reps")) cfg.reps = static_cast<int>(to_integer("reps", *e));
    if (auto* e = take("methods")) cfg.methods = split_list(e->value);
    if (auto* e = take("k_list")) {
        cfg.k_list.clear();
        for (const auto& item : split_list(e->value)) {
            if (item == "inf" || item == "infinity") {
                cfg.k_list.push_back(0);
            } else {
                const auto k = to_integer("k_list", Entry{item, e->line});
                if (k < 1) throw ParseError("config: k_list entries must be >= 1 or 'inf'", e->line);
                cfg.k_list.push_back(static_cast<int>(k));
            }
        }
    }

    for (const auto& [key, e] : entries) {
        if (!e.used) throw ParseError("config: unknown key '" + key + "'", e.line);
    }
    if (cfg.n_obs < 1) throw InvalidInput("config: n_obs must be >= 1");
    if (cfg.reps < 1) throw InvalidInput("config: reps must be >= 1");
    cfg.game.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string format_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "n_firms = " << cfg.game.n_firms << '\n';
    os << "n_sizes = " << cfg.game.n_sizes << '\n';
    os << "beta = " << cfg.game.beta << '\n';
    os << "include_euler = " << (cfg.game.include_euler ? "true" : "false") << '\n';
    for (int k = 0; k < cfg.game.n_sizes; ++k) {
        os << "size_transition_row_" << k + 1 << " = ";
        for (int c = 0; c < cfg.game.n_sizes; ++c) os << (c ? ", " : "") << cfg.game.size_transition(k, c);
        os << '\n';
    }
    for (int j = 0; j < cfg.game.n_firms; ++j) os << "theta_fc_" << j + 1 << " = " << cfg.theta_true.fc(j) << '\n';
    os << "theta_rs = " << cfg.theta_true.rs() << '\n';
    os << "theta_rn = " << cfg.theta_true.rn() << '\n';
    os << "theta_ec = " << cfg.theta_true.ec() << '\n';
    os << "n_obs = " << cfg.n_obs << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "reps = " << cfg.reps << '\n';
    os << "methods = ";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) os << (i ? ", " : "") << cfg.methods[i];
    os << '\n';
    os << "k_list = ";
    for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
        os << (i ? ", " : "");
        if (cfg.k_list[i] == 0) {
            os << "inf";
        } else {
            os << cfg.k_list[i];
        }
    }
    os << '\n';
    return os.str();
}

std::uint64_t fingerprint(const game::GameConfig& game, const game::Theta& theta) {
    std::ostringstream os;
    os << std::setprecision(17) << game.n_firms << ';' << game.n_sizes << ';' << game.beta << ';'
       << game.include_euler << ';';
    for (Eigen::Index i = 0; i < game.size_transition.size(); ++i) os << game.size_transition.data()[i] << ',';
    os << ';';
    for (Eigen::Index i = 0; i < theta.values().size(); ++i) os << theta.values()[i] << ',';
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace epl::data
