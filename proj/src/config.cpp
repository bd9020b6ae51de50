#include "fantomette/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace fantomette {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_int(std::string_view key, std::string_view v) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError("invalid integer for " + std::string(key) + ": '" + std::string(v) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view v) {
    std::string s(v);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(out)) {
        throw ConfigError("invalid number for " + std::string(key) + ": '" + s + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(v) + "'");
}

}  // namespace

std::string format_fixed(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::uint64_t SimConfig::byzantine_count() const {
    return static_cast<std::uint64_t>(std::llround(f_byzantine * static_cast<double>(n_players)));
}

std::uint64_t SimConfig::rational_count() const {
    return static_cast<std::uint64_t>(std::llround(f_rational * static_cast<double>(n_players)));
}

std::uint64_t SimConfig::altruistic_count() const {
    const std::uint64_t other = byzantine_count() + rational_count();
    return other >= n_players ? 0 : n_players - other;
}

IncentiveParams SimConfig::incentive_params() const {
    IncentiveParams p;
    p.c = c;
    p.pun = pun;
    p.bigpun = bigpun;
    p.k = k;
    p.reward_floor = reward_floor;
    p.pair_scope = pair_scope;
    return p;
}

void SimConfig::set(std::string_view key, std::string_view raw) {
    const std::string_view v = trim(raw);
    if (key == "n_players") n_players = parse_int<std::uint64_t>(key, v);
    else if (key == "slots") slots = parse_int<std::uint64_t>(key, v);
    else if (key == "f_byzantine") f_byzantine = parse_real(key, v);
    else if (key == "f_altruistic") f_altruistic = parse_real(key, v);
    else if (key == "f_rational") f_rational = parse_real(key, v);
    else if (key == "k") k = parse_int<std::uint64_t>(key, v);
    else if (key == "c") c = parse_real(key, v);
    else if (key == "pun") pun = parse_real(key, v);
    else if (key == "bigpun") bigpun = parse_real(key, v);
    else if (key == "delay_mean") delay_mean = parse_real(key, v);
    else if (key == "delta_cap") delta_cap = parse_int<std::uint64_t>(key, v);
    else if (key == "delay_pod") delay_pod = parse_int<std::uint64_t>(key, v);
    else if (key == "w") w = parse_int<std::uint64_t>(key, v);
    else if (key == "x_commit") x_commit = parse_int<std::int64_t>(key, v);
    else if (key == "runs") runs = parse_int<std::uint64_t>(key, v);
    else if (key == "seed") seed = parse_int<std::uint64_t>(key, v);
    else if (key == "score_mode") {
        if (v == "induced") score_mode = ScoreMode::induced;
        else if (v == "literal") score_mode = ScoreMode::literal;
        else throw ConfigError("score_mode must be induced or literal");
    } else if (key == "reward_floor") reward_floor = parse_bool(key, v);
    else if (key == "pair_scope") {
        if (v == "majority") pair_scope = PairScope::majority;
        else if (v == "union") pair_scope = PairScope::union_of_views;
        else throw ConfigError("pair_scope must be majority or union");
    } else if (key == "rotation") rotation = parse_bool(key, v);
    else if (key == "pod_iters") pod_iters = parse_int<std::uint64_t>(key, v);
    else if (key == "rational_depth") rational_depth = parse_int<std::uint64_t>(key, v);
    else if (key == "rational_horizon") rational_horizon = parse_int<std::uint64_t>(key, v);
    else if (key == "rational_rollouts") rational_rollouts = parse_int<std::uint64_t>(key, v);
    else if (key == "convergence_depth") convergence_depth = parse_int<std::uint64_t>(key, v);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void SimConfig::validate() const {
    auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!in_unit(f_byzantine) || !in_unit(f_altruistic) || !in_unit(f_rational)) {
        throw ConfigError("fractions must lie in [0, 1]");
    }
    if (std::fabs(f_byzantine + f_altruistic + f_rational - 1.0) > 1e-9) {
        throw ConfigError("f_byzantine + f_altruistic + f_rational must equal 1");
    }
    if (n_players == 0) throw ConfigError("n_players must be positive");
    if (slots == 0) throw ConfigError("slots must be positive");
    if (byzantine_count() + rational_count() > n_players) throw ConfigError("coalitions exceed n_players");
    if (!(delay_mean > 0.0)) throw ConfigError("delay_mean must be positive");
    if (delta_cap == 0) throw ConfigError("delta_cap must be at least 1");
    if (delay_pod <= delta_cap) throw ConfigError("delay_pod must exceed delta_cap");
    if (x_commit < 0) throw ConfigError("x_commit must be non-negative");
    if (pod_iters == 0) throw ConfigError("pod_iters must be at least 1");
    if (c < 0.0 || pun < 0.0 || bigpun < 0.0) throw ConfigError("c, pun and bigpun are non-negative magnitudes");
    if (rational_rollouts == 0) throw ConfigError("rational_rollouts must be positive");
}

std::vector<std::pair<std::string, std::string>> SimConfig::entries() const {
    auto u = [](std::uint64_t v) { return std::to_string(v); };
    return {
        {"n_players", u(n_players)},
        {"slots", u(slots)},
        {"f_byzantine", format_fixed(f_byzantine)},
        {"f_altruistic", format_fixed(f_altruistic)},
        {"f_rational", format_fixed(f_rational)},
        {"k", u(k)},
        {"c", format_fixed(c)},
        {"pun", format_fixed(pun)},
        {"bigpun", format_fixed(bigpun)},
        {"delay_mean", format_fixed(delay_mean)},
        {"delta_cap", u(delta_cap)},
        {"delay_pod", u(delay_pod)},
        {"w", u(w)},
        {"x_commit", std::to_string(x_commit)},
        {"runs", u(runs)},
        {"seed", u(seed)},
        {"score_mode", score_mode == ScoreMode::induced ? "induced" : "literal"},
        {"reward_floor", reward_floor ? "true" : "false"},
        {"pair_scope", pair_scope == PairScope::majority ? "majority" : "union"},
        {"rotation", rotation ? "true" : "false"},
        {"pod_iters", u(pod_iters)},
        {"rational_depth", u(rational_depth)},
        {"rational_horizon", u(rational_horizon)},
        {"rational_rollouts", u(rational_rollouts)},
        {"convergence_depth", u(convergence_depth)},
    };
}

SimConfig parse_config_text(std::string_view text, SimConfig cfg) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        try {
            cfg.set(key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), base);
}

std::string config_echo(const SimConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : cfg.entries()) out += k + "=" + v + "\n";
    return out;
}

}  // namespace fantomette
