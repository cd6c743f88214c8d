#include "cadmm/config_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace cadmm {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& message) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + message);
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text, const std::string& origin) {
    ParsedConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(origin, lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail(origin, lineno, "empty section name");
            cfg.sections[section];  // a section may legitimately stay empty
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        if (section.empty()) fail(origin, lineno, "key outside of any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail(origin, lineno, "empty key");
        if (value.empty()) fail(origin, lineno, "empty value for key '" + key + "'");
        auto& sec = cfg.sections[section];
        if (sec.count(key) != 0) fail(origin, lineno, "duplicate key '" + key + "'");
        sec[key] = value;
    }
    return cfg;
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

namespace {

/// Tracks which keys were consumed so leftovers can be reported as errors.
class SectionReader {
public:
    SectionReader(const ParsedConfig& cfg, const std::string& origin) : cfg_(cfg), origin_(origin) {}

    bool has(const std::string& section, const std::string& key) const {
        auto sec = cfg_.sections.find(section);
        return sec != cfg_.sections.end() && sec->second.count(key) != 0;
    }

    std::string raw(const std::string& section, const std::string& key) {
        used_[section].insert(key);
        return cfg_.sections.at(section).at(key);
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        if (!has(section, key)) return fallback;
        const std::string v = raw(section, key);
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": [" + section + "] " + key + ": not a number: " + v);
        }
    }

    long integer(const std::string& section, const std::string& key, long fallback) {
        if (!has(section, key)) return fallback;
        const std::string v = raw(section, key);
        long out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
            throw ConfigError(origin_ + ": [" + section + "] " + key + ": not an integer: " + v);
        }
        return out;
    }

    std::uint64_t u64(const std::string& section, const std::string& key, std::uint64_t fallback) {
        if (!has(section, key)) return fallback;
        const std::string v = raw(section, key);
        std::uint64_t out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
            throw ConfigError(origin_ + ": [" + section + "] " + key +
                              ": not an unsigned integer: " + v);
        }
        return out;
    }

    bool boolean(const std::string& section, const std::string& key, bool fallback) {
        if (!has(section, key)) return fallback;
        const std::string v = raw(section, key);
        if (v == "true") return true;
        if (v == "false") return false;
        throw ConfigError(origin_ + ": [" + section + "] " + key + ": expected true or false: " + v);
    }

    std::string word(const std::string& section, const std::string& key, const std::string& fallback) {
        if (!has(section, key)) return fallback;
        return raw(section, key);
    }

    void check_consumed() const {
        for (const auto& [section, keys] : cfg_.sections) {
            auto used_sec = used_.find(section);
            if (used_sec == used_.end() && !keys.empty()) {
                throw ConfigError(origin_ + ": unknown section [" + section + "]");
            }
            for (const auto& [key, value] : keys) {
                if (used_sec == used_.end() || used_sec->second.count(key) == 0) {
                    throw ConfigError(origin_ + ": unknown key '" + key + "' in section [" +
                                      section + "]");
                }
            }
        }
    }

private:
    const ParsedConfig& cfg_;
    std::string origin_;
    mutable std::map<std::string, std::set<std::string>> used_;
};

}  // namespace

ScenarioConfig scenario_from_text(const std::string& text, const std::string& origin) {
    const ParsedConfig parsed = parse_config_text(text, origin);
    SectionReader reader(parsed, origin);
    ScenarioConfig sc;

    sc.N = static_cast<int>(reader.integer("scenario", "agents", sc.N));
    sc.d = static_cast<int>(reader.integer("scenario", "dim", sc.d));
    Eigen::VectorXd box(3);
    box << 3.5, 3.5, 2.5;
    if (sc.d == 2) {
        box = Eigen::VectorXd(2);
        box << 3.5, 3.5;
    }
    box(0) = reader.number("scenario", "box_x", box(0));
    box(1) = reader.number("scenario", "box_y", box(1));
    if (sc.d == 3) box(2) = reader.number("scenario", "box_z", box(2));
    sc.box = box;
    sc.d_min = reader.number("scenario", "d_min", sc.d_min);
    sc.min_displacement = reader.number("scenario", "min_displacement", sc.min_displacement);
    sc.seed = reader.u64("scenario", "seed", sc.seed);

    // Optional explicit instance: start_0..start_{N-1} and goal_0..goal_{N-1}
    // in [agents], each a space-separated position. All-or-none per list;
    // velocities are zero. A concrete config skips random generation.
    auto read_points = [&](const char* prefix) {
        std::vector<AgentState> out;
        const std::string first = std::string(prefix) + "_0";
        if (!reader.has("agents", first)) return out;
        for (int a = 0; a < sc.N; ++a) {
            const std::string key = std::string(prefix) + "_" + std::to_string(a);
            if (!reader.has("agents", key)) {
                throw ConfigError(origin + ": [agents] missing key '" + key + "' (lists must cover all agents)");
            }
            std::istringstream vs(reader.raw("agents", key));
            Eigen::VectorXd p(sc.d);
            for (int c = 0; c < sc.d; ++c) {
                if (!(vs >> p(c))) {
                    throw ConfigError(origin + ": [agents] " + key + ": expected " +
                                      std::to_string(sc.d) + " numbers");
                }
            }
            double extra;
            if (vs >> extra) {
                throw ConfigError(origin + ": [agents] " + key + ": expected exactly " +
                                  std::to_string(sc.d) + " numbers");
            }
            out.push_back(AgentState{p, Eigen::VectorXd::Zero(sc.d)});
        }
        return out;
    };
    sc.starts = read_points("start");
    sc.goals = read_points("goal");
    if (sc.starts.empty() != sc.goals.empty()) {
        throw ConfigError(origin + ": [agents] needs both start_* and goal_* lists (or neither)");
    }

    sc.horizon.T = static_cast<int>(reader.integer("horizon", "T", sc.horizon.T));
    sc.horizon.dt = reader.number("horizon", "dt", sc.horizon.dt);

    sc.q_pos = reader.number("cost", "q_pos", sc.q_pos);
    sc.q_vel = reader.number("cost", "q_vel", sc.q_vel);
    sc.r_input = reader.number("cost", "r_input", sc.r_input);
    sc.qf_scale = reader.number("cost", "qf_scale", sc.qf_scale);

    sc.rho = reader.number("admm", "rho", sc.rho);
    sc.eps_base = reader.number("admm", "eps_base", sc.eps_base);
    sc.max_inner_iters = static_cast<int>(reader.integer("admm", "max_inner_iters", sc.max_inner_iters));
    sc.qp_tol = reader.number("admm", "qp_tol", sc.qp_tol);
    sc.qp_max_iters = static_cast<int>(reader.integer("admm", "qp_max_iters", sc.qp_max_iters));
    sc.slack_weight = reader.number("admm", "slack_weight", sc.slack_weight);
    sc.slack_quadratic = reader.number("admm", "slack_quadratic", sc.slack_quadratic);

    sc.a_max = reader.number("limits", "a_max", sc.a_max);

    sc.mpc.pos_tol = reader.number("mpc", "pos_tol", sc.mpc.pos_tol);
    sc.mpc.vel_tol = reader.number("mpc", "vel_tol", sc.mpc.vel_tol);
    sc.mpc.obj_tol = reader.number("mpc", "obj_tol", sc.mpc.obj_tol);
    sc.mpc.obj_window = static_cast<int>(reader.integer("mpc", "obj_window", sc.mpc.obj_window));
    sc.mpc.max_outer_steps =
        static_cast<int>(reader.integer("mpc", "max_outer_steps", sc.mpc.max_outer_steps));
    sc.mpc.warm_start = reader.boolean("mpc", "warm_start", sc.mpc.warm_start);
    sc.mpc.noncvx_warm_start = reader.boolean("mpc", "noncvx_warm_start", sc.mpc.noncvx_warm_start);

    const std::string variant = reader.word("run", "variant", "convex");
    if (variant == "convex") {
        sc.variant = Variant::Convex;
    } else if (variant == "nonconvex") {
        sc.variant = Variant::Nonconvex;
    } else {
        throw ConfigError(origin + ": [run] variant must be convex or nonconvex");
    }
    const std::string engine = reader.word("run", "engine", "serial");
    if (engine == "serial") {
        sc.mpc.threaded = false;
    } else if (engine == "threaded") {
        sc.mpc.threaded = true;
    } else {
        throw ConfigError(origin + ": [run] engine must be serial or threaded");
    }
    const std::string graph = reader.word("run", "graph", "full");
    if (graph == "full") {
        sc.graph = GraphKind::FullyConnected;
    } else if (graph == "radius") {
        sc.graph = GraphKind::Radius;
    } else {
        throw ConfigError(origin + ": [run] graph must be full or radius");
    }
    sc.graph_radius = reader.number("run", "graph_radius", sc.graph_radius);

    reader.check_consumed();
    sc.validate();
    return sc;
}

ScenarioConfig scenario_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_text(buf.str(), path);
}

}  // namespace cadmm
