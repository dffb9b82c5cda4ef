#include "wickshe/app/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/algorithm/string.hpp>

namespace wickshe::app {

InitialCondition InitialSpec::build() const {
    if (tag == "constant") return InitialCondition::constant(value);
    if (tag == "sine") return InitialCondition::sine(amplitude, frequency);
    if (tag == "gaussian_bump") return InitialCondition::gaussian_bump(amplitude, width);
    if (tag == "tanh") return InitialCondition::tanh_profile(scale);
    throw ConfigError("initial_condition.tag: unknown tag '" + tag + "'");
}

double RunConfig::resolved_L() const {
    if (quadrature.L > 0.0) return quadrature.L;
    double max_x = 0.0;
    double horizon = 0.0;
    for (const auto& p : probes) {
        max_x = std::max(max_x, std::abs(p.x));
        horizon = std::max(horizon, p.t);
    }
    return max_x + 6.0 * std::sqrt(horizon) + 6.0;
}

QuadratureGrid RunConfig::grid() const { return {resolved_L(), quadrature.panels}; }

ChaosQuadratureOptions RunConfig::quadrature_options() const {
    ChaosQuadratureOptions o;
    o.time_points = quadrature.time_points;
    o.gh_nodes = quadrature.gh_nodes;
    o.grading = quadrature.grading;
    return o;
}

namespace {

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_double(v[i]);
    return out;
}

// One accepted key: parse a value into the config, and render it back.
struct KeyBinding {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ConfigError(key + ": expected a finite number, got '" + text + "'");
    return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
    std::int64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        // Accept integral values written in floating notation, e.g. 1e5.
        double d = 0.0;
        auto [p2, e2] = std::from_chars(text.data(), end, d);
        if (e2 != std::errc() || p2 != end || d != std::floor(d) || std::abs(d) > 9e15)
            throw ConfigError(key + ": expected an integer, got '" + text + "'");
        v = static_cast<std::int64_t>(d);
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    if (!text.empty() && text.front() == '-') throw ConfigError(key + ": must be a non-negative integer");
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = boost::algorithm::to_lower_copy(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::is_any_of(","));
    for (auto& p : parts) boost::algorithm::trim(p);
    if (parts.size() == 1 && parts[0].empty()) parts.clear();
    return parts;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& p : split_list(text)) out.push_back(parse_double(key, p));
    return out;
}

std::vector<SpaceTimePoint> parse_probes(const std::string& key, const std::string& text) {
    std::vector<SpaceTimePoint> out;
    for (const auto& p : split_list(text)) {
        const auto colon = p.find(':');
        if (colon == std::string::npos) throw ConfigError(key + ": expected t:x pairs, got '" + p + "'");
        std::string ts = p.substr(0, colon), xs = p.substr(colon + 1);
        boost::algorithm::trim(ts);
        boost::algorithm::trim(xs);
        out.push_back({parse_double(key, ts), parse_double(key, xs)});
    }
    return out;
}

std::string render_probes(const std::vector<SpaceTimePoint>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_double(v[i].t) + ":" + fmt_double(v[i].x);
    return out;
}

template <class T>
KeyBinding real_key(std::string name, T RunConfig::*group, double T::*field) {
    return {name, [name, group, field](RunConfig& c, const std::string& s) { (c.*group).*field = parse_double(name, s); },
            [group, field](const RunConfig& c) { return fmt_double((c.*group).*field); }};
}

template <class T, class I>
KeyBinding int_key(std::string name, T RunConfig::*group, I T::*field) {
    return {name,
            [name, group, field](RunConfig& c, const std::string& s) {
                const std::int64_t v = parse_int(name, s);
                if (v < static_cast<std::int64_t>(std::numeric_limits<I>::min()) ||
                    v > static_cast<std::int64_t>(std::numeric_limits<I>::max()))
                    throw ConfigError(name + ": value out of range");
                (c.*group).*field = static_cast<I>(v);
            },
            [group, field](const RunConfig& c) { return std::to_string((c.*group).*field); }};
}

template <class T>
KeyBinding bool_key(std::string name, T RunConfig::*group, bool T::*field) {
    return {name, [name, group, field](RunConfig& c, const std::string& s) { (c.*group).*field = parse_bool(name, s); },
            [group, field](const RunConfig& c) { return std::string((c.*group).*field ? "true" : "false"); }};
}

template <class T>
KeyBinding string_key(std::string name, T RunConfig::*group, std::string T::*field) {
    return {name, [group, field](RunConfig& c, const std::string& s) { (c.*group).*field = s; },
            [group, field](const RunConfig& c) { return (c.*group).*field; }};
}

template <class T>
KeyBinding list_key(std::string name, T RunConfig::*group, std::vector<double> T::*field) {
    return {name,
            [name, group, field](RunConfig& c, const std::string& s) { (c.*group).*field = parse_double_list(name, s); },
            [group, field](const RunConfig& c) { return join_doubles((c.*group).*field); }};
}

const std::vector<KeyBinding>& bindings() {
    using C = RunConfig;
    static const std::vector<KeyBinding> table = [] {
        std::vector<KeyBinding> b;
        b.push_back({"seed", [](C& c, const std::string& s) { c.seed = parse_u64("seed", s); },
                     [](const C& c) { return std::to_string(c.seed); }});
        b.push_back(int_key("truncation.N", &C::truncation, &TruncationSpec::max_order));
        b.push_back(int_key("truncation.J", &C::truncation, &TruncationSpec::max_mode));
        b.push_back(real_key("quadrature.L", &C::quadrature, &C::Quadrature::L));
        b.push_back(int_key("quadrature.panels", &C::quadrature, &C::Quadrature::panels));
        b.push_back(real_key("quadrature.grading", &C::quadrature, &C::Quadrature::grading));
        b.push_back(int_key("quadrature.time_points", &C::quadrature, &C::Quadrature::time_points));
        b.push_back(int_key("quadrature.gh_nodes", &C::quadrature, &C::Quadrature::gh_nodes));
        b.push_back(real_key("propagator.dx", &C::propagator, &C::Propagator::dx));
        b.push_back(real_key("propagator.dt", &C::propagator, &C::Propagator::dt));
        b.push_back(real_key("propagator.L", &C::propagator, &C::Propagator::L));
        b.push_back(bool_key("propagator.richardson", &C::propagator, &C::Propagator::richardson));
        b.push_back(real_key("mc.dt", &C::mc, &C::Mc::dt));
        b.push_back(int_key("mc.n_paths", &C::mc, &C::Mc::n_paths));
        b.push_back(real_key("mc.delta_a_factor", &C::mc, &C::Mc::delta_a_factor));
        b.push_back(int_key("mc.block_size", &C::mc, &C::Mc::block_size));
        b.push_back(string_key("initial_condition.tag", &C::initial_condition, &InitialSpec::tag));
        b.push_back(real_key("initial_condition.value", &C::initial_condition, &InitialSpec::value));
        b.push_back(real_key("initial_condition.amplitude", &C::initial_condition, &InitialSpec::amplitude));
        b.push_back(real_key("initial_condition.frequency", &C::initial_condition, &InitialSpec::frequency));
        b.push_back(real_key("initial_condition.width", &C::initial_condition, &InitialSpec::width));
        b.push_back(real_key("initial_condition.scale", &C::initial_condition, &InitialSpec::scale));
        b.push_back({"probes.points", [](C& c, const std::string& s) { c.probes = parse_probes("probes.points", s); },
                     [](const C& c) { return render_probes(c.probes); }});
        b.push_back({"output_dir", [](C& c, const std::string& s) { c.output_dir = s; },
                     [](const C& c) { return c.output_dir; }});
        b.push_back(string_key("chaos.method", &C::chaos, &C::Chaos::method));
        b.push_back(real_key("chaos.tolerance", &C::chaos, &C::Chaos::tolerance));
        b.push_back(string_key("derivative.method", &C::derivative, &C::Derivative::method));
        b.push_back(real_key("derivative.epsilon", &C::derivative, &C::Derivative::epsilon));
        b.push_back(list_key("derivative.lambdas", &C::derivative, &C::Derivative::lambdas));
        b.push_back(real_key("derivative.cauchy_tolerance", &C::derivative, &C::Derivative::cauchy_tolerance));
        b.push_back(int_key("fk.noise_draws", &C::fk, &C::Fk::noise_draws));
        b.push_back(int_key("fk.paths_per_draw", &C::fk, &C::Fk::paths_per_draw));
        b.push_back(int_key("fk.psi_noise_draws", &C::fk, &C::Fk::psi_noise_draws));
        b.push_back(real_key("stransform.mode_scale", &C::stransform, &C::STransform::mode_scale));
        b.push_back(real_key("stransform.bump_amplitude", &C::stransform, &C::STransform::bump_amplitude));
        b.push_back(real_key("stransform.bump_center", &C::stransform, &C::STransform::bump_center));
        b.push_back(real_key("stransform.bump_width", &C::stransform, &C::STransform::bump_width));
        b.push_back(real_key("equivalence.y_min", &C::equivalence, &C::Equivalence::y_min));
        b.push_back(real_key("equivalence.y_max", &C::equivalence, &C::Equivalence::y_max));
        b.push_back(int_key("equivalence.grid", &C::equivalence, &C::Equivalence::grid));
        b.push_back(int_key("equivalence.time_points", &C::equivalence, &C::Equivalence::time_points));
        b.push_back(int_key("equivalence.max_order", &C::equivalence, &C::Equivalence::max_order));
        b.push_back(real_key("equivalence.tolerance", &C::equivalence, &C::Equivalence::tolerance));
        b.push_back(real_key("localtime.t", &C::localtime, &C::LocalTime::t));
        b.push_back(list_key("localtime.h_values", &C::localtime, &C::LocalTime::h_values));
        b.push_back(list_key("localtime.extra_t", &C::localtime, &C::LocalTime::extra_t));
        b.push_back(real_key("regularity.h_min", &C::regularity, &C::Regularity::h_min));
        b.push_back(real_key("regularity.h_max", &C::regularity, &C::Regularity::h_max));
        b.push_back(int_key("regularity.points", &C::regularity, &C::Regularity::points));
        b.push_back(real_key("regularity.space_t", &C::regularity, &C::Regularity::space_t));
        b.push_back(real_key("regularity.time_base", &C::regularity, &C::Regularity::time_base));
        b.push_back(real_key("regularity.informational_base", &C::regularity, &C::Regularity::informational_base));
        b.push_back(real_key("regularity.max_top_order_share", &C::regularity, &C::Regularity::max_top_order_share));
        return b;
    }();
    return table;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string suggestion_for(const std::string& key) {
    std::string best;
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    for (const auto& b : bindings()) {
        const std::size_t d = levenshtein(key, b.name);
        if (d < best_d) {
            best_d = d;
            best = b.name;
        }
    }
    if (best_d <= std::max<std::size_t>(2, key.size() / 3)) return best;
    return {};
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

void validate(const RunConfig& c) {
    require(c.truncation.max_order >= 0 && c.truncation.max_order <= 20, "truncation.N", "must be in [0, 20]");
    require(c.truncation.max_mode >= 1 && c.truncation.max_mode <= 64, "truncation.J", "must be in [1, 64]");
    require(c.quadrature.L >= 0.0, "quadrature.L", "must be non-negative (0 selects the automatic width)");
    require(c.quadrature.panels >= 1 && c.quadrature.panels <= 4096, "quadrature.panels", "must be in [1, 4096]");
    require(c.quadrature.grading >= 1.0 && c.quadrature.grading <= 6.0, "quadrature.grading", "must be in [1, 6]");
    require(c.quadrature.time_points >= 2 && c.quadrature.time_points <= 128, "quadrature.time_points",
            "must be in [2, 128]");
    require(c.quadrature.gh_nodes >= 2 && c.quadrature.gh_nodes <= 128, "quadrature.gh_nodes", "must be in [2, 128]");
    require(c.propagator.dx > 0.0 && c.propagator.dx <= 1.0, "propagator.dx", "must be in (0, 1]");
    require(c.propagator.dt > 0.0 && c.propagator.dt <= 0.5, "propagator.dt", "must be in (0, 0.5]");
    require(c.propagator.L > 0.0, "propagator.L", "must be positive");
    require(c.propagator.L / c.propagator.dx <= 1e6, "propagator.L", "lattice too large for propagator.dx");
    require(c.mc.dt > 0.0 && c.mc.dt <= 0.1, "mc.dt", "must be in (0, 0.1]");
    require(c.mc.n_paths >= 100 && c.mc.n_paths <= 100'000'000, "mc.n_paths", "must be in [100, 1e8]");
    require(c.mc.delta_a_factor >= 0.5 && c.mc.delta_a_factor <= 20.0, "mc.delta_a_factor", "must be in [0.5, 20]");
    require(c.mc.block_size >= 1 && c.mc.block_size <= 1'000'000, "mc.block_size", "must be in [1, 1e6]");
    const auto& ic = c.initial_condition;
    require(ic.tag == "constant" || ic.tag == "sine" || ic.tag == "gaussian_bump" || ic.tag == "tanh",
            "initial_condition.tag", "must be one of constant, sine, gaussian_bump, tanh");
    require(ic.width > 0.0, "initial_condition.width", "must be positive");
    require(ic.scale > 0.0, "initial_condition.scale", "must be positive");
    require(!c.probes.empty(), "probes.points", "needs at least one t:x pair");
    for (const auto& p : c.probes) require(p.t > 0.0 && p.t <= 10.0, "probes.points", "times must be in (0, 10]");
    require(!c.output_dir.empty(), "output_dir", "must not be empty");
    auto method_ok = [](const std::string& m) { return m == "auto" || m == "quadrature" || m == "propagator"; };
    require(method_ok(c.chaos.method), "chaos.method", "must be auto, quadrature or propagator");
    require(method_ok(c.derivative.method), "derivative.method", "must be auto, quadrature or propagator");
    require(c.chaos.tolerance > 0.0, "chaos.tolerance", "must be positive");
    require(c.derivative.epsilon > 0.0, "derivative.epsilon", "must be positive");
    for (double l : c.derivative.lambdas) require(l >= 0.0 && l <= 5.0, "derivative.lambdas", "must be in [0, 5]");
    require(c.derivative.cauchy_tolerance > 0.0, "derivative.cauchy_tolerance", "must be positive");
    require(c.fk.noise_draws >= 2, "fk.noise_draws", "must be at least 2");
    require(c.fk.paths_per_draw >= 100, "fk.paths_per_draw", "must be at least 100");
    require(c.fk.psi_noise_draws >= 100, "fk.psi_noise_draws", "must be at least 100");
    require(c.stransform.bump_width > 0.0, "stransform.bump_width", "must be positive");
    require(c.equivalence.y_max > c.equivalence.y_min, "equivalence.y_max", "must exceed equivalence.y_min");
    require(c.equivalence.grid >= 1 && c.equivalence.grid <= 50, "equivalence.grid", "must be in [1, 50]");
    require(c.equivalence.time_points >= 4 && c.equivalence.time_points <= 96, "equivalence.time_points",
            "must be in [4, 96]");
    require(c.equivalence.max_order >= 1 && c.equivalence.max_order <= kKernelOrderCap, "equivalence.max_order",
            "must be in [1, " + std::to_string(kKernelOrderCap) + "]");
    require(c.equivalence.tolerance > 0.0, "equivalence.tolerance", "must be positive");
    require(c.localtime.t > 0.0 && c.localtime.t <= 10.0, "localtime.t", "must be in (0, 10]");
    for (double h : c.localtime.h_values) require(h >= 0.0 && h <= 2.0, "localtime.h_values", "must be in [0, 2]");
    for (double t : c.localtime.extra_t) require(t > 0.0 && t <= 10.0, "localtime.extra_t", "must be in (0, 10]");
    require(c.regularity.h_min > 0.0 && c.regularity.h_max > c.regularity.h_min, "regularity.h_min",
            "need 0 < regularity.h_min < regularity.h_max");
    require(c.regularity.points >= 6 && c.regularity.points <= 64, "regularity.points", "must be in [6, 64]");
    require(c.regularity.space_t > 0.0, "regularity.space_t", "must be positive");
    require(c.regularity.time_base >= 0.0, "regularity.time_base", "must be non-negative");
    require(c.regularity.informational_base >= 0.0, "regularity.informational_base", "must be non-negative");
    require(c.regularity.max_top_order_share > 0.0 && c.regularity.max_top_order_share < 1.0,
            "regularity.max_top_order_share", "must be in (0, 1)");
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    auto where = [&] { return origin + ":" + std::to_string(lineno) + ": "; };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        boost::algorithm::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where() + "unterminated section header");
            section = line.substr(1, line.size() - 2);
            boost::algorithm::trim(section);
            if (section.empty()) throw ConfigError(where() + "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where() + "expected 'key = value'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        boost::algorithm::trim(key);
        boost::algorithm::trim(value);
        if (key.empty()) throw ConfigError(where() + "missing key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        const std::string full = section.empty() ? key : section + "." + key;
        const auto& table = bindings();
        auto it = std::find_if(table.begin(), table.end(), [&](const KeyBinding& b) { return b.name == full; });
        if (it == table.end()) {
            std::string msg = where() + "unknown key '" + full + "'";
            if (auto s = suggestion_for(full); !s.empty()) msg += " (did you mean '" + s + "'?)";
            throw ConfigError(msg);
        }
        try {
            it->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        }
    }
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> echo_config(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& b : bindings()) out.emplace_back(b.name, b.get(cfg));
    out.emplace_back("quadrature.L_resolved", fmt_double(cfg.resolved_L()));
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& b : bindings()) keys.push_back(b.name);
    return keys;
}

}  // namespace wickshe::app
