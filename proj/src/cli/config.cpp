#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <span>

#include <json.hpp>

#include "nanonmr/cli.hpp"
#include "nanonmr/error.hpp"
#include "nanonmr/parallel.hpp"

namespace nanonmr::cli {

using nlohmann::json;

namespace {

enum class Dim { Length, Time, Diffusion, Frequency };

struct UnitEntry {
    const char* name;
    double factor;
};

constexpr UnitEntry kLength[] = {{"m", 1.0},   {"cm", 1e-2},  {"mm", 1e-3}, {"um", 1e-6},
                                 {"µm", 1e-6}, {"nm", 1e-9},  {"pm", 1e-12}, {"A", 1e-10},
                                 {"Å", 1e-10}};
constexpr UnitEntry kTime[] = {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"µs", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
constexpr UnitEntry kHertz[] = {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};

std::optional<double> lookup(std::string_view unit, std::span<const UnitEntry> table) {
    for (const auto& e : table)
        if (unit == e.name) return e.factor;
    return std::nullopt;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

// SI factor of a unit string in the given dimension.
std::optional<double> si_factor(const std::string& unit, Dim dim) {
    switch (dim) {
        case Dim::Length: return lookup(unit, kLength);
        case Dim::Time: return lookup(unit, kTime);
        case Dim::Diffusion: {
            const auto slash = unit.find('/');
            if (slash == std::string::npos) return std::nullopt;
            std::string len = trim(unit.substr(0, slash));
            const std::string time = trim(unit.substr(slash + 1));
            if (len.ends_with("^2"))
                len.resize(len.size() - 2);
            else if (len.ends_with("2"))
                len.resize(len.size() - 1);
            else
                return std::nullopt;
            const auto l = lookup(len, kLength);
            const auto t = lookup(time, kTime);
            if (!l || !t) return std::nullopt;
            return *l * *l / *t;
        }
        case Dim::Frequency: {
            if (const auto hz = lookup(unit, kHertz)) return 2.0 * std::numbers::pi * *hz;
            if (unit.starts_with("rad/")) {
                const auto t = lookup(trim(unit.substr(4)), kTime);
                if (t) return 1.0 / *t;
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

const char* dim_name(Dim dim) {
    switch (dim) {
        case Dim::Length: return "length (m, cm, mm, um, nm, pm, A)";
        case Dim::Time: return "time (s, ms, us, ns, ps)";
        case Dim::Diffusion: return "diffusion (e.g. m^2/s, nm^2/ns)";
        case Dim::Frequency: return "angular frequency (rad/s, Hz, kHz, MHz, GHz)";
    }
    return "";
}

// A config value: bare number, or "<number> <unit>" converted to SI.
struct Quantity {
    double value = 0.0;
    bool has_unit = false;
};

[[noreturn]] void semantic(const std::string& key, const std::string& what) {
    throw Error(ErrorKind::ConfigSemantic, "'" + key + "': " + what);
}

[[noreturn]] void units_error(const std::string& key, const std::string& what) {
    throw Error(ErrorKind::ConfigUnits, "'" + key + "': " + what);
}

Quantity quantity(const json& v, const std::string& key, Dim dim) {
    if (v.is_number()) return {v.get<double>(), false};
    if (!v.is_string()) semantic(key, "expected a number or a string with units");
    const std::string text = trim(v.get<std::string>());
    if (text == "inf" || text == "infinity") return {std::numeric_limits<double>::infinity(), false};
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc()) semantic(key, "cannot read a number from \"" + text + "\"");
    const std::string unit = trim(std::string_view(ptr, text.data() + text.size() - ptr));
    if (unit.empty()) return {x, false};
    const auto f = si_factor(unit, dim);
    if (!f) units_error(key, "unit \"" + unit + "\" is not a " + dim_name(dim) + " unit");
    return {x * *f, true};
}

std::int64_t integer(const json& v, const std::string& key, std::int64_t min) {
    if (!v.is_number_integer() && !(v.is_number() && std::floor(v.get<double>()) == v.get<double>()))
        semantic(key, "expected an integer");
    const auto n = v.is_number_integer() ? v.get<std::int64_t>() : static_cast<std::int64_t>(v.get<double>());
    if (n < min) semantic(key, "must be at least " + std::to_string(min));
    return n;
}

double plain(const json& v, const std::string& key) {
    if (!v.is_number()) semantic(key, "expected a number");
    return v.get<double>();
}

void positive(double x, const std::string& key) {
    if (!(x > 0.0)) semantic(key, "must be positive");
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
    if (!obj.is_object()) semantic(prefix.empty() ? "(document)" : prefix, "expected an object");
    for (const auto& [k, _] : obj.items())
        if (!allowed.contains(k)) semantic(prefix.empty() ? k : prefix + "." + k, "unknown key");
}

std::string fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Converts lengths to units of d and times to units of T_D.
class Normalizer {
public:
    Normalizer(const json& doc) {
        if (doc.contains("d")) {
            d_ = quantity(doc["d"], "d", Dim::Length);
            positive(d_.value, "d");
        } else {
            d_ = {1.0, false};
        }
        if (doc.contains("D")) {
            const Quantity D = quantity(doc["D"], "D", Dim::Diffusion);
            positive(D.value, "D");
            if (!D.has_unit) units_error("D", "needs units such as \"1e-9 m^2/s\"; omit it for normalized input");
            if (!d_.has_unit) units_error("D", "a physical D needs a physical depth d");
            units_.D_m2_s = D.value;
        }
        if (d_.has_unit) units_.d_m = d_.value;
        if (units_.D_m2_s > 0.0) units_.T_D_s = units_.d_m * units_.d_m / units_.D_m2_s;
    }

    const UnitSystem& units() const { return units_; }

    double length(const json& v, const std::string& key) const {
        const Quantity q = quantity(v, key, Dim::Length);
        if (q.has_unit != d_.has_unit)
            units_error(key, d_.has_unit ? "needs a length unit because d has one"
                                         : "has a unit but d is a bare number");
        return q.value / d_.value;
    }

    double time(const json& v, const std::string& key) const {
        const Quantity q = quantity(v, key, Dim::Time);
        if (!q.has_unit) return q.value;
        if (!units_.physical_time()) units_error(key, "physical times need physical d and D");
        return q.value / units_.T_D_s;
    }

    double frequency(const json& v, const std::string& key) const {
        const Quantity q = quantity(v, key, Dim::Frequency);
        if (!q.has_unit) return q.value;
        if (!units_.physical_time()) units_error(key, "physical frequencies need physical d and D");
        return q.value * units_.T_D_s;
    }

private:
    Quantity d_;
    UnitSystem units_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string detail = e.what();
        if (const auto pos = detail.find(": "); pos != std::string::npos) detail = detail.substr(pos + 2);
        throw Error(ErrorKind::ConfigSyntax,
                    "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + detail);
    }
    check_keys(doc, {"command", "model", "R", "L", "d", "D", "tau_ev", "grid", "quadrature", "truncation", "mc",
                     "fisher", "map", "input", "output", "format", "seed", "threads"},
               "");

    RunConfig cfg;
    const Normalizer norm(doc);
    cfg.units = norm.units();

    if (doc.contains("command")) {
        if (!doc["command"].is_string()) semantic("command", "expected a string");
        cfg.command = doc["command"].get<std::string>();
        if (std::find(commands().begin(), commands().end(), cfg.command) == commands().end())
            semantic("command", "unknown command \"" + cfg.command + "\"");
    }
    if (doc.contains("model")) {
        if (!doc["model"].is_string()) semantic("model", "expected a string");
        try {
            cfg.model = parse_model_tag(doc["model"].get<std::string>());
        } catch (const Error&) {
            semantic("model", "unknown model \"" + doc["model"].get<std::string>() + "\"");
        }
    }

    const double R = doc.contains("R") ? norm.length(doc["R"], "R") : 1.0;
    const double L = doc.contains("L") ? norm.length(doc["L"], "L") : 1.0;
    positive(R, "R");
    positive(L, "L");
    cfg.geom = make_geometry(R, L, 1.0);

    if (doc.contains("tau_ev")) {
        cfg.fluid.tau_ev = norm.time(doc["tau_ev"], "tau_ev");
        positive(cfg.fluid.tau_ev, "tau_ev");
    }

    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        check_keys(g, {"t_min", "t_max", "points_per_decade"}, "grid");
        if (g.contains("t_min")) cfg.grid.t_min = norm.time(g["t_min"], "grid.t_min");
        if (g.contains("t_max")) cfg.grid.t_max = norm.time(g["t_max"], "grid.t_max");
        if (g.contains("points_per_decade"))
            cfg.grid.points_per_decade = static_cast<int>(integer(g["points_per_decade"], "grid.points_per_decade", 1));
    }
    positive(cfg.grid.t_min, "grid.t_min");
    if (!(cfg.grid.t_max > cfg.grid.t_min)) semantic("grid.t_max", "must exceed grid.t_min");

    if (doc.contains("quadrature")) {
        const json& q = doc["quadrature"];
        check_keys(q, {"nodes_per_panel", "ridge_width", "max_panel", "rel_tol", "estimate_error"}, "quadrature");
        auto& s = cfg.quadrature;
        if (q.contains("nodes_per_panel"))
            s.nodes_per_panel = static_cast<int>(integer(q["nodes_per_panel"], "quadrature.nodes_per_panel", 2));
        if (q.contains("ridge_width")) positive(s.ridge_width = plain(q["ridge_width"], "quadrature.ridge_width"), "quadrature.ridge_width");
        if (q.contains("max_panel")) positive(s.max_panel = plain(q["max_panel"], "quadrature.max_panel"), "quadrature.max_panel");
        if (q.contains("rel_tol")) positive(s.rel_tol = plain(q["rel_tol"], "quadrature.rel_tol"), "quadrature.rel_tol");
        if (q.contains("estimate_error")) {
            if (!q["estimate_error"].is_boolean()) semantic("quadrature.estimate_error", "expected true or false");
            s.estimate_error = q["estimate_error"].get<bool>();
        }
    }

    if (doc.contains("truncation")) {
        const json& t = doc["truncation"];
        check_keys(t, {"M", "P", "tau_min", "cap"}, "truncation");
        auto& s = cfg.truncation;
        if (t.contains("M")) s.M = static_cast<int>(integer(t["M"], "truncation.M", 0));
        if (t.contains("P")) s.P = static_cast<int>(integer(t["P"], "truncation.P", 0));
        if (t.contains("tau_min")) positive(s.tau_min = norm.time(t["tau_min"], "truncation.tau_min"), "truncation.tau_min");
        if (t.contains("cap")) s.cap = static_cast<int>(integer(t["cap"], "truncation.cap", 1));
        if ((s.M == 0) != (s.P == 0)) semantic("truncation", "set both M and P, or neither");
    }

    if (doc.contains("mc")) {
        const json& m = doc["mc"];
        check_keys(m, {"particles", "realizations", "dt"}, "mc");
        if (m.contains("particles")) cfg.mc.particles = static_cast<std::size_t>(integer(m["particles"], "mc.particles", 1));
        if (m.contains("realizations"))
            cfg.mc.realizations = static_cast<std::size_t>(integer(m["realizations"], "mc.realizations", 2));
        if (m.contains("dt")) positive(cfg.mc.dt = norm.time(m["dt"], "mc.dt"), "mc.dt");
    }

    if (doc.contains("fisher")) {
        const json& f = doc["fisher"];
        check_keys(f, {"delta", "T", "shot", "phi_rms", "points_per_decade"}, "fisher");
        auto& s = cfg.fisher.setup;
        if (f.contains("delta")) s.delta = norm.frequency(f["delta"], "fisher.delta");
        if (f.contains("T")) s.T = norm.time(f["T"], "fisher.T");
        if (f.contains("shot")) s.shot = norm.time(f["shot"], "fisher.shot");
        if (f.contains("phi_rms")) s.phi_rms = plain(f["phi_rms"], "fisher.phi_rms");
        if (f.contains("points_per_decade"))
            cfg.fisher.points_per_decade = static_cast<int>(integer(f["points_per_decade"], "fisher.points_per_decade", 1));
        positive(s.shot, "fisher.shot");
        if (!(s.T >= s.shot)) semantic("fisher.T", "must be at least fisher.shot");
        if (!(s.delta >= 0.0)) semantic("fisher.delta", "must be non-negative");
        positive(s.phi_rms, "fisher.phi_rms");
    }

    if (doc.contains("map")) {
        const json& m = doc["map"];
        check_keys(m, {"R_min", "R_max", "L_min", "L_max", "points"}, "map");
        auto& s = cfg.map;
        const std::pair<const char*, double*> bounds[] = {
            {"R_min", &s.R_min}, {"R_max", &s.R_max}, {"L_min", &s.L_min}, {"L_max", &s.L_max}};
        for (auto [key, field] : bounds) {
            if (m.contains(key)) *field = norm.length(m[key], std::string("map.") + key);
            positive(*field, std::string("map.") + key);
        }
        if (m.contains("points")) s.points = static_cast<int>(integer(m["points"], "map.points", 2));
        if (!(s.R_max >= s.R_min)) semantic("map.R_max", "must be at least map.R_min");
        if (!(s.L_max >= s.L_min)) semantic("map.L_max", "must be at least map.L_min");
    }

    auto string_field = [&](const char* key, std::string& out) {
        if (!doc.contains(key)) return;
        if (!doc[key].is_string()) semantic(key, "expected a string");
        out = doc[key].get<std::string>();
    };
    string_field("input", cfg.input);
    string_field("output", cfg.output);
    if (doc.contains("format")) {
        std::string f;
        string_field("format", f);
        if (f == "csv")
            cfg.format = OutputFormat::Csv;
        else if (f == "json")
            cfg.format = OutputFormat::Json;
        else
            semantic("format", "expected \"csv\" or \"json\"");
    }
    if (doc.contains("seed")) cfg.seed = static_cast<std::uint64_t>(integer(doc["seed"], "seed", 0));
    cfg.threads = doc.contains("threads") ? static_cast<int>(integer(doc["threads"], "threads", 1)) : default_threads();

    json hashed = doc;
    hashed.erase("threads");
    cfg.config_hash = fnv1a(hashed.dump());
    return cfg;
}

std::string describe_units(const RunConfig& config) {
    json u;
    const auto& s = config.units;
    if (s.physical_length())
        u["d_m"] = s.d_m;
    else
        u["d"] = "normalized";
    if (s.physical_time()) {
        u["D_m2_s"] = s.D_m2_s;
        u["T_D_s"] = s.T_D_s;
    } else {
        u["T_D"] = 1.0;
    }
    return u.dump();
}

}  // namespace nanonmr::cli
