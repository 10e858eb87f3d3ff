#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "nanonmr/cli.hpp"
#include "nanonmr/error.hpp"
#include "nanonmr/freediff.hpp"
#include "nanonmr/montecarlo.hpp"
#include "nanonmr/parallel.hpp"

namespace nanonmr::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void bad_model(const RunConfig& c) {
    throw Error(ErrorKind::ConfigSemantic,
                "'model': '" + std::string(to_string(c.model)) + "' is not available for " + c.command);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return out;
}

CorrelationSeries analytic_series(const RunConfig& c, const std::vector<double>& times) {
    CorrelationSeries s;
    switch (c.model) {
        case ModelTag::Reflective:
            s = evaporating_series(times, build_mode_table(c.geom, kInf, c.truncation, {}, c.threads));
            break;
        case ModelTag::Evaporating:
            s = evaporating_series(times, build_mode_table(c.geom, c.fluid.tau_ev, c.truncation, {}, c.threads));
            break;
        case ModelTag::Sticky:
            s = sticky_series(times, c.geom, c.quadrature, c.threads);
            break;
        case ModelTag::Free: {
            // Half-space amplitude pi/(4 d^3), the same normalization as the
            // free Monte Carlo mode.
            s.model = ModelTag::Free;
            s.fluid.tau_ev = kInf;
            for (double t : times) s.push(t, std::numbers::pi / 4.0 * g_free(t), 0.0);
            break;
        }
        default:
            bad_model(c);
    }
    s.geom = c.geom;
    s.seed = c.seed;
    return s;
}

MCWall wall_of(const RunConfig& c) {
    switch (c.model) {
        case ModelTag::Reflective: return MCWall::Reflective;
        case ModelTag::Sticky: return MCWall::Sticky;
        case ModelTag::Evaporating: return MCWall::Evaporating;
        case ModelTag::Free: return MCWall::Free;
        default: bad_model(c);
    }
}

MCResult run_mc(const RunConfig& c) {
    MCConfig m;
    m.particles = c.mc.particles;
    m.realizations = c.mc.realizations;
    m.dt = c.mc.dt;
    m.times = log_time_grid(c.grid.t_min, c.grid.t_max, c.grid.points_per_decade);
    m.wall = wall_of(c);
    m.seed = c.seed;
    return simulate_correlation(m, c.geom, c.fluid, c.threads);
}

json geometry_json(const RunConfig& c) {
    return {{"R", c.geom.R}, {"L", c.geom.L}, {"d", c.geom.d}, {"tau_ev", fmt(c.fluid.tau_ev)}};
}

struct Artifact {
    std::string text;
    json summary;
};

Artifact cmd_correlate(const RunConfig& c) {
    const auto s = analytic_series(c, log_time_grid(c.grid.t_min, c.grid.t_max, c.grid.points_per_decade));
    return {format_series(s, c.format, provenance_of(c)),
            {{"model", to_string(s.model)}, {"points", s.size()}, {"G_first", s.g.front()}, {"G_last", s.g.back()}}};
}

Artifact cmd_eigen(const RunConfig& c) {
    double tau_ev = c.fluid.tau_ev;
    if (c.model == ModelTag::Reflective)
        tau_ev = kInf;
    else if (c.model != ModelTag::Evaporating)
        bad_model(c);
    const auto table = build_mode_table(c.geom, tau_ev, c.truncation, {}, c.threads);
    Table out;
    out.meta = {"R=" + fmt(c.geom.R), "L=" + fmt(c.geom.L), "d=" + fmt(c.geom.d),
                "tau_ev=" + fmt(tau_ev), "eta0=" + fmt(table.eta0), "M=" + std::to_string(table.M),
                "P=" + std::to_string(table.P), "b_rms2=" + fmt(table.b_rms2),
                "weight_sum=" + fmt(table.weight_sum)};
    out.columns = {"parity", "m", "p", "eta", "beta", "tau", "weight", "norm", "mass"};
    for (const auto& mode : table.modes)
        out.rows.push_back({double(mode.parity), double(mode.m), double(mode.p), mode.eta, mode.beta, mode.tau,
                            mode.weight, mode.norm, mode.mass});
    return {format_table(out, c.format, provenance_of(c)),
            {{"modes", table.modes.size()},
             {"tau00", table.dominant().tau},
             {"completeness", table.weight_sum / table.b_rms2}}};
}

Table map_header(const RunConfig& c, std::vector<std::string> columns) {
    Table t;
    t.meta = {"d=" + fmt(c.geom.d), "points=" + std::to_string(c.map.points)};
    if (c.units.physical_length()) {
        t.meta.push_back("d_m=" + fmt(c.units.d_m));
        columns.insert(columns.begin() + 2, {"R_m", "L_m"});
    }
    t.columns = std::move(columns);
    return t;
}

void push_coords(std::vector<double>& row, const RunConfig& c, double R, double L) {
    row.push_back(R);
    row.push_back(L);
    if (c.units.physical_length()) {
        row.push_back(R * c.units.d_m);
        row.push_back(L * c.units.d_m);
    }
}

Artifact cmd_plateau_map(const RunConfig& c) {
    Table out = map_header(c, {"R_over_d", "L_over_d", "plateau_ideal", "plateau_sticky", "ratio"});
    const auto Rs = linspace(c.map.R_min, c.map.R_max, c.map.points);
    const auto Ls = linspace(c.map.L_min, c.map.L_max, c.map.points);
    out.rows.resize(Rs.size() * Ls.size());
    parallel_for(out.rows.size(), c.threads, [&](std::size_t k) {
        const double R = Rs[k / Ls.size()], L = Ls[k % Ls.size()];
        const auto g = make_geometry(R, L, 1.0);
        auto& row = out.rows[k];
        push_coords(row, c, R, L);
        for (double v : {plateau_ideal(g), plateau_sticky(g), plateau_ratio(g)}) row.push_back(v);
    });
    double lo = kInf, hi = -kInf;
    for (const auto& r : out.rows) {
        lo = std::min(lo, r.back());
        hi = std::max(hi, r.back());
    }
    return {format_table(out, c.format, provenance_of(c)),
            {{"ratio_min", lo}, {"ratio_max", hi}, {"contains_ratio_one", lo < 1.0 && hi > 1.0}}};
}

Artifact cmd_dominance_map(const RunConfig& c) {
    if (std::isinf(c.fluid.tau_ev)) throw Error(ErrorKind::ConfigSemantic, "'tau_ev': dominance-map needs a finite value");
    Table out = map_header(c, {"R_over_d", "L_over_d", "tau00", "tau_approx", "rel_diff",
                                                "tau_second", "gap", "runner_up_odd_axial", "eta0R", "eta0L"});
    out.meta.push_back("tau_ev=" + fmt(c.fluid.tau_ev));
    const auto Rs = linspace(c.map.R_min, c.map.R_max, c.map.points);
    const auto Ls = linspace(c.map.L_min, c.map.L_max, c.map.points);
    const double eta0 = 1.0 / c.fluid.tau_ev;
    out.rows.resize(Rs.size() * Ls.size());
    parallel_for(out.rows.size(), c.threads, [&](std::size_t k) {
        const double R = Rs[k / Ls.size()], L = Ls[k % Ls.size()];
        const auto g = make_geometry(R, L, 1.0);
        const Dominance dom = mode_dominance(g, c.fluid.tau_ev);
        const double approx = tau_dominant_approx(g, c.fluid.tau_ev);
        auto& row = out.rows[k];
        push_coords(row, c, R, L);
        for (double v : {dom.tau00, approx, (approx - dom.tau00) / dom.tau00, dom.tau_second, dom.gap,
                         dom.runner_up == RunnerUp::OddAxial ? 1.0 : 0.0, eta0 * R, eta0 * L})
            row.push_back(v);
    });
    return {format_table(out, c.format, provenance_of(c)), {{"cells", out.rows.size()}}};
}

Artifact cmd_fisher(const RunConfig& c) {
    const FisherSetup& setup = c.fisher.setup;
    setup.validate();
    json summary;
    Table out;
    out.meta = {"model=" + std::string(to_string(c.model)), "delta=" + fmt(setup.delta),
                "T=" + fmt(setup.T), "shot=" + fmt(setup.shot), "phi_rms=" + fmt(setup.phi_rms)};
    out.columns = {"direct", "closed_full", "closed_dominant", "closed_long_time", "closed_valid", "sticky_over_free",
                   "evap_over_free", "sticky_valid", "evap_valid"};
    double direct = 0.0;
    if (setup.T >= 2.0 * setup.shot) {
        const auto times = log_time_grid(setup.shot, setup.T, c.fisher.points_per_decade);
        direct = fisher_direct(setup, analytic_series(c, times), c.threads);
    }
    FisherClosed closed{kNaN, kNaN, false, false};
    FisherRatios ratios{kNaN, kNaN, false, false};
    if (std::isfinite(c.fluid.tau_ev)) {
        closed = fisher_evap_closed(setup, simple_model_params(c.geom, c.fluid.tau_ev));
        ratios = fisher_ratios(setup, c.geom, c.fluid);
    }
    out.rows.push_back({direct, closed.full, closed.dominant, double(closed.long_time), double(closed.valid_regime),
                        ratios.sticky_free, ratios.evap_free, double(ratios.sticky_valid), double(ratios.evap_valid)});
    summary = {{"direct", direct}, {"closed_full", closed.full}, {"sticky_over_free", ratios.sticky_free},
               {"evap_over_free", ratios.evap_free}};
    return {format_table(out, c.format, provenance_of(c)), summary};
}

Artifact cmd_fit(const RunConfig& c) {
    if (c.input.empty()) throw Error(ErrorKind::ConfigSemantic, "'input': fit needs a series file");
    const CorrelationSeries data = read_series(c.input);
    const SimpleModelFit fit = fit_simple_model(data);
    CorrelationSeries curve;
    curve.model = ModelTag::Fitted;
    curve.geom = data.geom;
    curve.fluid = data.fluid;
    curve.seed = data.seed;
    for (double t : data.t) curve.push(t, g_simple_model(t, fit.params), 0.0);
    const auto& p = fit.params;
    json summary = {{"b_rms2", p.b_rms2},
                    {"tau_v", p.tau_v},
                    {"plateau", p.plateau},
                    {"tau_ev_eff", p.tau_ev_eff},
                    {"rel_err", {fit.sensitivity[0], fit.sensitivity[1], fit.sensitivity[2], fit.sensitivity[3]}},
                    {"residual", fit.residual},
                    {"evaluations", fit.evaluations},
                    // D in units of the D that defined T_D for the input times.
                    {"D_over_D_ref", volume_time(p.plateau) / p.tau_v}};
    if (c.units.physical_time()) {
        summary["tau_v_s"] = p.tau_v * c.units.T_D_s;
        summary["D_m2_s"] = estimate_diffusion(p.tau_v * c.units.T_D_s, c.units.d_m, p.plateau);
    }
    return {format_series(curve, c.format, provenance_of(c)), summary};
}

Artifact cmd_mc(const RunConfig& c) {
    const MCResult res = run_mc(c);
    json survival = json::array();
    for (double s : res.survival.g) survival.push_back(s);
    return {format_series(res.correlation, c.format, provenance_of(c)),
            {{"wall", to_string(res.config.wall)},
             {"particles_total", res.config.particles * res.config.realizations},
             {"survival", survival}}};
}

Artifact cmd_compare(const RunConfig& c) {
    const MCResult res = run_mc(c);
    const auto ref = analytic_series(c, res.correlation.t);
    Table out;
    out.meta = {"model=" + std::string(to_string(c.model)), "R=" + fmt(c.geom.R),
                "L=" + fmt(c.geom.L), "d=" + fmt(c.geom.d), "tau_ev=" + fmt(c.fluid.tau_ev),
                "seed=" + std::to_string(c.seed)};
    out.columns = {"t_over_TD", "G_model", "err_model", "G_mc", "err_mc", "z"};
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double se = std::hypot(ref.err[i], res.correlation.err[i]);
        const double z = (res.correlation.g[i] - ref.g[i]) / se;
        worst = std::max(worst, std::abs(z));
        out.rows.push_back({ref.t[i], ref.g[i], ref.err[i], res.correlation.g[i], res.correlation.err[i], z});
    }
    return {format_table(out, c.format, provenance_of(c)), {{"max_abs_z", worst}, {"points", ref.size()}}};
}

}  // namespace

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigSyntax:
        case ErrorKind::ConfigSemantic:
        case ErrorKind::ConfigUnits: return 2;
        case ErrorKind::Io: return 3;
        case ErrorKind::Series: return 4;
        default: return 1;
    }
}

RunOutcome run_command(const RunConfig& config) {
    RunOutcome out;
    json report = {{"command", config.command}};
    try {
        Artifact a;
        const std::string& cmd = config.command;
        if (cmd == "correlate") a = cmd_correlate(config);
        else if (cmd == "eigen") a = cmd_eigen(config);
        else if (cmd == "plateau-map") a = cmd_plateau_map(config);
        else if (cmd == "dominance-map") a = cmd_dominance_map(config);
        else if (cmd == "fisher") a = cmd_fisher(config);
        else if (cmd == "fit") a = cmd_fit(config);
        else if (cmd == "mc") a = cmd_mc(config);
        else if (cmd == "compare") a = cmd_compare(config);
        else throw Error(ErrorKind::ConfigSemantic, "'command': unknown command \"" + cmd + "\"");
        if (config.output.empty())
            out.artifact = std::move(a.text);
        else
            write_artifact(config.output, a.text);
        report["status"] = "ok";
        report["units"] = json::parse(describe_units(config));
        report["geometry"] = geometry_json(config);
        report["seed"] = config.seed;
        report["config_hash"] = config.config_hash;
        if (!config.output.empty()) report["output"] = config.output;
        report["result"] = std::move(a.summary);
    } catch (const Error& e) {
        out.status = exit_code(e.kind());
        report["status"] = "error";
        report["kind"] = to_string(e.kind());
        report["message"] = e.what();
    } catch (const std::exception& e) {
        out.status = 1;
        report["status"] = "error";
        report["kind"] = "internal";
        report["message"] = e.what();
    }
    out.report = report.dump();
    return out;
}

}  // namespace nanonmr::cli
