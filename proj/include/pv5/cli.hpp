#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pv5/contour.hpp"
#include "pv5/monodromy.hpp"
#include "pv5/painleve.hpp"
#include "pv5/random_state.hpp"
#include "pv5/tau.hpp"

namespace pv5 {

using json = nlohmann::json;

// -------------------------------------------------------------------------
// Config
// -------------------------------------------------------------------------

/// A run configuration. Complex numbers are [re, im] arrays in the JSON
/// (a bare number is accepted as a real). Exactly one of the builder inputs
/// (a0, b, e) or explicit matrices (B0, B1) must be present.
struct RunConfig {
    ThetaTripleC theta;
    bool use_builder = true;
    Cpx a0, b, e;
    Mat2c B0, B1;
    Cpx t0;
    PathSpec path;
    IntegratorConfig integrator;
    std::uint64_t seed = 1;
    int verify_count = 1000;
    int verify_zsamples = 20;
    bool verify_break_rhs = false;  // negative-control hook
    int monodromy_samples = 5;
    double u_cap = 20.0;            // window cap for the PV residual table
};

namespace detail {

inline Cpx parse_cpx(const json& j, const char* what) {
    if (j.is_number()) return Cpx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Cpx(j[0].get<double>(), j[1].get<double>());
    throw Error(ErrorCode::BadConfig, std::string(what) + " must be [re, im]");
}

inline Mat2c parse_mat(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
        !j[1].is_array() || j[1].size() != 2)
        throw Error(ErrorCode::BadConfig, std::string(what) + " must be a 2x2 matrix");
    return {parse_cpx(j[0][0], what), parse_cpx(j[0][1], what), parse_cpx(j[1][0], what),
            parse_cpx(j[1][1], what)};
}

inline json cpx_json(Cpx z) { return json::array({z.real(), z.imag()}); }

inline json mat_json(const Mat2c& m) {
    return json::array({json::array({cpx_json(m.a11), cpx_json(m.a12)}),
                        json::array({cpx_json(m.a21), cpx_json(m.a22)})});
}

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

inline RunConfig parse_config(const json& j) {
    RunConfig cfg;
    if (!j.contains("theta") || !j["theta"].is_array() || j["theta"].size() != 3)
        throw Error(ErrorCode::BadConfig, "theta must be three [re, im] pairs");
    cfg.theta.theta0 = detail::parse_cpx(j["theta"][0], "theta[0]");
    cfg.theta.theta1 = detail::parse_cpx(j["theta"][1], "theta[1]");
    cfg.theta.theta_inf = detail::parse_cpx(j["theta"][2], "theta[2]");
    require_valid_theta(cfg.theta);

    if (!j.contains("t0")) throw Error(ErrorCode::BadConfig, "t0 missing");
    cfg.t0 = detail::parse_cpx(j["t0"], "t0");
    if (cfg.t0 == Cpx(0.0)) throw Error(ErrorCode::ZeroBasePoint, "t0 is zero");

    if (!j.contains("initial") || !j["initial"].is_object())
        throw Error(ErrorCode::BadConfig, "initial section missing");
    const json& ini = j["initial"];
    const bool builder = ini.contains("a0") || ini.contains("b") || ini.contains("e");
    const bool explicit_mats = ini.contains("B0") || ini.contains("B1");
    if (builder == explicit_mats)
        throw Error(ErrorCode::BadConfig,
                    "initial must hold either builder inputs a0,b,e or matrices B0,B1");
    cfg.use_builder = builder;
    if (builder) {
        if (!ini.contains("a0") || !ini.contains("b") || !ini.contains("e"))
            throw Error(ErrorCode::BadConfig, "builder initial needs a0, b and e");
        cfg.a0 = detail::parse_cpx(ini["a0"], "a0");
        cfg.b = detail::parse_cpx(ini["b"], "b");
        cfg.e = detail::parse_cpx(ini["e"], "e");
    } else {
        if (!ini.contains("B0") || !ini.contains("B1"))
            throw Error(ErrorCode::BadConfig, "explicit initial needs B0 and B1");
        cfg.B0 = detail::parse_mat(ini["B0"], "B0");
        cfg.B1 = detail::parse_mat(ini["B1"], "B1");
    }

    if (!j.contains("path") || !j["path"].is_array() || j["path"].empty())
        throw Error(ErrorCode::BadConfig, "path must be a waypoint list");
    for (const auto& w : j["path"]) cfg.path.waypoints.push_back(detail::parse_cpx(w, "waypoint"));
    validate_path(cfg.path);
    if (std::abs(cfg.path.waypoints.front() - cfg.t0) > 1e-12 * std::max(1.0, std::abs(cfg.t0)))
        throw Error(ErrorCode::BadConfig, "path must start at t0");

    if (j.contains("integrator")) {
        const json& it = j["integrator"];
        if (it.contains("rtol")) cfg.integrator.rtol = it["rtol"].get<double>();
        if (it.contains("atol")) cfg.integrator.atol = it["atol"].get<double>();
        if (it.contains("max_step")) cfg.integrator.max_step = it["max_step"].get<double>();
        if (it.contains("min_step")) cfg.integrator.min_step = it["min_step"].get<double>();
        if (it.contains("dense_spacing"))
            cfg.integrator.dense_spacing = it["dense_spacing"].get<double>();
        if (it.contains("blowup_threshold"))
            cfg.integrator.blowup_threshold = it["blowup_threshold"].get<double>();
    }
    cfg.integrator.validate();

    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("verify")) {
        const json& v = j["verify"];
        if (v.contains("count")) cfg.verify_count = v["count"].get<int>();
        if (v.contains("zsamples")) cfg.verify_zsamples = v["zsamples"].get<int>();
        if (v.contains("break_rhs")) cfg.verify_break_rhs = v["break_rhs"].get<bool>();
    }
    if (j.contains("monodromy")) {
        const json& m = j["monodromy"];
        if (m.contains("samples")) cfg.monodromy_samples = m["samples"].get<int>();
    }
    if (j.contains("u_cap")) cfg.u_cap = j["u_cap"].get<double>();
    return cfg;
}

inline RunConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::BadConfig, "cannot open config file " + file);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadConfig, std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline SystemStateC initial_state(const RunConfig& cfg) {
    if (cfg.use_builder) return build_state(cfg.theta, cfg.a0, cfg.b, cfg.e, cfg.t0);
    SystemStateC st{cfg.t0, cfg.B0, cfg.B1, cfg.theta};
    if (!state_is_valid(st, 1e-8))
        throw Error(ErrorCode::BadConfig,
                    "explicit B0, B1 violate the spectral or normalization constraints");
    return st;
}

// -------------------------------------------------------------------------
// Writers
// -------------------------------------------------------------------------

namespace detail {

inline void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::BadConfig, "cannot write " + file.string());
    out << text;
}

inline void write_json(const std::filesystem::path& file, const json& j) {
    write_text(file, j.dump(2) + "\n");
}

} // namespace detail

inline void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj) {
    const auto trace = u_trace(traj);
    std::string out = "# pv5-trajectory v1\n";
    out += "arclen,t_re,t_im";
    for (const char* m : {"b0", "b1"})
        for (const char* e : {"11", "12", "21", "22"}) {
            out += ",";
            out += m;
            out += "_";
            out += e;
            out += "_re,";
            out += m;
            out += "_";
            out += e;
            out += "_im";
        }
    out += ",u_re,u_im,lntau_re,lntau_im,dlntau_re,dlntau_im\n";

    const double qnan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const DenseSample& s = traj.samples[i];
        const Cpx u = trace.values[i] ? *trace.values[i] : Cpx(qnan, qnan);
        const Cpx cells[] = {s.t,      s.B0.a11, s.B0.a12, s.B0.a21, s.B0.a22, s.B1.a11,
                             s.B1.a12, s.B1.a21, s.B1.a22, u,        s.lntau,  s.dlntau};
        out += detail::fmt17(s.arclen);
        for (const Cpx& c : cells) {
            out += ",";
            out += detail::fmt17(c.real());
            out += ",";
            out += detail::fmt17(c.imag());
        }
        out += "\n";
    }
    detail::write_text(file, out);
}

struct PVResidualSummary {
    double max_abs_eligible = 0.0;  // over windows with |u| <= u_cap
    double max_rel_eligible = 0.0;
    std::size_t eligible = 0;
    std::size_t skipped = 0;  // windows hitting u poles/singular values
    json table = json::array();
};

inline PVResidualSummary pv_residual_summary(const Trajectory& traj, double u_cap) {
    PVResidualSummary sum;
    for (std::size_t seg = 0; seg < traj.segment_grid.size(); ++seg) {
        const auto& grid = traj.segment_grid[seg];
        for (std::size_t p = 2; p + 2 < grid.size(); ++p) {
            try {
                const auto rep = pv_residual(traj, grid[p], 5);
                bool eligible = true;
                for (std::size_t q = p - 2; q <= p + 2 && eligible; ++q)
                    eligible = std::abs(u_of_state(traj.state_at(grid[q]))) <= u_cap;
                if (!eligible) {
                    ++sum.skipped;
                    continue;
                }
                ++sum.eligible;
                sum.max_abs_eligible = std::max(sum.max_abs_eligible, rep.absolute);
                sum.max_rel_eligible = std::max(sum.max_rel_eligible, rep.relative);
                sum.table.push_back(json::array(
                    {rep.t.real(), rep.t.imag(), rep.absolute, rep.relative}));
            } catch (const Error&) {
                ++sum.skipped;
            }
        }
    }
    return sum;
}

inline void write_pv_residual_csv(const std::filesystem::path& file,
                                  const PVResidualSummary& sum) {
    std::string out = "# pv5-pv-residual v1\nt_re,t_im,abs_residual,rel_residual\n";
    for (const auto& row : sum.table) {
        out += detail::fmt17(row[0].get<double>()) + "," + detail::fmt17(row[1].get<double>()) +
               "," + detail::fmt17(row[2].get<double>()) + "," +
               detail::fmt17(row[3].get<double>()) + "\n";
    }
    detail::write_text(file, out);
}

inline json config_echo(const RunConfig& cfg) {
    json j;
    j["theta"] = json::array({detail::cpx_json(cfg.theta.theta0),
                              detail::cpx_json(cfg.theta.theta1),
                              detail::cpx_json(cfg.theta.theta_inf)});
    j["t0"] = detail::cpx_json(cfg.t0);
    json wps = json::array();
    for (const Cpx& w : cfg.path.waypoints) wps.push_back(detail::cpx_json(w));
    j["path"] = wps;
    j["integrator"] = {{"rtol", cfg.integrator.rtol},
                       {"atol", cfg.integrator.atol},
                       {"max_step", cfg.integrator.max_step},
                       {"min_step", cfg.integrator.min_step},
                       {"dense_spacing", cfg.integrator.dense_spacing},
                       {"blowup_threshold", cfg.integrator.blowup_threshold}};
    j["seed"] = cfg.seed;
    return j;
}

inline void write_error_report(const std::filesystem::path& out_dir, const Error& e) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    json j;
    j["schema"] = "pv5-report/1";
    j["error"] = {{"code", code_name(e.code())}, {"message", e.what()}};
    detail::write_json(out_dir / "report.json", j);
}

// -------------------------------------------------------------------------
// Runners (exit-code contract: 0 ok, 1 config/runtime error, 2 blow-up,
// 3 verification failure)
// -------------------------------------------------------------------------

inline int run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const SystemStateC st = initial_state(cfg);
    const Trajectory traj = integrate_path(st, cfg.path, cfg.integrator);

    write_trajectory_csv(out_dir / "trajectory.csv", traj);

    json rep;
    rep["schema"] = "pv5-report/1";
    rep["config"] = config_echo(cfg);
    rep["status"] = traj.status == TerminalStatus::completed ? "completed" : "blow_up";
    rep["samples"] = traj.samples.size();

    const auto drifts = trajectory_drifts(traj);
    rep["invariant_drifts"] = {{"tr_b0", drifts.tr_b0},
                               {"det_b0", drifts.det_b0},
                               {"tr_b1", drifts.tr_b1},
                               {"det_b1", drifts.det_b1},
                               {"diag_sum", drifts.diag_sum}};
    rep["lntau_final"] = detail::cpx_json(traj.samples.back().lntau);

    const auto pv = pv_residual_summary(traj, cfg.u_cap);
    rep["pv_residual"] = {{"u_cap", cfg.u_cap},
                          {"eligible_samples", pv.eligible},
                          {"skipped_windows", pv.skipped},
                          {"max_abs_eligible", pv.max_abs_eligible},
                          {"max_rel_eligible", pv.max_rel_eligible}};
    write_pv_residual_csv(out_dir / "pv_residual.csv", pv);

    const auto trace = u_trace(traj);
    json events = json::array();
    for (const auto& ev : trace.events)
        events.push_back({{"index", ev.index},
                          {"blow_up_related", ev.blow_up_related},
                          {"factor", ev.factor}});
    rep["u_events"] = events;

    if (traj.blow_up) {
        const auto& ev = *traj.blow_up;
        json b;
        b["t_stop"] = detail::cpx_json(ev.t_stop);
        b["indicator"] = ev.indicator;
        b["min_step_achieved"] = ev.min_step_achieved;
        b["last_step"] = ev.last_step;
        b["refined"] = ev.refined;
        b["t_star_estimate"] = detail::cpx_json(ev.t_star_estimate);
        b["t_star_error"] = ev.t_star_error;
        rep["blow_up"] = b;
        try {
            const auto est = locate_theta_point(traj);
            const auto cert = simple_zero_fit(traj, est.t_star);
            rep["zero_certificate"] = {
                {"t_star", detail::cpx_json(cert.t_star)},
                {"slope", detail::cpx_json(cert.slope)},
                {"linear_coefficient", detail::cpx_json(cert.linear_coefficient)},
                {"fit_residual", cert.fit_residual},
                {"points_used", cert.points_used}};
        } catch (const Error& e) {
            rep["zero_certificate"] = {{"error", {{"code", code_name(e.code())},
                                                  {"message", e.what()}}}};
        }
    } else {
        rep["blow_up"] = nullptr;
    }

    detail::write_json(out_dir / "report.json", rep);
    return traj.status == TerminalStatus::blow_up ? 2 : 0;
}

inline int run_verify(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.verify_count <= 0)
        throw Error(ErrorCode::BadConfig, "verify.count must be positive");
    if (cfg.verify_zsamples <= 0)
        throw Error(ErrorCode::BadConfig, "verify.zsamples must be positive");
    std::filesystem::create_directories(out_dir);

    RandomStateGen gen(cfg.seed);
    struct Gate {
        const char* name;
        double threshold;
        double worst = 0.0;
    };
    Gate gates[] = {{"ZERO_CURVATURE", 1e-12}, {"MIWA_CONTOUR", 1e-10},
                    {"XI_RESIDUE", 1e-12},     {"COORDINATE_RELATION", 1e-12},
                    {"TR_B1_SQUARED", 1e-13},  {"GAUGE_INVARIANCE_U", 1e-14}};

    for (int i = 0; i < cfg.verify_count; ++i) {
        const auto st = gen.state();

        std::vector<Cpx> zs;
        for (int k = 0; k < cfg.verify_zsamples; ++k) {
            const double phi = gen.range(-std::numbers::pi, std::numbers::pi);
            zs.push_back(10.0 * Cpx(std::cos(phi), std::sin(phi)));
        }
        if (cfg.verify_break_rhs) {
            const auto [dB0, dB1] = deformation_rhs_flipped(st);
            for (const Cpx& z : zs)
                gates[0].worst = std::max(
                    gates[0].worst, frobenius_norm(zero_curvature_residual(st, dB0, dB1, z)));
        } else {
            gates[0].worst = std::max(gates[0].worst, verify_zero_curvature(st, zs));
        }

        const Cpx miwa = miwa_residue(st);
        const Cpx quad = contour_half_tr_B2_residue(st);
        gates[1].worst = std::max(gates[1].worst,
                                  std::abs(miwa - quad) / std::max(1.0, std::abs(miwa)));

        const auto [lhs, rhs] = xi_residue_identity(st);
        gates[2].worst =
            std::max(gates[2].worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));

        gates[3].worst = std::max(gates[3].worst, coordinate_relation_check(st));

        const Cpx expect = st.theta.theta1 * st.theta.theta1 * 0.5;
        gates[4].worst =
            std::max(gates[4].worst,
                     std::abs(tr_B1_squared(st) - expect) / std::max(1.0, std::abs(expect)));

        try {
            const Cpx u = u_of_state(st);
            const Cpx ug = u_of_state(gauge_conjugate(st, Cpx(2.0), Cpx(3.0)));
            gates[5].worst =
                std::max(gates[5].worst, std::abs(u - ug) / std::max(1.0, std::abs(u)));
        } catch (const Error&) {
            // exact denominator zero: u undefined for this draw, skip
        }
    }

    json rep;
    rep["schema"] = "pv5-verify/1";
    rep["seed"] = cfg.seed;
    rep["count"] = cfg.verify_count;
    rep["zsamples"] = cfg.verify_zsamples;
    rep["break_rhs"] = cfg.verify_break_rhs;
    bool all_pass = true;
    std::string first_fail;
    json ids;
    for (const Gate& g : gates) {
        const bool pass = g.worst < g.threshold;
        ids[g.name] = {{"max_deviation", g.worst}, {"threshold", g.threshold}, {"pass", pass}};
        if (!pass && first_fail.empty()) first_fail = g.name;
        all_pass = all_pass && pass;
    }
    rep["identities"] = ids;
    rep["all_pass"] = all_pass;
    if (!all_pass) rep["failed"] = first_fail;
    detail::write_json(out_dir / "verify.json", rep);
    if (!all_pass) {
        std::fprintf(stderr, "verify: identity %s exceeded its threshold\n", first_fail.c_str());
        return 3;
    }
    return 0;
}

inline int run_monodromy(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.monodromy_samples < 1)
        throw Error(ErrorCode::BadConfig, "monodromy.samples must be at least 1");
    std::filesystem::create_directories(out_dir);
    const SystemStateC st = initial_state(cfg);

    const auto rep0 = monodromy_invariants(st, cfg.integrator);
    json rep;
    rep["schema"] = "pv5-monodromy/1";
    rep["config"] = config_echo(cfg);
    rep["at_t0"] = {{"t", detail::cpx_json(rep0.t)},
                    {"M0", detail::mat_json(rep0.M0)},
                    {"Mt", detail::mat_json(rep0.Mt)},
                    {"tr_M0", detail::cpx_json(rep0.tr_M0)},
                    {"tr_Mt", detail::cpx_json(rep0.tr_Mt)},
                    {"tr_M0Mt", detail::cpx_json(rep0.tr_M0Mt)},
                    {"det_M0_deviation", std::abs(det(rep0.M0) - 1.0)},
                    {"det_Mt_deviation", std::abs(det(rep0.Mt) - 1.0)},
                    {"accuracy", rep0.accuracy}};
    // Only the Fuchsian-loop invariants are certified; Stokes data at the
    // irregular point is outside this report.
    rep["certificate_scope"] = "fuchsian_conjugation_invariants_only";

    int exit_code = 0;
    const Trajectory traj = integrate_path(st, cfg.path, cfg.integrator);
    if (traj.status == TerminalStatus::blow_up) {
        rep["drift"] = nullptr;
        rep["note"] = "path hits the Theta divisor; drift not computed";
        exit_code = 2;
    } else {
        std::vector<std::size_t> idx;
        const int k = cfg.monodromy_samples;
        for (int s = 0; s < k; ++s)
            idx.push_back(std::size_t(double(s) * double(traj.samples.size() - 1) /
                                      std::max(1, k - 1)));
        if (k == 1) idx = {0};
        const double drift = isomonodromy_drift(traj, idx, cfg.integrator);
        json ts = json::array();
        for (const std::size_t i : idx) ts.push_back(detail::cpx_json(traj.samples[i].t));
        rep["drift"] = {{"samples", ts}, {"max_invariant_drift", drift}};
    }
    detail::write_json(out_dir / "monodromy.json", rep);
    return exit_code;
}

inline int run_tau_zeros(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const SystemStateC st = initial_state(cfg);
    const Trajectory traj = integrate_path(st, cfg.path, cfg.integrator);

    json rep;
    rep["schema"] = "pv5-tauzeros/1";
    rep["config"] = config_echo(cfg);
    if (traj.status == TerminalStatus::completed) {
        rep["status"] = "no_zero_on_path";
        rep["lntau_final"] = detail::cpx_json(traj.samples.back().lntau);
        detail::write_json(out_dir / "tauzeros.json", rep);
        return 0;
    }

    rep["status"] = "blow_up";
    rep["t_stop"] = detail::cpx_json(traj.blow_up->t_stop);
    try {
        const auto est = locate_theta_point(traj);
        const auto cert = simple_zero_fit(traj, est.t_star);
        rep["zero"] = {
            {"t_star", detail::cpx_json(est.t_star)},
            {"error_estimate", est.error_estimate},
            {"channel",
             est.channel == ThetaPointEstimate::Channel::entry ? "entry" : "log_residue"},
            {"residue_coefficient", detail::cpx_json(est.coefficient)},
            {"certificate",
             {{"slope", detail::cpx_json(cert.slope)},
              {"linear_coefficient", detail::cpx_json(cert.linear_coefficient)},
              {"fit_residual", cert.fit_residual},
              {"points_used", cert.points_used}}}};
        detail::write_json(out_dir / "tauzeros.json", rep);
        return 0;
    } catch (const Error& e) {
        rep["zero"] = {{"error", {{"code", code_name(e.code())}, {"message", e.what()}}}};
        detail::write_json(out_dir / "tauzeros.json", rep);
        std::fprintf(stderr, "tau-zeros: %s\n", e.what());
        return 3;
    }
}

inline int run_identities(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const SystemStateC st = initial_state(cfg);

    const Cpx miwa = miwa_residue(st);
    const Cpx quad = contour_half_tr_B2_residue(st);
    const auto [lhs, rhs] = xi_residue_identity(st);
    const double coord = coordinate_relation_check(st);
    const Cpx trb1 = tr_B1_squared(st);
    const Cpx expect = st.theta.theta1 * st.theta.theta1 * 0.5;

    json rep;
    rep["schema"] = "pv5-identities/1";
    rep["config"] = config_echo(cfg);
    rep["miwa_residue"] = {{"closed_form", detail::cpx_json(miwa)},
                           {"contour", detail::cpx_json(quad)},
                           {"deviation", std::abs(miwa - quad)}};
    rep["xi_residue"] = {{"lhs", detail::cpx_json(lhs)},
                         {"rhs", detail::cpx_json(rhs)},
                         {"deviation", std::abs(lhs - rhs)}};
    rep["coordinate_relation"] = {{"deviation", coord}};
    rep["tr_b1_squared"] = {{"value", detail::cpx_json(trb1)},
                            {"theta1_sq_half", detail::cpx_json(expect)},
                            {"deviation", std::abs(trb1 - expect)}};
    json ugate;
    try {
        const Cpx u = u_of_state(st);
        const Cpx ug = u_of_state(gauge_conjugate(st, Cpx(2.0), Cpx(3.0)));
        ugate = {{"u", detail::cpx_json(u)},
                 {"u_gauged", detail::cpx_json(ug)},
                 {"deviation", std::abs(u - ug)}};
    } catch (const Error& e) {
        ugate = {{"undefined", e.what()}};
    }
    rep["gauge_invariance_u"] = ugate;

    const bool ok = std::abs(miwa - quad) < 1e-10 * std::max(1.0, std::abs(miwa)) &&
                    std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)) &&
                    coord < 1e-12 &&
                    std::abs(trb1 - expect) < 1e-13 * std::max(1.0, std::abs(expect));
    rep["all_pass"] = ok;
    detail::write_json(out_dir / "identities.json", rep);
    return ok ? 0 : 3;
}

} // namespace pv5
