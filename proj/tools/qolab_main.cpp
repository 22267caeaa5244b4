#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qolab/io.hpp"

namespace {

using namespace qolab;

// ---------------------------------------------------------------------------
// run configuration: defaults < config file < KB_SEED < explicit flags
// ---------------------------------------------------------------------------

struct RunConfig {
    int M = 2;
    double q = 0.5;
    int N = 1;
    std::string geometry;  // named class, grid:KxL, or positions "k,l;k,l"
    std::string family;    // optional equation-family override
    double match_tol = 1e-7;
    double construction_tol = 1e-8;
    double cluster_radius = 1e-7;
    double solver_tol = 1e-11;
    double dedup_eps = 1e-6;
    int attempts = 400;
    std::uint64_t seed = 42;
    std::size_t sector_cap = 50000;
    bool timings = false;
    bool basis_only = false;  // build: omit the dense matrix
    bool skip_state = false;  // bethe: solve conditions only
    std::vector<cplx> u_values;
    std::string out;
    std::string spectrum;
};

cplx parse_cplx(const std::string& s) {
    try {
        const std::size_t c = s.find(',');
        if (c == std::string::npos) return cplx(std::stod(s), 0.0);
        return cplx(std::stod(s.substr(0, c)), std::stod(s.substr(c + 1)));
    } catch (const std::exception&) {
        throw std::invalid_argument("bad complex number: " + s);
    }
}

std::vector<Vertex> parse_positions(const std::string& s) {
    std::vector<Vertex> pos;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(';', start);
        if (end == std::string::npos) end = s.size();
        const std::string item = s.substr(start, end - start);
        const std::size_t c = item.find(',');
        if (c == std::string::npos) throw std::invalid_argument("bad position: " + item);
        try {
            pos.push_back(Vertex{std::stoi(item.substr(0, c)), std::stoi(item.substr(c + 1))});
        } catch (const std::exception&) {
            throw std::invalid_argument("bad position: " + item);
        }
        start = end + 1;
    }
    return pos;
}

struct GeomSpec {
    std::vector<Vertex> positions;          // explicit anchors, or
    std::optional<GeometryClass> named;     // a named layout
    int K = 0;
    int L = 0;
};

GeomSpec parse_geometry(const std::string& s) {
    GeomSpec g;
    if (s.empty()) return g;
    if (std::isdigit(static_cast<unsigned char>(s[0])) != 0 || s[0] == '-')
        g.positions = parse_positions(s);
    else
        g.named = parse_geometry_name(s, g.K, g.L);
    return g;
}

void apply_config_json(const njson& j, RunConfig& rc) {
    if (j.contains("M")) rc.M = j.at("M").get<int>();
    if (j.contains("q")) rc.q = j.at("q").get<double>();
    if (j.contains("N")) rc.N = j.at("N").get<int>();
    if (j.contains("geometry")) {
        const njson& g = j.at("geometry");
        if (g.is_string()) {
            rc.geometry = g.get<std::string>();
        } else if (g.is_array()) {
            std::string flat;
            for (const njson& v : g) {
                if (!flat.empty()) flat += ";";
                flat += std::to_string(v.at(0).get<int>()) + "," +
                        std::to_string(v.at(1).get<int>());
            }
            rc.geometry = flat;
        } else {
            throw std::invalid_argument("config geometry must be a name or a position array");
        }
    }
    if (j.contains("family")) rc.family = j.at("family").get<std::string>();
    if (j.contains("tolerances")) {
        const njson& t = j.at("tolerances");
        if (t.contains("match")) rc.match_tol = t.at("match").get<double>();
        if (t.contains("construction")) rc.construction_tol = t.at("construction").get<double>();
        if (t.contains("cluster")) rc.cluster_radius = t.at("cluster").get<double>();
        if (t.contains("solver")) rc.solver_tol = t.at("solver").get<double>();
        if (t.contains("dedup")) rc.dedup_eps = t.at("dedup").get<double>();
    }
    if (j.contains("attempts")) rc.attempts = j.at("attempts").get<int>();
    if (j.contains("seed")) rc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("sector_cap")) rc.sector_cap = j.at("sector_cap").get<std::size_t>();
    if (j.contains("timings")) rc.timings = j.at("timings").get<bool>();
    if (j.contains("u")) {
        rc.u_values.clear();
        for (const njson& v : j.at("u"))
            rc.u_values.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    }
    if (j.contains("out")) rc.out = j.at("out").get<std::string>();
    if (j.contains("spectrum")) rc.spectrum = j.at("spectrum").get<std::string>();
}

// flag plumbing: values live in `flags`; only options the user actually
// passed override the config-file values
struct FlagSet {
    RunConfig flags;
    std::vector<std::string> configs;
    std::vector<std::string> u_raw;
    int jobs = 1;
    std::string report_in;
    std::string report_csv;
};

void add_common_options(CLI::App* sub, FlagSet& f) {
    sub->add_option("--config", f.configs, "JSON config file (repeatable on verify)");
    sub->add_option("--m", f.flags.M, "torus size M");
    sub->add_option("--q", f.flags.q, "coupling q, 0 < q < 1");
    sub->add_option("--n", f.flags.N, "particle count N: sector (N, N)");
    sub->add_option("--geometry", f.flags.geometry,
                    "coincident | line | generic | grid:KxL | positions k,l;k,l");
    sub->add_option("--family", f.flags.family,
                    "equation family override (deliberate-mismatch probe)");
    sub->add_option("--seed", f.flags.seed, "PRNG seed (overrides KB_SEED and config)");
    sub->add_option("--attempts", f.flags.attempts, "multistart budget");
    sub->add_option("--sector-cap", f.flags.sector_cap, "largest sector dimension to enumerate");
    sub->add_option("--match-tol", f.flags.match_tol, "eigenvalue match tolerance");
    sub->add_option("--construction-tol", f.flags.construction_tol,
                    "eigenstate residual tolerance");
    sub->add_option("--cluster-radius", f.flags.cluster_radius, "eigenvalue cluster radius");
    sub->add_option("--solver-tol", f.flags.solver_tol, "Newton convergence tolerance");
    sub->add_option("--dedup-eps", f.flags.dedup_eps, "solution deduplication distance");
    sub->add_flag("--timings", f.flags.timings, "include stage timings in reports");
    sub->add_option("--out", f.flags.out, "output path");
    sub->add_option("--spectrum", f.flags.spectrum, "also write an eigenvalue CSV here");
}

RunConfig merge_config(const CLI::App* sub, const FlagSet& f, const njson* file) {
    RunConfig rc;
    if (file != nullptr) apply_config_json(*file, rc);
    if (const char* env = std::getenv("KB_SEED")) {
        try {
            rc.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("bad KB_SEED: ") + env);
        }
    }
    auto flagged = [&](const char* name) { return sub->count(name) > 0; };
    if (flagged("--m")) rc.M = f.flags.M;
    if (flagged("--q")) rc.q = f.flags.q;
    if (flagged("--n")) rc.N = f.flags.N;
    if (flagged("--geometry")) rc.geometry = f.flags.geometry;
    if (flagged("--family")) rc.family = f.flags.family;
    if (flagged("--seed")) rc.seed = f.flags.seed;
    if (flagged("--attempts")) rc.attempts = f.flags.attempts;
    if (flagged("--sector-cap")) rc.sector_cap = f.flags.sector_cap;
    if (flagged("--match-tol")) rc.match_tol = f.flags.match_tol;
    if (flagged("--construction-tol")) rc.construction_tol = f.flags.construction_tol;
    if (flagged("--cluster-radius")) rc.cluster_radius = f.flags.cluster_radius;
    if (flagged("--solver-tol")) rc.solver_tol = f.flags.solver_tol;
    if (flagged("--dedup-eps")) rc.dedup_eps = f.flags.dedup_eps;
    if (flagged("--timings")) rc.timings = f.flags.timings;
    if (flagged("--out")) rc.out = f.flags.out;
    if (flagged("--spectrum")) rc.spectrum = f.flags.spectrum;
    if (!f.u_raw.empty()) {
        rc.u_values.clear();
        for (const std::string& s : f.u_raw) rc.u_values.push_back(parse_cplx(s));
    }
    return rc;
}

ExperimentConfig make_experiment(const RunConfig& rc) {
    ExperimentConfig ec;
    ec.cfg = TorusConfig{rc.M};
    ec.params = ModelParams{rc.q};
    ec.particles = rc.N;
    const GeomSpec gs = parse_geometry(rc.geometry);
    if (!gs.positions.empty())
        ec.positions = gs.positions;
    else if (gs.named)
        ec.positions = default_positions(*gs.named, rc.N, gs.K, gs.L);
    if (!rc.family.empty()) {
        int K = 0;
        int L = 0;
        ec.family = parse_geometry_name(rc.family, K, L);
        ec.grid_K = K;
        ec.grid_L = L;
    }
    ec.policy.tol = rc.match_tol;
    ec.policy.construction_tol = rc.construction_tol;
    ec.cluster_radius = rc.cluster_radius;
    ec.solve.tol = rc.solver_tol;
    ec.solve.dedup_eps = rc.dedup_eps;
    ec.solve.attempts = rc.attempts;
    ec.solve.seed = rc.seed;
    ec.sector_cap = rc.sector_cap;
    return ec;
}

// resolved anchors without running the full experiment (solve / bethe)
std::vector<Vertex> resolve_anchors(const ExperimentConfig& ec, int N) {
    if (!ec.positions.empty()) return ec.positions;
    return default_positions(ec.family.value_or(GeometryClass::Coincident), N, ec.grid_K,
                             ec.grid_L);
}

std::string fmt_cplx(const cplx& z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%+.12g, %+.12g)", z.real(), z.imag());
    return buf;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_build(const RunConfig& rc) {
    validate(TorusConfig{rc.M});
    validate(ModelParams{rc.q});
    if (rc.N < 0) throw std::invalid_argument("N must be nonnegative");
    EvolutionBuilder builder(TorusConfig{rc.M}, ModelParams{rc.q}, rc.sector_cap);
    const EvolutionBlock& blk = builder.block(SectorCharge{rc.N, rc.N});
    const std::string path = rc.out.empty() ? "block.json" : rc.out;
    write_json(path, block_json(builder.config(), builder.params(), blk, !rc.basis_only));
    if (!rc.spectrum.empty()) write_text(rc.spectrum, spectrum_csv(dense_eigenvalues(blk.U)));
    std::cout << "built sector (" << rc.N << "," << rc.N << ") dim " << blk.dim() << " -> "
              << path << "\n";
    return 0;
}

int cmd_solve(const RunConfig& rc) {
    validate(ModelParams{rc.q});
    const ExperimentConfig ec = make_experiment(rc);
    const Geometry geom = classify_geometry(ec.cfg, resolve_anchors(ec, rc.N));
    const GeometryClass family = ec.family.value_or(geom.cls);
    Geometry fam = geom;
    if (fam.cls != family) {
        fam = Geometry{};
        fam.cls = family;
        fam.K = ec.grid_K > 0 ? ec.grid_K : rc.N;
        fam.L = ec.grid_L > 0 ? ec.grid_L : 1;
    }
    const std::vector<double> rhs = conjectured_rhs(fam, rc.N, rc.q);
    const ResidualFn f = system_residual_u(rc.q, rc.M, rhs);

    std::vector<Prediction> preds;
    std::vector<double> residuals;
    MultistartStats stats;
    if (rc.N == 1) {
        for (const cplx& u : one_particle_roots(rc.q, rc.M)) {
            Eigen::VectorXcd v(1);
            v(0) = u;
            preds.push_back(make_prediction(rc.q, rc.M, v));
            residuals.push_back(f(v).norm());
        }
        stats.starts = static_cast<int>(preds.size());
        stats.converged = stats.starts;
    } else {
        for (const Eigen::VectorXcd& u : multistart_solve(f, rc.N, ec.solve, &stats)) {
            preds.push_back(make_prediction(rc.q, rc.M, u));
            residuals.push_back(f(u).norm());
        }
    }

    njson j = solutions_json(rc.M, rc.q, rc.N, family, rhs, preds, residuals);
    j["starts"] = stats.starts;
    j["failed_starts"] = stats.starts - stats.converged;
    const std::string path = rc.out.empty() ? "solutions.json" : rc.out;
    write_json(path, j);

    std::string fam_echo = "1";
    for (double v : rhs) {
        char buf[32];
        std::snprintf(buf, sizeof buf, ",%.6g", v);
        fam_echo += buf;
    }
    std::cout << preds.size() << " solutions of the " << to_string(family) << " family ("
              << fam_echo << "), " << (stats.starts - stats.converged) << " of " << stats.starts
              << " starts failed -> " << path << "\n";
    return 0;
}

int cmd_bethe(const RunConfig& rc) {
    validate(ModelParams{rc.q});
    const ExperimentConfig ec = make_experiment(rc);
    const std::vector<Vertex> anchors = resolve_anchors(ec, rc.N);
    if (static_cast<int>(anchors.size()) != rc.N)
        throw std::invalid_argument("anchor count does not match particle count");
    if (static_cast<int>(rc.u_values.size()) != rc.N)
        throw std::invalid_argument("bethe wants exactly one --u per particle");

    AppendixSystem sys = build_appendix_system(ec.cfg, ec.params, anchors, rc.u_values);
    AnsatzCoefficients co = solve_coefficients(sys, rc.seed);

    njson j;
    if (rc.skip_state) {
        j = bethe_json(ec.cfg, sys, co);
    } else {
        EvolutionBuilder builder(ec.cfg, ec.params, rc.sector_cap);
        const EvolutionBlock& blk = builder.block(SectorCharge{rc.N, rc.N});
        BetheState st = construct_state(ec.cfg, ec.params, sys, co, &blk);
        const double res = eigen_residual(blk, st.psi, st.lambda);
        j = bethe_json(ec.cfg, sys, co, &st, res);
    }
    const std::string path = rc.out.empty() ? "bethe.json" : rc.out;
    write_json(path, j);

    char line[160];
    std::snprintf(line, sizeof line, "conditions %.6e (%s), rank deficiency %d -> %s\n",
                  co.condition_norm, co.converged ? "converged" : "not converged",
                  co.rank_deficiency, path.c_str());
    std::cout << line;
    return 0;
}

struct VerifyOutcome {
    int code = 0;
    std::string text;
};

VerifyOutcome verify_one(const RunConfig& rc) {
    const ExperimentConfig ec = make_experiment(rc);
    const ExperimentResult r = run_experiment(ec);
    const std::string path = rc.out.empty() ? "verify.json" : rc.out;
    write_json(path, report_json(r, rc.timings));
    if (!rc.spectrum.empty()) write_text(rc.spectrum, clusters_csv(r.spectrum));

    std::string text;
    for (const MatchEntry& e : r.report.entries) {
        char line[200];
        std::string cons = "ungated";
        if (std::isinf(e.construction_residual)) {
            cons = "unconstructible";
        } else if (!std::isnan(e.construction_residual)) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3e", e.construction_residual);
            cons = buf;
        }
        std::snprintf(line, sizeof line,
                      "%s lambda=%s dist=%.3e mult=%d construction=%s\n",
                      e.pass ? "PASS" : "FAIL", fmt_cplx(e.prediction.lambda).c_str(),
                      e.distance, e.multiplicity, cons.c_str());
        text += line;
    }
    char tail[200];
    std::snprintf(tail, sizeof tail,
                  "%d/%zu predictions pass, unmatched spectral weight %.6f -> %s\n",
                  r.report.pass_count, r.report.entries.size(), r.report.unmatched_fraction,
                  path.c_str());
    text += tail;
    return {r.report.all_pass ? 0 : 1, text};
}

int cmd_verify(const std::vector<RunConfig>& rcs, int jobs) {
    std::vector<VerifyOutcome> outcomes(rcs.size());
    for (std::size_t base = 0; base < rcs.size(); base += static_cast<std::size_t>(jobs)) {
        const std::size_t end = std::min(rcs.size(), base + static_cast<std::size_t>(jobs));
        std::vector<std::future<VerifyOutcome>> batch;
        for (std::size_t i = base; i < end; ++i)
            batch.push_back(std::async(std::launch::async, verify_one, rcs[i]));
        for (std::size_t i = base; i < end; ++i) outcomes[i] = batch[i - base].get();
    }
    int code = 0;
    for (const VerifyOutcome& o : outcomes) {
        std::cout << o.text;
        code = std::max(code, o.code);
    }
    return code;
}

int cmd_report(const std::string& in, const std::string& csv) {
    const njson j = read_json(in);
    const njson& cfg = j.at("config");
    std::cout << "experiment: M=" << cfg.at("M").get<int>() << " q=" << cfg.at("q").get<double>()
              << " N=" << cfg.at("N").get<int>() << " geometry="
              << cfg.at("geometry").at("class").get<std::string>()
              << " family=" << cfg.at("family").get<std::string>() << "\n";
    const njson& spec = j.at("spectrum");
    std::cout << "spectrum: dim " << spec.at("dim").get<int>() << ", "
              << spec.at("clusters").size() << " clusters, max modulus defect "
              << spec.at("max_modulus_defect").get<double>() << "\n";
    for (const njson& p : j.at("predictions")) {
        const bool pass = p.at("pass").get<bool>();
        std::cout << (pass ? "PASS" : "FAIL") << " " << p.at("branch").get<std::string>()
                  << " lambda=" << fmt_cplx({p.at("lambda").at(0).get<double>(),
                                             p.at("lambda").at(1).get<double>()})
                  << " dist=" << p.at("distance").get<double>()
                  << " mult=" << p.at("multiplicity").get<int>() << "\n";
    }
    std::cout << j.at("pass_count").get<int>() << "/" << j.at("prediction_count").get<int>()
              << " predictions pass, unmatched spectral weight "
              << j.at("unmatched_fraction").get<double>() << ", verdict "
              << (j.at("all_pass").get<bool>() ? "PASS" : "FAIL") << "\n";
    if (!csv.empty()) {
        std::string out = "re,im,multiplicity\n";
        for (const njson& c : spec.at("clusters"))
            out += csv_number(c.at("value").at(0).get<double>()) + "," +
                   csv_number(c.at("value").at(1).get<double>()) + "," +
                   std::to_string(c.at("multiplicity").get<int>()) + "\n";
        write_text(csv, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for a q-oscillator lattice evolution operator"};
    app.require_subcommand(1);

    FlagSet fb;
    CLI::App* build = app.add_subcommand("build", "build and export one evolution block");
    add_common_options(build, fb);
    build->add_flag("--basis-only", fb.flags.basis_only, "omit the dense matrix from the JSON");

    FlagSet fs;
    CLI::App* solve = app.add_subcommand("solve", "solve one conjectured spectral family");
    add_common_options(solve, fs);

    FlagSet fbe;
    CLI::App* bethe = app.add_subcommand("bethe", "run the coefficient engine at given anchors");
    add_common_options(bethe, fbe);
    bethe->add_option("--u", fbe.u_raw, "spectral parameter re[,im], one per particle");
    bethe->add_flag("--conditions-only", fbe.flags.skip_state,
                    "skip state construction and the sector block");

    FlagSet fv;
    CLI::App* verify = app.add_subcommand("verify", "match predicted eigenvalues to the spectrum");
    add_common_options(verify, fv);
    verify->add_option("--jobs", fv.jobs, "concurrent experiments")->check(CLI::PositiveNumber);

    FlagSet fr;
    CLI::App* report = app.add_subcommand("report", "render a verification report");
    report->add_option("--in", fr.report_in, "report JSON to render")->required();
    report->add_option("--csv", fr.report_csv, "also write the clustered spectrum CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto single = [&](CLI::App* sub, FlagSet& f) {
            if (f.configs.size() > 1)
                throw std::invalid_argument("this subcommand takes at most one --config");
            if (f.configs.empty()) return merge_config(sub, f, nullptr);
            const njson j = read_json(f.configs.front());
            return merge_config(sub, f, &j);
        };
        if (build->parsed()) return cmd_build(single(build, fb));
        if (solve->parsed()) return cmd_solve(single(solve, fs));
        if (bethe->parsed()) return cmd_bethe(single(bethe, fbe));
        if (verify->parsed()) {
            std::vector<RunConfig> rcs;
            if (fv.configs.empty()) {
                rcs.push_back(merge_config(verify, fv, nullptr));
            } else {
                for (const std::string& path : fv.configs) {
                    const njson j = read_json(path);
                    rcs.push_back(merge_config(verify, fv, &j));
                }
            }
            if (rcs.size() > 1) {
                if (verify->count("--out") > 0)
                    throw std::invalid_argument(
                        "--out conflicts with multiple configs; set `out` per config");
                for (std::size_t i = 0; i < rcs.size(); ++i)
                    if (rcs[i].out.empty())
                        rcs[i].out = "verify-" + std::to_string(i) + ".json";
            }
            return cmd_verify(rcs, fv.jobs);
        }
        if (report->parsed()) return cmd_report(fr.report_in, fr.report_csv);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::length_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
