#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qolab/verify.hpp"

namespace qolab {

using njson = nlohmann::json;

// ---------------------------------------------------------------------------
// primitive encodings
// ---------------------------------------------------------------------------

inline njson cplx_json(const cplx& z) { return njson::array({z.real(), z.imag()}); }

inline njson vertex_json(const Vertex& v) { return njson::array({v.k, v.l}); }

inline njson positions_json(const std::vector<Vertex>& pos) {
    njson a = njson::array();
    for (const Vertex& v : pos) a.push_back(vertex_json(v));
    return a;
}

/// Mode label "family:k,l" used as an occupation key.
inline std::string mode_key(const TorusConfig& cfg, int mode) {
    const ModeId m = mode_from_index(cfg, mode);
    return std::to_string(m.family) + ":" + std::to_string(m.v.k) + "," +
           std::to_string(m.v.l);
}

inline njson occupation_json(const TorusConfig& cfg, const Occupation& occ) {
    njson j = njson::object();
    for (const auto& [mode, count] : occ.n) j[mode_key(cfg, mode)] = count;
    return j;
}

// ---------------------------------------------------------------------------
// evolution blocks and spectra
// ---------------------------------------------------------------------------

/// Dense sector block with its basis; the matrix is row-major [re, im] pairs
/// and can be omitted for large sectors where only the basis is wanted.
inline njson block_json(const TorusConfig& cfg, const ModelParams& p, const EvolutionBlock& blk,
                        bool include_matrix = true) {
    njson j;
    j["M"] = cfg.M;
    j["q"] = p.q;
    j["charge"] = njson::array({blk.charge.Q1, blk.charge.Q3});
    j["dim"] = blk.dim();
    njson basis = njson::array();
    for (const Occupation& occ : blk.basis.states) basis.push_back(occupation_json(cfg, occ));
    j["basis"] = std::move(basis);
    if (include_matrix) {
        njson m = njson::array();
        for (int r = 0; r < blk.dim(); ++r)
            for (int c = 0; c < blk.dim(); ++c) m.push_back(cplx_json(blk.U(r, c)));
        j["matrix"] = std::move(m);
    }
    return j;
}

inline std::string csv_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Raw eigenvalues, one "re,im" row per line.
inline std::string spectrum_csv(const std::vector<cplx>& ev) {
    std::string out = "re,im\n";
    for (const cplx& v : ev)
        out += csv_number(v.real()) + "," + csv_number(v.imag()) + "\n";
    return out;
}

/// Clustered spectrum with multiplicities.
inline std::string clusters_csv(const SpectrumSummary& s) {
    std::string out = "re,im,multiplicity\n";
    for (const EigenCluster& c : s.clusters)
        out += csv_number(c.value.real()) + "," + csv_number(c.value.imag()) + "," +
               std::to_string(c.multiplicity) + "\n";
    return out;
}

inline njson spectrum_json(const SpectrumSummary& s) {
    njson j;
    j["dim"] = s.dim;
    j["max_modulus_defect"] = s.max_modulus_defect;
    njson cl = njson::array();
    for (const EigenCluster& c : s.clusters)
        cl.push_back({{"value", cplx_json(c.value)}, {"multiplicity", c.multiplicity}});
    j["clusters"] = std::move(cl);
    return j;
}

// ---------------------------------------------------------------------------
// spectral solutions
// ---------------------------------------------------------------------------

inline const char* branch_name(bool free_branch) { return free_branch ? "free" : "bound"; }

/// Solution set of one conjectured family: the echoed coefficients
/// (1, P_1 .. P_N) followed by every deduplicated root with its branch tag.
inline njson solutions_json(int M, double q, int N, GeometryClass family,
                            const std::vector<double>& rhs,
                            const std::vector<Prediction>& preds,
                            const std::vector<double>& residuals) {
    njson j;
    j["M"] = M;
    j["q"] = q;
    j["N"] = N;
    njson values = njson::array();
    values.push_back(1.0);
    for (double v : rhs) values.push_back(v);
    j["family"] = {{"class", to_string(family)}, {"values", std::move(values)}};
    njson sols = njson::array();
    for (std::size_t i = 0; i < preds.size(); ++i) {
        njson s;
        njson u = njson::array();
        for (const cplx& ui : preds[i].u) u.push_back(cplx_json(ui));
        s["u"] = std::move(u);
        s["lambda"] = cplx_json(preds[i].lambda);
        s["branch"] = branch_name(preds[i].free_branch);
        if (i < residuals.size()) s["residual"] = residuals[i];
        sols.push_back(std::move(s));
    }
    j["solutions"] = std::move(sols);
    j["solution_count"] = preds.size();
    return j;
}

// ---------------------------------------------------------------------------
// experiment reports
// ---------------------------------------------------------------------------

inline njson config_json(const ExperimentConfig& ec, const Geometry& geom, GeometryClass family) {
    njson j;
    j["M"] = ec.cfg.M;
    j["q"] = ec.params.q;
    j["N"] = ec.particles;
    j["geometry"] = {{"class", to_string(geom.cls)}, {"positions", positions_json(geom.positions)}};
    j["family"] = to_string(family);
    j["tolerances"] = {{"match", ec.policy.tol},
                       {"construction", ec.policy.construction_tol},
                       {"cluster", ec.cluster_radius},
                       {"solver", ec.solve.tol},
                       {"dedup", ec.solve.dedup_eps}};
    j["attempts"] = ec.solve.attempts;
    j["seed"] = ec.solve.seed;
    j["sector_cap"] = ec.sector_cap;
    return j;
}

/// Full verification report: resolved config, clustered spectrum, and one
/// entry per prediction.  Timings are attached only on request so identical
/// configurations reproduce byte-identical files.
inline njson report_json(const ExperimentResult& r, bool include_timings = false) {
    njson j;
    j["config"] = config_json(r.config, r.geometry, r.family);
    j["spectrum"] = spectrum_json(r.spectrum);

    njson preds = njson::array();
    for (const MatchEntry& e : r.report.entries) {
        njson s;
        njson u = njson::array();
        for (const cplx& ui : e.prediction.u) u.push_back(cplx_json(ui));
        s["u"] = std::move(u);
        s["lambda"] = cplx_json(e.prediction.lambda);
        s["branch"] = branch_name(e.prediction.free_branch);
        s["matched_value"] = cplx_json(e.matched_value);
        s["distance"] = e.distance;
        s["multiplicity"] = e.multiplicity;
        if (std::isinf(e.construction_residual))
            s["construction_residual"] = "unconstructible";
        else if (!std::isnan(e.construction_residual))
            s["construction_residual"] = e.construction_residual;
        s["pass"] = e.pass;
        preds.push_back(std::move(s));
    }
    j["predictions"] = std::move(preds);
    j["expected_multiplicity"] = r.report.expected_multiplicity;
    j["pass_count"] = r.report.pass_count;
    j["prediction_count"] = r.report.entries.size();
    j["all_pass"] = r.report.all_pass;
    j["unmatched_fraction"] = r.report.unmatched_fraction;
    if (include_timings) {
        njson t = njson::array();
        for (const StageTiming& st : r.timings)
            t.push_back({{"stage", st.stage}, {"seconds", st.seconds}});
        j["timings"] = std::move(t);
    }
    return j;
}

// ---------------------------------------------------------------------------
// ansatz engine output
// ---------------------------------------------------------------------------

/// Appendix-engine run: the solved coefficient conditions plus, when a state
/// was constructed against a block, its eigenvalue and residual.
inline njson bethe_json(const TorusConfig& cfg, const AppendixSystem& sys,
                        const AnsatzCoefficients& co, const BetheState* state = nullptr,
                        double construction_residual = std::numeric_limits<double>::quiet_NaN()) {
    njson j;
    j["anchors"] = positions_json(sys.anchors);
    njson u = njson::array();
    for (const cplx& ui : sys.u) u.push_back(cplx_json(ui));
    j["u"] = std::move(u);
    j["unknown_count"] = sys.unknown_count;
    j["equation_count"] = sys.equation_count();
    j["ansatz_conditions"] = co.condition_norm;
    j["rank_deficiency"] = co.rank_deficiency;
    j["converged"] = co.converged;
    if (state != nullptr) {
        j["lambda"] = cplx_json(state->lambda);
        j["special_site_count"] = state->special_sites.size();
        if (!std::isnan(construction_residual))
            j["construction_residual"] = construction_residual;
        njson amps = njson::array();
        for (const auto& [occ, a] : state->psi.amp)
            amps.push_back({{"occupation", occupation_json(cfg, occ)}, {"amplitude", cplx_json(a)}});
        j["amplitudes"] = std::move(amps);
    }
    return j;
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_json(const std::string& path, const njson& j) {
    write_text(path, j.dump(2) + "\n");
}

inline njson read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    njson j;
    in >> j;
    return j;
}

// ---------------------------------------------------------------------------
// geometry parsing
// ---------------------------------------------------------------------------

/// Parse a named geometry: "coincident", "line", "generic", or "grid:KxL".
/// Returns the class and fills K, L for grids.
inline GeometryClass parse_geometry_name(const std::string& name, int& K, int& L) {
    K = 0;
    L = 0;
    if (name == "coincident") return GeometryClass::Coincident;
    if (name == "line") return GeometryClass::Line;
    if (name == "generic") return GeometryClass::Generic;
    if (name.rfind("grid:", 0) == 0) {
        const std::string dims = name.substr(5);
        const std::size_t x = dims.find('x');
        if (x != std::string::npos) {
            try {
                K = std::stoi(dims.substr(0, x));
                L = std::stoi(dims.substr(x + 1));
            } catch (const std::exception&) {
                throw std::invalid_argument("bad grid layout: " + name);
            }
            if (K >= 1 && L >= 1) return GeometryClass::Grid;
        }
        throw std::invalid_argument("bad grid layout: " + name);
    }
    throw std::invalid_argument("unknown geometry: " + name);
}

}  // namespace qolab
