#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qolab/evolution.hpp"

using namespace qolab;

namespace {

Occupation occ_of(const TorusConfig& cfg, std::initializer_list<std::pair<ModeId, int>> quanta) {
    Occupation occ;
    for (const auto& [m, c] : quanta) occ = occ.with(mode_index(cfg, m), c);
    return occ;
}

StateVec random_sector_state(const SectorBasis& basis, std::mt19937_64& rng, int terms = 5) {
    std::uniform_int_distribution<int> pick(0, basis.dim() - 1);
    std::uniform_real_distribution<double> re(-1.0, 1.0);
    StateVec s;
    for (int t = 0; t < terms; ++t) s.add(basis.states[pick(rng)], cplx(re(rng), re(rng)));
    return s;
}

double dist(const StateVec& a, const StateVec& b) {
    StateVec d = a;
    StateVec nb = b;
    nb *= -1.0;
    d += nb;
    return norm(d);
}

// conjugated partner of a lowering applied to a whole sparse state
StateVec apply_partner_state(const TorusConfig& cfg, const ModelParams& p, int family, Vertex w,
                             const StateVec& s) {
    StateVec out;
    std::vector<detail::Contribution> contribs;
    for (const auto& [occ, a] : s.amp) {
        contribs.clear();
        if (family == 1) detail::family1_partner(cfg, p, w, occ, contribs);
        else if (family == 3) detail::family3_partner(cfg, p, w, occ, contribs);
        else detail::family2_partner(cfg, p, w, occ, contribs);
        for (const auto& c : contribs) out.add(c.occ, a * c.coeff);
    }
    return out;
}

}  // namespace

TEST_CASE("vacuum sector is the identity", "[evolution]") {
    auto blk = build_evolution(TorusConfig{2}, ModelParams{0.5}, {0, 0});
    REQUIRE(blk.dim() == 1);
    REQUIRE(blk.U(0, 0) == cplx(1.0));
}

TEST_CASE("single photons drift exactly one step", "[evolution]") {
    TorusConfig cfg{3};
    ModelParams p{0.6};
    EvolutionBuilder b(cfg, p);

    const auto& b10 = b.block({1, 0});
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
            Vertex w{k, l};
            auto src = occ_of(cfg, {{{1, w}, 1}});
            auto dst = occ_of(cfg, {{{1, shift(cfg, w, Axis::E1)}, 1}});
            Eigen::VectorXcd col = b10.U.col(b10.basis.index(src));
            REQUIRE(std::abs(col(b10.basis.index(dst)) - 1.0) < 1e-14);
            REQUIRE_THAT(col.cwiseAbs().sum(), Catch::Matchers::WithinAbs(1.0, 1e-14));
        }

    const auto& b01 = b.block({0, 1});
    Vertex w{2, 1};
    auto src = occ_of(cfg, {{{3, w}, 1}});
    auto dst = occ_of(cfg, {{{3, shift(cfg, w, Axis::E3)}, 1}});
    REQUIRE(std::abs(b01.U(b01.basis.index(dst), b01.basis.index(src)) - 1.0) < 1e-14);
}

TEST_CASE("one-impurity and paired-photon columns at M=2, q=1/2", "[evolution]") {
    TorusConfig cfg{2};
    ModelParams p{0.5};
    const double r = std::sqrt(0.75);
    EvolutionBuilder b(cfg, p);
    const auto& blk = b.block({1, 1});
    REQUIRE(blk.dim() == 20);

    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
            Vertex v{k, l};
            Vertex v1 = shift(cfg, v, Axis::E1), v3 = shift(cfg, v, Axis::E3);
            auto imp = occ_of(cfg, {{{2, v}, 1}});
            auto pair_v = occ_of(cfg, {{{1, v}, 1}, {{3, v}, 1}});
            auto pair_next = occ_of(cfg, {{{1, v1}, 1}, {{3, v3}, 1}});

            // impurity: -q |imp> + sqrt(1-q^2) |drifted pair>
            Eigen::VectorXcd c1 = blk.U.col(blk.basis.index(imp));
            REQUIRE(std::abs(c1(blk.basis.index(imp)) - cplx(-0.5)) < 1e-12);
            REQUIRE(std::abs(c1(blk.basis.index(pair_next)) - cplx(r)) < 1e-12);
            REQUIRE_THAT(c1.norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));

            // same-vertex pair: sqrt(1-q^2) |imp> + q |drifted pair>
            Eigen::VectorXcd c2 = blk.U.col(blk.basis.index(pair_v));
            REQUIRE(std::abs(c2(blk.basis.index(imp)) - cplx(r)) < 1e-12);
            REQUIRE(std::abs(c2(blk.basis.index(pair_next)) - cplx(0.5)) < 1e-12);

            // separated pair drifts with coefficient one
            Vertex z = shift(cfg, v, Axis::E1);  // z != v
            auto sep = occ_of(cfg, {{{1, v}, 1}, {{3, z}, 1}});
            auto sep_next = occ_of(cfg, {{{1, v1}, 1}, {{3, shift(cfg, z, Axis::E3)}, 1}});
            Eigen::VectorXcd c3 = blk.U.col(blk.basis.index(sep));
            REQUIRE(std::abs(c3(blk.basis.index(sep_next)) - cplx(1.0)) < 1e-12);
        }
}

TEST_CASE("columns stay inside their sector", "[evolution]") {
    TorusConfig cfg{2};
    ModelParams p{0.7};
    EvolutionBuilder b(cfg, p);
    for (SectorCharge ch : {SectorCharge{1, 1}, SectorCharge{2, 1}, SectorCharge{2, 2}}) {
        const auto& blk = b.block(ch);
        for (const auto& occ : blk.basis.states) REQUIRE(charges(cfg, occ) == ch);
    }
}

TEST_CASE("blocks are unitary across sectors and couplings", "[evolution]") {
    for (double q : {0.3, 0.6, 0.9}) {
        EvolutionBuilder b(TorusConfig{2}, ModelParams{q});
        for (int Q1 = 0; Q1 <= 2; ++Q1)
            for (int Q3 = 0; Q3 <= 2; ++Q3)
                REQUIRE(unitarity_defect(b.block({Q1, Q3})) < 1e-10);
    }
    // one M=3 sector beyond the single-photon ones
    EvolutionBuilder b3(TorusConfig{3}, ModelParams{0.6});
    REQUIRE(unitarity_defect(b3.block({1, 1})) < 1e-10);
    REQUIRE(unitarity_defect(b3.block({2, 1})) < 1e-10);
}

TEST_CASE("alternative lowering paths rebuild the same columns", "[evolution]") {
    EvolutionBuilder b(TorusConfig{2}, ModelParams{0.55});
    REQUIRE(check_path_consistency(b, {1, 1}, 100) < 1e-10);
    REQUIRE(check_path_consistency(b, {2, 2}, 100) < 1e-10);

    EvolutionBuilder b3(TorusConfig{3}, ModelParams{0.6});
    REQUIRE(check_path_consistency(b3, {1, 1}, 50) < 1e-10);
}

TEST_CASE("conjugation relations hold as operator identities", "[evolution]") {
    TorusConfig cfg{2};
    ModelParams p{0.45};
    EvolutionBuilder b(cfg, p);
    std::mt19937_64 rng(11);
    const auto& src = b.block({1, 1});

    for (int t = 0; t < 10; ++t) {
        StateVec psi = random_sector_state(src.basis, rng);
        StateVec upsi = apply_evolution(src, psi);
        Vertex v{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};

        // U k_{2,v} a+_{1,v} psi = (k_3 a+_1 + k_1 a+_2 a-_3)(v) U psi
        StateVec lhs1 = apply_evolution(
            b.block({2, 1}), apply_k(cfg, p, {2, v}, apply_raise(cfg, p, {1, v}, psi)));
        REQUIRE(dist(lhs1, apply_partner_state(cfg, p, 1, v, upsi)) < 1e-10);

        // U a+_{2,v} psi = (a+_1 a+_3 + k_1 k'_3 a+_2)(v) U psi
        StateVec lhs2 = apply_evolution(b.block({2, 2}), apply_raise(cfg, p, {2, v}, psi));
        REQUIRE(dist(lhs2, apply_partner_state(cfg, p, 2, v, upsi)) < 1e-10);

        // U k'_{2,v} a+_{3,v} psi = (k'_1 a+_3 + k'_3 a+_2 a-_1)(v) U psi
        StateVec lhs3 = apply_evolution(
            b.block({1, 2}), apply_k(cfg, p, {2, v}, apply_raise(cfg, p, {3, v}, psi), true));
        REQUIRE(dist(lhs3, apply_partner_state(cfg, p, 3, v, upsi)) < 1e-10);
    }
}

TEST_CASE("sparse evaluator agrees with dense columns", "[evolution]") {
    TorusConfig cfg{2};
    ModelParams p{0.6};
    EvolutionBuilder b(cfg, p);
    SparseEvolution sp(cfg, p);
    std::mt19937_64 rng(3);

    for (SectorCharge ch : {SectorCharge{1, 1}, SectorCharge{2, 2}}) {
        const auto& blk = b.block(ch);
        for (int t = 0; t < 8; ++t) {
            int j = static_cast<int>(rng() % blk.dim());
            const StateVec& col = sp.column(blk.basis.states[j]);
            StateVec dense;
            for (int i = 0; i < blk.dim(); ++i)
                if (blk.U(i, j) != 0.0) dense.amp[blk.basis.states[i]] = blk.U(i, j);
            REQUIRE(dist(col, dense) < 1e-12);
        }
    }

    StateVec psi = random_sector_state(b.block({2, 2}).basis, rng);
    REQUIRE(dist(sp.apply(psi), apply_evolution(b.block({2, 2}), psi)) < 1e-12);
}

TEST_CASE("apply_evolution rejects out-of-sector support", "[evolution]") {
    TorusConfig cfg{2};
    EvolutionBuilder b(cfg, ModelParams{0.5});
    const auto& blk = b.block({1, 1});
    StateVec bad = vacuum_state();
    REQUIRE_THROWS_AS(apply_evolution(blk, bad), std::out_of_range);
}
