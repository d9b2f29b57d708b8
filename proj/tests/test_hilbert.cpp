#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "qkdim/hilbert_sim.hpp"

using namespace qkdim;
using namespace qkdim::hilbert;
using Catch::Matchers::WithinAbs;

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Full operator of `a` on every A site and `b` on every B site, identity on E.
Matrix full_product(const TensorLayout& lay, const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t k = 0; k < lay.n_systems; ++k) out = kron(kron(out, a), b);
    return kron(out, Matrix::Identity(Eigen::Index(lay.dim_e), Eigen::Index(lay.dim_e)));
}

// Trace norm of a traceless 2x2 Hermitian matrix: 2 sqrt(h00^2 + |h01|^2).
double qubit_trace_norm(const Matrix& h) {
    return 2.0 * std::sqrt(std::norm(h(0, 0)) + std::norm(h(0, 1)));
}

MeasurementSetup projective_qubit() {
    MeasurementSetup s;
    s.povm = {DenseOperator::basis_projector(2, 1),
              DenseOperator::identity(2) - DenseOperator::basis_projector(2, 1)};
    s.accepted = {0, 1};
    return s;
}

}  // namespace

TEST_CASE("DenseOperator checks") {
    Rng rng(1);
    CHECK_NOTHROW(random_density(4, rng).validate_density());
    CHECK_NOTHROW(random_contraction(4, rng).validate_povm_element());
    CHECK(DenseOperator::basis_projector(5, 2).is_projector());
    CHECK_FALSE(random_contraction(3, rng).is_projector());
    Matrix nh = Matrix::Zero(2, 2);
    nh(0, 1) = 1.0;
    CHECK_THROWS_AS(DenseOperator(nh).validate_density(), DomainError);
    CHECK_THROWS_AS(DenseOperator(2.0 * Matrix::Identity(2, 2)).validate_povm_element(), DomainError);
    CHECK_THROWS_AS(DenseOperator(Matrix::Identity(2, 2)).validate_density(), DomainError);
}

TEST_CASE("PureState normalization") {
    Vector v(2);
    v << 1.0, 1.0;
    CHECK_THROWS_AS(PureState(v), DomainError);
    CHECK_THAT(PureState::normalized(v).amplitudes().norm(), WithinAbs(1.0, 1e-15));
    CHECK_THROWS_AS(PureState::normalized(Vector::Zero(3)), DegenerateError);
}

TEST_CASE("apply_local agrees with an explicit Kronecker product") {
    Rng rng(2);
    const std::vector<std::size_t> dims{2, 3, 2};
    const Matrix op = ginibre(3, 3, rng);
    Vector v(12);
    for (Eigen::Index i = 0; i < 12; ++i) v(i) = rng.complex_normal();
    Vector w = v;
    apply_local(w, dims, 1, op);
    const Matrix full = kron(kron(Matrix::Identity(2, 2), op), Matrix::Identity(2, 2));
    CHECK((w - full * v).norm() < 1e-12);
}

TEST_CASE("measure_channel on a projective eigenstate") {
    Rng rng(3);
    const auto sigma = random_density(2, rng);
    const Matrix rho = kron(DenseOperator::basis_projector(2, 1).matrix(), sigma.matrix());
    const auto out = measure_channel(DenseOperator(rho), 2, projective_qubit());
    CHECK((out.matrix().block(0, 0, 2, 2) - sigma.matrix()).norm() < 1e-12);
    CHECK(out.matrix().block(2, 2, 2, 2).norm() < 1e-12);
    const auto p = outcome_probabilities(DenseOperator(rho), 2, projective_qubit());
    CHECK_THAT(p[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(p[1], WithinAbs(0.0, 1e-12));
}

TEST_CASE("measure_channel on the maximally mixed qubit") {
    MeasurementSetup s;
    s.povm = {DenseOperator(0.5 * Matrix::Identity(2, 2)), DenseOperator(0.5 * Matrix::Identity(2, 2))};
    s.accepted = {0};
    const DenseOperator rho(0.5 * Matrix::Identity(2, 2));
    const auto out = measure_channel(rho, 1, s);
    CHECK_THAT(out(0, 0).real(), WithinAbs(0.5, 1e-12));
    CHECK_THAT(out(1, 1).real(), WithinAbs(0.5, 1e-12));
    // Conditional states, once renormalized, are maximally mixed (R trivial here).
    const Matrix rho4 = 0.25 * Matrix::Identity(4, 4);
    const auto out4 = measure_channel(DenseOperator(rho4), 2, s);
    for (int x = 0; x < 2; ++x)
        CHECK((out4.matrix().block(2 * x, 2 * x, 2, 2) - 0.25 * Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("measure_channel marginals equal direct traces") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto rho = random_density(6, rng);  // A = 3, R = 2
        MeasurementSetup s;
        s.povm = random_povm(3, 3, rng);
        s.accepted = {0};
        const auto out = measure_channel(rho, 2, s);
        CHECK_THAT(out.trace().real(), WithinAbs(1.0, 1e-12));
        for (std::size_t x = 0; x < 3; ++x) {
            // tr(M_x rho_A) with rho_A summed by hand.
            Complex direct = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    for (int r = 0; r < 2; ++r)
                        direct += s.povm[x](j, i) * rho(2 * i + r, 2 * j + r);
            const Complex block = out.matrix().block(2 * Eigen::Index(x), 2 * Eigen::Index(x), 2, 2).trace();
            CHECK_THAT(block.real(), WithinAbs(direct.real(), 1e-12));
        }
    }
}

TEST_CASE("measure_channel input errors") {
    Rng rng(4);
    MeasurementSetup s = projective_qubit();
    CHECK_THROWS_AS(measure_channel(random_density(6, rng), 2, s), DimensionMismatch);
    Matrix bad = Matrix::Identity(4, 4);
    bad(0, 0) = -0.5;
    bad(1, 1) = 1.5;
    bad /= 4.0;
    CHECK_THROWS_AS(measure_channel(DenseOperator(bad), 2, s), DomainError);
    s.povm[0] = DenseOperator(0.5 * Matrix::Identity(2, 2));
    CHECK_THROWS_AS(measure_channel(random_density(4, rng), 2, s), DomainError);
}

TEST_CASE("trace_distance") {
    Rng rng(5);
    const auto a = random_density(3, rng);
    CHECK_THAT(trace_distance(a, a), WithinAbs(0.0, 1e-14));
    CHECK_THAT(trace_distance(DenseOperator::basis_projector(2, 1),
                              DenseOperator::identity(2) - DenseOperator::basis_projector(2, 1)),
               WithinAbs(2.0, 1e-14));
    for (int i = 0; i < 200; ++i) {
        const auto x = random_density(2, rng);
        const auto y = random_density(2, rng);
        CHECK_THAT(trace_distance(x, y), WithinAbs(qubit_trace_norm(x.matrix() - y.matrix()), 1e-12));
    }
    CHECK_THROWS_AS(trace_distance(a, random_density(2, rng)), DimensionMismatch);
}

TEST_CASE("pure_state_distance equals the projector trace distance") {
    Rng rng(6);
    const auto p = haar_state(4, rng);
    CHECK_THAT(pure_state_distance(p, p), WithinAbs(0.0, 1e-14));
    Vector e0 = Vector::Zero(3), e1 = Vector::Zero(3);
    e0(0) = 1.0;
    e1(1) = 1.0;
    CHECK_THAT(pure_state_distance(PureState(e0), PureState(e1)), WithinAbs(2.0, 1e-15));
    for (int i = 0; i < 1000; ++i) {
        const auto a = haar_state(1 + i % 5, rng);
        const auto b = haar_state(1 + i % 5, rng);
        CHECK_THAT(pure_state_distance(a, b),
                   WithinAbs(trace_distance(a.projector(), b.projector()), 1e-10));
    }
}

TEST_CASE("partial trace never increases trace distance") {
    Rng rng(7);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_density(6, rng);
        const auto b = random_density(6, rng);
        const auto ta = partial_trace(a, {3, 2}, {true, false});
        const auto tb = partial_trace(b, {3, 2}, {true, false});
        CHECK(trace_distance(ta, tb) <= trace_distance(a, b) + 1e-10);
        const auto ua = partial_trace(a, {3, 2}, {false, true});
        const auto ub = partial_trace(b, {3, 2}, {false, true});
        CHECK(trace_distance(ua, ub) <= trace_distance(a, b) + 1e-10);
    }
}

TEST_CASE("build_protocol_states with identity-proportional POVMs") {
    Rng rng(8);
    const TensorLayout lay{2, 2, 2, 2};
    const auto psi = haar_state(lay.total_dim(), rng);
    MeasurementSetup s;
    s.povm = {DenseOperator(0.5 * Matrix::Identity(2, 2)), DenseOperator(0.3 * Matrix::Identity(2, 2)),
              DenseOperator(0.2 * Matrix::Identity(2, 2))};
    s.accepted = {0, 1};
    const auto st = build_protocol_states(psi, lay, {s}, {s}, false);
    CHECK_THAT(st.acceptance_probability(), WithinAbs(std::pow(0.8, 4), 1e-12));
    for (const auto& b : st.branches()) {
        // Each branch is a multiple of psi.
        const Complex c = psi.amplitudes().dot(b);
        CHECK((b - c * psi.amplitudes()).norm() < 1e-12);
    }
    const auto dt = DenseOperator(0.8 * Matrix::Identity(2, 2));
    CHECK_THAT(compute_beta(psi, lay, dt, dt, DenseOperator::identity(2), DenseOperator::identity(2)),
               WithinAbs(0.0, 1e-12));
}

TEST_CASE("state inside the filter range gives identical protocol states") {
    Rng rng(9);
    const TensorLayout lay{2, 3, 3, 2};
    InstanceSpec spec{lay, 2, 2, 3, false};
    const auto inst = random_instance(11, spec);
    Vector v = inst.psi.amplitudes();
    apply_each(v, lay, inst.filter_a.matrix(), inst.filter_b.matrix());
    const auto inside = PureState::normalized(v);
    const auto p1 = build_protocol_states(inside, lay, inst.setups_a, inst.setups_b, false);
    const auto p2 = build_protocol_states(inside, lay, inst.setups_a, inst.setups_b, true);
    CHECK_THAT(std::abs(p1.overlap(p2)), WithinAbs(1.0, 1e-12));
    CHECK(trace_distance(p1.reduced_xye(), p2.reduced_xye()) < 1e-10);
    CHECK_THAT(compute_beta(inside, lay, inst.dtilde_a, inst.dtilde_b, inst.filter_a, inst.filter_b),
               WithinAbs(0.0, 1e-12));
    CHECK_THAT(compute_beta(inside.projector(), lay, inst.dtilde_a, inst.dtilde_b, inst.filter_a,
                            inst.filter_b),
               WithinAbs(0.0, 1e-12));
}

TEST_CASE("compute_beta equals 1 for D = I on a complement state") {
    const TensorLayout lay{2, 3, 2, 1};
    InstanceSpec spec{lay, 2, 1, 3, true};
    const auto inst = random_instance(5, spec);
    const auto id_a = DenseOperator::identity(3);
    const auto id_b = DenseOperator::identity(2);
    CHECK_THAT(compute_beta(*inst.complement_psi, lay, id_a, id_b, inst.filter_a, inst.filter_b),
               WithinAbs(1.0, 1e-12));
}

TEST_CASE("compute_beta density and pure forms agree") {
    const TensorLayout lay{2, 2, 3, 2};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = random_instance(seed, {lay, 1, 2, 2, false});
        const double pure = compute_beta(inst.psi, lay, inst.dtilde_a, inst.dtilde_b, inst.filter_a,
                                         inst.filter_b);
        const double dens = compute_beta(inst.psi.projector(), lay, inst.dtilde_a, inst.dtilde_b,
                                         inst.filter_a, inst.filter_b);
        CHECK_THAT(pure, WithinAbs(dens, 1e-12));
    }
    const auto inst = random_instance(1, {lay, 1, 2, 2, false});
    const auto zero = DenseOperator::zero(2);
    CHECK_THROWS_AS(compute_beta(inst.psi, lay, zero, inst.dtilde_b, inst.filter_a, inst.filter_b),
                    DegenerateError);
}

TEST_CASE("beta soundness on random N=2 qutrit instances") {
    BetaConfig cfg;
    cfg.dim_a = cfg.dim_b = 3;
    cfg.dim_e = 2;
    cfg.n_systems = 2;
    cfg.cutoff_a = cfg.cutoff_b = 2;
    cfg.trials = 100;
    cfg.seed = 42;
    const auto s = verify_beta(cfg);
    CHECK(s.passes == s.trials);
    for (const auto& t : s.records) {
        CHECK(t.xye_distance <= t.pure_distance + 1e-9);
        CHECK(t.pure_distance <= 2.0 * t.beta + 1e-9);
    }
}

TEST_CASE("explicit dilation reproduces the reduced XYE state for N=1") {
    const TensorLayout lay{1, 2, 2, 2};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto inst = random_instance(seed, {lay, 1, 1, 2, false});
        for (bool filter : {false, true}) {
            const auto st = build_protocol_states(inst.psi, lay, inst.setups_a, inst.setups_b, filter);
            const std::size_t ka = st.outcome_radices()[0];
            const std::size_t kb = st.outcome_radices()[1];
            const Vector full = st.dilated_vector();
            CHECK_THAT(full.norm(), WithinAbs(1.0, 1e-12));
            const auto rho = DenseOperator(full * full.adjoint());
            const auto xye = partial_trace(rho, {ka, ka, kb, kb, lay.dim_a, lay.dim_b, lay.dim_e},
                                           {true, false, true, false, false, false, true});
            CHECK((xye.matrix() - st.reduced_xye().matrix()).norm() < 1e-12);
        }
    }
}

TEST_CASE("random setups: complete POVM whose accepted part is D") {
    const TensorLayout lay{2, 3, 4, 1};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = random_instance(seed, {lay, 2, 3, 3, true});
        for (const auto* setups : {&inst.setups_a, &inst.setups_b}) {
            const auto& dt = setups == &inst.setups_a ? inst.dtilde_a : inst.dtilde_b;
            for (const auto& s : *setups) {
                Matrix sum = Matrix::Zero(Eigen::Index(s.dim()), Eigen::Index(s.dim()));
                for (const auto& m : s.povm) sum += m.matrix();
                CHECK((sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff() < 1e-12);
                CHECK((s.accepted_element().matrix() - dt.matrix()).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
        Rng rng(seed);
        const auto g = random_povm(4, 5, rng);
        Matrix sum = Matrix::Zero(4, 4);
        for (const auto& m : g) sum += m.matrix();
        CHECK((sum - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("random_instance determinism and complement membership") {
    const TensorLayout lay{3, 2, 3, 1};
    const InstanceSpec spec{lay, 1, 2, 3, true};
    const auto a = random_instance(99, spec);
    const auto b = random_instance(99, spec);
    CHECK(a.psi.amplitudes() == b.psi.amplitudes());
    CHECK(a.complement_psi->amplitudes() == b.complement_psi->amplitudes());
    CHECK(a.dtilde_a.matrix() == b.dtilde_a.matrix());
    CHECK(a.setups_b[2].povm[0].matrix() == b.setups_b[2].povm[0].matrix());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto inst = random_instance(seed, spec);
        Vector v = inst.complement_psi->amplitudes();
        apply_each(v, lay, inst.filter_a.matrix(), inst.filter_b.matrix());
        CHECK(v.norm() <= 1e-10);
    }
    CHECK_THROWS_AS(random_instance(1, {{4, 4, 4, 1}, 2, 2, 3, false}), BudgetExceeded);
    CHECK_THROWS_AS(random_instance(1, {{1, 2, 2, 1}, 0, 1, 3, false}), DomainError);
    // A filter keeping everything leaves no complement.
    CHECK_THROWS_AS(random_instance(1, {{1, 2, 2, 1}, 2, 2, 3, true}), DegenerateError);
}

TEST_CASE("theorem1_rhs") {
    Matrix block = Matrix::Zero(4, 4);
    block.topLeftCorner(2, 2) << 0.5, 0.1, 0.1, 0.4;
    const DenseOperator inside(block);
    CHECK(theorem1_rhs(inside, inside, 2, 2, 3) == 0.0);
    CHECK(theorem1_rhs(DenseOperator::identity(4), DenseOperator::identity(3), 1, 2, 2) ==
          2.0 * ((4 - 1) + (3 - 2)));
    Rng rng(12);
    for (int i = 0; i < 50; ++i) {
        const auto da = random_contraction(4, rng);
        const auto db = random_contraction(3, rng);
        const std::size_t ca = 1 + i % 3, cb = 1 + i % 2;
        const double naive = da.matrix().rightCols(Eigen::Index(4 - ca)).cwiseAbs().sum() +
                             db.matrix().rightCols(Eigen::Index(3 - cb)).cwiseAbs().sum();
        CHECK_THAT(theorem1_rhs(da, db, ca, cb, 2), WithinAbs(2.0 * naive, 1e-12));
    }
}

TEST_CASE("theorem1_lhs examples") {
    const TensorLayout lay{2, 3, 3, 1};
    const auto inst = random_instance(3, {lay, 2, 2, 3, true});
    const auto& psi = *inst.complement_psi;
    CHECK_THAT(theorem1_lhs(psi, lay, inst.filter_a, inst.filter_b, 2, 2), WithinAbs(0.0, 1e-12));
    CHECK_THAT(theorem1_lhs(psi, lay, DenseOperator::identity(3), DenseOperator::identity(3), 2, 2),
               WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(theorem1_lhs(inst.psi, lay, inst.dtilde_a, inst.dtilde_b, 2, 2), DomainError);
}

TEST_CASE("theorem1 bound holds on random instances") {
    Theorem1Config cfg;
    cfg.random_shape = true;
    cfg.trials = 2000;
    cfg.seed = 2024;
    const auto s = verify_theorem1(cfg);
    CHECK(s.failures == 0);
    CHECK(s.passes == 2000);

    Theorem1Config fixed;
    fixed.dim_a = fixed.dim_b = 3;
    fixed.cutoff = 2;
    fixed.n_systems = 2;
    fixed.trials = 500;
    fixed.seed = 7;
    CHECK(verify_theorem1(fixed).failures == 0);
}

TEST_CASE("theorem1 bound holds for the worst complement state") {
    // The largest value of <Psi|D^{(x)N}|Psi> over the filter complement is the
    // top eigenvalue of Pbar D^{(x)N} Pbar.
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 2;
        const std::size_t da = 2 + trial % 3, db = 2 + (trial / 3) % 3;
        const std::size_t ca = 1 + trial % (da - 1), cb = 1 + trial % (db - 1);
        const TensorLayout lay{n, da, db, 1};
        const auto a = random_contraction(da, rng);
        const auto b = random_contraction(db, rng);
        const Matrix d = full_product(lay, a.matrix(), b.matrix());
        const Matrix p = full_product(lay, DenseOperator::basis_projector(da, ca).matrix(),
                                      DenseOperator::basis_projector(db, cb).matrix());
        const Matrix pbar = Matrix::Identity(p.rows(), p.cols()) - p;
        const Matrix m = pbar * d * pbar;
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
        INFO("trial " << trial);
        CHECK(es.eigenvalues().maxCoeff() <= theorem1_rhs(a, b, ca, cb, n) + 1e-9);
    }
}

TEST_CASE("cauchy_schwarz_lemma_check") {
    Rng rng(14);
    const auto phi = haar_state(4, rng);
    const auto sat = cauchy_schwarz_lemma_check(phi.projector(), phi, phi);
    CHECK_THAT(sat.lhs, WithinAbs(1.0, 1e-12));
    CHECK_THAT(sat.rhs, WithinAbs(1.0, 1e-12));
    CHECK(sat.holds);
    const auto zero = cauchy_schwarz_lemma_check(DenseOperator::zero(4), phi, haar_state(4, rng));
    CHECK(zero.lhs == 0.0);
    CHECK_THAT(zero.rhs, WithinAbs(0.0, 1e-15));
    CHECK_THROWS_AS(cauchy_schwarz_lemma_check(DenseOperator(1.5 * Matrix::Identity(4, 4)), phi, phi),
                    DomainError);
    LemmaConfig cfg;
    cfg.dim = 5;
    cfg.trials = 10000;
    cfg.seed = 3;
    CHECK(verify_lemma(cfg).failures == 0);
}

TEST_CASE("tensor budget") {
    CHECK_THROWS_AS(TensorLayout({3, 4, 4, 2}).validate(), BudgetExceeded);
    CHECK_NOTHROW(TensorLayout({3, 4, 4, 1}).validate());
    CHECK_THROWS_AS(TensorLayout({0, 2, 2, 1}).validate(), DomainError);
}
