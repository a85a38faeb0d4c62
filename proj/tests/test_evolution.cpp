#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "metrology/evolution.hpp"

using namespace metrology;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

ProtocolConfig random_config(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ProtocolConfig cfg;
    cfg.N = n;
    cfg.delta_a = 0.3 + 1.7 * u(rng);
    cfg.omega_p = 3.0 * u(rng);
    cfg.g = 2.0 * u(rng);
    cfg.g_z = 2.0 * u(rng);
    return cfg;
}

} // namespace

TEST_CASE("hamiltonian structure") {
    SECTION("decoupled limit is diagonal") {
        ProtocolConfig cfg;
        cfg.N = 3;
        cfg.omega_p = 1.3;
        cfg.delta_a = 0.9;
        Matrix h = build_hamiltonian(cfg);
        DickeSpace s(cfg.N);
        for (int p = 0; p <= cfg.N; ++p)
            for (int q = 0; q < 2; ++q) {
                const double expect = cfg.omega_p * s.m_at(p) +
                                      cfg.omega_a() * (q == 0 ? 1.0 : -1.0);
                CHECK(std::abs(h(2 * p + q, 2 * p + q) - expect) <= 1e-12);
            }
        Matrix off = h;
        for (int i = 0; i < h.rows(); ++i) off(i, i) = 0.0;
        CHECK(max_abs(off) <= 1e-12);
    }

    SECTION("hermitian, and excitation number is conserved") {
        std::mt19937 rng(11);
        DickeSpace s(6);
        auto ops = build_collective_operators(s);
        QubitSpace q;
        // Jz + sigma_z/2 generates the conserved pair structure
        const Matrix exc = embed(ops.jz, q.identity) +
                           0.5 * embed(Matrix::Identity(7, 7), q.sigma_z);
        for (int rep = 0; rep < 5; ++rep) {
            ProtocolConfig cfg = random_config(rng, 6);
            Matrix h = build_hamiltonian(cfg);
            CHECK(max_abs(h - h.adjoint()) <= 1e-12);
            CHECK(max_abs(exc * h - h * exc) <= 1e-10);
        }
    }

    SECTION("single-spin spectrum against hand diagonalization") {
        // N=1, omega_p=0, delta_a=1, g=g_z=1: the two uncoupled states sit
        // at g_z/2 +- omega_a and the coupled 2x2 pair at
        // -g_z/2 +- sqrt(delta_a^2 + g^2)
        ProtocolConfig cfg;
        cfg.N = 1;
        cfg.delta_a = 1.0;
        cfg.g = cfg.g_z = 1.0;
        Eigen::SelfAdjointEigenSolver<Matrix> es(build_hamiltonian(cfg));
        std::vector<double> expect = {-0.5 - std::sqrt(2.0), -0.5, 1.5,
                                      -0.5 + std::sqrt(2.0)};
        std::sort(expect.begin(), expect.end());
        for (int i = 0; i < 4; ++i)
            CHECK(es.eigenvalues()(i) == Catch::Approx(expect[i]).margin(1e-12));
    }
}

TEST_CASE("operator functions") {
    ProtocolConfig cfg;
    cfg.N = 8;
    cfg.g = 0.7;
    cfg.g_z = 0.9;
    cfg.omega_p = 1.1;
    auto fn = operator_functions(cfg);
    CHECK(fn.omega(cfg.N / 2.0) == 0.0);

    ProtocolConfig zero_g = cfg;
    zero_g.g = 0.0;
    auto fn0 = operator_functions(zero_g);
    CHECK(fn0.big_omega(1.5) == Catch::Approx(std::abs(fn0.lambda(1.5))));

    // quantized couplings at N=100: g_z^2 - g^2 = (2/101)^2
    ProtocolConfig f2;
    f2.N = 100;
    f2.g_z = 2.0 * 299.0 / (101.0 * 101.0);
    f2.g = 4.0 * std::sqrt(19800.0) / (101.0 * 101.0);
    const double gap = f2.g_z * f2.g_z - f2.g * f2.g;
    CHECK(gap == Catch::Approx(std::pow(2.0 / 101.0, 2)).epsilon(1e-12));
}

TEST_CASE("analytic propagator basics") {
    std::mt19937 rng(23);
    SECTION("t=0 identity") {
        ProtocolConfig cfg = random_config(rng, 5);
        Matrix u = analytic_evolution(cfg, 0.0);
        CHECK(max_abs(u - Matrix::Identity(u.rows(), u.cols())) <= 1e-12);
    }
    SECTION("decoupled limit gives bare phases") {
        ProtocolConfig cfg;
        cfg.N = 4;
        cfg.omega_p = 0.8;
        cfg.delta_a = 1.2;
        const double t = 2.7;
        Matrix u = analytic_evolution(cfg, t);
        DickeSpace s(cfg.N);
        for (int p = 0; p <= cfg.N; ++p)
            for (int q = 0; q < 2; ++q) {
                const Complex expect = std::exp(
                    -iu * (cfg.omega_p * s.m_at(p) +
                           cfg.omega_a() * (q == 0 ? 1.0 : -1.0)) *
                    t);
                CHECK(std::abs(u(2 * p + q, 2 * p + q) - expect) <= 1e-12);
            }
    }
    SECTION("unitarity and block structure") {
        for (int n : {1, 2, 5, 20}) {
            ProtocolConfig cfg = random_config(rng, n);
            const double t = 15.0;
            Matrix u = analytic_evolution(cfg, t);
            CHECK(max_abs(Matrix(u * u.adjoint()) -
                          Matrix::Identity(u.rows(), u.cols())) <= 1e-10);
            // no matrix elements between distinct pair subspaces
            for (int p = 0; p <= n; ++p)
                for (int q = 0; q < 2; ++q)
                    for (int p2 = 0; p2 <= n; ++p2)
                        for (int q2 = 0; q2 < 2; ++q2) {
                            const int i = 2 * p + q, k = 2 * p2 + q2;
                            if (i == k) continue;
                            // coupled partners differ by one excitation
                            const bool partners =
                                (q == 1 && q2 == 0 && p2 == p + 1) ||
                                (q == 0 && q2 == 1 && p == p2 + 1);
                            if (!partners) CHECK(std::abs(u(i, k)) <= 1e-12);
                        }
        }
    }
}

TEST_CASE("oracle propagator properties") {
    std::mt19937 rng(37);
    ProtocolConfig cfg = random_config(rng, 7);
    Matrix u1 = oracle_evolution(cfg, 1.3);
    Matrix u2 = oracle_evolution(cfg, 2.9);
    CHECK(max_abs(Matrix(u1 * u1.adjoint()) -
                  Matrix::Identity(u1.rows(), u1.cols())) <= 1e-10);
    CHECK(max_abs(u1 * u2 - oracle_evolution(cfg, 4.2)) <= 1e-9);

    Matrix h = build_hamiltonian(cfg);
    std::normal_distribution<double> dist;
    Vector psi(h.rows());
    for (int i = 0; i < psi.size(); ++i) psi(i) = {dist(rng), dist(rng)};
    psi.normalize();
    const double e0 = psi.dot(h * psi).real();
    Vector evolved = u1 * psi;
    CHECK(std::abs(evolved.dot(h * evolved).real() - e0) <= 1e-9);
}

TEST_CASE("analytic propagator matches oracle on a random corpus") {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> ut(0.0, 25.0);
    double worst = 0.0;
    for (int n : {1, 2, 5, 20, 50}) {
        for (int rep = 0; rep < 20; ++rep) {
            ProtocolConfig cfg = random_config(rng, n);
            const double t = ut(rng);
            const double gap =
                max_abs(analytic_evolution(cfg, t) - oracle_evolution(cfg, t));
            worst = std::max(worst, gap);
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("block eigenphase trace consistency") {
    // eigenphase sum of each 2x2 block matches the block trace of H
    std::mt19937 rng(55);
    ProtocolConfig cfg = random_config(rng, 6);
    const double t = 0.173; // small enough to read phases mod 2 pi
    Matrix u = analytic_evolution(cfg, t);
    DickeSpace s(cfg.N);
    for (int p = 1; p <= cfg.N; ++p) {
        const double m = s.m_at(p);
        const int ig = 2 * (p - 1) + 1, ie = 2 * p;
        const Complex det =
            u(ig, ig) * u(ie, ie) - u(ig, ie) * u(ie, ig);
        const double trace_h = 2.0 * ((m + 0.5) * cfg.omega_p - cfg.g_z / 2.0);
        CHECK(std::abs(det - std::exp(-iu * trace_h * t)) <= 1e-10);
    }
}

TEST_CASE("sin(Omega t)/Omega is safe at Omega -> 0") {
    // g = 0 and g_z = -2 delta_a make lambda(m=0) vanish, so the m=0 pair
    // has Omega = 0 exactly
    ProtocolConfig cfg;
    cfg.N = 2;
    cfg.delta_a = 1.0;
    cfg.g = 0.0;
    cfg.g_z = -2.0;
    const double t = 3.3;
    Matrix u = analytic_evolution(cfg, t);
    CHECK(max_abs(u - oracle_evolution(cfg, t)) <= 1e-10);
}
