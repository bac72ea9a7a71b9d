#include <cmath>
#include <vector>

#include "doctest.h"
#include "qzeno/errors.hpp"
#include "qzeno/propagator.hpp"
#include "qzeno/pseudomode.hpp"

using namespace qzeno;

namespace {

PhysParams make_params(double e1, double e2, double g1, double g2, double lambda) {
    PhysParams p;
    p.e1 = e1;
    p.e2 = e2;
    p.gamma1 = g1;
    p.gamma2 = g2;
    p.lambda = lambda;
    return p;
}

}  // namespace

TEST_CASE("build_pseudomode reproduces the Lorentzian self-energy") {
    const PhysParams p = make_params(0.0, 0.0, 1.0, 1.0, 3.0);
    const PseudomodeGenerator gen = build_pseudomode(p);
    CHECK(gen.g1() == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
    CHECK(gen.g2() == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));

    // g_j g_j' / (w + i Lambda) == Lambda sqrt(G_j G_j') / (2 (w + i Lambda))
    // at a handful of upper-half-plane frequencies
    const std::vector<cplx> omegas = {cplx{1.0, 1.0},  cplx{-2.3, 0.4}, cplx{0.0, 2.0},
                                      cplx{5.5, 0.01}, cplx{-40.0, 7.0}, cplx{0.3, 0.3},
                                      cplx{12.0, 5.0}, cplx{-0.7, 1.3}, cplx{3.0, 0.9},
                                      cplx{-9.0, 2.2}};
    for (const cplx& w : omegas) {
        const cplx denom = w + cplx{0.0, p.lambda};
        const cplx reduced = gen.g1() * gen.g2() / denom;
        const cplx direct = p.lambda * std::sqrt(p.gamma1 * p.gamma2) / (2.0 * denom);
        CHECK(std::abs(reduced - direct) <= 1e-12 * std::abs(direct));
    }
}

TEST_CASE("build_pseudomode coupling structure") {
    const PseudomodeGenerator decoupled = build_pseudomode(make_params(0, 0, 1.0, 0.0, 3.0));
    CHECK(decoupled.g2() == 0.0);

    const PseudomodeGenerator ratio2 = build_pseudomode(make_params(0, 0, 4.0, 1.0, 3.0));
    CHECK(ratio2.g1() == doctest::Approx(2.0 * ratio2.g2()).epsilon(1e-14));
}

TEST_CASE("evolve_interval: decoupled, short-time and closed-form checks") {
    SUBCASE("zero couplings give diagonal phase evolution") {
        const PhysParams p = make_params(1.0, 2.0, 0.0, 0.0, 3.0);
        const PseudomodeState s{cplx{0.6, 0.0}, cplx{0.0, 0.5}, cplx{0.3, 0.3}};
        const double tau = 0.7;
        const PseudomodeState out = evolve_interval(s, build_pseudomode(p), tau);
        CHECK(std::abs(out.b1 - s.b1 * std::exp(cplx{0.0, -p.e1 * tau})) < 1e-12);
        CHECK(std::abs(out.b2 - s.b2 * std::exp(cplx{0.0, -p.e2 * tau})) < 1e-12);
        CHECK(std::abs(out.bp - s.bp * std::exp(-p.lambda * tau)) < 1e-12);
    }
    SUBCASE("tau -> 0 leaves the state unchanged to O(tau)") {
        const PhysParams p = make_params(0.0, 0.0, 1.0, 1.0, 3.0);
        const PseudomodeState s{cplx{1.0}, cplx{0.0}, cplx{0.0}};
        const PseudomodeState out = evolve_interval(s, build_pseudomode(p), 1e-9);
        CHECK(std::abs(out.b1 - s.b1) < 1e-8);
        CHECK(std::abs(out.b2) < 1e-8);
    }
    SUBCASE("aligned dot norm matches the closed form") {
        const PhysParams p = make_params(0.0, 0.0, 1.0, 1.0, 3.0);
        const PseudomodeGenerator gen = build_pseudomode(p);
        for (double t : {0.3, 1.0, 2.5}) {
            const PseudomodeState out =
                evolve_interval({cplx{1.0}, cplx{0.0}, cplx{0.0}}, gen, t);
            const cplx a = a_of_t(t, 0.0, 1.0, 3.0);
            const double expected = std::norm(0.5 * (a + 1.0)) + std::norm(0.5 * (a - 1.0));
            CHECK(std::abs(out.dot_norm_sq() - expected) < 1e-9);
        }
    }
}

TEST_CASE("interval propagator agrees with its step-halved square") {
    for (const PhysParams& p :
         {make_params(0.0, 0.0, 1.0, 1.0, 3.0), make_params(0.05, -0.05, 1.0, 1.0, 20.0),
          make_params(9.0, 9.0, 1.0, 1.0, 3.0), make_params(0.3, -1.2, 4.0, 1.0, 7.0)}) {
        const PseudomodePropagator prop(build_pseudomode(p));
        for (double tau : {0.05, 0.4}) {
            const Eigen::Matrix3cd whole = prop.step(tau);
            const Eigen::Matrix3cd half = prop.step(tau / 2.0);
            CHECK(((half * half) - whole).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("total norm is non-increasing under pseudomode evolution") {
    const PhysParams p = make_params(0.1, -0.4, 2.0, 1.0, 5.0);
    const PseudomodeGenerator gen = build_pseudomode(p);
    PseudomodeState s{cplx{0.8}, cplx{0.6}, cplx{0.0}};
    double prev = s.norm_sq();
    for (int i = 0; i < 20; ++i) {
        s = evolve_interval(s, gen, 0.25);
        const double cur = s.norm_sq();
        CHECK(cur <= prev + 1e-12);
        CHECK(cur <= 1.0 + 1e-12);
        prev = cur;
    }
}

TEST_CASE("project_null zeroes the pseudomode amplitude only") {
    const PseudomodeState s{cplx{0.6}, cplx{0.3}, cplx{0.0, 0.5}};
    const PseudomodeState out = project_null(s);
    CHECK(out.b1 == cplx{0.6});
    CHECK(out.b2 == cplx{0.3});
    CHECK(out.bp == cplx{0.0});
    CHECK(out.norm_sq() <= s.norm_sq());

    const PseudomodeState all_reservoir{cplx{0.0}, cplx{0.0}, cplx{1.0}};
    CHECK(project_null(all_reservoir).norm_sq() == 0.0);
}

TEST_CASE("run_protocol matches the analytic n-step propagator (dual path)") {
    const PhysParams p = make_params(0.0, 0.0, 1.0, 1.0, 3.0);
    const MeasurementProtocol protocol = make_protocol_x(2.0, 5, p.lambda);
    const DotAmplitudes init{cplx{1.0}, cplx{0.0}};
    const ConditionalTrace engine = run_protocol(p, protocol, init);
    const ConditionalTrace analytic = measured_trace_analytic(protocol, p, init);
    REQUIRE(engine.size() == analytic.size());
    for (std::size_t i = 0; i < engine.size(); ++i) {
        CHECK(std::abs(engine.p1[i] - analytic.p1[i]) < 1e-10);
        CHECK(std::abs(engine.null_prob[i] - analytic.null_prob[i]) < 1e-10);
    }
}

TEST_CASE("run_protocol freezes the state deep in the Zeno regime") {
    const PhysParams p = make_params(0.0, 0.0, 1.0, 1.0, 3.0);
    // x = 0.001, Gamma t <= 1
    const MeasurementProtocol protocol = make_protocol_x(0.001, 3000, p.lambda);
    const ConditionalTrace trace = run_protocol(p, protocol, {cplx{1.0}, cplx{0.0}});
    for (double v : trace.p1) CHECK(v >= 0.999);
}

TEST_CASE("run_protocol degenerates to unmeasured evolution at n = 0") {
    const PhysParams p = make_params(0.3, -0.2, 1.0, 2.0, 4.0);
    const MeasurementProtocol protocol = make_protocol(2.5, 0, p.lambda);
    const DotAmplitudes init{cplx{0.6}, cplx{0.8}};
    const ConditionalTrace t0 = run_protocol(p, protocol, init);
    const ConditionalTrace tu = run_unmeasured(p, {0.0, 2.5}, init);
    REQUIRE(t0.size() == 2);
    CHECK(t0.times[1] == 2.5);
    CHECK(std::abs(t0.p1[1] - tu.p1[1]) < 1e-13);
    CHECK(std::abs(t0.null_prob[1] - tu.null_prob[1]) < 1e-13);
}

TEST_CASE("per-step and deferred renormalization give the same trace") {
    const PhysParams p = make_params(0.05, -0.05, 1.0, 1.0, 3.0);
    const MeasurementProtocol protocol = make_protocol_x(0.2, 60, p.lambda);
    const DotAmplitudes init{cplx{1.0}, cplx{0.0}};
    const ConditionalTrace deferred = run_protocol(p, protocol, init);

    // explicit per-step renormalization with the public pieces
    const PseudomodeGenerator gen = build_pseudomode(p);
    PseudomodeState s{init.b1, init.b2, cplx{0.0}};
    for (std::size_t i = 1; i < deferred.size(); ++i) {
        s = project_null(evolve_interval(s, gen, protocol.tau));
        const double norm = std::sqrt(s.dot_norm_sq());
        s = {s.b1 / norm, s.b2 / norm, cplx{0.0}};
        const double p1 = std::norm(s.b1) / s.dot_norm_sq();
        CHECK(std::abs(p1 - deferred.p1[i]) < 1e-12);
    }
}

TEST_CASE("exchange symmetry of the aligned protocol") {
    const PhysParams p = make_params(0.2, 0.2, 1.5, 1.5, 5.0);
    const MeasurementProtocol protocol = make_protocol_x(0.5, 25, p.lambda);
    const DotAmplitudes init{cplx{0.48, 0.36}, cplx{0.64, -0.48}};
    const ConditionalTrace forward = run_protocol(p, protocol, init);
    const ConditionalTrace swapped = run_protocol(p, protocol, {init.b2, init.b1});
    for (std::size_t i = 0; i < forward.size(); ++i) {
        CHECK(forward.p1[i] == swapped.p2[i]);
        CHECK(forward.p2[i] == swapped.p1[i]);
    }
}

TEST_CASE("null probability is monotone and p1 + p2 = 1 along traces") {
    const PhysParams p = make_params(0.05, -0.05, 1.0, 1.0, 20.0);
    const MeasurementProtocol protocol = make_protocol_x(0.2, 200, p.lambda);
    const ConditionalTrace trace = run_protocol(p, protocol, {cplx{1.0}, cplx{0.0}});
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(std::abs(trace.p1[i] + trace.p2[i] - 1.0) <= 1e-12);
        if (i > 0) CHECK(trace.null_prob[i] <= trace.null_prob[i - 1] + 1e-15);
        CHECK(trace.null_prob[i] <= 1.0 + 1e-12);
        CHECK(trace.null_prob[i] > 0.0);
    }
}

TEST_CASE("null-record underflow aborts with a diagnostic") {
    // bright-state initial condition decays hard: (1,1)/sqrt(2) at strong decay
    const PhysParams p = make_params(0.0, 0.0, 1.0, 1.0, 4.0);
    const double r = 1.0 / std::sqrt(2.0);
    const MeasurementProtocol protocol = make_protocol(5.0, 200, p.lambda);
    CHECK_THROWS_WITH_AS(run_protocol(p, protocol, {cplx{r}, cplx{r}}),
                         doctest::Contains("underflowed"), numeric_error);
}

TEST_CASE("scaling collapse: Lambda = 3 vs 20 at fixed x") {
    // common instants of the two grids: t = k * x (Gamma = 1)
    const DotAmplitudes init{cplx{1.0}, cplx{0.0}};
    for (const auto& [e1, e2] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.05, -0.05}}) {
        const double x = 0.2;
        const PhysParams p3 = make_params(e1, e2, 1.0, 1.0, 3.0);
        const PhysParams p20 = make_params(e1, e2, 1.0, 1.0, 20.0);
        const double t_max = 6.0;
        const ConditionalTrace a =
            run_protocol(p3, make_protocol_x(x, std::llround(t_max * 3.0 / x), 3.0), init);
        const ConditionalTrace b =
            run_protocol(p20, make_protocol_x(x, std::llround(t_max * 20.0 / x), 20.0), init);
        for (int k = 1; k * x <= t_max + 1e-9; ++k) {
            const std::size_t ia = static_cast<std::size_t>(k) * 3;   // k*x / (x/3)
            const std::size_t ib = static_cast<std::size_t>(k) * 20;  // k*x / (x/20)
            REQUIRE(ia < a.size());
            REQUIRE(ib < b.size());
            CHECK(std::abs(a.p1[ia] - b.p1[ib]) < 0.02);
        }
    }
}

TEST_CASE("run_unmeasured reproduces the aligned closed form") {
    const PhysParams p = make_params(0.0, 0.0, 1.0, 1.0, 3.0);
    const DotAmplitudes init{cplx{1.0}, cplx{0.0}};
    std::vector<double> grid;
    for (int k = 0; k <= 24; ++k) grid.push_back(0.25 * k);
    const ConditionalTrace trace = run_unmeasured(p, grid, init);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double expected = p1_conditional(a_of_t(grid[i], 0.0, 1.0, 3.0), init);
        CHECK(std::abs(trace.p1[i] - expected) <= 1e-10);
    }
    // gamma = 1 long-time conditional occupation
    const ConditionalTrace tail = run_unmeasured(p, {20.0}, init);
    CHECK(tail.p1[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("run_unmeasured holds the dark state at P1 = 1/2") {
    const PhysParams p = make_params(0.3, 0.3, 1.0, 1.0, 3.0);
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(0.7 * k);
    const ConditionalTrace trace = run_unmeasured(p, grid, {cplx{r}, cplx{-r}});
    for (double v : trace.p1) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(run_unmeasured(p, {1.0, 0.5}, {cplx{r}, cplx{-r}}), std::invalid_argument);
}
