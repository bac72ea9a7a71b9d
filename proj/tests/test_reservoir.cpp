#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "qzeno/errors.hpp"
#include "qzeno/propagator.hpp"
#include "qzeno/pseudomode.hpp"
#include "qzeno/reservoir.hpp"

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

TEST_CASE("discretize: grid layout and input validation") {
    const PhysParams p = make_params(0, 0, 1.0, 1.0, 3.0);
    const DiscretizedReservoir res = discretize(p, 101, 30.0);
    CHECK(res.de == 2.0 * 30.0 / 100.0);
    CHECK(res.mode_energies.front() == -30.0);
    CHECK(res.mode_energies.back() == 30.0);
    CHECK(res.mode_energies[50] == 0.0);  // resonance point on-grid

    CHECK_THROWS_AS(discretize(p, 100, 30.0), std::invalid_argument);  // even
    CHECK_THROWS_AS(discretize(p, 49, 30.0), std::invalid_argument);   // too small
    CHECK_THROWS_AS(discretize(p, 101, 2.0), std::invalid_argument);   // e_max < lambda
}

TEST_CASE("discretize: sum rule against the grid-free integral") {
    const PhysParams p = make_params(0, 0, 1.0, 1.0, 3.0);
    const DiscretizedReservoir res = discretize(p, 2001, 150.0);
    // (Gamma Lambda / pi) atan(50) = 1.48090395...
    const double target = res.sum_rule_target(1);
    CHECK(target == doctest::Approx(1.4809039526970816).epsilon(1e-12));
    CHECK(std::abs(res.sum_rule(1) - target) <= 0.005 * target);
    CHECK(std::abs(res.sum_rule(2) - target) <= 0.005 * target);
}

TEST_CASE("discretize: decoupled dot and constant coupling ratio") {
    const DiscretizedReservoir res0 = discretize(make_params(0, 0, 1.0, 0.0, 3.0), 101, 30.0);
    for (double g : res0.g2) CHECK(g == 0.0);

    const DiscretizedReservoir res = discretize(make_params(0, 0, 4.0, 1.0, 3.0), 101, 30.0);
    for (int k = 0; k < res.n_modes; ++k)
        CHECK(res.g1[k] == doctest::Approx(2.0 * res.g2[k]).epsilon(1e-14));
}

TEST_CASE("evolve_full: phases only at zero coupling") {
    const PhysParams p = make_params(0.7, -0.3, 0.0, 0.0, 3.0);
    const DiscretizedReservoir res = discretize(p, 51, 10.0);
    FullState s;
    s.b1 = cplx{0.6, 0.0};
    s.b2 = cplx{0.0, 0.8};
    s.reservoir.assign(51, cplx{0.0});
    s.reservoir[7] = cplx{0.0, 0.0};
    const double tau = 1.3;
    const FullState out = evolve_full(s, res, p, tau);
    CHECK(std::abs(out.b1 - s.b1 * std::exp(cplx{0.0, -p.e1 * tau})) < 1e-12);
    CHECK(std::abs(out.b2 - s.b2 * std::exp(cplx{0.0, -p.e2 * tau})) < 1e-12);
}

TEST_CASE("evolve_full: unitary over many steps") {
    const PhysParams p = make_params(0.05, -0.05, 1.0, 1.0, 3.0);
    const DiscretizedReservoir res = discretize(p, 201, 30.0);
    const ReservoirPropagator prop = ReservoirPropagator::build(p, res);
    FullState s;
    s.b1 = cplx{1.0};
    s.b2 = cplx{0.0};
    s.reservoir.assign(201, cplx{0.0});
    for (int i = 0; i < 20; ++i) s = evolve_full(s, prop, 0.5);
    CHECK(std::abs(s.norm_sq() - 1.0) < 1e-10);
}

TEST_CASE("evolve_full: aligned dot amplitudes match the closed form") {
    const PhysParams p = make_params(0, 0, 1.0, 1.0, 3.0);
    const DiscretizedReservoir res = discretize(p, 2001, 150.0);
    const ReservoirPropagator prop = ReservoirPropagator::build(p, res);
    FullState s;
    s.b1 = cplx{1.0};
    s.b2 = cplx{0.0};
    s.reservoir.assign(res.n_modes, cplx{0.0});
    double t = 0.0;
    for (int i = 0; i < 6; ++i) {
        s = evolve_full(s, prop, 1.0);
        t += 1.0;
        const cplx a = a_of_t(t, 0.0, 1.0, 3.0);
        // closed form carries the dropped phase e^{-iEt} = 1 at E = 0
        CHECK(std::abs(std::abs(s.b1) - std::abs(0.5 * (a + 1.0))) < 2e-3);
        CHECK(std::abs(std::abs(s.b2) - std::abs(0.5 * (a - 1.0))) < 2e-3);
    }
}

TEST_CASE("the discretized reservoir validates a_of_t at Lambda = 8") {
    // independent check of the frozen value a(1) = 0.37383...
    const PhysParams p = make_params(0, 0, 1.0, 1.0, 8.0);
    const DiscretizedReservoir res = discretize(p, 2001, 400.0);
    const ReservoirPropagator prop = ReservoirPropagator::build(p, res);
    const ConditionalTrace trace =
        run_unmeasured_oracle(p, {1.0}, {cplx{1.0}, cplx{0.0}}, res, prop);
    const double a = 0.3738330257400697;
    const double expected_p1 = std::norm(0.5 * (a + 1.0)) / (std::norm(0.5 * (a + 1.0)) +
                                                             std::norm(0.5 * (a - 1.0)));
    CHECK(std::abs(trace.p1[0] - expected_p1) < 2e-3);
}

TEST_CASE("project_null_full zeroes exactly the reservoir") {
    FullState s;
    s.b1 = cplx{0.5, 0.1};
    s.b2 = cplx{-0.2, 0.3};
    s.reservoir = {cplx{0.1, 0.0}, cplx{0.0, -0.2}, cplx{0.05, 0.05}};
    const double leaked = s.norm_sq() - s.dot_norm_sq();
    const FullState out = project_null_full(s);
    CHECK(out.b1 == s.b1);
    CHECK(out.b2 == s.b2);
    for (const cplx& b : out.reservoir) CHECK(b == cplx{0.0});
    CHECK(s.norm_sq() - out.norm_sq() == doctest::Approx(leaked).epsilon(1e-14));

    const FullState again = project_null_full(out);
    CHECK(again.norm_sq() == out.norm_sq());
}

TEST_CASE("oracle protocol stays close to the pseudomode engine at moderate N") {
    const PhysParams p = make_params(0, 0, 1.0, 1.0, 3.0);
    const DotAmplitudes init{cplx{1.0}, cplx{0.0}};
    const MeasurementProtocol protocol = make_protocol_x(2.0, 5, p.lambda);
    const ConditionalTrace oracle = run_protocol_oracle(p, protocol, init, 1001, 150.0);
    const ConditionalTrace engine = run_protocol(p, protocol, init);
    REQUIRE(oracle.size() == engine.size());
    for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(std::abs(oracle.p1[i] - engine.p1[i]) < 0.02);
    CHECK(oracle.method == "oracle");
    REQUIRE(oracle.oracle.has_value());
    CHECK(oracle.oracle->n_modes == 1001);
    CHECK(oracle.oracle->sum_rule_deficit > 0.0);
    CHECK(oracle.oracle->sum_rule_deficit < 0.05);
}

TEST_CASE("oracle refuses windows beyond the recurrence horizon") {
    const PhysParams p = make_params(0, 0, 1.0, 1.0, 3.0);
    const DiscretizedReservoir res = discretize(p, 101, 30.0);
    // t_rec = 2 pi / 0.6 ~ 10.5
    CHECK(res.recurrence_time() == doctest::Approx(2.0 * std::numbers::pi / 0.6).epsilon(1e-12));
    const MeasurementProtocol protocol = make_protocol(1.0, 12, p.lambda);
    CHECK_THROWS_WITH_AS(run_protocol_oracle(p, protocol, {cplx{1.0}, cplx{0.0}}, 101, 30.0),
                         doctest::Contains("recurrence"), std::invalid_argument);
}

TEST_CASE("a decoupled dot cannot decay") {
    const PhysParams p = make_params(0, 0, 1.0, 0.0, 3.0);
    const MeasurementProtocol protocol = make_protocol(0.5, 8, p.lambda);
    const ConditionalTrace trace =
        run_protocol_oracle(p, protocol, {cplx{0.0}, cplx{1.0}}, 101, 30.0);
    for (double v : trace.p2) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : trace.null_prob) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("oracle deviation does not grow when e_max doubles at fixed density") {
    const PhysParams p = make_params(0, 0, 1.0, 1.0, 3.0);
    const DotAmplitudes init{cplx{1.0}, cplx{0.0}};
    const MeasurementProtocol protocol = make_protocol_x(2.0, 3, p.lambda);
    const ConditionalTrace engine = run_protocol(p, protocol, init);
    double prev_dev = -1.0;
    for (const auto& [n_modes, e_max] : std::vector<std::pair<int, double>>{{501, 75.0},
                                                                            {1001, 150.0}}) {
        const ConditionalTrace oracle = run_protocol_oracle(p, protocol, init, n_modes, e_max);
        double dev = 0.0;
        for (std::size_t i = 0; i < oracle.size(); ++i)
            dev = std::max(dev, std::abs(oracle.p1[i] - engine.p1[i]));
        if (prev_dev >= 0.0) CHECK(dev <= prev_dev + 1e-4);
        prev_dev = dev;
    }
}

TEST_CASE("dark-state fidelity over a long unmeasured window") {
    const PhysParams p = make_params(0, 0, 4.0, 1.0, 3.0);
    const DiscretizedReservoir res = discretize(p, 1001, 150.0);
    const ReservoirPropagator prop = ReservoirPropagator::build(p, res);
    const MixingAngle ang = mixing_angle(2.0);
    FullState s;
    s.b1 = cplx{ang.cos_beta};
    s.b2 = cplx{-ang.sin_beta};
    s.reservoir.assign(res.n_modes, cplx{0.0});
    FullState out = evolve_full(s, prop, 10.0);
    CHECK(out.dot_norm_sq() > 1.0 - 1e-6);
}
