#include "qzeno/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qzeno/errors.hpp"
#include "qzeno/reservoir.hpp"

namespace qzeno {

double PhysParams::coupling_ratio() const {
    if (gamma2 <= 0.0)
        throw std::invalid_argument("gamma2: coupling ratio undefined for gamma2 = 0");
    return std::sqrt(gamma1 / gamma2);
}

PhysParams validate_params(const PhysParams& p) {
    std::ostringstream msg;
    if (!(p.gamma1 >= 0.0))
        msg << "gamma1: width must be nonnegative (got " << p.gamma1 << ")";
    else if (!(p.gamma2 >= 0.0))
        msg << "gamma2: width must be nonnegative (got " << p.gamma2 << ")";
    else if (!(p.lambda > 0.0))
        msg << "lambda: bandwidth must be positive (got " << p.lambda << ")";
    else if (!std::isfinite(p.e1))
        msg << "e1: energy must be finite";
    else if (!std::isfinite(p.e2))
        msg << "e2: energy must be finite";
    else if (p.c && !std::isfinite(*p.c))
        msg << "c: band-offset ratio must be finite";
    if (!msg.str().empty()) throw std::invalid_argument(msg.str());
    return p;
}

DotAmplitudes DotAmplitudes::normalized() const {
    const double n = std::sqrt(norm_sq());
    if (n <= 0.0) throw std::invalid_argument("cannot normalize a zero amplitude pair");
    return {b1 / n, b2 / n};
}

MixingAngle mixing_angle(double gamma) {
    if (!(gamma >= 0.0))
        throw std::invalid_argument("gamma: coupling ratio must be nonnegative");
    const double h = std::hypot(1.0, gamma);
    return {1.0 / h, gamma / h};
}

MeasurementProtocol make_protocol(double tau, long long n, double lambda) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau: measurement interval must be positive");
    if (n < 0) throw std::invalid_argument("n: measurement count must be nonnegative");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda: bandwidth must be positive");
    MeasurementProtocol p;
    p.tau = tau;
    p.n = n;
    p.t_total = (n > 0) ? static_cast<double>(n) * tau : tau;
    p.x = lambda * tau;
    return p;
}

MeasurementProtocol make_protocol_x(double x, long long n, double lambda) {
    if (!(x > 0.0)) throw std::invalid_argument("x: scaling variable must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda: bandwidth must be positive");
    return make_protocol(x / lambda, n, lambda);
}

void validate_protocol(const MeasurementProtocol& p, double lambda) {
    if (!(p.tau > 0.0)) throw std::invalid_argument("protocol: tau must be positive");
    const double expected_t = (p.n > 0) ? static_cast<double>(p.n) * p.tau : p.tau;
    if (std::abs(p.t_total - expected_t) > 1e-12 * expected_t)
        throw std::invalid_argument("protocol: n*tau does not match t_total");
    if (std::abs(p.x - lambda * p.tau) > 1e-12 * p.x)
        throw std::invalid_argument("protocol: x does not match lambda*tau for these parameters");
}

std::pair<double, double> asymptotic_conditional_occupation(double gamma,
                                                            const DotAmplitudes& initial) {
    const MixingAngle ang = mixing_angle(gamma);
    const cplx overlap = ang.cos_beta * initial.b1 - ang.sin_beta * initial.b2;
    if (std::norm(overlap) <= 1e-24 * initial.norm_sq())
        throw numeric_error(
            "initial state has no overlap with the localized eigenstate; "
            "the conditional state is undefined at t -> infinity");
    return {ang.cos_beta * ang.cos_beta, ang.sin_beta * ang.sin_beta};
}

double dark_state_residual(const DiscretizedReservoir& modes, double gamma) {
    if (modes.gamma2 <= 0.0)
        throw std::invalid_argument("dark_state_residual: reservoir built with gamma2 = 0");
    const double built_ratio = std::sqrt(modes.gamma1 / modes.gamma2);
    if (std::abs(gamma - built_ratio) > 1e-9 * (1.0 + gamma))
        throw std::invalid_argument("dark_state_residual: gamma does not match the coupling "
                                    "ratio of the discretized reservoir");
    const MixingAngle ang = mixing_angle(gamma);
    // (H - E1)|1'> vanishes on the dot rows (E1 == E2); mode row k picks up
    // g1k cos(beta) - g2k sin(beta), zero for exactly proportional couplings.
    double sum = 0.0;
    for (int k = 0; k < modes.n_modes; ++k) {
        const double r = modes.g1[k] * ang.cos_beta - modes.g2[k] * ang.sin_beta;
        sum += r * r;
    }
    return std::sqrt(sum);
}

}  // namespace qzeno
