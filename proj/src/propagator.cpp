#include "qzeno/propagator.hpp"

#include <cmath>
#include <stdexcept>

#include "qzeno/errors.hpp"

namespace qzeno {

namespace {

// Relative width of the confluent-root window. Cancellation error in the
// generic a(t) grows as 1/|A+ - A-|, so switch well before it bites.
constexpr double kDegenerateEps = 1e-6;

void check_aligned_inputs(double gamma, double lambda) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma: width must be nonnegative");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda: bandwidth must be positive");
}

}  // namespace

RootPair roots(double e, double gamma, double lambda) {
    check_aligned_inputs(gamma, lambda);
    const cplx b(lambda, -e);  // A+ + A-
    const cplx s = std::sqrt(b * b - 4.0 * gamma * lambda);
    // Principal sqrt has Re(s) >= 0 (Im(s) >= 0 on the Re = 0 branch cut),
    // which is exactly the required labeling.
    return {0.5 * (b + s), 0.5 * (b - s)};
}

cplx a_of_t(double t, double e, double gamma, double lambda) {
    if (!(t >= 0.0)) throw std::invalid_argument("t: time must be nonnegative");
    const RootPair r = roots(e, gamma, lambda);
    const cplx diff = r.a_plus - r.a_minus;
    const cplx b(lambda, -e);
    if (std::abs(diff) < kDegenerateEps * std::abs(b)) {
        const cplx a_conf = 0.5 * b;
        return (1.0 + a_conf * t) * std::exp(-a_conf * t);
    }
    return (r.a_plus * std::exp(-r.a_minus * t) - r.a_minus * std::exp(-r.a_plus * t)) / diff;
}

TransferMatrix2 u_of_t(double t, const PhysParams& p) {
    validate_params(p);
    if (!p.aligned())
        throw std::invalid_argument(
            "u_of_t: closed form requires aligned levels (e1 == e2, gamma1 == gamma2)");
    return TransferMatrix2{a_of_t(t, p.e1, p.gamma1, p.lambda)};
}

DotAmplitudes measured_amplitudes_analytic(const MeasurementProtocol& protocol,
                                           const PhysParams& p, const DotAmplitudes& initial) {
    validate_params(p);
    validate_protocol(protocol, p.lambda);
    if (!p.aligned())
        throw std::invalid_argument("measured_amplitudes_analytic: requires aligned levels");
    if (protocol.n == 0) return u_of_t(protocol.t_total, p).apply(initial);
    const cplx a_step = a_of_t(protocol.tau, p.e1, p.gamma1, p.lambda);
    // Iterated multiplication rather than exp(n log a): no branch-cut jumps
    // when a winds around the origin (possible for large E).
    cplx a_pow{1.0, 0.0};
    for (long long k = 0; k < protocol.n; ++k) a_pow *= a_step;
    return TransferMatrix2{a_pow}.apply(initial);
}

ConditionalTrace measured_trace_analytic(const MeasurementProtocol& protocol,
                                         const PhysParams& p, const DotAmplitudes& initial) {
    validate_params(p);
    validate_protocol(protocol, p.lambda);
    if (!p.aligned())
        throw std::invalid_argument("measured_trace_analytic: requires aligned levels");
    ConditionalTrace trace;
    trace.method = "analytic-stepwise";
    trace.append(0.0, std::norm(initial.b1), std::norm(initial.b2));
    if (protocol.n == 0) {
        const DotAmplitudes v = u_of_t(protocol.t_total, p).apply(initial);
        trace.append(protocol.t_total, std::norm(v.b1), std::norm(v.b2));
        return trace;
    }
    const cplx a_step = a_of_t(protocol.tau, p.e1, p.gamma1, p.lambda);
    cplx a_pow{1.0, 0.0};
    for (long long k = 1; k <= protocol.n; ++k) {
        a_pow *= a_step;
        const DotAmplitudes v = TransferMatrix2{a_pow}.apply(initial);
        const double t = protocol.t_total * static_cast<double>(k) / static_cast<double>(protocol.n);
        trace.append(t, std::norm(v.b1), std::norm(v.b2));
    }
    return trace;
}

cplx a_bar_scaling(double t, double gamma, double x, double c) {
    if (!(t >= 0.0)) throw std::invalid_argument("t: time must be nonnegative");
    if (!(x > 0.0)) throw std::invalid_argument("x: scaling variable must be positive");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma: width must be nonnegative");
    if (x < 1e-8) return cplx{1.0, 0.0};
    const cplx kappa(1.0, -c);
    const cplx exponent =
        gamma * t * (1.0 - std::exp(-kappa * x)) / (kappa * kappa * x) - gamma * t / kappa;
    return std::exp(exponent);
}

double p1_conditional(cplx a_bar, const DotAmplitudes& initial) {
    const DotAmplitudes v = TransferMatrix2{a_bar}.apply(initial);
    const double w1 = std::norm(v.b1);
    const double w2 = std::norm(v.b2);
    const double s = w1 + w2;
    if (s < 1e-300)
        throw numeric_error("conditional norm vanished: the null record is impossible");
    return w1 / s;
}

}  // namespace qzeno
