#include "qzeno/reservoir.hpp"

#include <lapacke.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qzeno/errors.hpp"

namespace qzeno {

namespace {

constexpr double kPi = std::numbers::pi;

void check_normalized(const DotAmplitudes& initial) {
    if (std::abs(initial.norm_sq() - 1.0) > 1e-9)
        throw std::invalid_argument("initial amplitudes must be normalized");
}

OracleMeta make_meta(const DiscretizedReservoir& res) {
    OracleMeta meta;
    meta.n_modes = res.n_modes;
    meta.e_max = res.e_max;
    const double wideband = res.gamma1 * res.lambda / 2.0;
    meta.sum_rule_deficit = (wideband > 0.0) ? 1.0 - res.sum_rule(1) / wideband : 0.0;
    return meta;
}

}  // namespace

double DiscretizedReservoir::sum_rule(int dot) const {
    const std::vector<double>& g = (dot == 1) ? g1 : g2;
    double s = 0.0;
    for (double gk : g) s += gk * gk;
    return s;
}

double DiscretizedReservoir::sum_rule_target(int dot) const {
    const double gamma = (dot == 1) ? gamma1 : gamma2;
    return gamma * lambda / kPi * std::atan(e_max / lambda);
}

double DiscretizedReservoir::recurrence_time() const { return 2.0 * kPi / de; }

DiscretizedReservoir discretize(const PhysParams& p, int n_modes, double e_max) {
    validate_params(p);
    if (n_modes % 2 == 0)
        throw std::invalid_argument("n_modes: must be odd so E = 0 is a grid point");
    if (n_modes < 51) throw std::invalid_argument("n_modes: must be at least 51");
    if (!(e_max >= p.lambda))
        throw std::invalid_argument("e_max: grid cutoff must be at least lambda "
                                    "(>= 10 lambda recommended)");

    DiscretizedReservoir res;
    res.n_modes = n_modes;
    res.e_max = e_max;
    res.de = 2.0 * e_max / static_cast<double>(n_modes - 1);
    res.gamma1 = p.gamma1;
    res.gamma2 = p.gamma2;
    res.lambda = p.lambda;
    res.mode_energies.resize(n_modes);
    res.g1.resize(n_modes);
    res.g2.resize(n_modes);
    for (int k = 0; k < n_modes; ++k) {
        const double ek = -e_max + res.de * static_cast<double>(k);
        // Lorentzian weight folded into the coupling; rho0 never appears on
        // its own, only through Gamma_j = 2 pi Omega_j^2 rho0.
        const double w = p.lambda * p.lambda / (ek * ek + p.lambda * p.lambda) * res.de / (2.0 * kPi);
        res.mode_energies[k] = ek;
        res.g1[k] = std::sqrt(p.gamma1 * w);
        res.g2[k] = std::sqrt(p.gamma2 * w);
    }
    return res;
}

double FullState::norm_sq() const {
    double s = dot_norm_sq();
    for (const cplx& b : reservoir) s += std::norm(b);
    return s;
}

ReservoirPropagator ReservoirPropagator::build(const PhysParams& p,
                                               const DiscretizedReservoir& res) {
    validate_params(p);
    const int m = res.n_modes + 2;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
    h(0, 0) = p.e1;
    h(1, 1) = p.e2;
    for (int k = 0; k < res.n_modes; ++k) {
        h(0, 2 + k) = res.g1[k];
        h(2 + k, 0) = res.g1[k];
        h(1, 2 + k) = res.g2[k];
        h(2 + k, 1) = res.g2[k];
        h(2 + k, 2 + k) = res.mode_energies[k];
    }

    ReservoirPropagator prop;
    prop.eigenvalues.resize(m);
    prop.eigenvectors = std::move(h);  // dsyevd overwrites in place
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', m, prop.eigenvectors.data(), m,
                       prop.eigenvalues.data());
    if (info != 0)
        throw numeric_error("reservoir eigensolver failed: dsyevd info = " + std::to_string(info) +
                            " at dimension " + std::to_string(m) + ", max |H| = " +
                            std::to_string(std::max(std::abs(p.e1),
                                                    std::max(std::abs(p.e2), res.e_max))));
    return prop;
}

FullState evolve_full(const FullState& state, const ReservoirPropagator& prop, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau: interval must be positive");
    const Eigen::Index m = prop.eigenvalues.size();
    if (static_cast<Eigen::Index>(state.reservoir.size()) + 2 != m)
        throw std::invalid_argument("state dimension does not match the propagator");

    Eigen::VectorXd vr(m), vi(m);
    vr(0) = state.b1.real();
    vi(0) = state.b1.imag();
    vr(1) = state.b2.real();
    vi(1) = state.b2.imag();
    for (Eigen::Index k = 2; k < m; ++k) {
        vr(k) = state.reservoir[k - 2].real();
        vi(k) = state.reservoir[k - 2].imag();
    }

    Eigen::VectorXd wr = prop.eigenvectors.transpose() * vr;
    Eigen::VectorXd wi = prop.eigenvectors.transpose() * vi;
    for (Eigen::Index k = 0; k < m; ++k) {
        const double ph = -prop.eigenvalues(k) * tau;
        const double c = std::cos(ph), s = std::sin(ph);
        const double re = wr(k) * c - wi(k) * s;
        const double im = wr(k) * s + wi(k) * c;
        wr(k) = re;
        wi(k) = im;
    }
    const Eigen::VectorXd or_ = prop.eigenvectors * wr;
    const Eigen::VectorXd oi = prop.eigenvectors * wi;

    FullState out;
    out.b1 = cplx{or_(0), oi(0)};
    out.b2 = cplx{or_(1), oi(1)};
    out.reservoir.resize(m - 2);
    for (Eigen::Index k = 2; k < m; ++k) out.reservoir[k - 2] = cplx{or_(k), oi(k)};
    return out;
}

FullState evolve_full(const FullState& state, const DiscretizedReservoir& res,
                      const PhysParams& p, double tau) {
    return evolve_full(state, ReservoirPropagator::build(p, res), tau);
}

FullState project_null_full(const FullState& state) {
    FullState out;
    out.b1 = state.b1;
    out.b2 = state.b2;
    out.reservoir.assign(state.reservoir.size(), cplx{0.0, 0.0});
    return out;
}

ConditionalTrace run_protocol_oracle(const PhysParams& p, const MeasurementProtocol& protocol,
                                     const DotAmplitudes& initial, int n_modes, double e_max) {
    const DiscretizedReservoir res = discretize(p, n_modes, e_max);
    const ReservoirPropagator prop = ReservoirPropagator::build(p, res);
    return run_protocol_oracle(p, protocol, initial, res, prop);
}

ConditionalTrace run_protocol_oracle(const PhysParams& p, const MeasurementProtocol& protocol,
                                     const DotAmplitudes& initial,
                                     const DiscretizedReservoir& res,
                                     const ReservoirPropagator& prop) {
    validate_params(p);
    validate_protocol(protocol, p.lambda);
    check_normalized(initial);
    if (!(protocol.t_total < res.recurrence_time()))
        throw std::invalid_argument(
            "time window " + std::to_string(protocol.t_total) + " exceeds the grid recurrence "
            "horizon 2 pi / dE = " + std::to_string(res.recurrence_time()) +
            "; increase n_modes or shorten the run");

    const Eigen::Index m = prop.eigenvalues.size();
    ConditionalTrace trace;
    trace.method = "oracle";
    trace.oracle = make_meta(res);
    trace.append(0.0, std::norm(initial.b1), std::norm(initial.b2));

    if (protocol.n == 0) {
        FullState state;
        state.b1 = initial.b1;
        state.b2 = initial.b2;
        state.reservoir.assign(res.n_modes, cplx{0.0, 0.0});
        state = evolve_full(state, prop, protocol.t_total);
        trace.append(protocol.t_total, std::norm(state.b1), std::norm(state.b2));
        return trace;
    }

    // Between projections the state enters each interval supported on the
    // two dot rows only, so Q^T v reduces to b1*row0(Q) + b2*row1(Q) -- the
    // zero reservoir amplitudes contribute exact zeros to the full product.
    // The evolved state is still materialized over all 2+N amplitudes and
    // projected explicitly.
    const Eigen::VectorXd q0 = prop.eigenvectors.row(0).transpose();
    const Eigen::VectorXd q1 = prop.eigenvectors.row(1).transpose();
    Eigen::VectorXd wr(m), wi(m), xr(m), xi(m);
    cplx b1 = initial.b1;
    cplx b2 = initial.b2;
    for (long long step = 1; step <= protocol.n; ++step) {
        wr = b1.real() * q0 + b2.real() * q1;
        wi = b1.imag() * q0 + b2.imag() * q1;
        for (Eigen::Index k = 0; k < m; ++k) {
            const double ph = -prop.eigenvalues(k) * protocol.tau;
            const double c = std::cos(ph), s = std::sin(ph);
            xr(k) = wr(k) * c - wi(k) * s;
            xi(k) = wr(k) * s + wi(k) * c;
        }
        const Eigen::VectorXd vr = prop.eigenvectors * xr;
        const Eigen::VectorXd vi = prop.eigenvectors * xi;
        // null-result projection: keep the dots, zero all reservoir modes
        b1 = cplx{vr(0), vi(0)};
        b2 = cplx{vr(1), vi(1)};
        const double w1 = std::norm(b1);
        const double w2 = std::norm(b2);
        if (w1 + w2 < 1e-300)
            throw numeric_error("null-record probability underflowed at step " +
                                std::to_string(step) + " of " + std::to_string(protocol.n) +
                                " (" + std::to_string(trace.size()) + " rows recorded)");
        const double t =
            protocol.t_total * static_cast<double>(step) / static_cast<double>(protocol.n);
        trace.append(t, w1, w2);
    }
    return trace;
}

ConditionalTrace run_unmeasured_oracle(const PhysParams& p, const std::vector<double>& t_grid,
                                       const DotAmplitudes& initial,
                                       const DiscretizedReservoir& res,
                                       const ReservoirPropagator& prop) {
    validate_params(p);
    check_normalized(initial);
    if (t_grid.empty()) throw std::invalid_argument("t_grid: must be non-empty");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1]))
            throw std::invalid_argument("t_grid: times must be strictly ascending");
    if (!(t_grid.front() >= 0.0)) throw std::invalid_argument("t_grid: times must be nonnegative");
    if (!(t_grid.back() < res.recurrence_time()))
        throw std::invalid_argument("time window exceeds the grid recurrence horizon");

    const Eigen::Index m = prop.eigenvalues.size();
    const Eigen::VectorXd q0 = prop.eigenvectors.row(0).transpose();
    const Eigen::VectorXd q1 = prop.eigenvectors.row(1).transpose();
    const Eigen::VectorXd wr = initial.b1.real() * q0 + initial.b2.real() * q1;
    const Eigen::VectorXd wi = initial.b1.imag() * q0 + initial.b2.imag() * q1;

    ConditionalTrace trace;
    trace.method = "oracle-unmeasured";
    trace.oracle = make_meta(res);
    Eigen::VectorXd xr(m), xi(m);
    for (double t : t_grid) {
        for (Eigen::Index k = 0; k < m; ++k) {
            const double ph = -prop.eigenvalues(k) * t;
            const double c = std::cos(ph), s = std::sin(ph);
            xr(k) = wr(k) * c - wi(k) * s;
            xi(k) = wr(k) * s + wi(k) * c;
        }
        // only the dot components are needed for the conditional trace
        const double b1r = q0.dot(xr), b1i = q0.dot(xi);
        const double b2r = q1.dot(xr), b2i = q1.dot(xi);
        trace.append(t, b1r * b1r + b1i * b1i, b2r * b2r + b2i * b2i);
    }
    return trace;
}

}  // namespace qzeno
