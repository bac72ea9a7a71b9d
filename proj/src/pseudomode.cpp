#include "qzeno/pseudomode.hpp"

#include <cmath>
#include <stdexcept>

#include "qzeno/errors.hpp"

namespace qzeno {

namespace {

const cplx kI{0.0, 1.0};

// Scaling-and-squaring Taylor exponential. Only used as fallback when the
// 3x3 generator is (near-)defective; plenty accurate at this size.
Eigen::Matrix3cd expm_squaring(Eigen::Matrix3cd m) {
    double nrm = m.cwiseAbs().sum();
    int squarings = 0;
    while (nrm > 0.25 && squarings < 64) {
        m *= 0.5;
        nrm *= 0.5;
        ++squarings;
    }
    Eigen::Matrix3cd result = Eigen::Matrix3cd::Identity();
    Eigen::Matrix3cd term = Eigen::Matrix3cd::Identity();
    for (int k = 1; k <= 32; ++k) {
        term = (term * m) / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().sum() < 1e-20) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

void check_normalized(const DotAmplitudes& initial) {
    if (std::abs(initial.norm_sq() - 1.0) > 1e-9)
        throw std::invalid_argument("initial amplitudes must be normalized");
}

}  // namespace

PseudomodeGenerator build_pseudomode(const PhysParams& p) {
    validate_params(p);
    const double g1 = std::sqrt(p.gamma1 * p.lambda / 2.0);
    const double g2 = std::sqrt(p.gamma2 * p.lambda / 2.0);
    PseudomodeGenerator gen;
    gen.h << cplx{p.e1, 0.0}, cplx{0.0, 0.0}, cplx{g1, 0.0},
             cplx{0.0, 0.0}, cplx{p.e2, 0.0}, cplx{g2, 0.0},
             cplx{g1, 0.0},  cplx{g2, 0.0},   cplx{0.0, -p.lambda};
    return gen;
}

PseudomodePropagator::PseudomodePropagator(const PseudomodeGenerator& gen) : h_(gen.h) {
    exchange_symmetric_ = h_(0, 0) == h_(1, 1) && h_(0, 2) == h_(1, 2);
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver(h_);
    if (solver.info() == Eigen::Success) {
        const Eigen::Matrix3cd v = solver.eigenvectors();
        Eigen::FullPivLU<Eigen::Matrix3cd> lu(v);
        if (lu.isInvertible()) {
            const Eigen::Matrix3cd v_inv = lu.inverse();
            const Eigen::Matrix3cd recon =
                v * solver.eigenvalues().asDiagonal() * v_inv;
            const double scale = h_.cwiseAbs().maxCoeff();
            if ((recon - h_).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0)) {
                v_ = v;
                v_inv_ = v_inv;
                eigenvalues_ = solver.eigenvalues();
                use_eigen_ = true;
            }
        }
    }
}

Eigen::Matrix3cd PseudomodePropagator::step(double t) const {
    Eigen::Matrix3cd u;
    if (use_eigen_) {
        Eigen::Vector3cd phases;
        for (int i = 0; i < 3; ++i) phases(i) = std::exp(-kI * eigenvalues_(i) * t);
        u = v_ * phases.asDiagonal() * v_inv_;
    } else {
        u = expm_squaring(-kI * t * h_);
    }
    // An aligned generator commutes with the site exchange; enforce that on
    // the computed propagator so exchanged initial conditions swap the
    // conditional trace exactly, not just to roundoff.
    if (exchange_symmetric_) {
        u(1, 1) = u(0, 0);
        u(1, 0) = u(0, 1);
        u(1, 2) = u(0, 2);
        u(2, 1) = u(2, 0);
    }
    return u;
}

PseudomodeState evolve_interval(const PseudomodeState& state, const PseudomodeGenerator& gen,
                                double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau: interval must be positive");
    const Eigen::Matrix3cd u = PseudomodePropagator(gen).step(tau);
    const Eigen::Vector3cd v = u * Eigen::Vector3cd(state.b1, state.b2, state.bp);
    return {v(0), v(1), v(2)};
}

PseudomodeState project_null(const PseudomodeState& state) {
    return {state.b1, state.b2, cplx{0.0, 0.0}};
}

ConditionalTrace run_protocol(const PhysParams& p, const MeasurementProtocol& protocol,
                              const DotAmplitudes& initial) {
    validate_params(p);
    validate_protocol(protocol, p.lambda);
    check_normalized(initial);

    const PseudomodePropagator prop(build_pseudomode(p));
    ConditionalTrace trace;
    trace.method = "pseudomode";
    trace.append(0.0, std::norm(initial.b1), std::norm(initial.b2));

    Eigen::Vector3cd v(initial.b1, initial.b2, cplx{0.0, 0.0});
    if (protocol.n == 0) {
        v = prop.step(protocol.t_total) * v;
        trace.append(protocol.t_total, std::norm(v(0)), std::norm(v(1)));
        return trace;
    }

    const Eigen::Matrix3cd u = prop.step(protocol.tau);
    for (long long k = 1; k <= protocol.n; ++k) {
        v = u * v;
        v(2) = cplx{0.0, 0.0};
        const double w1 = std::norm(v(0));
        const double w2 = std::norm(v(1));
        if (w1 + w2 < 1e-300)
            throw numeric_error("null-record probability underflowed at step " +
                                std::to_string(k) + " of " + std::to_string(protocol.n) + " (" +
                                std::to_string(trace.size()) + " rows recorded)");
        const double t = protocol.t_total * static_cast<double>(k) / static_cast<double>(protocol.n);
        trace.append(t, w1, w2);
    }
    return trace;
}

ConditionalTrace run_unmeasured(const PhysParams& p, const std::vector<double>& t_grid,
                                const DotAmplitudes& initial) {
    validate_params(p);
    check_normalized(initial);
    if (t_grid.empty()) throw std::invalid_argument("t_grid: must be non-empty");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1]))
            throw std::invalid_argument("t_grid: times must be strictly ascending");
    if (!(t_grid.front() >= 0.0)) throw std::invalid_argument("t_grid: times must be nonnegative");

    const PseudomodePropagator prop(build_pseudomode(p));
    const Eigen::Vector3cd v0(initial.b1, initial.b2, cplx{0.0, 0.0});
    ConditionalTrace trace;
    trace.method = "unmeasured";
    for (double t : t_grid) {
        const Eigen::Vector3cd v = prop.step(t) * v0;
        trace.append(t, std::norm(v(0)), std::norm(v(1)));
    }
    return trace;
}

}  // namespace qzeno
