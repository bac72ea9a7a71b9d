#pragma once

#include <complex>
#include <optional>
#include <utility>

namespace qzeno {

using cplx = std::complex<double>;

struct DiscretizedReservoir;  // reservoir.hpp

/// Physical parameters of the two-site + Lorentzian-reservoir model.
/// Everything shares one unit system (hbar = 1); the natural choice is the
/// decay width Gamma_1 as the unit of energy and inverse time.
struct PhysParams {
    double e1 = 0.0;      ///< site-1 energy
    double e2 = 0.0;      ///< site-2 energy
    double gamma1 = 1.0;  ///< decay width of site 1, >= 0
    double gamma2 = 1.0;  ///< decay width of site 2, >= 0
    double lambda = 3.0;  ///< reservoir bandwidth, > 0
    std::optional<double> c{};  ///< band-offset ratio when the level sits at E = c*lambda

    bool aligned() const { return e1 == e2 && gamma1 == gamma2; }

    /// Coupling ratio gamma = Omega_1/Omega_2 = sqrt(gamma1/gamma2).
    /// Requires gamma2 > 0.
    double coupling_ratio() const;
};

/// Returns p unchanged iff all bounds hold; otherwise throws
/// std::invalid_argument naming the offending field and bound.
PhysParams validate_params(const PhysParams& p);

/// Complex amplitude pair on the two localized sites.
struct DotAmplitudes {
    cplx b1{1.0, 0.0};
    cplx b2{0.0, 0.0};

    double norm_sq() const { return std::norm(b1) + std::norm(b2); }
    DotAmplitudes normalized() const;
};

/// cos/sin of the mixing angle of the localized eigenstate
/// |1'> = cos(beta)|1> - sin(beta)|2>, with cos(beta) = 1/sqrt(1+gamma^2).
struct MixingAngle {
    double cos_beta = 1.0;
    double sin_beta = 0.0;
};

/// Mixing angle as a function of the coupling ratio gamma >= 0.
MixingAngle mixing_angle(double gamma);

/// Repeated null-result measurement protocol: n intervals of length tau.
/// n == 0 is the degenerate protocol (no projections, one free evolution
/// over t_total = tau). x = lambda*tau is the scaling variable.
struct MeasurementProtocol {
    double tau = 0.0;
    long long n = 0;
    double t_total = 0.0;
    double x = 0.0;
};

/// Protocol from the interval length. Throws std::invalid_argument on
/// tau <= 0, n < 0 or lambda <= 0.
MeasurementProtocol make_protocol(double tau, long long n, double lambda);

/// Protocol from the scaling variable x = lambda*tau.
MeasurementProtocol make_protocol_x(double x, long long n, double lambda);

/// Checks the internal consistency of a protocol against the bandwidth it
/// will be run with (n*tau == t_total, x == lambda*tau, both to 1e-12 rel).
void validate_protocol(const MeasurementProtocol& p, double lambda);

/// t -> infinity conditional site occupations (P1, P2) for a state evolving
/// under null-result conditioning with E1 == E2: only the component along
/// the localized eigenstate |1'> survives in the dot subspace, so the result
/// is (cos^2 beta, sin^2 beta) independent of the initial state. Throws
/// numeric_error when the initial state has no |1'> overlap (the conditional
/// state is undefined at t -> infinity).
std::pair<double, double> asymptotic_conditional_occupation(double gamma,
                                                            const DotAmplitudes& initial);

/// || (H - E1) |1'> || over the full discretized Hilbert space, E1 == E2
/// assumed. Exactly-proportional couplings give zero up to roundoff; the
/// caller compares against 1e-10 * ||H||_F. Throws std::invalid_argument if
/// gamma does not match the coupling ratio the reservoir was built with.
double dark_state_residual(const DiscretizedReservoir& modes, double gamma);

}  // namespace qzeno
