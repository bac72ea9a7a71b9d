#pragma once

#include "qzeno/model.hpp"
#include "qzeno/trace.hpp"

namespace qzeno {

// Closed-form machinery for aligned levels (E1 == E2 == E, Gamma1 == Gamma2
// == Gamma). All functions here work in the frame rotating with exp(-iEt);
// the dropped global phase never enters occupation probabilities.

/// The two decay roots A+- of A^2 - (Lambda - iE) A + Gamma*Lambda = 0.
/// a_plus carries the larger real part (tie: larger imaginary part), which
/// keeps a_minus the slow root for Lambda > 4 Gamma and real E.
struct RootPair {
    cplx a_plus;
    cplx a_minus;
};

RootPair roots(double e, double gamma, double lambda);

/// Survival amplitude of the decaying (bright) dot combination,
/// a(t) = (A+ e^{-A- t} - A- e^{-A+ t}) / (A+ - A-); switches to the
/// confluent form (1 + A t) e^{-A t}, A = (Lambda - iE)/2, near degenerate
/// roots where the generic expression loses digits to cancellation.
cplx a_of_t(double t, double e, double gamma, double lambda);

/// Two-site transfer matrix (1/2) [[a+1, a-1], [a-1, a+1]] parameterized by
/// a single scalar. Eigenvectors are (1,1)/sqrt2 (eigenvalue a) and
/// (1,-1)/sqrt2 (eigenvalue 1, the dark state at gamma = 1).
struct TransferMatrix2 {
    cplx a{1.0, 0.0};

    cplx diag() const { return 0.5 * (a + 1.0); }
    cplx off() const { return 0.5 * (a - 1.0); }

    DotAmplitudes apply(const DotAmplitudes& v) const {
        return {diag() * v.b1 + off() * v.b2, off() * v.b1 + diag() * v.b2};
    }
};

/// U(t) for the aligned case. Throws std::invalid_argument when the
/// parameters are not aligned.
TransferMatrix2 u_of_t(double t, const PhysParams& p);

/// U^n(tau) applied to the initial amplitudes (unnormalized). a^n(tau) is
/// accumulated by iterated multiplication, which tracks the branch of the
/// phase for complex a. The degenerate protocol n == 0 yields one free
/// evolution over t_total.
DotAmplitudes measured_amplitudes_analytic(const MeasurementProtocol& protocol,
                                           const PhysParams& p,
                                           const DotAmplitudes& initial);

/// Full conditional trace of the n-step measured aligned protocol,
/// recorded at t = 0 and after every projection.
ConditionalTrace measured_trace_analytic(const MeasurementProtocol& protocol,
                                         const PhysParams& p,
                                         const DotAmplitudes& initial);

/// Continuous-measurement scaling amplitude
///   a_bar(t) = exp( Gamma t (1 - e^{-kappa x}) / (kappa^2 x) - Gamma t / kappa ),
/// kappa = 1 - i c, with the level pinned at E = c*Lambda. For x below 1e-8
/// the exact x -> 0 limit 1 is returned (the exponent vanishes identically
/// to first order, and the generic expression would just add noise).
cplx a_bar_scaling(double t, double gamma, double x, double c);

/// Conditional occupation of site 1 from a (possibly complex) survival
/// amplitude: P1 = |b1'|^2 / (|b1'|^2 + |b2'|^2) with (b1', b2') =
/// TransferMatrix2(a_bar) applied to the initial amplitudes. Throws
/// numeric_error when the conditional norm vanishes (null record impossible).
double p1_conditional(cplx a_bar, const DotAmplitudes& initial);

}  // namespace qzeno
