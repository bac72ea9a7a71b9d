#pragma once

#include <string>
#include <vector>

#include "qzeno/model.hpp"
#include "qzeno/reservoir.hpp"

namespace qzeno {

/// Short-time decay coefficient C = (1/2) sum_k (g1k^2 + g2k^2) governing the
/// quadratic law 1 - C tau^2 of the decaying component. Finite for any
/// finite-band reservoir; grows without bound with the cutoff for a flat
/// (wideband) one.
struct ZenoCoefficient {
    double c_value = 0.0;
    std::string provenance;  ///< which discretized reservoir produced it
};

ZenoCoefficient compute_c(const DiscretizedReservoir& res);

/// Infinite-cutoff Lorentzian value (Gamma1 + Gamma2) Lambda / 4; equals
/// Gamma Lambda / 2 for equal widths, i.e. -a''(0)/2 of the aligned
/// survival amplitude.
double c_closed_form(const PhysParams& p);

/// n-step perturbative state in the (|1'>, |2'>) basis, with the truncated
/// normalization N_n = sqrt(1 - 2 n |alpha2|^2 C tau^2) kept verbatim.
/// beyond_validity flags n C tau^2 > 0.1 where the truncation degrades.
struct PerturbativeState {
    cplx a1;
    cplx a2;
    bool beyond_validity = false;
    double n_c_tau_sq = 0.0;
};

/// (alpha1, alpha2 (1 - C tau^2)^n) / N_n. Requires |alpha1|^2 + |alpha2|^2
/// = 1. Throws numeric_error when N_n^2 <= 0 (expansion breakdown).
PerturbativeState psi_n_perturbative(cplx alpha1, cplx alpha2, const ZenoCoefficient& c,
                                     double tau, long long n);

/// Reservoir band shape for the divergence scan.
struct BandSpec {
    enum class Kind { lorentzian, flat };
    Kind kind = Kind::lorentzian;
    double lambda = 0.0;  // meaningful for lorentzian only

    static BandSpec lorentzian(double lambda) { return {Kind::lorentzian, lambda}; }
    static BandSpec flat() { return {Kind::flat, 0.0}; }
};

struct CScanRow {
    double e_max;
    double c_value;
};

/// C versus cutoff. A Lorentzian band saturates at (Gamma1+Gamma2) Lambda/4;
/// a flat band grows linearly in e_max (the Markovian divergence). slope is
/// the least-squares dC/de_max over the scanned points.
struct CScan {
    std::vector<CScanRow> rows;
    double slope = 0.0;
};

CScan c_divergence_scan(double gamma1, double gamma2, const BandSpec& band,
                        const std::vector<double>& e_max_list, int n_modes = 2001);

}  // namespace qzeno
