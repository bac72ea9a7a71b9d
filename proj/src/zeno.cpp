#include "qzeno/zeno.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qzeno/errors.hpp"

namespace qzeno {

namespace {

// Flat (energy-independent) band with the same Gamma_j convention; only the
// divergence scan needs it, so it lives here rather than in discretize().
DiscretizedReservoir discretize_flat(double gamma1, double gamma2, int n_modes, double e_max) {
    if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0))
        throw std::invalid_argument("gamma: widths must be nonnegative");
    if (n_modes % 2 == 0 || n_modes < 51)
        throw std::invalid_argument("n_modes: must be odd and at least 51");
    if (!(e_max > 0.0)) throw std::invalid_argument("e_max: cutoff must be positive");

    DiscretizedReservoir res;
    res.n_modes = n_modes;
    res.e_max = e_max;
    res.de = 2.0 * e_max / static_cast<double>(n_modes - 1);
    res.gamma1 = gamma1;
    res.gamma2 = gamma2;
    res.lambda = std::numeric_limits<double>::infinity();
    res.mode_energies.resize(n_modes);
    res.g1.resize(n_modes);
    res.g2.resize(n_modes);
    const double w = res.de / (2.0 * std::numbers::pi);
    for (int k = 0; k < n_modes; ++k) {
        res.mode_energies[k] = -e_max + res.de * static_cast<double>(k);
        res.g1[k] = std::sqrt(gamma1 * w);
        res.g2[k] = std::sqrt(gamma2 * w);
    }
    return res;
}

}  // namespace

ZenoCoefficient compute_c(const DiscretizedReservoir& res) {
    double sum = 0.0;
    for (int k = 0; k < res.n_modes; ++k)
        sum += res.g1[k] * res.g1[k] + res.g2[k] * res.g2[k];
    ZenoCoefficient c;
    c.c_value = 0.5 * sum;
    std::ostringstream prov;
    if (std::isinf(res.lambda))
        prov << "flat";
    else
        prov << "lorentzian(lambda=" << res.lambda << ")";
    prov << " N=" << res.n_modes << " e_max=" << res.e_max;
    c.provenance = prov.str();
    return c;
}

double c_closed_form(const PhysParams& p) {
    validate_params(p);
    return (p.gamma1 + p.gamma2) * p.lambda / 4.0;
}

PerturbativeState psi_n_perturbative(cplx alpha1, cplx alpha2, const ZenoCoefficient& c,
                                     double tau, long long n) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau: interval must be positive");
    if (n < 0) throw std::invalid_argument("n: step count must be nonnegative");
    if (std::abs(std::norm(alpha1) + std::norm(alpha2) - 1.0) > 1e-9)
        throw std::invalid_argument("(alpha1, alpha2) must be normalized");

    const double c_tau_sq = c.c_value * tau * tau;
    const double n_c_tau_sq = static_cast<double>(n) * c_tau_sq;
    const double norm_sq = 1.0 - 2.0 * std::norm(alpha2) * n_c_tau_sq;
    if (norm_sq <= 0.0)
        throw numeric_error("perturbative expansion breakdown: N_n^2 = 1 - 2 n |alpha2|^2 C tau^2 "
                            "= " + std::to_string(norm_sq) + " <= 0");
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    const double decay = std::pow(1.0 - c_tau_sq, static_cast<double>(n));

    PerturbativeState out;
    out.a1 = alpha1 * inv_norm;
    out.a2 = alpha2 * decay * inv_norm;
    out.n_c_tau_sq = n_c_tau_sq;
    out.beyond_validity = n_c_tau_sq > 0.1;
    return out;
}

CScan c_divergence_scan(double gamma1, double gamma2, const BandSpec& band,
                        const std::vector<double>& e_max_list, int n_modes) {
    if (e_max_list.empty()) throw std::invalid_argument("e_max_list: must be non-empty");
    for (std::size_t i = 0; i + 1 < e_max_list.size(); ++i)
        if (!(e_max_list[i] < e_max_list[i + 1]))
            throw std::invalid_argument("e_max_list: values must be ascending");
    for (double e : e_max_list)
        if (!std::isfinite(e) || !(e > 0.0))
            throw std::invalid_argument("e_max_list: values must be positive and finite");

    CScan scan;
    for (double e_max : e_max_list) {
        DiscretizedReservoir res;
        if (band.kind == BandSpec::Kind::flat) {
            res = discretize_flat(gamma1, gamma2, n_modes, e_max);
        } else {
            PhysParams p;
            p.gamma1 = gamma1;
            p.gamma2 = gamma2;
            p.lambda = band.lambda;
            res = discretize(p, n_modes, e_max);
        }
        scan.rows.push_back({e_max, compute_c(res).c_value});
    }

    // least-squares slope dC/de_max over the scanned points
    const auto n = static_cast<double>(scan.rows.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const CScanRow& r : scan.rows) {
        sx += r.e_max;
        sy += r.c_value;
        sxx += r.e_max * r.e_max;
        sxy += r.e_max * r.c_value;
    }
    const double denom = n * sxx - sx * sx;
    scan.slope = (denom != 0.0) ? (n * sxy - sx * sy) / denom : 0.0;
    return scan;
}

}  // namespace qzeno
