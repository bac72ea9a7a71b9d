#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qzeno/model.hpp"
#include "qzeno/trace.hpp"

namespace qzeno {

/// Brute-force ground truth: the Lorentzian reservoir replaced by N discrete
/// modes on a uniform energy grid [-e_max, e_max], with the Lorentzian
/// density of states folded into the couplings,
///   g_jk^2 = (Gamma_j / 2 pi) * Lambda^2 / (E_k^2 + Lambda^2) * dE.
struct DiscretizedReservoir {
    std::vector<double> mode_energies;
    std::vector<double> g1;
    std::vector<double> g2;
    int n_modes = 0;
    double e_max = 0.0;
    double de = 0.0;
    // parameters the grid was built from
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double lambda = 0.0;

    /// sum_k g_jk^2 for dot j in {1, 2}.
    double sum_rule(int dot) const;
    /// Grid-free value (Gamma_j Lambda / pi) atan(e_max / Lambda);
    /// tends to Gamma_j Lambda / 2 as e_max -> infinity.
    double sum_rule_target(int dot) const;
    /// Results are only trusted for t < 2 pi / dE (grid recurrence).
    double recurrence_time() const;
};

/// Uniform-grid discretization. n_modes must be odd (E = 0 has to be a grid
/// point, resonant with aligned dots at E = 0) and >= 51; e_max < lambda is
/// rejected (>= 10 lambda recommended).
DiscretizedReservoir discretize(const PhysParams& p, int n_modes, double e_max);

/// Dot amplitudes plus one complex amplitude per reservoir mode.
struct FullState {
    cplx b1{1.0, 0.0};
    cplx b2{0.0, 0.0};
    std::vector<cplx> reservoir;

    double dot_norm_sq() const { return std::norm(b1) + std::norm(b2); }
    double norm_sq() const;
};

/// One-time eigendecomposition of the real-symmetric (2+N) Hamiltonian,
/// reused across protocol steps (n can reach 1e4 in deep-Zeno runs).
struct ReservoirPropagator {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // orthogonal, columns = eigenvectors

    static ReservoirPropagator build(const PhysParams& p, const DiscretizedReservoir& res);
};

/// Exact unitary evolution over tau via the cached eigendecomposition.
FullState evolve_full(const FullState& state, const ReservoirPropagator& prop, double tau);

/// Convenience overload that builds (and throws away) the decomposition.
FullState evolve_full(const FullState& state, const DiscretizedReservoir& res,
                      const PhysParams& p, double tau);

/// Null-result projection: zeroes every reservoir amplitude.
FullState project_null_full(const FullState& state);

/// The measured protocol through the discretized reservoir; method tag
/// "oracle", discretization metadata attached. Refuses time windows beyond
/// the grid recurrence horizon.
ConditionalTrace run_protocol_oracle(const PhysParams& p, const MeasurementProtocol& protocol,
                                     const DotAmplitudes& initial, int n_modes, double e_max);

/// Overload reusing a prebuilt grid + decomposition (the decomposition is
/// the dominant cost at N ~ 4000).
ConditionalTrace run_protocol_oracle(const PhysParams& p, const MeasurementProtocol& protocol,
                                     const DotAmplitudes& initial,
                                     const DiscretizedReservoir& res,
                                     const ReservoirPropagator& prop);

/// Unmeasured conditional evolution through the discretized reservoir.
ConditionalTrace run_unmeasured_oracle(const PhysParams& p, const std::vector<double>& t_grid,
                                       const DotAmplitudes& initial,
                                       const DiscretizedReservoir& res,
                                       const ReservoirPropagator& prop);

}  // namespace qzeno
