#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qzeno {

/// Discretization metadata attached to oracle traces.
struct OracleMeta {
    int n_modes = 0;
    double e_max = 0.0;
    /// 1 - sum_k g1k^2 / (Gamma1*Lambda/2): cutoff + grid deficit of the
    /// coupling sum rule relative to the infinite-band value.
    double sum_rule_deficit = 0.0;
};

/// Time series of conditional occupations and the null-record probability.
struct ConditionalTrace {
    std::vector<double> times;
    std::vector<double> p1;
    std::vector<double> p2;
    std::vector<double> null_prob;  ///< unnormalized dot-subspace norm, in (0,1]
    std::string method;
    std::optional<OracleMeta> oracle{};

    std::size_t size() const { return times.size(); }

    /// Appends a sample from unnormalized dot weights w1 = |b1|^2, w2 = |b2|^2.
    /// p1 and p2 are computed symmetrically so that exchanging the weights
    /// exchanges them exactly.
    void append(double t, double w1, double w2) {
        const double s = w1 + w2;
        times.push_back(t);
        p1.push_back(w1 / s);
        p2.push_back(w2 / s);
        null_prob.push_back(s);
    }
};

}  // namespace qzeno
