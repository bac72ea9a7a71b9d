#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qzeno/model.hpp"

namespace qzeno {

enum class Method { scaling, analytic_stepwise, pseudomode, oracle, perturbative, unmeasured };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// One fully-specified run: model parameters, protocol spec, initial
/// amplitudes, method and output destination.
struct RunConfig {
    PhysParams params;
    std::optional<double> x;    // exactly one of x, tau
    std::optional<double> tau;
    double t_max = 0.0;
    std::optional<long long> n;  // derived from x when absent
    DotAmplitudes initial{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
    Method method = Method::pseudomode;
    int oracle_n_modes = 4001;
    double oracle_e_max_over_lambda = 50.0;
    std::string out;             // empty = stdout
    double initial_renorm = 0.0; // size of the normalization correction applied on load
};

using KeyValues = std::map<std::string, std::string>;

/// Reads a flat `key = value` config file ('#' comments and blank lines
/// allowed). Unknown or duplicate keys are errors; messages carry
/// `path:line` positions.
KeyValues read_config_file(const std::string& path);

/// Rejects unknown keys in a flag-sourced map; `origin` labels messages.
void validate_keys(const KeyValues& kv, const std::string& origin);

/// Builds a validated RunConfig from file values overlaid by flag values
/// (flags win). Applies the documented defaults: e1 = e2 = 0,
/// gamma1 = gamma2 = 1, initial = (1, 0).
RunConfig build_run_config(const KeyValues& file_values, const KeyValues& flag_values);

/// When n is absent: n = round(t_max * lambda / x), at least 1, and tau is
/// recomputed as t_max / n so the protocol lands exactly on t_max. When n is
/// given it must be consistent with x (or tau) and t_max.
MeasurementProtocol resolve_protocol(const RunConfig& cfg);

/// A one-dimensional parameter sweep over a base configuration.
struct SweepSpec {
    RunConfig base;
    std::string key;  // x | lambda | e1 | e2 | gamma
    std::vector<double> values;
    std::vector<Method> methods;
};

/// Applies a swept value to a copy of the base config. `gamma` sweeps the
/// coupling ratio: gamma1 = v^2 * gamma2 at fixed gamma2.
RunConfig apply_sweep_value(const RunConfig& base, const std::string& key, double value);

}  // namespace qzeno
