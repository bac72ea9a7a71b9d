#include "qzeno/config.hpp"

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qzeno/errors.hpp"

namespace qzeno {

namespace {

constexpr std::array<const char*, 18> kKnownKeys = {
    "e1", "e2", "gamma1", "gamma2", "lambda", "c", "x", "tau", "t_max", "n",
    "initial_b1_re", "initial_b1_im", "initial_b2_re", "initial_b2_im",
    "method", "oracle_n_modes", "oracle_e_max_over_lambda", "out"};

bool known_key(const std::string& key) {
    for (const char* k : kKnownKeys)
        if (key == k) return true;
    return false;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& value, const std::string& key) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw config_error("key '" + key + "': expected a finite number, got '" + value + "'");
    return v;
}

long long parse_int(const std::string& value, const std::string& key) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE)
        throw config_error("key '" + key + "': expected an integer, got '" + value + "'");
    return v;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::scaling: return "scaling";
        case Method::analytic_stepwise: return "analytic-stepwise";
        case Method::pseudomode: return "pseudomode";
        case Method::oracle: return "oracle";
        case Method::perturbative: return "perturbative";
        case Method::unmeasured: return "unmeasured";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "scaling") return Method::scaling;
    if (name == "analytic-stepwise") return Method::analytic_stepwise;
    if (name == "pseudomode") return Method::pseudomode;
    if (name == "oracle") return Method::oracle;
    if (name == "perturbative") return Method::perturbative;
    if (name == "unmeasured") return Method::unmeasured;
    throw config_error("key 'method': unknown method '" + name +
                       "' (expected scaling | analytic-stepwise | pseudomode | oracle | "
                       "perturbative | unmeasured)");
}

KeyValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file '" + path + "'");
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value', got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (!known_key(key))
            throw config_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (kv.count(key))
            throw config_error(path + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                               "'");
        if (value.empty())
            throw config_error(path + ":" + std::to_string(lineno) + ": empty value for key '" +
                               key + "'");
        kv[key] = value;
    }
    return kv;
}

void validate_keys(const KeyValues& kv, const std::string& origin) {
    for (const auto& [key, value] : kv)
        if (!known_key(key)) throw config_error(origin + ": unknown key '" + key + "'");
}

RunConfig build_run_config(const KeyValues& file_values, const KeyValues& flag_values) {
    KeyValues kv = file_values;
    for (const auto& [key, value] : flag_values) kv[key] = value;  // flags override

    const auto has = [&](const char* key) { return kv.count(key) != 0; };
    const auto get = [&](const char* key) { return kv.at(key); };

    RunConfig cfg;
    if (!has("lambda")) throw config_error("missing required key 'lambda'");
    cfg.params.lambda = parse_double(get("lambda"), "lambda");
    if (has("e1")) cfg.params.e1 = parse_double(get("e1"), "e1");
    if (has("e2")) cfg.params.e2 = parse_double(get("e2"), "e2");
    if (has("gamma1")) cfg.params.gamma1 = parse_double(get("gamma1"), "gamma1");
    if (has("gamma2")) cfg.params.gamma2 = parse_double(get("gamma2"), "gamma2");
    if (has("c")) {
        const double c = parse_double(get("c"), "c");
        const double e_from_c = c * cfg.params.lambda;
        if ((has("e1") && cfg.params.e1 != e_from_c) || (has("e2") && cfg.params.e2 != e_from_c))
            throw config_error("key 'c': c*lambda = " + std::to_string(e_from_c) +
                               " disagrees with the given e1/e2");
        cfg.params.c = c;
        cfg.params.e1 = e_from_c;
        cfg.params.e2 = e_from_c;
    }
    validate_params(cfg.params);

    if (has("x") == has("tau"))
        throw config_error("exactly one of 'x', 'tau' must be given");
    if (has("x")) {
        cfg.x = parse_double(get("x"), "x");
        if (!(*cfg.x > 0.0)) throw config_error("key 'x': x must be positive");
    } else {
        cfg.tau = parse_double(get("tau"), "tau");
        if (!(*cfg.tau > 0.0)) throw config_error("key 'tau': tau must be positive");
    }

    if (!has("t_max")) throw config_error("missing required key 't_max'");
    cfg.t_max = parse_double(get("t_max"), "t_max");
    if (!(cfg.t_max > 0.0)) throw config_error("key 't_max': t_max must be positive");

    if (has("n")) {
        cfg.n = parse_int(get("n"), "n");
        if (*cfg.n < 1) throw config_error("key 'n': n must be a positive integer");
    }

    if (has("initial_b1_re") || has("initial_b1_im") || has("initial_b2_re") ||
        has("initial_b2_im")) {
        const double b1r = has("initial_b1_re") ? parse_double(get("initial_b1_re"), "initial_b1_re") : 0.0;
        const double b1i = has("initial_b1_im") ? parse_double(get("initial_b1_im"), "initial_b1_im") : 0.0;
        const double b2r = has("initial_b2_re") ? parse_double(get("initial_b2_re"), "initial_b2_re") : 0.0;
        const double b2i = has("initial_b2_im") ? parse_double(get("initial_b2_im"), "initial_b2_im") : 0.0;
        cfg.initial = {cplx{b1r, b1i}, cplx{b2r, b2i}};
        const double norm = std::sqrt(cfg.initial.norm_sq());
        if (norm <= 0.0) throw config_error("initial amplitudes must not all be zero");
        cfg.initial_renorm = std::abs(norm - 1.0);
        cfg.initial = cfg.initial.normalized();
    }

    if (!has("method")) throw config_error("missing required key 'method'");
    cfg.method = method_from_name(get("method"));

    if (has("oracle_n_modes")) {
        const long long nm = parse_int(get("oracle_n_modes"), "oracle_n_modes");
        if (nm < 51 || nm % 2 == 0)
            throw config_error("key 'oracle_n_modes': must be odd and at least 51");
        cfg.oracle_n_modes = static_cast<int>(nm);
    }
    if (has("oracle_e_max_over_lambda")) {
        cfg.oracle_e_max_over_lambda =
            parse_double(get("oracle_e_max_over_lambda"), "oracle_e_max_over_lambda");
        if (!(cfg.oracle_e_max_over_lambda >= 1.0))
            throw config_error("key 'oracle_e_max_over_lambda': must be at least 1");
    }
    if (has("out")) cfg.out = get("out");

    // method-specific structure checks
    const bool aligned_e = cfg.params.e1 == cfg.params.e2;
    const bool aligned_g = cfg.params.gamma1 == cfg.params.gamma2;
    switch (cfg.method) {
        case Method::scaling:
            if (!aligned_g)
                throw config_error("method 'scaling' requires gamma1 == gamma2");
            if (!cfg.params.c) {
                if (!aligned_e)
                    throw config_error(
                        "method 'scaling' requires aligned levels (e1 == e2) or an explicit c");
                cfg.params.c = cfg.params.e1 / cfg.params.lambda;
            }
            break;
        case Method::analytic_stepwise:
            if (!aligned_e || !aligned_g)
                throw config_error(
                    "method 'analytic-stepwise' requires e1 == e2 and gamma1 == gamma2");
            break;
        case Method::perturbative:
            if (!aligned_e)
                throw config_error("method 'perturbative' requires e1 == e2 (localized eigenstate)");
            if (!(cfg.params.gamma2 > 0.0))
                throw config_error("method 'perturbative' requires gamma2 > 0 (finite coupling ratio)");
            break;
        default:
            break;
    }
    return cfg;
}

MeasurementProtocol resolve_protocol(const RunConfig& cfg) {
    const double lambda = cfg.params.lambda;
    const double base_x = cfg.x ? *cfg.x : lambda * (*cfg.tau);
    long long n;
    if (cfg.n) {
        n = *cfg.n;
        const double realized_x = lambda * cfg.t_max / static_cast<double>(n);
        if (std::abs(realized_x - base_x) > 1e-6 * base_x) {
            std::ostringstream msg;
            msg << "n = " << n << " is inconsistent with " << (cfg.x ? "x = " : "tau = ")
                << (cfg.x ? *cfg.x : *cfg.tau) << " and t_max = " << cfg.t_max
                << " (realized x would be " << realized_x << ")";
            throw config_error(msg.str());
        }
    } else {
        n = std::llround(cfg.t_max * lambda / base_x);
        if (n < 1) n = 1;
    }
    return make_protocol(cfg.t_max / static_cast<double>(n), n, lambda);
}

RunConfig apply_sweep_value(const RunConfig& base, const std::string& key, double value) {
    RunConfig cfg = base;
    if (key == "x") {
        cfg.x = value;
        cfg.tau.reset();
        if (!(value > 0.0)) throw config_error("sweep over 'x': values must be positive");
    } else if (key == "lambda") {
        cfg.params.lambda = value;
        if (cfg.params.c) cfg.params.e1 = cfg.params.e2 = *cfg.params.c * value;
    } else if (key == "e1") {
        cfg.params.e1 = value;
        cfg.params.c.reset();
    } else if (key == "e2") {
        cfg.params.e2 = value;
        cfg.params.c.reset();
    } else if (key == "gamma") {
        if (!(value >= 0.0)) throw config_error("sweep over 'gamma': values must be nonnegative");
        cfg.params.gamma1 = value * value * cfg.params.gamma2;
    } else {
        throw config_error("sweep key must be one of x, lambda, e1, e2, gamma (got '" + key + "')");
    }
    validate_params(cfg.params);
    return cfg;
}

}  // namespace qzeno
