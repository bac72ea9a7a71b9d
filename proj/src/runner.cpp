#include "qzeno/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "qzeno/errors.hpp"
#include "qzeno/propagator.hpp"
#include "qzeno/pseudomode.hpp"
#include "qzeno/reservoir.hpp"
#include "qzeno/zeno.hpp"

namespace qzeno {

namespace {

std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<double> uniform_grid(double t_max, long long n) {
    std::vector<double> grid(static_cast<std::size_t>(n) + 1);
    for (long long k = 0; k <= n; ++k)
        grid[static_cast<std::size_t>(k)] = t_max * static_cast<double>(k) / static_cast<double>(n);
    return grid;
}

// For the grid methods (scaling, unmeasured) n is a sample count, not a
// projection count, so there is no consistency constraint against x.
long long sample_count(const RunConfig& cfg) {
    if (cfg.n) return *cfg.n;
    const double base_x = cfg.x ? *cfg.x : cfg.params.lambda * (*cfg.tau);
    const long long n = std::llround(cfg.t_max * cfg.params.lambda / base_x);
    return n < 1 ? 1 : n;
}

RunResult run_scaling(const RunConfig& cfg) {
    const double c = cfg.params.c.value_or(0.0);
    const double gamma = cfg.params.gamma1;
    const double x = cfg.x ? *cfg.x : cfg.params.lambda * (*cfg.tau);
    RunResult result;
    result.trace.method = "scaling";
    for (double t : uniform_grid(cfg.t_max, sample_count(cfg))) {
        const cplx a_bar = (t == 0.0) ? cplx{1.0, 0.0} : a_bar_scaling(t, gamma, x, c);
        const DotAmplitudes v = TransferMatrix2{a_bar}.apply(cfg.initial);
        result.trace.append(t, std::norm(v.b1), std::norm(v.b2));
    }
    return result;
}

RunResult run_perturbative(const RunConfig& cfg, const MeasurementProtocol& protocol) {
    const MixingAngle ang = mixing_angle(cfg.params.coupling_ratio());
    const cplx alpha1 = ang.cos_beta * cfg.initial.b1 - ang.sin_beta * cfg.initial.b2;
    const cplx alpha2 = ang.sin_beta * cfg.initial.b1 + ang.cos_beta * cfg.initial.b2;
    ZenoCoefficient c;
    c.c_value = c_closed_form(cfg.params);
    c.provenance = "closed form (Gamma1+Gamma2)*Lambda/4";

    RunResult result;
    result.trace.method = "perturbative";
    result.trace.append(0.0, std::norm(cfg.initial.b1), std::norm(cfg.initial.b2));
    bool warned = false;
    for (long long k = 1; k <= protocol.n; ++k) {
        const PerturbativeState psi = psi_n_perturbative(alpha1, alpha2, c, protocol.tau, k);
        if (psi.beyond_validity && !warned) {
            std::ostringstream msg;
            msg << "perturbative validity threshold exceeded at step " << k
                << ": n C tau^2 = " << psi.n_c_tau_sq << " > 0.1";
            result.warnings.push_back(msg.str());
            warned = true;
        }
        const cplx b1 = ang.cos_beta * psi.a1 + ang.sin_beta * psi.a2;
        const cplx b2 = -ang.sin_beta * psi.a1 + ang.cos_beta * psi.a2;
        const double null_sq = 1.0 - 2.0 * std::norm(alpha2) * psi.n_c_tau_sq;
        const double t =
            protocol.t_total * static_cast<double>(k) / static_cast<double>(protocol.n);
        // the truncated N_n^2 is the null-record probability at this order
        const double w = std::norm(b1) + std::norm(b2);
        result.trace.times.push_back(t);
        result.trace.p1.push_back(std::norm(b1) / w);
        result.trace.p2.push_back(std::norm(b2) / w);
        result.trace.null_prob.push_back(null_sq);
    }
    return result;
}

}  // namespace

RunResult run_method(const RunConfig& cfg) {
    RunResult result;
    switch (cfg.method) {
        case Method::scaling:
            result = run_scaling(cfg);
            break;
        case Method::analytic_stepwise:
            result.trace = measured_trace_analytic(resolve_protocol(cfg), cfg.params, cfg.initial);
            break;
        case Method::pseudomode:
            result.trace = run_protocol(cfg.params, resolve_protocol(cfg), cfg.initial);
            break;
        case Method::oracle:
            result.trace = run_protocol_oracle(cfg.params, resolve_protocol(cfg), cfg.initial,
                                               cfg.oracle_n_modes,
                                               cfg.oracle_e_max_over_lambda * cfg.params.lambda);
            break;
        case Method::perturbative:
            result = run_perturbative(cfg, resolve_protocol(cfg));
            break;
        case Method::unmeasured:
            result.trace = run_unmeasured(cfg.params, uniform_grid(cfg.t_max, sample_count(cfg)),
                                          cfg.initial);
            break;
    }
    if (cfg.initial_renorm > 1e-9) {
        result.warnings.push_back("initial amplitudes renormalized on load (|norm - 1| = " +
                                  fmt_short(cfg.initial_renorm) + ")");
    }
    return result;
}

std::string trace_to_csv(const ConditionalTrace& trace) {
    std::string s = "t,p1,p2,null_prob,method\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        s += fmt12(trace.times[i]);
        s += ',';
        s += fmt12(trace.p1[i]);
        s += ',';
        s += fmt12(trace.p2[i]);
        s += ',';
        s += fmt12(trace.null_prob[i]);
        s += ',';
        s += trace.method;
        s += '\n';
    }
    return s;
}

std::string comparison_csv(const std::vector<ConditionalTrace>& traces) {
    if (traces.size() < 2) throw config_error("compare requires at least two methods");
    const std::size_t rows = traces.front().size();
    for (const ConditionalTrace& t : traces) {
        if (t.size() != rows)
            throw config_error("methods produced differing time grids; cannot compare");
        for (std::size_t i = 0; i < rows; ++i)
            if (std::abs(t.times[i] - traces.front().times[i]) >
                1e-9 * (1.0 + std::abs(t.times[i])))
                throw config_error("methods produced differing time grids; cannot compare");
    }

    std::string s = "# qzeno compare\n# methods:";
    for (const ConditionalTrace& t : traces) s += " " + t.method;
    s += '\n';
    for (std::size_t a = 0; a < traces.size(); ++a) {
        for (std::size_t b = a + 1; b < traces.size(); ++b) {
            double max_abs = 0.0, sum_sq = 0.0;
            for (std::size_t i = 0; i < rows; ++i) {
                const double d = std::abs(traces[a].p1[i] - traces[b].p1[i]);
                max_abs = std::max(max_abs, d);
                sum_sq += d * d;
            }
            s += "# delta_p1 " + traces[a].method + " vs " + traces[b].method +
                 ": max=" + fmt12(max_abs) +
                 " rms=" + fmt12(std::sqrt(sum_sq / static_cast<double>(rows))) + "\n";
        }
    }
    for (const ConditionalTrace& t : traces) {
        if (t.oracle) {
            s += "# oracle: n_modes=" + std::to_string(t.oracle->n_modes) +
                 " e_max=" + fmt_short(t.oracle->e_max) +
                 " sum_rule_deficit=" + fmt12(t.oracle->sum_rule_deficit) + "\n";
        }
    }
    s += "t,p1,p2,null_prob,method\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (const ConditionalTrace& t : traces) {
            s += fmt12(t.times[i]);
            s += ',';
            s += fmt12(t.p1[i]);
            s += ',';
            s += fmt12(t.p2[i]);
            s += ',';
            s += fmt12(t.null_prob[i]);
            s += ',';
            s += t.method;
            s += '\n';
        }
    }
    return s;
}

void write_text_file(const std::string& path, const std::string& payload) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << payload;
    out.flush();
    if (!out) throw io_error("write to '" + path + "' failed");
}

namespace {

void emit_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "note: " << w << "\n";
}

std::string gnuplot_stub_for(const std::vector<std::string>& csv_files) {
    std::string s = "# companion plot script; run: gnuplot <this file>\n"
                    "set datafile separator ','\n"
                    "set key autotitle columnhead\n"
                    "set xlabel 'Gamma t'\n"
                    "set ylabel 'P1'\n"
                    "set yrange [0:1.05]\n"
                    "plot \\\n";
    for (std::size_t i = 0; i < csv_files.size(); ++i) {
        s += "  '" + csv_files[i] + "' using 1:2 with linespoints";
        if (i + 1 < csv_files.size()) s += ", \\";
        s += "\n";
    }
    return s;
}

}  // namespace

int cmd_run(const RunConfig& cfg, bool gnuplot_stub) {
    const RunResult result = run_method(cfg);
    emit_warnings(result.warnings);
    const std::string csv = trace_to_csv(result.trace);
    if (cfg.out.empty()) {
        std::cout << csv;
    } else {
        write_text_file(cfg.out, csv);
        if (gnuplot_stub) write_text_file(cfg.out + ".gp", gnuplot_stub_for({cfg.out}));
    }
    return 0;
}

int cmd_compare(const RunConfig& base, const std::vector<Method>& methods, bool gnuplot_stub) {
    if (methods.size() < 2) throw config_error("compare requires at least two methods");
    std::vector<ConditionalTrace> traces;
    for (Method m : methods) {
        RunConfig cfg = base;
        cfg.method = m;
        if (m == Method::scaling && !cfg.params.c) {
            if (cfg.params.e1 != cfg.params.e2)
                throw config_error("method 'scaling' requires aligned levels (e1 == e2)");
            cfg.params.c = cfg.params.e1 / cfg.params.lambda;
        }
        RunResult r = run_method(cfg);
        emit_warnings(r.warnings);
        traces.push_back(std::move(r.trace));
    }
    const std::string csv = comparison_csv(traces);
    if (base.out.empty()) {
        std::cout << csv;
    } else {
        write_text_file(base.out, csv);
        if (gnuplot_stub) write_text_file(base.out + ".gp", gnuplot_stub_for({base.out}));
    }
    return 0;
}

int cmd_fig2(char panel, double lambda_over_gamma, const std::vector<double>& x_list,
             const std::optional<Method>& only_method, const std::string& out_dir,
             bool gnuplot_stub) {
    if (panel != 'a' && panel != 'b' && panel != 'c')
        throw config_error("fig2 panel must be one of a, b, c");
    if (x_list.empty()) throw config_error("fig2: x list must be non-empty");
    for (double x : x_list)
        if (!(x > 0.0) || !std::isfinite(x)) throw config_error("fig2: x values must be positive");
    if (only_method) {
        const bool closed_form_panel = (panel != 'b');
        if (panel == 'b' && *only_method == Method::scaling)
            throw config_error("panel b has no closed-form scaling curve: the levels are "
                               "misaligned and no simple analytical expression exists");
        const bool valid = closed_form_panel
                               ? (*only_method == Method::scaling ||
                                  *only_method == Method::analytic_stepwise)
                               : (*only_method == Method::pseudomode);
        if (!valid)
            throw config_error("method '" + method_name(*only_method) +
                               "' is not part of the panel " + std::string(1, panel) + " preset");
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory '" + out_dir + "'");

    // Presets: occupation of dot 1 from initial (1,0) over Gamma t in [0,6];
    // 300 samples for the smooth scaling curves.
    constexpr double kTMax = 6.0;
    constexpr long long kScalingSamples = 300;

    RunConfig base;
    base.params.gamma1 = base.params.gamma2 = 1.0;
    base.params.lambda = lambda_over_gamma;
    base.t_max = kTMax;

    std::vector<std::string> files;
    for (double x : x_list) {
        base.x = x;
        struct Curve {
            Method method;
            double lambda;
            std::string tag;
        };
        std::vector<Curve> curves;
        if (panel == 'a' || panel == 'c') {
            curves.push_back({Method::scaling, lambda_over_gamma, "scaling"});
            curves.push_back({Method::analytic_stepwise, lambda_over_gamma,
                              "stepwise-L" + fmt_short(lambda_over_gamma)});
        } else {
            curves.push_back({Method::pseudomode, lambda_over_gamma,
                              "pseudomode-L" + fmt_short(lambda_over_gamma)});
            if (lambda_over_gamma != 20.0)
                curves.push_back({Method::pseudomode, 20.0, "pseudomode-L20"});
        }
        for (const Curve& curve : curves) {
            if (only_method && curve.method != *only_method) continue;
            RunConfig cfg = base;
            cfg.method = curve.method;
            cfg.params.lambda = curve.lambda;
            if (panel == 'a') {
                cfg.params.e1 = cfg.params.e2 = 0.0;
                cfg.params.c = 0.0;
            } else if (panel == 'b') {
                cfg.params.e1 = 0.05;
                cfg.params.e2 = -0.05;
            } else {
                cfg.params.c = 3.0;
                cfg.params.e1 = cfg.params.e2 = 3.0 * curve.lambda;
            }
            if (curve.method == Method::scaling) cfg.n = kScalingSamples;
            const RunResult result = run_method(cfg);
            emit_warnings(result.warnings);
            const std::string name = std::string("fig2") + panel + "_x" + fmt_short(x) + "_" +
                                     curve.tag + ".csv";
            const std::string path = (std::filesystem::path(out_dir) / name).string();
            write_text_file(path, trace_to_csv(result.trace));
            files.push_back(path);
        }
    }
    if (gnuplot_stub) {
        const std::string path =
            (std::filesystem::path(out_dir) / (std::string("fig2") + panel + ".gp")).string();
        write_text_file(path, gnuplot_stub_for(files));
    }
    return 0;
}

int cmd_sweep(const SweepSpec& spec, const std::string& out_dir, bool gnuplot_stub) {
    if (spec.values.empty()) throw config_error("sweep: value list must be non-empty");
    for (double v : spec.values)
        if (!std::isfinite(v)) throw config_error("sweep: values must be finite");
    if (spec.methods.empty()) throw config_error("sweep: method list must be non-empty");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory '" + out_dir + "'");

    struct Task {
        RunConfig cfg;
        std::string filename;
    };
    std::vector<Task> tasks;
    for (double v : spec.values) {
        for (Method m : spec.methods) {
            Task task;
            task.cfg = apply_sweep_value(spec.base, spec.key, v);
            task.cfg.method = m;
            if (m == Method::scaling && !task.cfg.params.c) {
                if (task.cfg.params.e1 != task.cfg.params.e2)
                    throw config_error("method 'scaling' requires aligned levels (e1 == e2)");
                task.cfg.params.c = task.cfg.params.e1 / task.cfg.params.lambda;
            }
            task.filename = "sweep_" + spec.key + "-" + fmt_short(v) + "_" + method_name(m) + ".csv";
            tasks.push_back(std::move(task));
        }
    }

    // bounded worker pool; a single collector writes in task order below
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), tasks.size());
    std::vector<std::string> payloads(tasks.size());
    std::vector<std::exception_ptr> failures(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                payloads[i] = trace_to_csv(run_method(tasks[i].cfg).trace);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& failure : failures)
        if (failure) std::rethrow_exception(failure);

    std::vector<std::string> files;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string path = (std::filesystem::path(out_dir) / tasks[i].filename).string();
        write_text_file(path, payloads[i]);
        files.push_back(path);
    }
    if (gnuplot_stub) {
        const std::string path = (std::filesystem::path(out_dir) / "sweep.gp").string();
        write_text_file(path, gnuplot_stub_for(files));
    }
    return 0;
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const std::string& item : split_list(s)) {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0' || !std::isfinite(v))
            throw config_error(what + ": expected a comma-separated list of numbers, got '" + s +
                               "'");
        out.push_back(v);
    }
    if (out.empty()) throw config_error(what + ": list must be non-empty");
    return out;
}

std::vector<Method> parse_method_list(const std::string& s) {
    std::vector<Method> out;
    for (const std::string& item : split_list(s)) out.push_back(method_from_name(item));
    if (out.empty()) throw config_error("methods: list must be non-empty");
    return out;
}

// registers the full flat-key flag set on a subcommand, collected as strings
// so that file values and flag values go through one validation path
void add_config_flags(CLI::App* sub, KeyValues& store) {
    static const std::pair<const char*, const char*> kFlags[] = {
        {"--e1", "e1"}, {"--e2", "e2"}, {"--gamma1", "gamma1"}, {"--gamma2", "gamma2"},
        {"--lambda", "lambda"}, {"--c", "c"}, {"--x", "x"}, {"--tau", "tau"},
        {"--t-max", "t_max"}, {"--n", "n"},
        {"--initial-b1-re", "initial_b1_re"}, {"--initial-b1-im", "initial_b1_im"},
        {"--initial-b2-re", "initial_b2_re"}, {"--initial-b2-im", "initial_b2_im"},
        {"--method", "method"}, {"--oracle-n-modes", "oracle_n_modes"},
        {"--oracle-e-max-over-lambda", "oracle_e_max_over_lambda"}};
    for (const auto& [flag, key] : kFlags) {
        const std::string key_name = key;
        sub->add_option_function<std::string>(
            flag, [&store, key_name](const std::string& v) { store[key_name] = v; },
            std::string("config key ") + key_name);
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"qzeno: conditional transfer between two localized sites through a "
                 "finite-bandwidth reservoir under repeated null-result measurements"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    bool seedless = false;
    bool gnuplot_stub = false;
    app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--out", out_path, "output path (file for run/compare, directory otherwise)");
    app.add_flag("--seedless", seedless,
                 "reserved: the tool has no randomness, every run is deterministic");
    app.add_flag("--gnuplot-stub", gnuplot_stub, "emit a companion gnuplot script");

    KeyValues run_flags, compare_flags, sweep_flags;
    CLI::App* run = app.add_subcommand("run", "single trace -> CSV");
    run->fallthrough();
    add_config_flags(run, run_flags);

    CLI::App* compare = app.add_subcommand("compare", "several methods on one grid -> CSV + summary");
    compare->fallthrough();
    add_config_flags(compare, compare_flags);
    std::string compare_methods;
    compare->add_option("--methods", compare_methods, "comma-separated method list (>= 2)")
        ->required();

    CLI::App* sweep = app.add_subcommand("sweep", "one-dimensional parameter sweep -> CSV bundle");
    sweep->fallthrough();
    add_config_flags(sweep, sweep_flags);
    std::string sweep_key, sweep_values, sweep_methods;
    sweep->add_option("--param", sweep_key, "swept key: x | lambda | e1 | e2 | gamma")->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep->add_option("--methods", sweep_methods, "comma-separated method list")->required();

    CLI::App* fig2 = app.add_subcommand("fig2", "occupation-curve presets -> CSV bundle");
    fig2->fallthrough();
    std::string panel, fig2_method, fig2_x_list = "2,0.2,0.02";
    double fig2_lambda = 3.0;
    fig2->add_option("--panel", panel, "a (aligned E=0) | b (E = +-0.05) | c (E = 3 Lambda)")
        ->required();
    fig2->add_option("--lambda-over-gamma", fig2_lambda, "stepwise bandwidth in units of Gamma");
    fig2->add_option("--x-list", fig2_x_list, "comma-separated x values");
    fig2->add_option("--method", fig2_method, "restrict to one preset method");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (seedless)
            throw config_error("--seedless is reserved: this tool has no RNG and every run is "
                               "deterministic by construction");
        KeyValues file_values;
        if (!config_path.empty()) file_values = read_config_file(config_path);

        const auto with_out = [&](KeyValues flags) {
            if (!out_path.empty()) flags["out"] = out_path;
            return flags;
        };

        // compare and sweep take their methods from --methods; the base
        // config's own method key is optional there and defaults to the first
        const auto with_method = [&](KeyValues flags, const std::vector<Method>& methods) {
            if (!flags.count("method") && !file_values.count("method"))
                flags["method"] = method_name(methods.front());
            return flags;
        };

        if (run->parsed()) {
            return cmd_run(build_run_config(file_values, with_out(run_flags)), gnuplot_stub);
        }
        if (compare->parsed()) {
            const std::vector<Method> methods = parse_method_list(compare_methods);
            return cmd_compare(
                build_run_config(file_values, with_method(with_out(compare_flags), methods)),
                methods, gnuplot_stub);
        }
        if (sweep->parsed()) {
            SweepSpec spec;
            spec.methods = parse_method_list(sweep_methods);
            spec.base = build_run_config(file_values, with_method(sweep_flags, spec.methods));
            spec.key = sweep_key;
            spec.values = parse_double_list(sweep_values, "sweep values");
            return cmd_sweep(spec, out_path.empty() ? "." : out_path, gnuplot_stub);
        }
        if (fig2->parsed()) {
            if (panel.size() != 1) throw config_error("fig2 panel must be one of a, b, c");
            std::optional<Method> only;
            if (!fig2_method.empty()) only = method_from_name(fig2_method);
            return cmd_fig2(panel[0], fig2_lambda, parse_double_list(fig2_x_list, "x list"), only,
                            out_path.empty() ? "." : out_path, gnuplot_stub);
        }
        throw config_error("no subcommand given");
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric breakdown: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace qzeno
