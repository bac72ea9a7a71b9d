#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qzeno/config.hpp"
#include "qzeno/trace.hpp"

namespace qzeno {

struct RunResult {
    ConditionalTrace trace;
    std::vector<std::string> warnings;
};

/// Dispatches a config to the selected computation path.
RunResult run_method(const RunConfig& cfg);

/// Serializes a trace: header `t,p1,p2,null_prob,method`, LF line endings,
/// 12 significant digits.
std::string trace_to_csv(const ConditionalTrace& trace);

/// Multi-method CSV: `#`-prefixed summary block (pairwise max / RMS |dP1|,
/// oracle metadata), then the shared header and rows in ascending t, methods
/// in the given order within each time.
std::string comparison_csv(const std::vector<ConditionalTrace>& traces);

void write_text_file(const std::string& path, const std::string& payload);

int cmd_run(const RunConfig& cfg, bool gnuplot_stub);
int cmd_compare(const RunConfig& base, const std::vector<Method>& methods, bool gnuplot_stub);
int cmd_fig2(char panel, double lambda_over_gamma, const std::vector<double>& x_list,
             const std::optional<Method>& only_method, const std::string& out_dir,
             bool gnuplot_stub);
int cmd_sweep(const SweepSpec& spec, const std::string& out_dir, bool gnuplot_stub);

/// Full command-line entry point. Exit codes: 0 success, 2 config error,
/// 3 numeric breakdown, 4 I/O error.
int run_cli(int argc, const char* const* argv);

}  // namespace qzeno
