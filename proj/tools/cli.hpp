#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hctl::cli {

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3 };

/// Runs the command line. Output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Steady metrics of one run, as printed by simulate and compare.
struct RunSummary {
    std::string controller;
    std::string scenario;
    std::size_t records        = 0;
    double      thd_ia         = 0.0;  ///< last sample
    double      hc_vdc         = 0.0;  ///< last sample
    double      vdc_mean_error = 0.0;  ///< mean over the last period minus the final reference
    double      iq_mean        = 0.0;  ///< mean over the last period
    double      energy_residual = 0.0;
};

}  // namespace hctl::cli
