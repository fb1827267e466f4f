#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "contactline/blowup_fit.hpp"
#include "contactline/io.hpp"
#include "contactline/pde_stepper.hpp"
#include "contactline/selfsimilar.hpp"
#include "contactline/verification.hpp"

namespace contactline {

/// Runs one evolution into config.out_dir: trace.csv, one snapshot file
/// per configured time, summary.json. With resolution_sweep = K >= 2 the
/// run is repeated at K levels (dx halved and dt quartered per level) in
/// level_<k>/ subdirectories, concurrently, and the summary carries the
/// observed orders of the balance residuals.
RunSummary cmd_simulate(const RunConfig& config, int resolution_sweep = 0);

struct SelfSimilarRequest {
    SelfSimilarOptions options;
    std::filesystem::path out_dir = "out";
    /// Number of dz levels (dz, dz/2, ...) for the z0 refinement table.
    int dz_sweep = 0;
};

/// Writes G.dat (z, G, G', G''), f.dat (xi, f) and summary.json.
RunSummary cmd_selfsimilar(const SelfSimilarRequest& request);

struct FitRequest {
    std::filesystem::path trace_path;
    std::vector<RateModel> models{RateModel::log, RateModel::sqrt, RateModel::selfsim};
    /// Time range [t_a, t_b]; detect_window is used when unset.
    std::optional<std::pair<double, double>> window;
    std::filesystem::path out_dir = "out";
};

/// Loads a trace file and writes the ranked fit report to summary.json.
RunSummary cmd_fit(const FitRequest& request);

struct VerifyRequest {
    VerifyOptions options;
    std::filesystem::path out_dir = "out";
};

/// Runs the verification suite; summary.checks holds one entry per check.
RunSummary cmd_verify(const VerifyRequest& request);

}  // namespace contactline
