#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contactline/pde_stepper.hpp"
#include "contactline/stencil.hpp"

namespace contactline {

/// Outcome of one end-to-end check. `metrics` holds the measured values the
/// verdict was based on, in the order they were computed.
struct CheckResult {
    int id = 0;  // 1-8 for the acceptance criteria, 0 for auxiliary checks
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    std::vector<std::pair<std::string, double>> metrics;
};

struct VerifyOptions {
    /// Stencils used by every check; a perturbed set exercises the failure path.
    const StencilSet* stencils = &StencilSet::standard();
    /// Domain length of the far-field check; the default keeps the run's L.
    std::optional<double> farfield_length;
    /// Runs only the listed check names when non-empty.
    std::vector<std::string> only;
    /// Called after each check completes.
    std::function<void(const CheckResult&)> progress;
};

/// Solution of the manufactured problem h*(x, t) = h0(x) (1 + t/4) with
/// speed V*(t) = 1 + t/2, and the forcing that makes it exact.
struct ManufacturedSolution {
    double beta0 = -1.0;
    double sigma = 0.5;

    double value(double x, double t) const;
    double derivative(double x, int order) const;  // of h0
    double speed(double t) const { return 1.0 + 0.5 * t; }
    Forcing forcing() const;
};

CheckResult check_stencil_exactness(const StencilSet& stencils = StencilSet::standard());
CheckResult check_manufactured_convergence(const StencilSet& stencils = StencilSet::standard());
/// Criteria 3 and 8 share the refinement runs.
std::pair<CheckResult, CheckResult> check_energy_and_existence(const StencilSet& stencils = StencilSet::standard());
CheckResult check_selfsimilar_roundtrip(const StencilSet& stencils = StencilSet::standard());
CheckResult check_sign_structure();
CheckResult check_fitter_recovery();
CheckResult check_pointwise_identities(const StencilSet& stencils = StencilSet::standard());
/// Far-field monitor stays below tolerance over the default run.
CheckResult check_farfield(std::optional<double> length = std::nullopt,
                           const StencilSet& stencils = StencilSet::standard());

std::vector<std::string> check_names();

/// Runs the selected checks in order.
std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

}  // namespace contactline
