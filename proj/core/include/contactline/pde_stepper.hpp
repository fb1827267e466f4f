#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "contactline/banded.hpp"
#include "contactline/contact_bc.hpp"
#include "contactline/diagnostics.hpp"
#include "contactline/grid.hpp"
#include "contactline/stencil.hpp"

namespace contactline {

enum class Scheme { imex_affine, implicit_secant };
enum class InitialData { polynomial, selfsimilar };

struct RunConfig {
    Scheme scheme = Scheme::imex_affine;
    double dt = 1e-4;
    double L = 40.0;
    long long n = 4001;

    double beta0_init = -1.0;  // h0''(0)
    double sigma = 0.5;        // envelope exp(-(sigma x)^4)
    InitialData initial = InitialData::polynomial;
    double t0 = 1.0;           // blow-up time of the self-similar seed

    ThirdBcMode third_bc = ThirdBcMode::flux;
    std::optional<double> gamma0;
    double farfield_value = 0.0;

    double farfield_tol = 1e-8;
    double t_max = 1.0;
    double beta_threshold = -1e-6;
    double v_max = 1e5;

    long long trace_stride = 1;
    std::vector<double> snapshot_times;
    std::string out_dir = "out";

    /// Throws ValidationError naming the offending field.
    void validate() const;
    Grid grid() const;
    ThirdBoundaryCondition third_condition() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Extra terms for manufactured-solution and fixed-point studies. Empty
/// members fall back to the physical problem.
struct Forcing {
    std::function<double(double x, double t)> source;     // added to h_t + h_xxxx - V h_x
    std::function<double(double t)> boundary_value;       // h(0, t), default 1
    std::function<double(double t)> flux_target;          // h_xxx(0, t) in flux mode, default -1/2
};

struct StepResult {
    Field field;
    double V = 0.0;
    int closure_iterations = 0;
    /// Defect of the discrete third condition, relative to the magnitude of
    /// the terms in the one-sided difference (rounding sets its floor).
    double closure_residual = 0.0;
};

/// h0(x) = (1 + beta0 x^2 / 2 - x^3 / 12) exp(-(sigma x)^4). The envelope
/// is flat to third order at 0, so h0(0) = 1, h0'(0) = 0, h0''(0) = beta0
/// and h0'''(0) = -1/2 hold exactly.
Field initial_profile(double beta0, double sigma, const Grid& grid);

/// Backward-Euler step with the advection term lagged:
///   (I + dt D4) h_new = h + dt V D1 h.
/// h_new = h_a + V h_b is affine in V, so the third condition is met by an
/// exact scalar solve. The matrix is factored once per stepper.
class ImexAffineStepper {
public:
    ImexAffineStepper(const Grid& grid, double dt, ThirdBoundaryCondition bc, double farfield_value = 0.0,
                      const StencilSet& stencils = StencilSet::standard());

    StepResult step(const Field& h, const Forcing* forcing = nullptr) const;

    const Grid& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }

private:
    Grid grid_;
    double dt_;
    ThirdBoundaryCondition bc_;
    double farfield_value_;
    const StencilSet* stencils_;
    BandedLu lu_;
};

/// Fully implicit step (I + dt D4 - dt V D1) h_new = h with a secant
/// iteration on the third-condition defect.
class ImplicitSecantStepper {
public:
    static constexpr int max_iterations = 50;
    static constexpr double tolerance = 1e-10;

    ImplicitSecantStepper(const Grid& grid, double dt, ThirdBoundaryCondition bc, double farfield_value = 0.0,
                          const StencilSet& stencils = StencilSet::standard());

    /// Throws ClosureError with the last residual if the iteration stalls.
    StepResult step(const Field& h, double V_guess, const Forcing* forcing = nullptr) const;

private:
    Grid grid_;
    double dt_;
    ThirdBoundaryCondition bc_;
    double farfield_value_;
    const StencilSet* stencils_;
};

StepResult step_imex_affine(const Field& h, double dt, const RunConfig& config);
StepResult step_implicit_secant(const Field& h, double dt, double V_guess, const RunConfig& config);

/// Steady state of the discrete imex system at fixed V: D4 h = V D1 h in
/// the interior with the same boundary rows as the stepper. Used to build
/// fixed points of the closure.
Field discrete_steady_state(const Grid& grid, double V, double boundary_value = 1.0, double farfield_value = 0.0,
                            const StencilSet& stencils = StencilSet::standard());

struct EvolveOptions {
    std::optional<Field> initial;     // replaces initial_profile when set
    std::optional<double> initial_V;  // V recorded at t = 0; back-filled from step 1 otherwise
    const Forcing* forcing = nullptr;
    const StencilSet* stencils = &StencilSet::standard();
    bool halt_on_nonphysical = true;
    /// Called after every accepted step.
    std::function<void(std::size_t step, const StepResult&)> observer;
};

struct EvolveResult {
    Trace trace;
    std::vector<Field> snapshots;
    Field final_field;
    std::size_t steps = 0;
    int max_closure_iterations = 0;
    double max_closure_residual = 0.0;
};

/// Steps from the initial data until t_max or a halt condition, recording
/// the trace every trace_stride steps and at the final step. Step errors
/// are rethrown as StepError carrying the step index.
EvolveResult evolve(const RunConfig& config, const EvolveOptions& options = {});

}  // namespace contactline
