#include "contactline/pde_stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "contactline/error.hpp"

namespace contactline {

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& key, const std::string& why) {
        if (!ok) throw ValidationError(key + ": " + why);
    };
    require(std::isfinite(dt) && dt > 0.0, "dt", "must be positive");
    require(std::isfinite(L) && L > 0.0, "L", "must be positive");
    require(n >= static_cast<long long>(Grid::min_nodes), "n", "must be at least 16");
    require(std::isfinite(beta0_init) && beta0_init < 0.0, "beta0_init", "must be negative (h0''(0) < 0)");
    require(std::isfinite(sigma) && sigma > 0.0, "sigma", "must be positive");
    require(std::isfinite(t0) && t0 > 0.0, "t0", "must be positive");
    require(third_bc != ThirdBcMode::selfsim || gamma0.has_value(), "gamma0", "required in selfsim mode");
    require(!gamma0 || std::isfinite(*gamma0), "gamma0", "must be finite");
    require(std::isfinite(farfield_value) && farfield_value < 1.0, "farfield_value", "must be below 1");
    require(farfield_tol > 0.0, "farfield_tol", "must be positive");
    require(std::isfinite(t_max) && t_max >= 0.0, "t_max", "must be non-negative");
    require(beta_threshold <= 0.0, "beta_threshold", "must be non-positive");
    require(v_max > 0.0, "v_max", "must be positive");
    require(trace_stride >= 1, "trace_stride", "must be at least 1");
    for (double ts : snapshot_times) require(std::isfinite(ts) && ts >= 0.0, "snapshot_times", "must be non-negative");
}

Grid RunConfig::grid() const { return build_grid(L, n); }

ThirdBoundaryCondition RunConfig::third_condition() const {
    ThirdBoundaryCondition bc;
    bc.mode = third_bc;
    bc.gamma0 = gamma0.value_or(0.0);
    return bc;
}

Field initial_profile(double beta0, double sigma, const Grid& grid) {
    if (!(beta0 < 0.0)) throw ValidationError("initial_profile: beta0 must be negative");
    if (!(sigma > 0.0)) throw ValidationError("initial_profile: sigma must be positive");
    std::vector<double> h(grid.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = grid.x(i);
        const double sx = sigma * x;
        h[i] = (1.0 + 0.5 * beta0 * x * x - x * x * x / 12.0) * std::exp(-(sx * sx) * (sx * sx));
    }
    return Field(grid, std::move(h), 0.0);
}

namespace {

constexpr double kDegenerateResponse = 1e-14;

void require_width(const Grid& grid, const StencilSet& stencils) {
    if (grid.size() < stencils.min_length() + 4) {
        throw ValidationError("grid too small for the stepper stencils");
    }
}

/// Rows: 0 Dirichlet h(0); 1 one-sided h_x(0) = 0; interior
/// diag_shift * I + diff_scale * D4 - advect * D1; last two Dirichlet h = H.
BandedMatrix assemble(const Grid& grid, double diag_shift, double diff_scale, double advect,
                      const StencilSet& stencils) {
    const auto n = grid.size();
    const double dx = grid.dx();
    BandedMatrix A(n, 2, 2);
    A.set(0, 0, 1.0);
    const Stencil& d1_wall = stencils.boundary[1];
    for (std::size_t j = 0; j < d1_wall.width(); ++j) A.set(1, j, d1_wall.weights[j]);

    const Stencil& d4 = stencils.central[4];
    const Stencil& d1 = stencils.central[1];
    std::vector<double> row(5);
    const double c4 = diff_scale / std::pow(dx, 4);
    const double c1 = advect / dx;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t j = 0; j < d4.width(); ++j) row[static_cast<std::size_t>(d4.first + 2) + j] += c4 * d4.weights[j];
        for (std::size_t j = 0; j < d1.width(); ++j) row[static_cast<std::size_t>(d1.first + 2) + j] -= c1 * d1.weights[j];
        row[2] += diag_shift;
        for (std::size_t j = 0; j < 5; ++j) A.set(i, i - 2 + j, row[j]);
    }
    A.set(n - 2, n - 2, 1.0);
    A.set(n - 1, n - 1, 1.0);
    return A;
}

/// Discrete h_xxx(0) and the magnitude of the terms entering it.
struct WallFunctional {
    double value;
    double scale;
};

WallFunctional third_derivative_at_wall(std::span<const double> h, double dx, const StencilSet& stencils) {
    const Stencil& st = stencils.boundary[3];
    double acc = 0.0;
    double mag = 0.0;
    for (std::size_t j = 0; j < st.width(); ++j) {
        acc += st.weights[j] * h[j];
        mag += std::abs(st.weights[j] * h[j]);
    }
    const double s = 1.0 / (dx * dx * dx);
    return {acc * s, mag * s};
}

double closure_target(const ThirdBoundaryCondition& bc, const Forcing* forcing, double t) {
    if (bc.mode == ThirdBcMode::selfsim) return 0.0;
    if (forcing && forcing->flux_target) return forcing->flux_target(t);
    return bc.flux_target;
}

double boundary_value(const Forcing* forcing, double t) {
    return forcing && forcing->boundary_value ? forcing->boundary_value(t) : 1.0;
}

double relative_defect(std::span<const double> h, double dx, double V, double target,
                       const ThirdBoundaryCondition& bc, const StencilSet& stencils) {
    const auto w = third_derivative_at_wall(h, dx, stencils);
    const double demanded = target + bc.slope() * V;
    const double scale = w.scale + std::abs(demanded);
    return scale > 0.0 ? std::abs(w.value - demanded) / scale : 0.0;
}

BandedLu factor_imex(const Grid& grid, double dt, const StencilSet& stencils) {
    require_width(grid, stencils);
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("time step must be positive, got " + std::to_string(dt));
    }
    return BandedLu(assemble(grid, 1.0, dt, 0.0, stencils));
}

void check_field(const Field& h, const Grid& grid) {
    if (!(h.grid == grid)) throw ValidationError("field grid does not match the stepper grid");
}

}  // namespace

ImexAffineStepper::ImexAffineStepper(const Grid& grid, double dt, ThirdBoundaryCondition bc, double farfield_value,
                                     const StencilSet& stencils)
    : grid_(grid),
      dt_(dt),
      bc_(bc),
      farfield_value_(farfield_value),
      stencils_(&stencils),
      lu_(factor_imex(grid, dt, stencils)) {}

StepResult ImexAffineStepper::step(const Field& h, const Forcing* forcing) const {
    check_field(h, grid_);
    const auto n = grid_.size();
    const double dx = grid_.dx();
    const double t_new = h.time + dt_;

    std::vector<double> rhs_a(h.values);
    if (forcing && forcing->source) {
        for (std::size_t i = 2; i + 2 < n; ++i) rhs_a[i] += dt_ * forcing->source(grid_.x(i), t_new);
    }
    const double wall = boundary_value(forcing, t_new);
    rhs_a[0] = wall;
    rhs_a[1] = 0.0;
    rhs_a[n - 2] = farfield_value_;
    rhs_a[n - 1] = farfield_value_;

    std::vector<double> rhs_b = apply_derivative(h.view(), dx, 1, *stencils_);
    for (double& v : rhs_b) v *= dt_;
    rhs_b[0] = rhs_b[1] = rhs_b[n - 2] = rhs_b[n - 1] = 0.0;

    lu_.solve_in_place(rhs_a);
    lu_.solve_in_place(rhs_b);

    const double target = closure_target(bc_, forcing, t_new);
    const double Ta = third_derivative_at_wall(rhs_a, dx, *stencils_).value;
    const double Tb = third_derivative_at_wall(rhs_b, dx, *stencils_).value;
    const double response = Tb - bc_.slope();
    if (!(std::abs(response) >= kDegenerateResponse)) {
        throw ClosureError("degenerate closure: third-condition response to V is " + std::to_string(response),
                           std::numeric_limits<double>::quiet_NaN(), 0);
    }
    const double V = (target - Ta) / response;

    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = rhs_a[i] + V * rhs_b[i];
    next[0] = wall;
    next[n - 2] = next[n - 1] = farfield_value_;

    StepResult result{Field(grid_, std::move(next), t_new), V, 1, 0.0};
    result.closure_residual = relative_defect(result.field.view(), dx, V, target, bc_, *stencils_);
    return result;
}

ImplicitSecantStepper::ImplicitSecantStepper(const Grid& grid, double dt, ThirdBoundaryCondition bc,
                                             double farfield_value, const StencilSet& stencils)
    : grid_(grid), dt_(dt), bc_(bc), farfield_value_(farfield_value), stencils_(&stencils) {
    require_width(grid, stencils);
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("time step must be positive, got " + std::to_string(dt));
    }
}

StepResult ImplicitSecantStepper::step(const Field& h, double V_guess, const Forcing* forcing) const {
    check_field(h, grid_);
    if (!std::isfinite(V_guess)) throw ValidationError("secant closure needs a finite initial guess");
    const auto n = grid_.size();
    const double dx = grid_.dx();
    const double t_new = h.time + dt_;
    const double target = closure_target(bc_, forcing, t_new);
    const double wall = boundary_value(forcing, t_new);

    std::vector<double> rhs(h.values);
    if (forcing && forcing->source) {
        for (std::size_t i = 2; i + 2 < n; ++i) rhs[i] += dt_ * forcing->source(grid_.x(i), t_new);
    }
    rhs[0] = wall;
    rhs[1] = 0.0;
    rhs[n - 2] = rhs[n - 1] = farfield_value_;

    struct Sample {
        double V;
        std::vector<double> h;
        double defect;    // h_xxx(0) - demanded
        double relative;  // defect / term magnitude
    };
    auto evaluate = [&](double V) {
        BandedLu lu(assemble(grid_, 1.0, dt_, dt_ * V, *stencils_));
        Sample s{V, lu.solve(rhs), 0.0, 0.0};
        const auto w = third_derivative_at_wall(s.h, dx, *stencils_);
        const double demanded = target + bc_.slope() * V;
        s.defect = w.value - demanded;
        s.relative = std::abs(s.defect) / (w.scale + std::abs(demanded));
        if (!std::isfinite(s.defect)) s.relative = std::numeric_limits<double>::infinity();
        return s;
    };
    auto finish = [&](Sample s, int iterations) {
        s.h[0] = wall;
        s.h[n - 2] = s.h[n - 1] = farfield_value_;
        return StepResult{Field(grid_, std::move(s.h), t_new), s.V, iterations, s.relative};
    };

    Sample prev = evaluate(V_guess);
    if (prev.relative <= tolerance) return finish(std::move(prev), 0);
    Sample curr = evaluate(V_guess + 1e-3 * std::max(1.0, std::abs(V_guess)));
    for (int it = 1; it <= max_iterations; ++it) {
        if (curr.relative <= tolerance) return finish(std::move(curr), it);
        const double slope = (curr.defect - prev.defect) / (curr.V - prev.V);
        if (!(std::abs(slope) > 0.0) || !std::isfinite(slope)) {
            throw ClosureError("secant closure stalled: flat defect at V = " + std::to_string(curr.V), curr.relative,
                               it);
        }
        const double V_next = curr.V - curr.defect / slope;
        if (!std::isfinite(V_next)) {
            throw ClosureError("secant closure diverged", curr.relative, it);
        }
        prev = std::move(curr);
        curr = evaluate(V_next);
    }
    throw ClosureError("secant closure did not converge in " + std::to_string(max_iterations) + " iterations",
                       curr.relative, max_iterations);
}

StepResult step_imex_affine(const Field& h, double dt, const RunConfig& config) {
    return ImexAffineStepper(h.grid, dt, config.third_condition(), config.farfield_value).step(h);
}

StepResult step_implicit_secant(const Field& h, double dt, double V_guess, const RunConfig& config) {
    return ImplicitSecantStepper(h.grid, dt, config.third_condition(), config.farfield_value).step(h, V_guess);
}

Field discrete_steady_state(const Grid& grid, double V, double boundary_value, double farfield_value,
                            const StencilSet& stencils) {
    require_width(grid, stencils);
    const auto n = grid.size();
    BandedLu lu(assemble(grid, 0.0, 1.0, V, stencils));
    std::vector<double> rhs(n, 0.0);
    rhs[0] = boundary_value;
    rhs[n - 2] = rhs[n - 1] = farfield_value;
    lu.solve_in_place(rhs);
    rhs[0] = boundary_value;
    rhs[n - 2] = rhs[n - 1] = farfield_value;
    return Field(grid, std::move(rhs), 0.0);
}

EvolveResult evolve(const RunConfig& config, const EvolveOptions& options) {
    config.validate();
    const Grid grid = config.grid();
    const ThirdBoundaryCondition bc = config.third_condition();
    const StencilSet& stencils = *options.stencils;

    if (!options.initial && config.initial == InitialData::selfsimilar) {
        throw ValidationError("initial: selfsimilar seeding needs the seed field to be supplied");
    }
    Field h = options.initial ? *options.initial : initial_profile(config.beta0_init, config.sigma, grid);
    if (!(h.grid == grid)) throw ValidationError("initial field grid does not match the configured grid");
    h.time = 0.0;

    std::variant<ImexAffineStepper, ImplicitSecantStepper> stepper =
        config.scheme == Scheme::imex_affine
            ? std::variant<ImexAffineStepper, ImplicitSecantStepper>(
                  std::in_place_type<ImexAffineStepper>, grid, config.dt, bc, config.farfield_value, stencils)
            : std::variant<ImexAffineStepper, ImplicitSecantStepper>(
                  std::in_place_type<ImplicitSecantStepper>, grid, config.dt, bc, config.farfield_value,
                  stencils);

    EvolveResult result{Trace{}, {}, h, 0, 0, 0.0};
    Trace& trace = result.trace;
    const double V_start = options.initial_V.value_or(std::numeric_limits<double>::quiet_NaN());
    trace.records.push_back(measure(h, V_start, config.farfield_value, stencils));

    std::vector<double> snaps = config.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) {
        result.snapshots.push_back(h);
        ++next_snap;
    }

    auto halt_check = [&](const TraceRecord& rec) {
        if (rec.farfield > config.farfield_tol) return HaltReason::farfield;
        if (std::abs(rec.V) > config.v_max) return HaltReason::v_threshold;
        if (options.halt_on_nonphysical && rec.beta >= config.beta_threshold) return HaltReason::beta_threshold;
        return HaltReason::none;
    };

    trace.halt = halt_check(trace.records.front());
    if (trace.halt != HaltReason::none) return result;

    const auto steps = static_cast<std::size_t>(std::ceil(config.t_max / config.dt - 1e-9));
    double V_prev = std::isfinite(V_start) ? V_start : 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        StepResult r = [&] {
            try {
                if (auto* imex = std::get_if<ImexAffineStepper>(&stepper)) return imex->step(h, options.forcing);
                return std::get<ImplicitSecantStepper>(stepper).step(h, V_prev, options.forcing);
            } catch (const Error& e) {
                throw StepError(e, k);
            }
        }();
        r.field.time = static_cast<double>(k) * config.dt;
        if (k == 1 && !options.initial_V) trace.records.front().V = r.V;
        result.max_closure_iterations = std::max(result.max_closure_iterations, r.closure_iterations);
        result.max_closure_residual = std::max(result.max_closure_residual, r.closure_residual);
        if (options.observer) options.observer(k, r);
        V_prev = r.V;
        h = std::move(r.field);
        result.steps = k;

        while (next_snap < snaps.size() && snaps[next_snap] <= h.time + 1e-12 * config.dt) {
            result.snapshots.push_back(h);
            ++next_snap;
        }

        // Halting needs only beta, V and the tail; the full record is built
        // on the stride or when the run stops.
        TraceRecord probe;
        probe.V = V_prev;
        probe.beta = boundary_derivative(h, 2, stencils);
        probe.farfield = farfield_monitor(h, config.farfield_value, stencils);
        const HaltReason reason = halt_check(probe);
        const bool last = k == steps || reason != HaltReason::none;
        if (last || k % static_cast<std::size_t>(config.trace_stride) == 0) {
            trace.records.push_back(measure(h, V_prev, config.farfield_value, stencils));
        }
        if (reason != HaltReason::none) {
            trace.halt = reason;
            break;
        }
    }
    if (trace.halt == HaltReason::none) trace.halt = HaltReason::t_max;
    result.final_field = h;
    return result;
}

}  // namespace contactline
