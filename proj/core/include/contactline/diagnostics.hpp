#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contactline/contact_bc.hpp"
#include "contactline/grid.hpp"
#include "contactline/stencil.hpp"

namespace contactline {

/// One monitored instant of a run. u = h_x throughout, so E_ux = ||u_x||^2
/// and D_h = ||h_xx||^2 coincide; both are kept to mirror the three balances.
struct TraceRecord {
    double t = 0.0;
    double V = 0.0;      // speed used by the step that produced this record
    double beta = 0.0;   // h_xx(0, t)
    double E_h = 0.0;    // ||h||^2
    double E_u = 0.0;    // ||u||^2
    double E_ux = 0.0;   // ||u_x||^2
    double D_h = 0.0;    // ||h_xx||^2
    double D_u = 0.0;    // ||u_xx||^2
    double D_ux = 0.0;   // ||u_xxx||^2
    double a4 = 0.0;     // u_xxxx(0, t)
    double a5 = 0.0;     // u_xxxxx(0, t)
    double farfield = 0.0;
};

enum class HaltReason { none, t_max, beta_threshold, v_threshold, farfield };

std::string_view to_string(HaltReason reason) noexcept;
HaltReason halt_reason_from_string(std::string_view text);

struct Trace {
    std::vector<TraceRecord> records;
    HaltReason halt = HaltReason::none;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
    const TraceRecord& back() const { return records.back(); }

    /// Throws ValidationError unless times are strictly increasing and
    /// energies are non-negative.
    void validate() const;
};

/// u = h_x by the first-derivative operator; u(0) = 0 up to O(dx^2).
Field compute_u(const Field& h, const StencilSet& stencils = StencilSet::standard());

/// Max of |h - H| + |h_x| + |h_xx| over the last 10% of nodes.
double farfield_monitor(const Field& h, double farfield_value = 0.0,
                        const StencilSet& stencils = StencilSet::standard());

/// Evaluates every Trace quantity for the field h at speed V.
TraceRecord measure(const Field& h, double V, double farfield_value = 0.0,
                    const StencilSet& stencils = StencilSet::standard());

/// First record whose beta has entered [threshold, inf); the flag is
/// monotone, so every later record is non-physical as well.
std::optional<std::size_t> first_nonphysical(const Trace& trace, double threshold = -1e-6);

enum class BalanceId { h_energy, u_energy, ux_energy, pointwise_1, pointwise_2 };

std::string_view to_string(BalanceId id) noexcept;
/// Throws ValidationError for unknown names.
BalanceId balance_id_from_string(std::string_view name);

struct BalanceOptions {
    ThirdBoundaryCondition bc{};
    double t_begin = 0.0;
    double t_end = std::numeric_limits<double>::infinity();
};

struct BalanceReport {
    BalanceId id = BalanceId::h_energy;
    std::vector<double> times;      // interval midpoints (energies) or record times (pointwise)
    std::vector<double> residuals;
    double max_residual = 0.0;
    std::optional<double> observed_order;
};

/// Energy identities, residual per interval between consecutive records:
///   h:  d/dt ||h||^2   + 2 ||h_xx||^2   = 2 h_xxx(0) - V     (= -(1 + V) under the flux condition)
///   u:  d/dt ||u||^2   + 2 ||u_xx||^2   = -2 beta h_xxx(0)   (= beta)
///   ux: d/dt ||u_x||^2 + 2 ||u_xxx||^2  = V beta^2
/// The time derivative is the difference quotient across the interval and
/// the other terms are averaged over its end points. The pointwise ids
/// evaluate r1 and r2 (see pointwise_residuals) at every record.
BalanceReport energy_balance(const Trace& trace, BalanceId id, const BalanceOptions& options = {});

/// log(coarse / fine) / log(refinement).
double observed_order(double coarse, double fine, double refinement = 2.0);

/// Attaches the observed order between two resolutions of the same balance.
BalanceReport with_order(BalanceReport fine, const BalanceReport& coarse, double refinement = 2.0);

/// d(beta)/dt at every record: centred differences inside, one-sided at ends.
std::vector<double> beta_rates(const Trace& trace);

struct PointwiseResiduals {
    double r1 = 0.0;  // u_xxxx(0) - V beta
    double r2 = 0.0;  // beta_dot + u_xxxxx(0) - V u_xx(0)
};

/// u_xx(0) = h_xxx(0) is the active third condition, -1/2 under the flux condition.
PointwiseResiduals pointwise_residuals(const Field& h, double V, double beta_dot, double third_bc_value = -0.5,
                                       const StencilSet& stencils = StencilSet::standard());

struct ExistenceOptions {
    double t_begin = 0.0;
    /// Absolute tolerance on the integrated h-energy identity.
    double tolerance = 1e-3;
    ThirdBoundaryCondition bc{};
};

/// Positivity budget of one a-priori estimate over the analysed window.
struct BudgetCheck {
    std::string name;
    bool hypothesis_holds = false;   // sign condition of the estimate holds on the whole window
    double hypothesis_value = 0.0;   // inf V, sup beta, or sup V (per estimate)
    std::optional<double> time_bound;
    double elapsed = 0.0;
    double final_budget = 0.0;
    bool consistent = true;          // elapsed <= time_bound and budget stayed non-negative
};

struct ExistenceReport {
    std::vector<double> times;
    std::vector<double> discrepancy;  // LHS - RHS of the integrated h-energy identity
    double max_discrepancy = 0.0;
    double tolerance = 0.0;
    bool identity_holds = true;
    double initial_energy = 0.0;
    BudgetCheck h_energy;   // inf V >= V0 > -1  =>  T* <= ||h||^2 / (1 + V0)
    BudgetCheck u_energy;   // sup beta <= beta0 < 0  =>  T* <= ||u||^2 / |beta0|
    BudgetCheck ux_energy;  // sup V <= V0 < 0, inf |beta| >= b0 > 0  =>  T* <= ||u_x||^2 / (|V0| b0^2)
};

ExistenceReport existence_bound_check(const Trace& trace, const ExistenceOptions& options = {});

}  // namespace contactline
