#include "contactline/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contactline/error.hpp"

namespace contactline {

std::string_view to_string(HaltReason reason) noexcept {
    switch (reason) {
        case HaltReason::none: return "none";
        case HaltReason::t_max: return "t_max";
        case HaltReason::beta_threshold: return "beta_threshold";
        case HaltReason::v_threshold: return "v_threshold";
        case HaltReason::farfield: return "farfield";
    }
    return "none";
}

HaltReason halt_reason_from_string(std::string_view text) {
    for (auto r : {HaltReason::none, HaltReason::t_max, HaltReason::beta_threshold, HaltReason::v_threshold,
                   HaltReason::farfield}) {
        if (to_string(r) == text) return r;
    }
    throw ValidationError("unknown halt reason '" + std::string(text) + "'");
}

void Trace::validate() const {
    if (records.empty()) throw ValidationError("trace has no records");
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        if (k > 0 && !(r.t > records[k - 1].t)) {
            throw ValidationError("trace times not strictly increasing at record " + std::to_string(k));
        }
        for (double e : {r.E_h, r.E_u, r.E_ux, r.D_h, r.D_u, r.D_ux}) {
            if (!(e >= 0.0)) throw ValidationError("negative or NaN energy at record " + std::to_string(k));
        }
    }
}

Field compute_u(const Field& h, const StencilSet& stencils) {
    return Field(h.grid, apply_derivative(h, 1, stencils), h.time);
}

double farfield_monitor(const Field& h, double farfield_value, const StencilSet& stencils) {
    const auto n = h.size();
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    // Differentiate a slightly wider window so the first monitored nodes
    // are not evaluated with the shifted edge stencils.
    const std::size_t pad = 2;
    const std::size_t begin = n - tail >= pad ? n - tail - pad : 0;
    const auto window = h.view().subspan(begin);
    const double dx = h.grid.dx();
    const auto hx = apply_derivative(window, dx, 1, stencils);
    const auto hxx = apply_derivative(window, dx, 2, stencils);
    double worst = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) {
        const std::size_t w = i - begin;
        worst = std::max(worst, std::abs(h[i] - farfield_value) + std::abs(hx[w]) + std::abs(hxx[w]));
    }
    return worst;
}

TraceRecord measure(const Field& h, double V, double farfield_value, const StencilSet& stencils) {
    const auto& grid = h.grid;
    const auto u = apply_derivative(h, 1, stencils);
    const auto hxx = apply_derivative(h, 2, stencils);
    const auto hxxx = apply_derivative(h, 3, stencils);
    const auto hxxxx = apply_derivative(h, 4, stencils);
    TraceRecord r;
    r.t = h.time;
    r.V = V;
    r.beta = boundary_derivative(h, 2, stencils);
    r.E_h = l2_norm_sq(h.view(), grid);
    r.E_u = l2_norm_sq(u, grid);
    r.D_h = l2_norm_sq(hxx, grid);
    r.E_ux = r.D_h;
    r.D_u = l2_norm_sq(hxxx, grid);
    r.D_ux = l2_norm_sq(hxxxx, grid);
    r.a4 = boundary_derivative(h, 5, stencils);
    r.a5 = boundary_derivative(h, 6, stencils);
    r.farfield = farfield_monitor(h, farfield_value, stencils);
    return r;
}

std::optional<std::size_t> first_nonphysical(const Trace& trace, double threshold) {
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (trace.records[k].beta >= threshold) return k;
    }
    return std::nullopt;
}

std::string_view to_string(BalanceId id) noexcept {
    switch (id) {
        case BalanceId::h_energy: return "h-energy";
        case BalanceId::u_energy: return "u-energy";
        case BalanceId::ux_energy: return "ux-energy";
        case BalanceId::pointwise_1: return "pointwise-1";
        case BalanceId::pointwise_2: return "pointwise-2";
    }
    return "h-energy";
}

BalanceId balance_id_from_string(std::string_view name) {
    for (auto id : {BalanceId::h_energy, BalanceId::u_energy, BalanceId::ux_energy, BalanceId::pointwise_1,
                    BalanceId::pointwise_2}) {
        if (to_string(id) == name) return id;
    }
    throw ValidationError("unknown balance identity '" + std::string(name) + "'");
}

std::vector<double> beta_rates(const Trace& trace) {
    const auto& r = trace.records;
    const auto n = r.size();
    std::vector<double> rates(n, 0.0);
    if (n < 2) return rates;
    rates.front() = (r[1].beta - r[0].beta) / (r[1].t - r[0].t);
    rates.back() = (r[n - 1].beta - r[n - 2].beta) / (r[n - 1].t - r[n - 2].t);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        // Centred difference, exact for quadratics on uneven spacing.
        const double hm = r[k].t - r[k - 1].t;
        const double hp = r[k + 1].t - r[k].t;
        rates[k] = (hm * hm * r[k + 1].beta - hp * hp * r[k - 1].beta + (hp * hp - hm * hm) * r[k].beta) /
                   (hm * hp * (hm + hp));
    }
    return rates;
}

namespace {

struct Balance {
    double energy;
    double dissipation;
    double rhs;
};

Balance balance_terms(const TraceRecord& r, BalanceId id, const ThirdBoundaryCondition& bc) {
    const double wall = bc.value(r.V);  // h_xxx(0) = u_xx(0)
    switch (id) {
        case BalanceId::h_energy: return {r.E_h, r.D_h, 2.0 * wall - r.V};
        case BalanceId::u_energy: return {r.E_u, r.D_u, -2.0 * r.beta * wall};
        case BalanceId::ux_energy: return {r.E_ux, r.D_ux, r.V * r.beta * r.beta};
        default: break;
    }
    throw ValidationError("not an energy identity: " + std::string(to_string(id)));
}

}  // namespace

BalanceReport energy_balance(const Trace& trace, BalanceId id, const BalanceOptions& options) {
    BalanceReport report;
    report.id = id;
    const auto& recs = trace.records;
    const bool pointwise = id == BalanceId::pointwise_1 || id == BalanceId::pointwise_2;
    if (recs.size() < 3) throw ValidationError("energy_balance needs at least 3 trace records");

    if (pointwise) {
        const auto rates = beta_rates(trace);
        for (std::size_t k = 0; k < recs.size(); ++k) {
            const auto& r = recs[k];
            if (r.t < options.t_begin || r.t > options.t_end) continue;
            const double res = id == BalanceId::pointwise_1 ? r.a4 - r.V * r.beta
                                                            : rates[k] + r.a5 - r.V * options.bc.value(r.V);
            report.times.push_back(r.t);
            report.residuals.push_back(res);
        }
    } else {
        for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
            const auto& a = recs[k];
            const auto& b = recs[k + 1];
            if (a.t < options.t_begin || b.t > options.t_end) continue;
            const Balance ba = balance_terms(a, id, options.bc);
            const Balance bb = balance_terms(b, id, options.bc);
            const double dEdt = (bb.energy - ba.energy) / (b.t - a.t);
            const double res = dEdt + (ba.dissipation + bb.dissipation) - 0.5 * (ba.rhs + bb.rhs);
            report.times.push_back(0.5 * (a.t + b.t));
            report.residuals.push_back(res);
        }
    }
    for (double r : report.residuals) {
        if (!std::isfinite(r)) throw NumericalError("non-finite balance residual");
        report.max_residual = std::max(report.max_residual, std::abs(r));
    }
    return report;
}

double observed_order(double coarse, double fine, double refinement) {
    return std::log(coarse / fine) / std::log(refinement);
}

BalanceReport with_order(BalanceReport fine, const BalanceReport& coarse, double refinement) {
    fine.observed_order = observed_order(coarse.max_residual, fine.max_residual, refinement);
    return fine;
}

PointwiseResiduals pointwise_residuals(const Field& h, double V, double beta_dot, double third_bc_value,
                                       const StencilSet& stencils) {
    const double beta = boundary_derivative(h, 2, stencils);
    const double a4 = boundary_derivative(h, 5, stencils);
    const double a5 = boundary_derivative(h, 6, stencils);
    return {a4 - V * beta, beta_dot + a5 - V * third_bc_value};
}

ExistenceReport existence_bound_check(const Trace& trace, const ExistenceOptions& options) {
    ExistenceReport rep;
    rep.tolerance = options.tolerance;
    const auto& all = trace.records;
    std::vector<const TraceRecord*> recs;
    for (const auto& r : all) {
        if (r.t >= options.t_begin) recs.push_back(&r);
    }
    if (recs.empty()) throw ValidationError("existence_bound_check: no records after t_begin");

    const TraceRecord& first = *recs.front();
    rep.initial_energy = first.E_h;

    // Running integrals by the trapezoid rule in time.
    double int_dh = 0.0, int_rhs_h = 0.0, int_beta = 0.0, int_vb2 = 0.0;
    double inf_v = first.V, sup_v = first.V, sup_beta = first.beta, inf_abs_beta = std::abs(first.beta);
    double min_budget_h = first.E_h, min_budget_u = first.E_u, min_budget_ux = first.E_ux;
    auto rhs_h = [&](const TraceRecord& r) { return 2.0 * options.bc.value(r.V) - r.V; };
    auto rhs_u = [&](const TraceRecord& r) { return -2.0 * r.beta * options.bc.value(r.V); };

    rep.times.push_back(first.t);
    rep.discrepancy.push_back(0.0);
    for (std::size_t k = 1; k < recs.size(); ++k) {
        const auto& a = *recs[k - 1];
        const auto& b = *recs[k];
        const double dt = b.t - a.t;
        int_dh += 0.5 * dt * (a.D_h + b.D_h);
        int_rhs_h += 0.5 * dt * (rhs_h(a) + rhs_h(b));
        int_beta += 0.5 * dt * (rhs_u(a) + rhs_u(b));
        int_vb2 += 0.5 * dt * (a.V * a.beta * a.beta + b.V * b.beta * b.beta);
        const double lhs = b.E_h + 2.0 * int_dh;
        const double rhs = first.E_h + int_rhs_h;
        rep.times.push_back(b.t);
        rep.discrepancy.push_back(lhs - rhs);
        rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(lhs - rhs));
        inf_v = std::min(inf_v, b.V);
        sup_v = std::max(sup_v, b.V);
        sup_beta = std::max(sup_beta, b.beta);
        inf_abs_beta = std::min(inf_abs_beta, std::abs(b.beta));
        min_budget_h = std::min(min_budget_h, first.E_h + int_rhs_h);
        min_budget_u = std::min(min_budget_u, first.E_u + int_beta);
        min_budget_ux = std::min(min_budget_ux, first.E_ux + int_vb2);
    }
    rep.identity_holds = rep.max_discrepancy <= options.tolerance;
    const double elapsed = recs.back()->t - first.t;

    auto finish = [&](BudgetCheck& c, std::string name, bool hyp, double value, double bound, double final_budget,
                      double min_budget) {
        c.name = std::move(name);
        c.hypothesis_holds = hyp;
        c.hypothesis_value = value;
        c.elapsed = elapsed;
        c.final_budget = final_budget;
        c.consistent = min_budget >= -options.tolerance;
        if (hyp) {
            c.time_bound = bound;
            c.consistent = c.consistent && elapsed <= bound + options.tolerance;
        }
    };
    // The time bounds of the first two estimates use the flux condition h_xxx(0) = -1/2.
    const bool flux = options.bc.mode == ThirdBcMode::flux && options.bc.flux_target == -0.5;
    finish(rep.h_energy, "h-energy", flux && inf_v > -1.0, inf_v, first.E_h / (1.0 + inf_v), first.E_h + int_rhs_h,
           min_budget_h);
    finish(rep.u_energy, "u-energy", flux && sup_beta < 0.0, sup_beta, first.E_u / std::abs(sup_beta), first.E_u + int_beta,
           min_budget_u);
    finish(rep.ux_energy, "ux-energy", sup_v < 0.0 && inf_abs_beta > 0.0, sup_v,
           first.E_ux / (std::abs(sup_v) * inf_abs_beta * inf_abs_beta), first.E_ux + int_vb2, min_budget_ux);
    return rep;
}

}  // namespace contactline
