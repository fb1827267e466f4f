#include "contactline/commands.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <string>

#include "contactline/config.hpp"
#include "contactline/error.hpp"

namespace contactline {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr std::array<BalanceId, 3> kEnergyIds{BalanceId::h_energy, BalanceId::u_energy, BalanceId::ux_energy};

std::string snapshot_name(double t) { return "snapshot_t" + format_double(t) + ".dat"; }

struct RunOutput {
    EvolveResult result;
    double seconds = 0.0;
};

RunOutput run_one(const RunConfig& config) {
    const auto start = Clock::now();
    EvolveOptions options;
    if (config.initial == InitialData::selfsimilar) {
        SelfSimilarOptions so;
        so.t0 = config.t0;
        const auto ss = build_selfsimilar(so);
        auto seed = selfsim_field(0.0, ss.profile, ss.f, config.grid());
        options.initial = std::move(seed.field);
        options.initial_V = seed.V;
    }
    RunOutput out{evolve(config, options), 0.0};
    out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
}

/// Writes the files of one run and fills the per-run summary fields.
RunSummary report_run(const RunConfig& config, const RunOutput& run) {
    const fs::path dir = config.out_dir;
    RunSummary s;
    s.command = "simulate";
    s.config = config;
    const Trace& trace = run.result.trace;
    s.halt = trace.halt;
    s.final_record = trace.back();
    s.steps = run.result.steps;
    s.wall_seconds = run.seconds;

    save_trace(dir / "trace.csv", trace);
    s.files.push_back((dir / "trace.csv").string());
    std::vector<double> times = config.snapshot_times;
    std::sort(times.begin(), times.end());
    for (std::size_t k = 0; k < run.result.snapshots.size(); ++k) {
        const auto path = dir / snapshot_name(times[k]);
        save_columns(path, field_table(run.result.snapshots[k]));
        s.files.push_back(path.string());
    }
    if (const auto bad = first_nonphysical(trace, config.beta_threshold)) {
        s.notes.push_back("records from t = " + format_double(trace.records[*bad].t) +
                          " on have beta >= threshold and are not physical");
    }

    if (trace.size() >= 3) {
        BalanceOptions bo;
        bo.bc = config.third_condition();
        for (BalanceId id : kEnergyIds) s.balances.push_back(energy_balance(trace, id, bo));
        ExistenceOptions eo;
        eo.bc = config.third_condition();
        s.existence = existence_bound_check(trace, eo);
    }

    const Window window = detect_window(trace);
    if (window.empty()) {
        s.notes.push_back("no singular window detected; rate fits skipped");
    } else {
        for (RateModel m : {RateModel::log, RateModel::sqrt, RateModel::selfsim}) {
            try {
                switch (m) {
                    case RateModel::log: s.fits.push_back(fit_log(trace, window)); break;
                    case RateModel::sqrt: s.fits.push_back(fit_sqrt(trace, window)); break;
                    case RateModel::selfsim: s.fits.push_back(fit_selfsim(trace, window)); break;
                }
            } catch (const Error& e) {
                s.fit_errors.push_back(std::string(to_string(m)) + ": " + e.what());
            }
        }
        if (!s.fits.empty()) s.fits = select_model(std::move(s.fits));
    }
    return s;
}

double max_in(const BalanceReport& r, double t_end) {
    double m = 0.0;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        if (r.times[k] <= t_end) m = std::max(m, std::abs(r.residuals[k]));
    }
    return m;
}

}  // namespace

RunSummary cmd_simulate(const RunConfig& config, int resolution_sweep) {
    config.validate();
    if (resolution_sweep < 0 || resolution_sweep == 1) {
        throw ValidationError("resolution-sweep: needs at least 2 levels");
    }
    if (resolution_sweep == 0) {
        const auto run = run_one(config);
        RunSummary s = report_run(config, run);
        save_summary(fs::path(config.out_dir) / "summary.json", s);
        return s;
    }

    const auto start = Clock::now();
    std::vector<RunConfig> levels;
    for (int k = 0; k < resolution_sweep; ++k) {
        RunConfig c = config;
        const long long scale = 1LL << k;
        c.n = (config.n - 1) * scale + 1;
        c.dt = config.dt / static_cast<double>(scale * scale);
        c.trace_stride = config.trace_stride * scale * scale;
        c.out_dir = (fs::path(config.out_dir) / ("level_" + std::to_string(k))).string();
        levels.push_back(std::move(c));
    }
    std::vector<std::future<RunOutput>> pending;
    for (const auto& c : levels) pending.push_back(std::async(std::launch::async, run_one, c));
    std::vector<RunOutput> runs;
    for (auto& f : pending) runs.push_back(f.get());

    RunSummary s;
    s.command = "simulate";
    s.config = config;
    double t_common = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) t_common = std::min(t_common, r.result.trace.back().t);

    Table table{"resolution_sweep", {"level", "n", "dt"}, {}};
    for (BalanceId id : kEnergyIds) table.columns.push_back(std::string(to_string(id)) + "_max");
    for (BalanceId id : kEnergyIds) table.columns.push_back(std::string(to_string(id)) + "_order");
    std::vector<double> previous;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        RunSummary level = report_run(levels[k], runs[k]);
        save_summary(fs::path(levels[k].out_dir) / "summary.json", level);
        s.files.insert(s.files.end(), level.files.begin(), level.files.end());
        s.files.push_back((fs::path(levels[k].out_dir) / "summary.json").string());
        s.steps += level.steps;

        std::vector<double> row{static_cast<double>(k), static_cast<double>(levels[k].n), levels[k].dt};
        std::vector<double> maxima;
        for (const auto& b : level.balances) maxima.push_back(max_in(b, t_common));
        if (maxima.size() != kEnergyIds.size()) throw NumericalError("sweep level produced too few records");
        row.insert(row.end(), maxima.begin(), maxima.end());
        for (std::size_t i = 0; i < maxima.size(); ++i) {
            row.push_back(previous.empty() ? std::nan("") : std::log2(previous[i] / maxima[i]));
        }
        previous = maxima;
        table.rows.push_back(std::move(row));
    }
    s.notes.push_back("balance maxima taken over t <= " + format_double(t_common) +
                      ", the shortest run of the sweep; each level halves dx and quarters dt");
    const auto table_path = fs::path(config.out_dir) / "orders.dat";
    save_columns(table_path, table);
    s.files.push_back(table_path.string());
    s.tables.push_back(std::move(table));
    s.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    save_summary(fs::path(config.out_dir) / "summary.json", s);
    return s;
}

RunSummary cmd_selfsimilar(const SelfSimilarRequest& req) {
    const auto start = Clock::now();
    if (req.dz_sweep < 0 || req.dz_sweep == 1) throw ValidationError("dz sweep needs at least 2 levels");
    const auto ss = build_selfsimilar(req.options);
    const auto& p = ss.profile;

    RunSummary s;
    s.command = "selfsimilar";
    s.certificate = ss.certificate;
    s.constants = {{"z0", p.z0},
                   {"dG_at_z0", p.G1_at_z0},
                   {"d2G_at_z0", p.G2_at_z0},
                   {"C", p.C},
                   {"tail_integral", p.tail_integral},
                   {"t0", p.t0},
                   {"V0", p.V0},
                   {"t0_V0", p.t0 * p.V0},
                   {"gamma0", p.gamma0},
                   {"f_dd_at_0", ss.f.value(0.0, 2)},
                   {"f_ddd_at_0", ss.f.value(0.0, 3)}};
    {
        // The other normalization, reported side by side.
        SelfSimilarProfile other = p;
        const Normalization alt = p.normalization == Normalization::farfield_decay ? Normalization::flux_sign
                                                                                   : Normalization::farfield_decay;
        normalize(other, alt, req.options.flux_f3);
        set_blowup_time(other, p.t0);
        const std::string tag = alt == Normalization::flux_sign ? "_flux_sign" : "_farfield_decay";
        s.constants.push_back({"C" + tag, other.C});
        s.constants.push_back({"gamma0" + tag, other.gamma0});
    }

    const fs::path dir = req.out_dir;
    save_columns(dir / "G.dat", profile_table(p));
    save_columns(dir / "f.dat", similarity_table(ss.f));
    s.files = {(dir / "G.dat").string(), (dir / "f.dat").string()};

    if (req.dz_sweep >= 2) {
        Table table{"z0_refinement", {"dz", "z0", "difference", "ratio"}, {}};
        double prev_z0 = std::nan(""), prev_diff = std::nan("");
        for (int k = 0; k < req.dz_sweep; ++k) {
            SelfSimilarOptions o = req.options;
            o.dz = req.options.dz / std::ldexp(1.0, k);
            SelfSimilarProfile q = integrate_ode(o.z_max, o.z_min, o.dz, o.method);
            const double z0 = find_z0(q);
            const double diff = std::abs(z0 - prev_z0);
            table.rows.push_back({o.dz, z0, diff, prev_diff / diff});
            prev_diff = diff;
            prev_z0 = z0;
        }
        save_columns(dir / "z0_refinement.dat", table);
        s.files.push_back((dir / "z0_refinement.dat").string());
        s.tables.push_back(std::move(table));
    }
    s.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    save_summary(dir / "summary.json", s);
    return s;
}

RunSummary cmd_fit(const FitRequest& req) {
    const auto start = Clock::now();
    if (req.models.empty()) throw ValidationError("fit: no models requested");
    const Trace trace = load_trace(req.trace_path);
    RunSummary s;
    s.command = "fit";
    s.final_record = trace.back();

    Window window;
    if (req.window) {
        window = window_between(trace, req.window->first, req.window->second);
    } else {
        window = detect_window(trace);
        if (window.empty()) {
            window = Window{0, trace.size()};
            s.notes.push_back("no singular window detected; fitting the whole trace");
        }
    }
    for (RateModel m : req.models) {
        try {
            switch (m) {
                case RateModel::log: s.fits.push_back(fit_log(trace, window)); break;
                case RateModel::sqrt: s.fits.push_back(fit_sqrt(trace, window)); break;
                case RateModel::selfsim: s.fits.push_back(fit_selfsim(trace, window)); break;
            }
        } catch (const ConstraintViolation& e) {
            s.fit_errors.push_back(std::string(to_string(m)) + ": " + e.what());
        }
    }
    if (s.fits.empty()) throw ConstraintViolation("fit: every requested model was rejected");
    s.fits = select_model(std::move(s.fits));

    Table table{"fits", {"rank", "t0", "rms", "normalized_rms", "p1", "p2"}, {}};
    for (std::size_t k = 0; k < s.fits.size(); ++k) {
        const auto& f = s.fits[k];
        const double p1 = f.model == RateModel::log ? f.C1 : f.model == RateModel::sqrt ? f.a4 : f.A;
        const double p2 = f.model == RateModel::log ? f.C2 : f.model == RateModel::sqrt ? f.a4_from_V : std::nan("");
        table.rows.push_back({static_cast<double>(k + 1), f.t0, f.rms, f.normalized_rms, p1, p2});
    }
    s.tables.push_back(std::move(table));
    s.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const fs::path dir = req.out_dir;
    s.files.push_back((dir / "summary.json").string());
    save_summary(dir / "summary.json", s);
    return s;
}

RunSummary cmd_verify(const VerifyRequest& req) {
    const auto start = Clock::now();
    RunSummary s;
    s.command = "verify";
    s.checks = run_verification(req.options);
    s.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const fs::path dir = req.out_dir;
    s.files.push_back((dir / "summary.json").string());
    save_summary(dir / "summary.json", s);
    return s;
}

}  // namespace contactline
