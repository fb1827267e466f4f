#include "contactline/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "contactline/config.hpp"
#include "contactline/error.hpp"

namespace contactline {

using nlohmann::json;

namespace {

constexpr std::size_t kTraceColumns = 12;

std::array<double, kTraceColumns> unpack(const TraceRecord& r) {
    return {r.t, r.V, r.beta, r.E_h, r.E_u, r.E_ux, r.D_h, r.D_u, r.D_ux, r.a4, r.a5, r.farfield};
}

TraceRecord pack(const std::array<double, kTraceColumns>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11]};
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    return out;
}

/// JSON has no inf/nan; they are written as strings.
json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

json to_json(const TraceRecord& r) {
    static constexpr std::array<const char*, kTraceColumns> names{
        "t", "V", "beta", "E_h", "E_u", "E_ux", "D_h", "D_u", "D_ux", "a4", "a5", "farfield"};
    json j = json::object();
    const auto v = unpack(r);
    for (std::size_t k = 0; k < kTraceColumns; ++k) j[names[k]] = number(v[k]);
    return j;
}

json to_json(const BalanceReport& b) {
    json j{{"id", to_string(b.id)}, {"max_residual", number(b.max_residual)}, {"intervals", b.residuals.size()}};
    j["observed_order"] = b.observed_order ? number(*b.observed_order) : json(nullptr);
    return j;
}

json to_json(const BudgetCheck& b) {
    json j{{"name", b.name},
           {"hypothesis_holds", b.hypothesis_holds},
           {"hypothesis_value", number(b.hypothesis_value)},
           {"elapsed", number(b.elapsed)},
           {"final_budget", number(b.final_budget)},
           {"consistent", b.consistent}};
    j["time_bound"] = b.time_bound ? number(*b.time_bound) : json(nullptr);
    return j;
}

json to_json(const RateFit& f) {
    json j{{"model", to_string(f.model)}, {"t0", number(f.t0)},          {"rms", number(f.rms)},
           {"normalized_rms", number(f.normalized_rms)}, {"singular", f.singular}, {"t_a", number(f.t_a)},
           {"t_b", number(f.t_b)},        {"points", f.points}};
    switch (f.model) {
        case RateModel::log:
            j["C1"] = number(f.C1);
            j["C2"] = number(f.C2);
            break;
        case RateModel::sqrt:
            j["a4"] = number(f.a4);
            j["a4_from_V"] = number(f.a4_from_V);
            break;
        case RateModel::selfsim: j["A"] = number(f.A); break;
    }
    return j;
}

json to_json(const Table& t) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::array();
        for (double v : row) r.push_back(number(v));
        rows.push_back(std::move(r));
    }
    return {{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}};
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw NumericalError("cannot format floating-point value");
    return std::string(buf.data(), end);
}

void write_trace(std::ostream& out, const Trace& trace) {
    out << trace_header << '\n';
    for (const auto& r : trace.records) {
        const auto v = unpack(r);
        for (std::size_t k = 0; k < kTraceColumns; ++k) {
            if (k) out << ',';
            out << format_double(v[k]);
        }
        out << '\n';
    }
}

Trace read_trace(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("trace file is empty", 1);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != trace_header) {
        throw ParseError("trace header must be '" + std::string(trace_header) + "'", lineno);
    }
    Trace trace;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, kTraceColumns> v{};
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t k = 0; k < kTraceColumns; ++k) {
            const auto [next, ec] = std::from_chars(p, end, v[k]);
            if (ec != std::errc{}) {
                throw ParseError("column " + std::to_string(k + 1) + " is not a number", lineno);
            }
            p = next;
            if (k + 1 < kTraceColumns) {
                if (p == end || *p != ',') {
                    throw ParseError("expected " + std::to_string(kTraceColumns) + " columns", lineno);
                }
                ++p;
            }
        }
        if (p != end) throw ParseError("trailing characters after column 12", lineno);
        trace.records.push_back(pack(v));
    }
    if (trace.empty()) throw ParseError("trace file has no records", lineno);
    try {
        trace.validate();
    } catch (const ValidationError& e) {
        throw ParseError(std::string("invalid trace: ") + e.what(), lineno);
    }
    return trace;
}

void save_trace(const std::filesystem::path& path, const Trace& trace) {
    auto out = open_out(path);
    write_trace(out, trace);
}

Trace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open trace file " + path.string());
    return read_trace(in);
}

void write_columns(std::ostream& out, const Table& table) {
    out << '#';
    for (const auto& c : table.columns) out << ' ' << c;
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw ValidationError("table row width does not match its header");
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ' ';
            out << format_double(row[k]);
        }
        out << '\n';
    }
}

void save_columns(const std::filesystem::path& path, const Table& table) {
    auto out = open_out(path);
    write_columns(out, table);
}

Table field_table(const Field& h) {
    Table t{"field", {"x", "h"}, {}};
    t.rows.reserve(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) t.rows.push_back({h.grid.x(i), h[i]});
    return t;
}

Table profile_table(const SelfSimilarProfile& p) {
    Table t{"profile", {"z", "G", "dG", "d2G"}, {}};
    t.rows.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) t.rows.push_back({p.z[i], p.G[i], p.G1[i], p.G2[i]});
    return t;
}

Table similarity_table(const SimilarityProfile& f) {
    Table t{"similarity", {"xi", "f"}, {}};
    for (std::size_t i = 0; i < f.xi().size(); ++i) t.rows.push_back({f.xi()[i], f.f()[i]});
    return t;
}

std::string summary_json(const RunSummary& s) {
    json j = json::object();
    j["command"] = s.command;
    if (s.config) j["config"] = json::parse(emit_config(*s.config));
    if (s.halt) j["halt"] = to_string(*s.halt);
    if (s.final_record) j["final"] = to_json(*s.final_record);
    j["steps"] = s.steps;
    j["wall_seconds"] = number(s.wall_seconds);
    if (!s.balances.empty()) {
        json b = json::array();
        for (const auto& r : s.balances) b.push_back(to_json(r));
        j["balances"] = std::move(b);
    }
    if (s.existence) {
        const auto& e = *s.existence;
        j["existence"] = {{"max_discrepancy", number(e.max_discrepancy)},
                          {"tolerance", number(e.tolerance)},
                          {"identity_holds", e.identity_holds},
                          {"initial_energy", number(e.initial_energy)},
                          {"budgets", json::array({to_json(e.h_energy), to_json(e.u_energy), to_json(e.ux_energy)})}};
    }
    if (!s.fits.empty() || !s.fit_errors.empty()) {
        json f = json::array();
        for (const auto& r : s.fits) f.push_back(to_json(r));
        j["fits"] = std::move(f);
        j["fit_errors"] = s.fit_errors;
    }
    if (s.certificate) {
        const auto& c = *s.certificate;
        j["certificate"] = {{"z0", number(c.z0)},
                            {"dG_at_z0", number(c.G1_at_z0)},
                            {"d2G_at_z0", number(c.G2_at_z0)},
                            {"min_G_right_of_z0", number(c.min_G_right_of_z0)},
                            {"decreasing_on_positive_z", c.decreasing_on_positive_z}};
    }
    if (!s.constants.empty()) {
        json c = json::object();
        for (const auto& [name, value] : s.constants) c[name] = number(value);
        j["constants"] = std::move(c);
    }
    if (!s.tables.empty()) {
        json t = json::array();
        for (const auto& table : s.tables) t.push_back(to_json(table));
        j["tables"] = std::move(t);
    }
    if (!s.checks.empty()) {
        json c = json::array();
        for (const auto& r : s.checks) {
            json m = json::object();
            for (const auto& [name, value] : r.metrics) m[name] = number(value);
            c.push_back({{"id", r.id},
                         {"name", r.name},
                         {"passed", r.passed},
                         {"detail", r.detail},
                         {"seconds", number(r.seconds)},
                         {"metrics", std::move(m)}});
        }
        j["checks"] = std::move(c);
    }
    if (!s.notes.empty()) j["notes"] = s.notes;
    j["files"] = s.files;
    return j.dump(2) + "\n";
}

void save_summary(const std::filesystem::path& path, const RunSummary& summary) {
    auto out = open_out(path);
    out << summary_json(summary);
}

}  // namespace contactline
