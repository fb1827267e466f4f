#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contactline/blowup_fit.hpp"
#include "contactline/diagnostics.hpp"
#include "contactline/pde_stepper.hpp"
#include "contactline/selfsimilar.hpp"
#include "contactline/verification.hpp"

namespace contactline {

inline constexpr std::string_view trace_header = "t,V,beta,E_h,E_u,E_ux,D_h,D_u,D_ux,a4,a5,farfield";

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

void write_trace(std::ostream& out, const Trace& trace);
/// Throws ParseError carrying the 1-based line number of the first bad line.
Trace read_trace(std::istream& in);
void save_trace(const std::filesystem::path& path, const Trace& trace);
Trace load_trace(const std::filesystem::path& path);

/// Named columns of equal length.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Whitespace-delimited columns under a '#'-prefixed header line.
void write_columns(std::ostream& out, const Table& table);
void save_columns(const std::filesystem::path& path, const Table& table);

Table field_table(const Field& h);
Table profile_table(const SelfSimilarProfile& profile);
Table similarity_table(const SimilarityProfile& f);

struct RunSummary {
    std::string command;
    std::optional<RunConfig> config;
    std::optional<HaltReason> halt;
    std::optional<TraceRecord> final_record;
    std::size_t steps = 0;
    double wall_seconds = 0.0;
    std::vector<BalanceReport> balances;
    std::optional<ExistenceReport> existence;
    std::vector<RateFit> fits;
    std::vector<std::string> fit_errors;
    std::optional<SignCertificate> certificate;
    std::vector<std::pair<std::string, double>> constants;
    std::vector<Table> tables;
    std::vector<CheckResult> checks;
    std::vector<std::string> notes;
    std::vector<std::string> files;
};

std::string summary_json(const RunSummary& summary);
void save_summary(const std::filesystem::path& path, const RunSummary& summary);

}  // namespace contactline
