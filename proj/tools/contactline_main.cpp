#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contactline/commands.hpp"
#include "contactline/config.hpp"
#include "contactline/error.hpp"

namespace cl = contactline;

namespace {

void print_fits(const cl::RunSummary& s) {
    for (const auto& f : s.fits) {
        std::printf("  %-8s t0=%-12.8g normalized_rms=%.3g%s\n", std::string(cl::to_string(f.model)).c_str(), f.t0,
                    f.normalized_rms, f.singular ? "" : "  (non-singular)");
    }
    for (const auto& e : s.fit_errors) std::printf("  rejected %s\n", e.c_str());
}

void print_check(const cl::CheckResult& r) {
    const std::string label = r.id > 0 ? "[" + std::to_string(r.id) + "] " + r.name : r.name;
    std::printf("%s %-28s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", label.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moving contact line solver: evolution, self-similar profiles, blow-up fits, verification"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int sweep = 0;
    auto* simulate = app.add_subcommand("simulate", "Evolve the contact-line problem and write trace, snapshots, summary");
    simulate->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    simulate->add_option("--out", out_dir, "Output directory (overrides out_dir)");
    simulate->add_option("--resolution-sweep", sweep, "Number of refinement levels (>= 2)");

    cl::SelfSimilarRequest ss_req;
    std::string method = "heun", normalization = "farfield_decay", ss_out = "out";
    auto* selfsim = app.add_subcommand("selfsimilar", "Build and certify the self-similar profile");
    selfsim->add_option("--dz", ss_req.options.dz, "Integration step");
    selfsim->add_option("--z-min", ss_req.options.z_min, "Left end of the integration");
    selfsim->add_option("--z-max", ss_req.options.z_max, "Start of the backward integration (>= 10)");
    selfsim->add_option("--method", method, "heun or rk4")->check(CLI::IsMember({"heun", "rk4"}));
    selfsim->add_option("--normalization", normalization, "farfield_decay or flux_sign")
        ->check(CLI::IsMember({"farfield_decay", "flux_sign"}));
    selfsim->add_option("--t0", ss_req.options.t0, "Blow-up time");
    selfsim->add_option("--dz-sweep", ss_req.dz_sweep, "Number of dz levels for the z0 refinement table");
    selfsim->add_option("--out", ss_out, "Output directory");

    std::string trace_path, fit_out = "out";
    std::vector<std::string> model_names;
    std::vector<double> window;
    auto* fit = app.add_subcommand("fit", "Fit the blow-up laws to a trace file");
    fit->add_option("trace", trace_path, "Trace CSV file")->required();
    fit->add_option("--model", model_names, "log, sqrt, selfsim (repeatable; default all)")
        ->check(CLI::IsMember({"log", "sqrt", "selfsim"}));
    fit->add_option("--window", window, "Fit window t_a t_b")->expected(2);
    fit->add_option("--out", fit_out, "Output directory");

    cl::VerifyRequest verify_req;
    std::string verify_out = "out";
    double farfield_length = 0.0;
    auto* verify = app.add_subcommand("verify", "Run the verification suite");
    verify->add_option("--check", verify_req.options.only, "Run only the named checks (repeatable)");
    verify->add_option("--farfield-length", farfield_length, "Domain length for the far-field check");
    verify->add_option("--out", verify_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; every malformed command line exits 1.
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*simulate) {
            cl::RunConfig config = config_path.empty() ? cl::RunConfig{} : cl::load_config(config_path);
            if (!out_dir.empty()) config.out_dir = out_dir;
            const auto s = cl::cmd_simulate(config, sweep);
            std::printf("halt: %s after %zu steps, t = %.6g, V = %.6g, beta = %.6g\n",
                        std::string(cl::to_string(*s.halt)).c_str(), s.steps, s.final_record->t, s.final_record->V,
                        s.final_record->beta);
            print_fits(s);
            for (const auto& t : s.tables) {
                std::printf("%s:\n", t.name.c_str());
                cl::write_columns(std::cout, t);
            }
            std::printf("wrote %zu files under %s\n", s.files.size() + 1, config.out_dir.c_str());
        } else if (*selfsim) {
            ss_req.options.method = method == "rk4" ? cl::OdeMethod::rk4 : cl::OdeMethod::heun;
            ss_req.options.normalization =
                normalization == "flux_sign" ? cl::Normalization::flux_sign : cl::Normalization::farfield_decay;
            ss_req.out_dir = ss_out;
            const auto s = cl::cmd_selfsimilar(ss_req);
            std::printf("signs certified\n");
            for (const auto& [name, value] : s.constants) std::printf("  %-22s %.12g\n", name.c_str(), value);
            for (const auto& t : s.tables) cl::write_columns(std::cout, t);
        } else if (*fit) {
            cl::FitRequest req;
            req.trace_path = trace_path;
            req.out_dir = fit_out;
            if (!model_names.empty()) {
                req.models.clear();
                for (const auto& m : model_names) req.models.push_back(cl::rate_model_from_string(m));
            }
            if (window.size() == 2) req.window = std::pair{window[0], window[1]};
            const auto s = cl::cmd_fit(req);
            print_fits(s);
        } else if (*verify) {
            if (farfield_length > 0.0) verify_req.options.farfield_length = farfield_length;
            verify_req.options.progress = print_check;
            verify_req.out_dir = verify_out;
            const auto s = cl::cmd_verify(verify_req);
            for (const auto& r : s.checks) {
                if (!r.passed) {
                    std::fprintf(stderr, "verification failed: %s\n", r.name.c_str());
                    return cl::exit_code(cl::ErrorKind::verification);
                }
            }
        }
    } catch (const cl::ParseError& e) {
        std::fprintf(stderr, "error: %s", e.what());
        if (e.line() > 0) std::fprintf(stderr, " (line %zu)", e.line());
        std::fprintf(stderr, "\n");
        return cl::exit_code(e.kind());
    } catch (const cl::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return cl::exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
