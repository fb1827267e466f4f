#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "contactline/commands.hpp"
#include "contactline/config.hpp"
#include "contactline/error.hpp"
#include "contactline/io.hpp"

using namespace contactline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("contactline_tests_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

RunConfig quick_config(const fs::path& out) {
    RunConfig c;
    c.n = 401;
    c.dt = 1e-4;
    c.t_max = 0.01;
    c.trace_stride = 5;
    c.snapshot_times = {0.005};
    c.out_dir = out.string();
    return c;
}

Trace sample_trace() {
    Trace tr;
    for (int k = 0; k < 5; ++k) {
        TraceRecord r;
        r.t = 0.1 * k;
        r.V = 1.0 / 3.0 + k;
        r.beta = -std::exp(-0.3 * k);
        r.E_h = 1.25 + 1e-17 * k;
        r.E_u = 0.1;
        r.E_ux = r.D_h = 2.0 / 7.0;
        r.D_u = 1e300;
        r.D_ux = 5e-324;
        r.a4 = -0.0;
        r.a5 = 123456789.123456789;
        r.farfield = 1e-12;
        tr.records.push_back(r);
    }
    return tr;
}

#ifdef CONTACTLINE_CLI_PATH
int run_cli(const std::string& args) {
    const std::string cmd = std::string(CONTACTLINE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_CASE("empty config is the default configuration") {
    CHECK(parse_config("") == RunConfig{});
    CHECK(parse_config("  \n ") == RunConfig{});
    CHECK(parse_config("{}") == RunConfig{});
}

TEST_CASE("config values are accepted and echoed") {
    const RunConfig c = parse_config(R"({"dt": 1e-4, "n": 4001, "L": 40})");
    CHECK(c.dt == 1e-4);
    CHECK(c.n == 4001);
    CHECK(c.L == 40.0);
    const auto echoed = nlohmann::json::parse(emit_config(c));
    CHECK(echoed.at("dt").get<double>() == 1e-4);
    CHECK(echoed.at("n").get<long long>() == 4001);
    CHECK(echoed.at("L").get<double>() == 40.0);
    CHECK(echoed.at("gamma0").is_null());
}

TEST_CASE("config errors name the key and its line") {
    auto parse_error = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ParseError& e) {
            return e;
        }
        FAIL("expected a parse error");
        return ParseError("unreachable");
    };
    const auto positive_beta = parse_error("{\n  \"dt\": 1e-4,\n  \"beta0_init\": 1.0\n}");
    CHECK(positive_beta.key() == "beta0_init");
    CHECK(positive_beta.line() == 3);
    CHECK(std::string(positive_beta.what()).find("beta0_init") != std::string::npos);

    CHECK(parse_error(R"({"timestep": 1e-4})").key() == "timestep");
    CHECK(parse_error(R"({"n": 10.5})").key() == "n");
    CHECK(parse_error(R"({"scheme": "rk4"})").key() == "scheme");
    CHECK(parse_error(R"({"dt": "small"})").key() == "dt");
    CHECK(parse_error(R"({"third_bc": "selfsim"})").key() == "gamma0");
    CHECK(parse_error("{\n  \"dt\": ,\n}").line() == 2);
    CHECK(parse_error("[1, 2]").line() == 1);
}

TEST_CASE("config round trip") {
    RunConfig c;
    c.scheme = Scheme::implicit_secant;
    c.dt = 3.3e-5;
    c.n = 1234;
    c.L = 17.25;
    c.initial = InitialData::selfsimilar;
    c.third_bc = ThirdBcMode::selfsim;
    c.gamma0 = 0.1 + 0.2;
    c.farfield_value = -0.5;
    c.snapshot_times = {0.1, 1.0 / 3.0};
    c.trace_stride = 7;
    c.out_dir = "runs/a b";
    CHECK(parse_config(emit_config(c)) == c);
    CHECK(parse_config(emit_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("trace files round trip bit for bit") {
    const Trace tr = sample_trace();
    std::stringstream ss;
    write_trace(ss, tr);
    const std::string text = ss.str();
    CHECK(text.rfind(std::string(trace_header) + "\n", 0) == 0);
    const Trace back = read_trace(ss);
    REQUIRE(back.size() == tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto& a = tr.records[k];
        const auto& b = back.records[k];
        CHECK(a.t == b.t);
        CHECK(a.V == b.V);
        CHECK(a.E_h == b.E_h);
        CHECK(a.D_u == b.D_u);
        CHECK(a.D_ux == b.D_ux);
        CHECK(std::signbit(b.a4));
        CHECK(a.a5 == b.a5);
    }
    std::stringstream again;
    write_trace(again, back);
    CHECK(again.str() == text);
}

TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-4) == "1e-04");
    CHECK(format_double(-0.0) == "-0");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("malformed trace files report the line") {
    auto line_of_error = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_trace(in);
        } catch (const ParseError& e) {
            return e.line();
        }
        return std::size_t{0};
    };
    const std::string header(trace_header);
    const std::string good = "0,1,-1,1,1,1,1,1,1,0,0,0\n";
    CHECK(line_of_error("") == 1);
    CHECK(line_of_error(header + "\n") == 1);
    CHECK(line_of_error("t,V\n" + good) == 1);
    CHECK(line_of_error(header + "\n" + good + "0.1,1,-1,1,1,1,1,1,1,0,0\n") == 3);
    CHECK(line_of_error(header + "\n" + good + "0.1,x,-1,1,1,1,1,1,1,0,0,0\n") == 3);
    CHECK(line_of_error(header + "\n" + good + "0.1,1,-1,1,1,1,1,1,1,0,0,0,9\n") == 3);
    CHECK(line_of_error(header + "\n" + good + good) > 0);
}

TEST_CASE("column tables carry a comment header") {
    Table t{"demo", {"x", "y"}, {{0.0, 1.0}, {0.5, 0.25}}};
    std::ostringstream out;
    write_columns(out, t);
    CHECK(out.str() == "# x y\n0 1\n0.5 0.25\n");
}

TEST_CASE("simulate writes trace, snapshots and a self-contained summary") {
    const fs::path dir = scratch("simulate");
    const RunSummary s = cmd_simulate(quick_config(dir));
    CHECK(fs::exists(dir / "trace.csv"));
    CHECK(fs::exists(dir / "snapshot_t0.005.dat"));
    REQUIRE(fs::exists(dir / "summary.json"));
    CHECK(s.halt == HaltReason::t_max);
    CHECK(s.steps == 100);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary.at("config").at("n").get<long long>() == 401);
    CHECK(summary.at("halt").get<std::string>() == "t_max");
    for (const auto& f : summary.at("files")) CHECK(fs::exists(f.get<std::string>()));
    CHECK(summary.at("balances").size() == 3);
    const Trace back = load_trace(dir / "trace.csv");
    CHECK(back.size() == 21);
}

TEST_CASE("identical configurations give byte-identical traces") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    cmd_simulate(quick_config(a));
    cmd_simulate(quick_config(b));
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
    CHECK(slurp(a / "snapshot_t0.005.dat") == slurp(b / "snapshot_t0.005.dat"));
}

TEST_CASE("selfsim mode without gamma0 is a configuration error") {
    RunConfig c = quick_config(scratch("nogamma"));
    c.third_bc = ThirdBcMode::selfsim;
    CHECK_THROWS_AS(cmd_simulate(c), ValidationError);
}

TEST_CASE("resolution sweep writes one trace per level and an order table") {
    const fs::path dir = scratch("sweep");
    RunConfig c = quick_config(dir);
    c.n = 201;
    c.dt = 4e-4;
    c.t_max = 0.02;
    c.trace_stride = 1;
    c.snapshot_times.clear();
    const RunSummary s = cmd_simulate(c, 3);
    for (int k = 0; k < 3; ++k) CHECK(fs::exists(dir / ("level_" + std::to_string(k)) / "trace.csv"));
    REQUIRE(fs::exists(dir / "orders.dat"));
    REQUIRE(s.tables.size() == 1);
    const Table& t = s.tables.front();
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[2][1] == 801.0);
    CHECK(t.rows[2][2] == doctest::Approx(2.5e-5));
    CHECK(std::isnan(t.rows[0].back()));
    CHECK(std::isfinite(t.rows[2].back()));
    CHECK_THROWS_AS(cmd_simulate(c, 1), ValidationError);
}

TEST_CASE("selfsimilar command writes the profile and constants") {
    const fs::path dir = scratch("selfsimilar");
    SelfSimilarRequest req;
    req.out_dir = dir;
    req.dz_sweep = 3;
    const RunSummary s = cmd_selfsimilar(req);
    REQUIRE(s.certificate.has_value());
    CHECK(s.certificate->z0 == doctest::Approx(-4.0826).epsilon(1e-4));
    const std::string g = slurp(dir / "G.dat");
    CHECK(g.rfind("# z G dG d2G\n", 0) == 0);
    CHECK(fs::exists(dir / "f.dat"));
    REQUIRE(fs::exists(dir / "z0_refinement.dat"));
    const Table& refine = s.tables.front();
    REQUIRE(refine.rows.size() == 3);
    CHECK(refine.rows[2][2] < 1e-6);

    SelfSimilarRequest bad;
    bad.out_dir = scratch("selfsimilar_short");
    bad.options.z_min = -1.0;
    CHECK_THROWS_AS(cmd_selfsimilar(bad), DomainTooShortError);
}

TEST_CASE("fit command ranks the generating law first") {
    const fs::path dir = scratch("fit");
    Trace tr;
    for (int k = 0; k < 300; ++k) {
        TraceRecord r;
        r.t = 0.5 + 0.49 * k / 299.0;
        r.V = 2.0 * std::log(1.0 - r.t) + 1.0;
        r.beta = 1.0 / r.V;
        r.E_h = 1.0;
        tr.records.push_back(r);
    }
    save_trace(dir / "log.csv", tr);
    FitRequest req;
    req.trace_path = dir / "log.csv";
    req.out_dir = dir;
    const RunSummary s = cmd_fit(req);
    REQUIRE_FALSE(s.fits.empty());
    CHECK(s.fits.front().model == RateModel::log);
    CHECK(s.fits.size() + s.fit_errors.size() == 3);
    CHECK(s.tables.front().rows.size() == s.fits.size());
    CHECK(fs::exists(dir / "summary.json"));

    write_file(dir / "empty.csv", "");
    req.trace_path = dir / "empty.csv";
    CHECK_THROWS_AS(cmd_fit(req), ParseError);
}

TEST_CASE("verification reports a corrupted stencil and a truncated domain by name") {
    StencilSet broken = StencilSet::build();
    broken.boundary[3].weights[1] *= 1.0 + 1e-9;
    VerifyOptions o;
    o.stencils = &broken;
    o.only = {"stencil_exactness"};
    const auto results = run_verification(o);
    REQUIRE(results.size() == 1);
    CHECK(results[0].name == "stencil_exactness");
    CHECK_FALSE(results[0].passed);

    const CheckResult far = check_farfield(5.0);
    CHECK(far.name == "farfield");
    CHECK_FALSE(far.passed);

    o.only = {"no_such_check"};
    CHECK_THROWS_AS(run_verification(o), ValidationError);
}

#ifdef CONTACTLINE_CLI_PATH
TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch("cli");
    write_file(dir / "bad.json", R"({"beta0_init": 1})");
    write_file(dir / "empty.csv", "");
    const std::string out = " --out " + (dir / "out").string();
    CHECK(run_cli("simulate --config " + (dir / "bad.json").string() + out) == 1);
    CHECK(run_cli("simulate --config " + (dir / "missing.json").string() + out) == 1);
    CHECK(run_cli("selfsimilar --z-min -1" + out) == 1);
    CHECK(run_cli("fit " + (dir / "empty.csv").string() + out) == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("selfsimilar" + out) == 0);
    CHECK(run_cli("verify --check stencil_exactness" + out) == 0);
    CHECK(run_cli("verify --check farfield --farfield-length 5" + out) == 3);
}
#endif
