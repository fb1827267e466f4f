#include "contactline/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "contactline/error.hpp"

namespace contactline {

using nlohmann::json;

namespace {

template <class Enum, std::size_t N>
Enum enum_from(const json& value, const std::string& key, const std::array<Enum, N>& options) {
    if (!value.is_string()) throw ParseError(key + ": expected a string", 0, key);
    const auto text = value.get<std::string>();
    for (Enum e : options) {
        if (to_string(e) == text) return e;
    }
    throw ParseError(key + ": unknown value '" + text + "'", 0, key);
}

double number(const json& value, const std::string& key) {
    if (!value.is_number()) throw ParseError(key + ": expected a number", 0, key);
    return value.get<double>();
}

long long integer(const json& value, const std::string& key) {
    if (!value.is_number_integer()) throw ParseError(key + ": expected an integer", 0, key);
    return value.get<long long>();
}

std::string text(const json& value, const std::string& key) {
    if (!value.is_string()) throw ParseError(key + ": expected a string", 0, key);
    return value.get<std::string>();
}

/// Line of byte offset `pos` (1-based).
std::size_t line_of(std::string_view doc, std::size_t pos) {
    pos = std::min(pos, doc.size());
    return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
    return scheme == Scheme::imex_affine ? "imex_affine" : "implicit_secant";
}

std::string_view to_string(InitialData initial) noexcept {
    return initial == InitialData::polynomial ? "polynomial" : "selfsimilar";
}

std::string_view to_string(ThirdBcMode mode) noexcept { return mode == ThirdBcMode::flux ? "flux" : "selfsim"; }

RunConfig parse_config(std::string_view doc) {
    RunConfig c;
    const bool blank = doc.find_first_not_of(" \t\r\n") == std::string_view::npos;
    if (blank) return c;

    json root;
    try {
        root = json::parse(doc.begin(), doc.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed config: ") + e.what(), line_of(doc, e.byte), {});
    }
    if (!root.is_object()) throw ParseError("config must be a JSON object", 1, {});

    // Errors about a key carry the line where the key first appears.
    auto key_line = [&](const std::string& key) {
        const auto pos = doc.find('"' + key + '"');
        return pos == std::string_view::npos ? std::size_t{0} : line_of(doc, pos);
    };
    for (const auto& [key, value] : root.items()) {
        try {
            if (key == "scheme") {
                c.scheme = enum_from(value, key, std::array{Scheme::imex_affine, Scheme::implicit_secant});
            } else if (key == "dt") {
                c.dt = number(value, key);
            } else if (key == "L") {
                c.L = number(value, key);
            } else if (key == "n") {
                c.n = integer(value, key);
            } else if (key == "beta0_init") {
                c.beta0_init = number(value, key);
            } else if (key == "sigma") {
                c.sigma = number(value, key);
            } else if (key == "initial") {
                c.initial = enum_from(value, key, std::array{InitialData::polynomial, InitialData::selfsimilar});
            } else if (key == "t0") {
                c.t0 = number(value, key);
            } else if (key == "third_bc") {
                c.third_bc = enum_from(value, key, std::array{ThirdBcMode::flux, ThirdBcMode::selfsim});
            } else if (key == "gamma0") {
                if (value.is_null()) {
                    c.gamma0.reset();
                } else {
                    c.gamma0 = number(value, key);
                }
            } else if (key == "farfield_value") {
                c.farfield_value = number(value, key);
            } else if (key == "farfield_tol") {
                c.farfield_tol = number(value, key);
            } else if (key == "t_max") {
                c.t_max = number(value, key);
            } else if (key == "beta_threshold") {
                c.beta_threshold = number(value, key);
            } else if (key == "v_max") {
                c.v_max = number(value, key);
            } else if (key == "trace_stride") {
                c.trace_stride = integer(value, key);
            } else if (key == "snapshot_times") {
                if (!value.is_array()) throw ParseError(key + ": expected an array of numbers", 0, key);
                c.snapshot_times.clear();
                for (const auto& v : value) c.snapshot_times.push_back(number(v, key));
            } else if (key == "out_dir") {
                c.out_dir = text(value, key);
            } else {
                throw ParseError("unknown key '" + key + "'", 0, key);
            }
        } catch (const ParseError& e) {
            throw ParseError(e.what(), key_line(key), key);
        }
    }

    try {
        c.validate();
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        const std::string key = what.substr(0, what.find(':'));
        throw ParseError(what, key_line(key), key);
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string emit_config(const RunConfig& c) {
    json j = json::object();
    j["scheme"] = to_string(c.scheme);
    j["dt"] = c.dt;
    j["L"] = c.L;
    j["n"] = c.n;
    j["beta0_init"] = c.beta0_init;
    j["sigma"] = c.sigma;
    j["initial"] = to_string(c.initial);
    j["t0"] = c.t0;
    j["third_bc"] = to_string(c.third_bc);
    j["gamma0"] = c.gamma0 ? json(*c.gamma0) : json(nullptr);
    j["farfield_value"] = c.farfield_value;
    j["farfield_tol"] = c.farfield_tol;
    j["t_max"] = c.t_max;
    j["beta_threshold"] = c.beta_threshold;
    j["v_max"] = c.v_max;
    j["trace_stride"] = c.trace_stride;
    j["snapshot_times"] = c.snapshot_times;
    j["out_dir"] = c.out_dir;
    return j.dump(2) + "\n";
}

}  // namespace contactline
