#include "contactline/selfsimilar.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contactline/error.hpp"

namespace contactline {

namespace {

// exponent coefficient 3 / 2^{8/3}
const double kWkbRate = 3.0 / std::exp2(8.0 / 3.0);

struct State {
    double G, G1, G2;
};

State rhs(double z, const State& y) { return {y.G1, y.G2, -0.25 * z * y.G}; }

State axpy(const State& y, double h, const State& k) { return {y.G + h * k.G, y.G1 + h * k.G1, y.G2 + h * k.G2}; }

State heun_step(double z, const State& y, double h) {
    const State k1 = rhs(z, y);
    const State k2 = rhs(z + h, axpy(y, h, k1));
    return {y.G + 0.5 * h * (k1.G + k2.G), y.G1 + 0.5 * h * (k1.G1 + k2.G1), y.G2 + 0.5 * h * (k1.G2 + k2.G2)};
}

State rk4_step(double z, const State& y, double h) {
    const State k1 = rhs(z, y);
    const State k2 = rhs(z + 0.5 * h, axpy(y, 0.5 * h, k1));
    const State k3 = rhs(z + 0.5 * h, axpy(y, 0.5 * h, k2));
    const State k4 = rhs(z + h, axpy(y, h, k3));
    const double s = h / 6.0;
    return {y.G + s * (k1.G + 2 * k2.G + 2 * k3.G + k4.G), y.G1 + s * (k1.G1 + 2 * k2.G1 + 2 * k3.G1 + k4.G1),
            y.G2 + s * (k1.G2 + 2 * k2.G2 + 2 * k3.G2 + k4.G2)};
}

/// sum_{k >= m} d[k] delta^{k-m} / (k-m)!
double taylor(const std::array<double, taylor_order + 1>& d, double delta, int m) {
    double acc = 0.0;
    for (int k = taylor_order; k >= m; --k) acc = acc * delta / (k - m + 1) + d[k];
    return acc;
}

/// int_a^b G over one cell, trapezoid with Euler-Maclaurin end corrections.
double cell_integral(double h, const std::array<double, taylor_order + 1>& da,
                     const std::array<double, taylor_order + 1>& db) {
    return 0.5 * h * (da[0] + db[0]) - h * h / 12.0 * (db[1] - da[1]) + std::pow(h, 4) / 720.0 * (db[3] - da[3]);
}

}  // namespace

TailValues wkb_tail(double z) {
    if (!(z >= wkb_min_z)) {
        throw ValidationError("wkb_tail: z = " + std::to_string(z) + " is below the asymptotic threshold " +
                              std::to_string(wkb_min_z));
    }
    const double G = std::exp(-kWkbRate * std::pow(z, 4.0 / 3.0)) / std::cbrt(z);
    const double L1 = -1.0 / (3.0 * z) - (4.0 * kWkbRate / 3.0) * std::cbrt(z);
    const double L1p = 1.0 / (3.0 * z * z) - (4.0 * kWkbRate / 9.0) / std::cbrt(z * z);
    return {G, G * L1, G * (L1 * L1 + L1p)};
}

std::array<double, taylor_order + 1> ode_derivatives(double z, double G, double G1, double G2) {
    std::array<double, taylor_order + 1> d{};
    d[0] = G;
    d[1] = G1;
    d[2] = G2;
    // (z G)^{(m)} = z G^{(m)} + m G^{(m-1)}
    for (int m = 3; m <= taylor_order; ++m) d[m] = -0.25 * (z * d[m - 3] + (m > 3 ? (m - 3) * d[m - 4] : 0.0));
    return d;
}

std::size_t SelfSimilarProfile::nearest(double at) const {
    if (z.empty()) throw ValidationError("empty self-similar profile");
    const double pos = std::round((at - z.front()) / dz);
    return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(z.size() - 1)));
}

std::array<double, taylor_order + 1> SelfSimilarProfile::derivatives_at(double at) const {
    const auto j = nearest(at);
    const auto d = ode_derivatives(z[j], G[j], G1[j], G2[j]);
    const double delta = at - z[j];
    std::array<double, taylor_order + 1> out{};
    for (int m = 0; m <= taylor_order; ++m) out[m] = taylor(d, delta, m);
    return out;
}

SelfSimilarProfile integrate_ode(double z_max, double z_min, double dz, OdeMethod method) {
    if (!(z_max >= wkb_min_z)) throw ValidationError("integrate_ode: z_max must be at least 10");
    return integrate_ode_from(wkb_tail(z_max), z_max, z_min, dz, method);
}

SelfSimilarProfile integrate_ode_from(const TailValues& start, double z_max, double z_min, double dz,
                                      OdeMethod method) {
    if (!(z_min < wkb_min_z) || !(z_min < z_max)) throw ValidationError("integrate_ode: z_min must lie below z_max");
    if (!(dz > 0.0)) throw ValidationError("integrate_ode: dz must be positive");
    const auto steps = static_cast<std::size_t>(std::llround((z_max - z_min) / dz));
    if (steps < 2) throw ValidationError("integrate_ode: dz too large for the interval");

    SelfSimilarProfile p;
    p.method = method;
    p.dz = (z_max - z_min) / static_cast<double>(steps);
    p.z.resize(steps + 1);
    p.G.resize(steps + 1);
    p.G1.resize(steps + 1);
    p.G2.resize(steps + 1);

    State y{start.G, start.G1, start.G2};
    const double h = -p.dz;
    for (std::size_t k = 0; k <= steps; ++k) {
        const std::size_t j = steps - k;  // store ascending
        const double z = k == 0 ? z_max : z_max + static_cast<double>(k) * h;
        p.z[j] = k == steps ? z_min : z;
        p.G[j] = y.G;
        p.G1[j] = y.G1;
        p.G2[j] = y.G2;
        if (!std::isfinite(y.G) || !std::isfinite(y.G1) || !std::isfinite(y.G2)) {
            throw NumericalError("integrate_ode: non-finite solution at z = " + std::to_string(z));
        }
        if (k < steps) y = method == OdeMethod::heun ? heun_step(z, y, h) : rk4_step(z, y, h);
    }
    return p;
}

double find_z0(SelfSimilarProfile& p) {
    if (p.size() < 2) throw ValidationError("find_z0: empty profile");
    // Walk left from the last node below zero until G changes sign.
    std::size_t k = p.size();
    for (std::size_t j = p.size(); j-- > 0;) {
        if (p.z[j] < 0.0) {
            k = j;
            break;
        }
    }
    if (k == p.size()) throw DomainTooShortError("find_z0: profile has no negative z; lower z_min");
    for (;; --k) {
        if (p.G[k] <= 0.0) break;
        if (k == 0) {
            throw DomainTooShortError("find_z0: G has no sign change on [" + std::to_string(p.z_min()) +
                                      ", 0]; lower z_min");
        }
    }
    const std::size_t right = k + 1;
    const auto d = ode_derivatives(p.z[right], p.G[right], p.G1[right], p.G2[right]);
    auto G_at = [&](double at) { return taylor(d, at - p.z[right], 0); };

    double lo = p.z[k], hi = p.z[right];
    double g_lo = G_at(lo), g_hi = G_at(hi);
    double z0 = p.G[k] == 0.0 ? lo : 0.5 * (lo + hi);
    if (p.G[k] != 0.0) {
        // Illinois-modified regula falsi; stops on |G| <= 1e-12 or a collapsed bracket.
        int side = 0;
        for (int it = 0; it < 200; ++it) {
            z0 = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
            if (!(z0 > lo && z0 < hi)) z0 = 0.5 * (lo + hi);
            const double g = G_at(z0);
            if (std::abs(g) <= 1e-12 || hi - lo <= 4e-16 * std::abs(z0)) break;
            if ((g > 0.0) == (g_hi > 0.0)) {
                hi = z0;
                g_hi = g;
                if (side == -1) g_lo *= 0.5;
                side = -1;
            } else {
                lo = z0;
                g_lo = g;
                if (side == 1) g_hi *= 0.5;
                side = 1;
            }
        }
    }
    p.z0 = z0;
    p.G1_at_z0 = taylor(d, z0 - p.z[right], 1);
    p.G2_at_z0 = taylor(d, z0 - p.z[right], 2);
    return z0;
}

SignCertificate certify_signs(const SelfSimilarProfile& p) {
    if (!std::isfinite(p.z0)) throw ValidationError("certify_signs: z0 has not been located");
    if (!(p.z0 < 0.0)) throw CertificationError("z0 = " + std::to_string(p.z0) + " is not negative");
    SignCertificate c{p.z0, p.G1_at_z0, p.G2_at_z0, std::numeric_limits<double>::infinity(), true};
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p.z[j] <= p.z0) continue;
        c.min_G_right_of_z0 = std::min(c.min_G_right_of_z0, p.G[j]);
        if (!(p.G[j] > 0.0)) {
            throw CertificationError("G is not positive at z = " + std::to_string(p.z[j]) + " right of z0");
        }
        if (j > 0 && p.z[j - 1] >= 0.0 && !(p.G[j] < p.G[j - 1])) {
            c.decreasing_on_positive_z = false;
            throw CertificationError("G is not decreasing at z = " + std::to_string(p.z[j]));
        }
    }
    if (!(p.G1_at_z0 > 0.0)) throw CertificationError("G'(z0) = " + std::to_string(p.G1_at_z0) + " is not positive");
    if (!(p.G2_at_z0 < 0.0)) throw CertificationError("G''(z0) = " + std::to_string(p.G2_at_z0) + " is not negative");
    return c;
}

namespace {

/// int_{z0}^{z_j} G for every node j right of z0 (index `first` onward).
std::vector<double> cumulative_from_z0(const SelfSimilarProfile& p, std::size_t first) {
    const auto d0 = ode_derivatives(p.z0, 0.0, p.G1_at_z0, p.G2_at_z0);
    std::vector<double> acc(p.size() - first);
    auto prev = d0;
    double prev_z = p.z0;
    double sum = 0.0;
    for (std::size_t j = first; j < p.size(); ++j) {
        const auto dj = ode_derivatives(p.z[j], p.G[j], p.G1[j], p.G2[j]);
        sum += cell_integral(p.z[j] - prev_z, prev, dj);
        acc[j - first] = sum;
        prev = dj;
        prev_z = p.z[j];
    }
    return acc;
}

std::size_t first_right_of_z0(const SelfSimilarProfile& p) {
    if (!std::isfinite(p.z0)) throw ValidationError("z0 has not been located");
    const auto it = std::upper_bound(p.z.begin(), p.z.end(), p.z0);
    if (it == p.z.end()) throw ValidationError("no samples right of z0");
    return static_cast<std::size_t>(it - p.z.begin());
}

}  // namespace

void normalize(SelfSimilarProfile& p, Normalization mode, double flux_f3) {
    const std::size_t first = first_right_of_z0(p);
    const double g_end = p.G.back();
    const double g1_end = p.G1.back();
    p.normalization = mode;
    if (mode == Normalization::flux_sign) {
        if (!(flux_f3 < 0.0)) throw ValidationError("flux_sign normalization needs a negative f'''(0)");
        if (!(p.G2_at_z0 < 0.0)) throw CertificationError("flux_sign normalization needs G''(z0) < 0");
        p.C = flux_f3 / p.G2_at_z0;
        p.tail_integral = g1_end < 0.0 ? -g_end * g_end / g1_end : 0.0;
        return;
    }
    const double body = cumulative_from_z0(p, first).back();
    if (!(g_end > 0.0) || !(g1_end < 0.0)) {
        throw ValidationError("far-field normalization: sampled tail of G is not decaying at z_max");
    }
    // Leading Laplace estimate of int_{z_max}^inf G.
    const double tail = -g_end * g_end / g1_end;
    if (!(body > 0.0) || !(tail <= 1e-6 * body)) {
        throw ValidationError("far-field normalization: tail beyond z_max is not negligible; raise z_max");
    }
    p.tail_integral = tail;
    p.C = -1.0 / (body + tail);
}

void set_blowup_time(SelfSimilarProfile& p, double t0) {
    if (!(t0 > 0.0)) throw ValidationError("blow-up time t0 must be positive");
    if (!std::isfinite(p.z0) || !std::isfinite(p.C)) throw ValidationError("profile needs z0 and C first");
    p.t0 = t0;
    p.V0 = -p.z0 / (4.0 * t0);
    p.gamma0 = p.C * p.G2_at_z0 / (t0 * p.V0);
}

SimilarityProfile::SimilarityProfile(const SelfSimilarProfile& p) : z0_(p.z0), C_(p.C) {
    if (!std::isfinite(p.C)) throw ValidationError("reconstruct_f: profile is not normalized");
    const std::size_t first = first_right_of_z0(p);
    const auto integral = cumulative_from_z0(p, first);
    const std::size_t m = integral.size() + 1;
    xi_.reserve(m);
    f_.reserve(m);
    xi_.push_back(0.0);
    f_.push_back(1.0);
    G_.push_back(0.0);
    G1_.push_back(p.G1_at_z0);
    G2_.push_back(p.G2_at_z0);
    for (std::size_t j = first; j < p.size(); ++j) {
        xi_.push_back(p.z[j] - p.z0);
        f_.push_back(1.0 + p.C * integral[j - first]);
        G_.push_back(p.G[j]);
        G1_.push_back(p.G1[j]);
        G2_.push_back(p.G2[j]);
    }
}

double SimilarityProfile::value(double xi, int derivative) const {
    if (!(xi >= 0.0)) throw ValidationError("similarity variable must be non-negative");
    if (derivative < 0 || derivative > taylor_order) throw ValidationError("derivative order out of range");
    if (xi >= xi_.back()) return derivative == 0 ? f_.back() : 0.0;
    // Nearest sample; the first gap [0, xi_1] is shorter than the rest.
    auto it = std::lower_bound(xi_.begin(), xi_.end(), xi);
    std::size_t j = static_cast<std::size_t>(it - xi_.begin());
    if (j > 0 && (j == xi_.size() || xi - xi_[j - 1] < xi_[j] - xi)) --j;
    const auto d = ode_derivatives(xi_[j] + z0_, G_[j], G1_[j], G2_[j]);
    const double delta = xi - xi_[j];
    // f^(k) = C G^(k-1) for k >= 1.
    std::array<double, taylor_order + 1> fd{};
    fd[0] = f_[j];
    for (int k = 1; k <= taylor_order; ++k) fd[k] = C_ * d[k - 1];
    return taylor(fd, delta, derivative);
}

SimilarityProfile reconstruct_f(SelfSimilarProfile& profile, Normalization mode, double flux_f3) {
    normalize(profile, mode, flux_f3);
    return SimilarityProfile(profile);
}

SelfSimilarState selfsim_field(double t, const SelfSimilarProfile& profile, const SimilarityProfile& f,
                               const Grid& grid) {
    if (!std::isfinite(profile.t0)) throw ValidationError("selfsim_field: blow-up time not set");
    if (!(t >= 0.0) || !(t < profile.t0)) {
        throw ValidationError("selfsim_field: t = " + std::to_string(t) + " outside [0, t0)");
    }
    const double tau = profile.t0 - t;
    const double s = std::sqrt(std::sqrt(tau));
    std::vector<double> h(grid.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = f.value(grid.x(i) / s);
    const double V = profile.t0 * profile.V0 / (s * s * s);
    return {Field(grid, std::move(h), t), V};
}

SelfSimilarSolution build_selfsimilar(const SelfSimilarOptions& o) {
    SelfSimilarProfile p = integrate_ode(o.z_max, o.z_min, o.dz, o.method);
    find_z0(p);
    const SignCertificate cert = certify_signs(p);
    SimilarityProfile f = reconstruct_f(p, o.normalization, o.flux_f3);
    set_blowup_time(p, o.t0);
    return {std::move(p), cert, std::move(f)};
}

}  // namespace contactline
