#pragma once

#include <array>
#include <limits>
#include <vector>

#include "contactline/grid.hpp"

namespace contactline {

/// Self-similar blow-up h(x, t) = f(x / (t0 - t)^{1/4}), V(t) = t0 V0 / (t0 - t)^{3/4}.
/// With g = f' and z = xi + z0 the profile equation reduces to
///   4 g''' + z g = 0,  g(z0) = 0,  g -> 0 as z -> inf,
/// whose decaying solution G is unique up to scale and positive on (z0, inf).

struct TailValues {
    double G;
    double G1;
    double G2;
};

/// Leading WKB term G = z^{-1/3} exp(-3 z^{4/3} / 2^{8/3}) and its first two
/// derivatives. Valid for z >= 10; throws ValidationError below.
TailValues wkb_tail(double z);

inline constexpr double wkb_min_z = 10.0;
inline constexpr int taylor_order = 8;

enum class OdeMethod { heun, rk4 };
enum class Normalization {
    flux_sign,       // C > 0 with f'''(0) = C G''(z0) set to a prescribed negative value
    farfield_decay,  // C = -1 / int_{z0}^inf G, so f -> 0 at infinity
};

/// G^(m)(z) for m = 0..taylor_order from (G, G', G'') by differentiating the ODE.
std::array<double, taylor_order + 1> ode_derivatives(double z, double G, double G1, double G2);

struct SelfSimilarProfile {
    static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<double> z;  // ascending
    std::vector<double> G, G1, G2;
    double dz = 0.0;
    OdeMethod method = OdeMethod::heun;

    double z0 = nan;
    double G1_at_z0 = nan;
    double G2_at_z0 = nan;

    Normalization normalization = Normalization::farfield_decay;
    double C = nan;
    double tail_integral = nan;  // int_{z_max}^inf G, leading order
    double t0 = nan;
    double V0 = nan;
    double gamma0 = nan;

    std::size_t size() const noexcept { return z.size(); }
    double z_min() const { return z.front(); }
    double z_max() const { return z.back(); }
    std::size_t nearest(double at) const;

    /// Local Taylor expansion about the nearest sample.
    std::array<double, taylor_order + 1> derivatives_at(double at) const;
};

/// Integrates (G, G', G'') backward from wkb_tail(z_max) to z_min.
SelfSimilarProfile integrate_ode(double z_max = 20.0, double z_min = -15.0, double dz = 1e-3,
                                 OdeMethod method = OdeMethod::heun);

/// Same integration from caller-supplied values at z_max.
SelfSimilarProfile integrate_ode_from(const TailValues& start, double z_max, double z_min, double dz,
                                      OdeMethod method = OdeMethod::heun);

/// Largest negative zero of G, refined to |G| <= 1e-12. Stores z0, G'(z0)
/// and G''(z0) in the profile. Throws DomainTooShortError when G has no
/// sign change on [z_min, 0].
double find_z0(SelfSimilarProfile& profile);

struct SignCertificate {
    double z0;
    double G1_at_z0;
    double G2_at_z0;
    double min_G_right_of_z0;
    bool decreasing_on_positive_z;
};

/// Checks z0 < 0, G > 0 on (z0, z_max], G decreasing on [0, z_max],
/// G'(z0) > 0 and G''(z0) < 0. Throws CertificationError on any violation.
SignCertificate certify_signs(const SelfSimilarProfile& profile);

/// Fixes C. flux_f3 is the prescribed f'''(0) for the flux_sign mode.
void normalize(SelfSimilarProfile& profile, Normalization mode, double flux_f3 = -0.5);

/// V0 = -z0 / (4 t0) and gamma0 = C G''(z0) / (t0 V0); t0 V0 and gamma0 do not depend on t0.
void set_blowup_time(SelfSimilarProfile& profile, double t0);

/// f(xi) = 1 + C int_0^xi G(s + z0) ds on xi >= 0, sampled at xi = 0 and at
/// every profile node right of z0. Evaluation between samples uses Taylor
/// series whose coefficients come from the ODE, so derivatives of any order
/// are available.
class SimilarityProfile {
public:
    SimilarityProfile(const SelfSimilarProfile& profile);

    double xi_max() const noexcept { return xi_.back(); }
    double C() const noexcept { return C_; }
    const std::vector<double>& xi() const noexcept { return xi_; }
    const std::vector<double>& f() const noexcept { return f_; }

    /// d^m f / d xi^m at xi >= 0; beyond xi_max the profile is held at its last value.
    double value(double xi, int derivative = 0) const;

private:
    std::vector<double> xi_, f_, G_, G1_, G2_;
    double z0_, C_;
};

/// reconstruct_f: normalizes the profile (C per mode) and samples f.
SimilarityProfile reconstruct_f(SelfSimilarProfile& profile, Normalization mode, double flux_f3 = -0.5);

struct SelfSimilarState {
    Field field;
    double V;
};

/// Closed-form self-similar solution on the PDE grid at time 0 <= t < t0.
SelfSimilarState selfsim_field(double t, const SelfSimilarProfile& profile, const SimilarityProfile& f,
                               const Grid& grid);

struct SelfSimilarOptions {
    double z_max = 20.0;
    double z_min = -15.0;
    double dz = 1e-3;
    OdeMethod method = OdeMethod::heun;
    Normalization normalization = Normalization::farfield_decay;
    double flux_f3 = -0.5;
    double t0 = 1.0;
};

struct SelfSimilarSolution {
    SelfSimilarProfile profile;
    SignCertificate certificate;
    SimilarityProfile f;
};

/// integrate_ode, find_z0, certify_signs, reconstruct_f and set_blowup_time in sequence.
SelfSimilarSolution build_selfsimilar(const SelfSimilarOptions& options = {});

}  // namespace contactline
