#include "windri/richardson.hpp"

#include <stdexcept>

namespace windri {

std::string_view to_string(Stability s) {
    switch (s) {
        case Stability::kTurbulenceProne: return "turbulence-prone";
        case Stability::kTransitional: return "transitional";
        case Stability::kStable: return "stable";
    }
    return "unknown";
}

RiValue compute_ri(const ProfileLevel& lower, const ProfileLevel& upper, double g) {
    const double dz = upper.z - lower.z;
    if (dz <= 0.0) throw std::invalid_argument("compute_ri: upper level must be above lower level");
    const double theta_mean = 0.5 * (lower.theta + upper.theta);
    if (theta_mean <= 0.0) throw std::invalid_argument("compute_ri: mean potential temperature must be positive");

    const double dtheta_dz = (upper.theta - lower.theta) / dz;
    const double du_dz = (upper.u - lower.u) / dz;
    const double dv_dz = (upper.v - lower.v) / dz;
    const double shear_sq = du_dz * du_dz + dv_dz * dv_dz;
    if (shear_sq == 0.0) return {0.0, false};
    return {(g / theta_mean) * dtheta_dz / shear_sq, true};
}

Stability classify(const RiValue& ri) {
    if (!ri.finite) return Stability::kStable;
    return classify(ri.value);
}

Stability classify(double ri) {
    if (ri < 0.25) return Stability::kTurbulenceProne;
    if (ri > 1.0) return Stability::kStable;
    return Stability::kTransitional;
}

std::vector<LayerRi> profile_ri(std::span<const ProfileLevel> profile, double g) {
    if (profile.size() < 2) throw std::invalid_argument("profile_ri: need at least two levels");
    std::vector<LayerRi> out;
    out.reserve(profile.size() - 1);
    for (std::size_t i = 0; i + 1 < profile.size(); ++i) {
        const ProfileLevel& lo = profile[i];
        const ProfileLevel& hi = profile[i + 1];
        out.push_back({0.5 * (lo.z + hi.z), compute_ri(lo, hi, g)});
    }
    return out;
}

}  // namespace windri
