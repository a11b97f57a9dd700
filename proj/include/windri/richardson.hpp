#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace windri {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

// One level of a vertical profile.
struct ProfileLevel {
    double z = 0.0;      // height, m
    double theta = 0.0;  // potential temperature, K
    double u = 0.0;      // zonal wind, m/s
    double v = 0.0;      // meridional wind, m/s
};

enum class Stability {
    kTurbulenceProne,  // Ri < 0.25
    kTransitional,     // 0.25 <= Ri <= 1.0
    kStable,           // Ri > 1.0, or no shear at all
};

std::string_view to_string(Stability s);

// Richardson number of one layer. finite == false marks the zero-shear case
// (buoyancy with no shear work), which classifies as stable.
struct RiValue {
    double value = 0.0;
    bool finite = true;
};

// Bulk Richardson number across a two-level layer: derivatives by the
// two-point finite difference over dz, theta in the prefactor taken as the
// layer mean. Requires upper.z > lower.z and a positive mean theta.
RiValue compute_ri(const ProfileLevel& lower, const ProfileLevel& upper,
                   double g = kStandardGravity);

Stability classify(const RiValue& ri);
Stability classify(double ri);

struct LayerRi {
    double mid_z = 0.0;
    RiValue ri;
};

// One Ri per adjacent level pair, reported at the layer midpoint.
// Needs at least two levels with strictly increasing z.
std::vector<LayerRi> profile_ri(std::span<const ProfileLevel> profile,
                                double g = kStandardGravity);

}  // namespace windri
