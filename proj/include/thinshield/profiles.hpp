#pragma once

#include "thinshield/mesh.hpp"

#include <string>
#include <string_view>

namespace thinshield {

/// The three families of homogeneous global solutions with a maximal space of invariances:
///   PHI_m = Re[(x1 + i|x2|)^{2m}],   PSI_m = Re[(x1 + i|x2|)^{2m - 1/2}],
///   PI_m  = Im[(x1 + i|x2|)^{2m+1}].
enum class ProfileFamily { Phi, Psi, Pi };

std::string_view to_string(ProfileFamily f);
ProfileFamily parse_profile_family(std::string_view s);

struct HomogeneousProfile {
    ProfileFamily family = ProfileFamily::Psi;
    int m = 1;

    /// 2m, 2m - 1/2 or 2m + 1.
    double homogeneity() const;

    bool operator==(const HomogeneousProfile&) const = default;
};

/// Exact evaluation at a point (x1, x2) of the plane. Throws for m < 1.
double profile_value(ProfileFamily family, int m, double x1, double x2);

/// Evaluation in R^{n+1}: x1 is the coordinate along `direction` (a unit vector of the thin
/// plane; ignored for n = 1 except for its sign) and x2 = x_{n+1}.
double profile_value(const HomogeneousProfile& p, const Point& x, int n,
                     const Point& direction = Point::UnitX());

} // namespace thinshield
