#include "thinshield/profiles.hpp"

#include "thinshield/error.hpp"

#include <cmath>
#include <complex>

namespace thinshield {

std::string_view to_string(ProfileFamily f)
{
    switch (f) {
    case ProfileFamily::Phi:
        return "PHI";
    case ProfileFamily::Psi:
        return "PSI";
    case ProfileFamily::Pi:
        return "PI";
    }
    return "?";
}

ProfileFamily parse_profile_family(std::string_view s)
{
    if (s == "PHI" || s == "phi")
        return ProfileFamily::Phi;
    if (s == "PSI" || s == "psi")
        return ProfileFamily::Psi;
    if (s == "PI" || s == "pi")
        return ProfileFamily::Pi;
    throw FormatError("unknown profile family '" + std::string(s) + "'");
}

double HomogeneousProfile::homogeneity() const
{
    switch (family) {
    case ProfileFamily::Phi:
        return 2.0 * m;
    case ProfileFamily::Psi:
        return 2.0 * m - 0.5;
    case ProfileFamily::Pi:
        return 2.0 * m + 1.0;
    }
    return 0.0;
}

double profile_value(ProfileFamily family, int m, double x1, double x2)
{
    if (m < 1)
        throw InvalidArgument("profile_value: index m must be >= 1");
    // Polar form of z = x1 + i|x2|, argument in [0, pi].
    const double rho = std::hypot(x1, x2);
    if (rho == 0.0)
        return 0.0;
    const double theta = std::atan2(std::abs(x2), x1);
    switch (family) {
    case ProfileFamily::Phi: {
        const double k = 2.0 * m;
        return std::pow(rho, k) * std::cos(k * theta);
    }
    case ProfileFamily::Psi: {
        const double k = 2.0 * m - 0.5;
        return std::pow(rho, k) * std::cos(k * theta);
    }
    case ProfileFamily::Pi: {
        const double k = 2.0 * m + 1.0;
        return std::pow(rho, k) * std::sin(k * theta);
    }
    }
    return 0.0;
}

double profile_value(const HomogeneousProfile& p, const Point& x, int n, const Point& direction)
{
    double x1 = 0.0;
    if (n == 1)
        x1 = direction[0] >= 0.0 ? x[0] : -x[0];
    else
        x1 = x.head(n).dot(direction.head(n));
    return profile_value(p.family, p.m, x1, x[n]);
}

} // namespace thinshield
