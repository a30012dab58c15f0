#pragma once

#include "thinshield/field.hpp"
#include "thinshield/profiles.hpp"

#include <string>

namespace thinshield {

/// Named families of even boundary data g(x', x_{n+1}) = g(x', -x_{n+1}).
///
///   constant       g = c
///   barrier        g = -a |x_{n+1}| + lift
///   tilted         g = -a |x_{n+1}| + lift + slope * x_1
///   profile        g = scale * P(x) + lift, P a homogeneous profile (n = 1 plane realization)
///   nodal          nodal values read from a TOFF1 file
struct BoundaryDatum {
    enum class Kind { Constant, Barrier, Tilted, Profile, Nodal };

    Kind kind = Kind::Constant;
    double constant = 1.0;
    double slope_a = 1.0;
    double lift = 1e-3;
    double tilt = 0.0;
    HomogeneousProfile profile{};
    double scale = 1.0;
    std::string path;

    static BoundaryDatum make_constant(double c);
    static BoundaryDatum make_barrier(double a, double lift);
    static BoundaryDatum make_tilted(double a, double lift, double tilt);
    static BoundaryDatum make_profile(HomogeneousProfile p, double scale, double lift);

    /// Closed-form value; throws for Kind::Nodal.
    double operator()(const Point& x, int n) const;

    /// Nodal field of the datum on every vertex (used as Dirichlet data and initial guess).
    ScalarField sample(MeshPtr mesh) const;

    /// Compact textual form, e.g. "barrier a=1 lift=0.001"; parse(emit(d)) == d.
    std::string emit() const;
    static BoundaryDatum parse(const std::string& text);

    bool operator==(const BoundaryDatum&) const = default;
};

/// Max over cells of |grad| of the nodal interpolant: a discrete Lipschitz constant.
double discrete_lipschitz(const ScalarField& f);

} // namespace thinshield
