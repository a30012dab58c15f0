#pragma once

#include "thinshield/energy.hpp"
#include "thinshield/freeboundary.hpp"
#include "thinshield/frequency.hpp"
#include "thinshield/profiles.hpp"

#include <vector>

namespace thinshield {

/// u_{x0,r}(y) = r^{n/2} u(x0 + r y) / sqrt(H(x0, r)), sampled at the nodes of `target`.
/// `record` must hold H(x0, r) of u computed with theta = 1.
ScalarField rescale(const ScalarField& u, const FrequencyRecord& record, MeshPtr target);

/// Same, computing the record itself.
ScalarField rescale(const ScalarField& u, const Point& x0, double r, MeshPtr target);

/// Closest element of {2m, 2m - 1/2, 2m + 1 : m >= 1}.
double nearest_admissible_frequency(double I);

struct ProfileMatch {
    bool classified = false;
    HomogeneousProfile profile;
    double homogeneity = 0.0;
    /// ||f - c p|| / ||f|| in L^2(B_1^+) with the optimal c >= 0.
    double distance = 0.0;
    double scale = 0.0;
    /// Unit vector of the thin plane along which x1 of the profile is measured.
    Point direction = Point::UnitX();
    /// I(0, 1) of the input with theta = 1.
    double measured_frequency = 0.0;
    double nearest_admissible = 0.0;
};

struct ClassifyOptions {
    int m_max = 3;
    /// Matches farther than this are reported as unclassified.
    double reject_distance = 0.5;
    /// Candidate profile directions; empty selects +-e1 for n = 1 and 36 directions for n = 2.
    std::vector<Point> directions;
};

ProfileMatch classify_blowup(const ScalarField& field, const ClassifyOptions& opts = {});

/// In-plane unit normal to gamma at x0 (n = 2), from the second-moment matrix of the gamma
/// points within `radius`: the eigenvector of the smallest eigenvalue. Returns e1 for n = 1.
Point gamma_normal(const FreeBoundary& gamma, const Point& x0, double radius, int n);

struct RegularPoints {
    std::vector<int> marked;          ///< indices into gamma.points
    std::vector<double> frequencies;  ///< I(x0, r_probe) per gamma point (NaN if not evaluated)
    double r_probe = 0.0;
    /// n = 2: worst RMS residual of local quadratic fits through marked points; 0 for n = 1.
    double curve_residual = 0.0;
};

/// Marks gamma points with |I(x0, r_probe) - 3/2| <= tol_freq. Points whose ball leaves the
/// domain or whose H vanishes are skipped. A nonpositive r_probe selects the trusted radius.
RegularPoints detect_regular_points(const ScalarField& u, const WeightField& weight,
                                    const FreeBoundary& gamma, double r_probe = -1.0,
                                    double tol_freq = 0.1);

} // namespace thinshield
