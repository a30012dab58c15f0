#pragma once

#include "thinshield/field.hpp"

#include <array>
#include <vector>

namespace thinshield {

/// THIN vertices where |u| <= tolerance.
struct CoincidenceSet {
    std::vector<int> vertices; ///< sorted
    double tolerance = 0.0;
    /// Members with |u| > tolerance / 2, i.e. those that leave under tolerance halving.
    int band = 0;

    bool contains(int v) const;
    bool empty() const { return vertices.empty(); }
};

CoincidenceSet coincidence_set(const ScalarField& u, double tol_c);

/// factor * (largest negative excursion of the trace), floored at 1e-12. A tolerance tight
/// enough to locate gamma to within a cell for the exponent and frequency audits.
double penetration_tolerance(const ScalarField& u, double factor = 10.0);

/// Points of B_1' on thin edges joining a coincidence vertex to a non-coincidence vertex.
struct FreeBoundary {
    std::vector<Point> points;
    /// Endpoints (in Lambda, outside) of the edge carrying each point.
    std::vector<std::array<int, 2>> edges;

    bool empty() const { return points.empty(); }
};

/// On each crossing edge the point is where the linear interpolant of u reaches the
/// coincidence tolerance (clamped to the edge).
FreeBoundary free_boundary(const ScalarField& u, const CoincidenceSet& lambda);

/// Euclidean distance from every mesh vertex to the nearest point of gamma.
std::vector<double> distance_to_gamma(const Mesh& mesh, const FreeBoundary& gamma);

struct RegularityFitOptions {
    /// Shells reaching below this distance are ignored; a negative value selects h.
    double min_distance = -1.0;
    /// Shells reaching above this distance are ignored (the estimates are local to gamma).
    double max_distance = 0.125;
};

struct RegularityFit {
    double alpha_grad = 0.0;
    double alpha_val = 0.0;
    double c_grad = 0.0;
    double c_val = 0.0;
    /// Per usable shell [2^{-k-1}, 2^{-k}]: representative distance 2^{-k-1/2} and maxima.
    std::vector<double> shell_distance;
    std::vector<double> shell_max_grad;
    std::vector<double> shell_max_val;
};

/// Log-log least squares of shell maxima of |grad u| (cells, by centroid) and |u| (vertices)
/// against the distance to gamma. Only samples closer to gamma than to the unit sphere count.
/// Throws Degenerate with fewer than three usable shells.
RegularityFit regularity_exponent_fit(const ScalarField& u, const FreeBoundary& gamma,
                                      const RegularityFitOptions& opts = {});

struct W22Report {
    double lhs = 0.0;   ///< sum over faces in B_r of |[grad u]|^2 |F| / h_F
    double rhs = 0.0;   ///< int_{B_2r^+} |grad' u|^2
    double ratio = 0.0; ///< lhs r^2 / rhs
};

/// Requires |x0| + 2r <= 1.
W22Report w22_audit(const ScalarField& u, const Point& x0, double r);

/// Max over interior faces of |theta_left - theta_right| / centroid distance,
/// theta = (1 + |grad u|^2)^{-1/2}.
double theta_lipschitz_audit(const ScalarField& u);

} // namespace thinshield
