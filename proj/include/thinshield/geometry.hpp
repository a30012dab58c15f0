#pragma once

#include "thinshield/energy.hpp"
#include "thinshield/freeboundary.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace thinshield {

/// Discrete measure on the thin plane: atoms with nonnegative weights.
struct WeightedPointCloud {
    std::vector<Point> points;
    std::vector<double> weights;

    /// Unit atom at every point of gamma.
    static WeightedPointCloud from_gamma(const FreeBoundary& gamma);
    double mass_in(const Point& x, double r) const;
};

struct FlatnessResult {
    double beta2 = 0.0;
    double mass = 0.0;
    /// The optimal (n-1)-plane passes through this point...
    Point barycenter = Point::Zero();
    /// ...spanned by the leading n-1 principal directions (empty for n = 1).
    std::vector<Point> span;
};

/// beta^2 = r^{-n-1} * (sum of the two smallest eigenvalues of the weighted second-moment
/// matrix in R^{n+1}) over atoms in B_r(x). Zero mass gives beta = 0.
FlatnessResult mean_flatness_detail(const WeightedPointCloud& mu, const Point& x, double r, int n);
double mean_flatness(const WeightedPointCloud& mu, const Point& x, double r, int n);

struct FlatnessPinchingReport {
    double beta2 = 0.0;
    double integral = 0.0; ///< sum of weight * Delta over atoms in B_r(p)
    double mass = 0.0;     ///< mu(B_r(p))
    double rhs_base = 0.0; ///< r^{1-n} (integral + r^2 mass)
    double constant = 0.0; ///< beta2 / rhs_base (0 when both vanish)
};

/// Delta at an atom x is the additive pinching between radii (R-5) r / 2 and (2R+4) r.
/// Requires R > 6 and |p| + (2R+5) r <= 1.
FlatnessPinchingReport flatness_vs_pinching_audit(const ScalarField& u, const WeightField& weight,
                                                  const WeightedPointCloud& mu, const Point& p,
                                                  double r, double R, double c_add);

struct MinkowskiReport {
    std::vector<double> radii;
    std::vector<double> volume; ///< full-ball volume of the tube intersected with K
    std::vector<double> ratio;  ///< volume / r^2
    double max_ratio = 0.0;
    int points = 0;             ///< gamma points within K
};

/// Tube volume by counting centroids of the mesh one level finer than `mesh`, cut to the
/// closed ball K = B_{k_radius}(k_center).
MinkowskiReport minkowski_audit(const FreeBoundary& gamma, const Mesh& mesh,
                                const Point& k_center, double k_radius,
                                const std::vector<double>& radii);

/// Coordinates of R^{n+2}: the first three hold x (x_3 = 0 for n = 1), the last one the
/// graph height.
using GraphPoint = Eigen::Vector4d;

struct TestVectorField {
    std::string name;
    std::function<GraphPoint(const GraphPoint&)> value;
    std::function<Eigen::Matrix4d(const GraphPoint&)> jacobian;
    /// Center and radius of the horizontal support ball; vertical support |z| < height.
    Point center = Point::Zero();
    double radius = 0.0;
    double height = 0.0;
};

/// Radial bump (1 - |x-c|^2/s^2)^3_+ times the vertical cap (1 + z/2Z)(1 - z^2/Z^2)^3_+ times a
/// direction: one of e_1, e_{n+1}, e_z or the dilation x - c.
TestVectorField bump_test_field(int n, const Point& center, double radius, double height,
                                int kind);

/// Twelve fields: three centers (the origin and the two given points) times four kinds.
std::vector<TestVectorField> standard_test_fields(int n, const Point& c1, const Point& c2);

/// sup |Y| + sup |DY| (Frobenius) over a sampling grid of the support.
double c1_norm(const TestVectorField& Y, int n);

/// Sum over the graphs of u and -u above B_1^+ and its reflection of the integral of the
/// tangential divergence of Y. Throws InvalidArgument if Y does not vanish outside its declared
/// support or the support leaves B_1 x R.
double two_valued_first_variation(const ScalarField& u, const TestVectorField& Y);

} // namespace thinshield
