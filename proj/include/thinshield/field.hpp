#pragma once

#include "thinshield/mesh.hpp"

#include <functional>
#include <span>
#include <vector>

namespace thinshield {

/// Piecewise-linear function given by its nodal values on a mesh.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(MeshPtr mesh, std::vector<double> values);
    explicit ScalarField(MeshPtr mesh, double constant = 0.0);

    /// Nodal interpolation of a closed-form function.
    static ScalarField interpolate(MeshPtr mesh, const std::function<double(const Point&)>& f);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    /// Barycentric interpolation; points with x_{n+1} < 0 are reflected (fields are even).
    /// Throws OutOfDomain outside the mesh hull.
    double evaluate(const Point& x) const;

    /// Value at the centroid of a cell (mean of its nodal values).
    double cell_mean(std::size_t c) const;
    /// Exact gradient of the interpolant on one cell.
    Point cell_gradient(std::size_t c) const;

private:
    MeshPtr mesh_;
    std::vector<double> values_;
};

/// Like evaluate, but points of the closed unit ball lying in the thin gap between the sphere
/// and the polygonal mesh boundary are pulled radially onto the mesh first.
double evaluate_near(const ScalarField& u, const Point& x);

/// One constant gradient vector per simplex.
struct CellGradientField {
    MeshPtr mesh;
    std::vector<Point> gradients;
};

CellGradientField cell_gradients(const ScalarField& field);

/// Sum over simplices of value times volume (integral over B_1^+).
double integrate_bulk(const Mesh& mesh, std::span<const double> cellwise);

/// Sum over thin faces of value times face measure (integral over B_1').
double integrate_thin(const Mesh& mesh, std::span<const double> facewise);

/// H^1(B_1) norm of u - v, with the full-ball integral taken as twice the half-ball one.
double h1_distance(const ScalarField& u, const ScalarField& v);

/// L^2(B_1^+) inner product of two piecewise-linear fields on the same mesh (exact).
double l2_inner_half(const ScalarField& u, const ScalarField& v);

/// Max over vertices of |u_i - v_i|.
double max_abs_difference(const ScalarField& u, const ScalarField& v);

} // namespace thinshield
