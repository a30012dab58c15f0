#pragma once

#include "thinshield/field.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <vector>

namespace thinshield {

/// Penalty scale and Lipschitz threshold of the penalized area functional.
struct PenaltyConfig {
    double epsilon = 1e-2;
    double lipschitz = 2.0;

    void validate() const;
};

// -- scalar ingredients --------------------------------------------------------------------

/// Monotone C^{1,1} penalty: 0 on [0,inf), -t^2/2 on [-1,0], t+1/2 below -1.
double beta(double t);
double beta_prime(double t);
double beta_eps(double t, double eps);
double beta_eps_prime(double t, double eps);
/// F_eps(t) = 2 * int_0^t beta_eps(s) ds = 2 B(t/eps) with B' = beta.
double penalty_potential(double t, double eps);

/// Convex C^1 cutoff: 0 on [0,L], (t-L)^4/(32 L^2) on [L,3L], (t-2L)^2/2 beyond.
double chi(double t, double L);
double chi_prime(double t, double L);
double chi_second(double t, double L);

/// Upper bound on the operator norm of grad A, valid for every L > 0.
inline constexpr double kVectorFieldLipschitz = 2.5;

/// A(p) = ((1+|p|^2)^{-1/2} + chi'(|p|)/|p|) p, with A(0) = 0.
Point vector_field_A(const Point& p, double L);
/// Jacobian of A (symmetric positive definite), padded to 3x3.
Eigen::Matrix3d jacobian_A(const Point& p, double L);

// -- assembled functionals -----------------------------------------------------------------

/// Area of the graph over B_1: twice the half-ball sum of vol * sqrt(1+|grad v|^2).
double area_energy(const ScalarField& v);
/// Area plus chi term over B_1 (no thin penalty).
double bulk_energy(const ScalarField& v, double L);
/// Lumped thin penalty sum_i w_i F_eps(v_i), counted once.
double thin_penalty_energy(const ScalarField& v, double eps);
double penalized_energy(const ScalarField& v, const PenaltyConfig& cfg);

/// Numbering of the unknowns: every vertex that is not fixed.
class DofMap {
public:
    DofMap() = default;
    /// Sphere vertices are fixed; `extra_fixed` (optional, per vertex) fixes more.
    explicit DofMap(const Mesh& mesh, const std::vector<char>* extra_fixed = nullptr);

    int dof(std::size_t vertex) const { return dof_of_vertex_[vertex]; }
    std::size_t vertex(int dof) const { return vertex_of_dof_[dof]; }
    int size() const { return static_cast<int>(vertex_of_dof_.size()); }

    Eigen::VectorXd restrict(const Eigen::VectorXd& nodal) const;

private:
    std::vector<int> dof_of_vertex_;
    std::vector<std::size_t> vertex_of_dof_;
};

/// Gradient of the energy with respect to nodal values; sphere entries are zero.
/// With `thin_penalty == false` the thin term is omitted (bulk energy only).
Eigen::VectorXd energy_gradient(const ScalarField& v, const PenaltyConfig& cfg, bool thin_penalty);
Eigen::SparseMatrix<double> energy_hessian(const ScalarField& v, const PenaltyConfig& cfg,
                                           bool thin_penalty, const DofMap& dofs);

/// Discrete first variation of the penalized energy against nodal hat functions.
Eigen::VectorXd penalized_residual(const ScalarField& v, const PenaltyConfig& cfg);
/// Exact derivative of penalized_residual on the free (non-sphere) vertices.
Eigen::SparseMatrix<double> penalized_hessian(const ScalarField& v, const PenaltyConfig& cfg);

/// Per-simplex weight (1+|grad u|^2)^{-1/2}.
struct WeightField {
    MeshPtr mesh;
    std::vector<double> values;

    static WeightField unit(MeshPtr mesh);
};

/// theta = (1+|grad u|^2)^{-1/2}, clamped to [(1+L^2)^{-1/2}, 1].
WeightField theta_weight(const ScalarField& u, double L);

} // namespace thinshield
