#pragma once

#include "thinshield/datum.hpp"
#include "thinshield/energy.hpp"
#include "thinshield/error.hpp"
#include "thinshield/field.hpp"

#include <optional>
#include <string>
#include <vector>

namespace thinshield {

struct NewtonOptions {
    /// Absolute max-norm tolerance on the discrete first variation (free vertices).
    double tolerance = 1e-12;
    int max_iterations = 200;
    double armijo = 1e-4;
    double cg_tolerance = 1e-10;
    /// Steps whose predicted decrease is below this fraction of |energy| are accepted
    /// without line search (the energy difference is pure roundoff there).
    double roundoff_fraction = 1e-13;
};

struct NewtonReport {
    int iterations = 0;
    double residual = 0.0;
    double energy = 0.0;
    std::vector<double> energies;
    int cg_iterations = 0;
};

/// Raised when Newton cannot make progress; carries the last iterate.
class SolverError : public Error {
public:
    SolverError(const std::string& what, ScalarField last, NewtonReport report)
        : Error(what), last_(std::move(last)), report_(std::move(report))
    {
    }
    const ScalarField& last_iterate() const { return last_; }
    const NewtonReport& report() const { return report_; }

private:
    ScalarField last_;
    NewtonReport report_;
};

/// Minimizer of the penalized energy with sphere values taken from `initial`.
/// The interior values of `initial` are the starting guess.
ScalarField solve_penalized(const ScalarField& initial, const PenaltyConfig& cfg,
                            const NewtonOptions& opts = {}, NewtonReport* report = nullptr);

/// Minimizer of the bulk energy (area + chi) with no thin term.
ScalarField solve_unconstrained(const ScalarField& initial, double lipschitz,
                                const NewtonOptions& opts = {}, NewtonReport* report = nullptr);

struct ComplementarityReport {
    double max_negative_trace = 0.0;
    double max_positive_normal_derivative = 0.0;
    double max_product = 0.0;
    /// Thin vertices inside the margin where the two-height stencil fits inside the mesh.
    int vertices_checked = 0;
};

struct ContinuationOptions {
    double epsilon0 = 0.1;
    double ratio = 0.5;
    double epsilon_min = 1e-6;
    /// H^1 Cauchy stop tolerance; a negative value selects the mesh default h^2 / 10.
    double cauchy_tolerance = -1.0;
    /// Lipschitz threshold inside chi; unset selects max(2 Lip(g), 1).
    std::optional<double> lipschitz;
    NewtonOptions newton;
};

struct Solution {
    ScalarField field;
    double lipschitz = 0.0;
    std::vector<double> epsilons;
    std::vector<double> newton_residuals;
    std::vector<int> newton_iterations;
    /// ||u_{eps_k} - u_{eps_{k+1}}||_{H^1}, one entry per stage after the first.
    std::vector<double> cauchy_h1;
    double max_gradient = 0.0;
    /// Fraction of cells with chi'(|grad u|) = 0.
    double chi_inactive = 0.0;
    ComplementarityReport complementarity;

    double epsilon_final() const { return epsilons.empty() ? 0.0 : epsilons.back(); }
};

/// Default chi threshold for a datum sampled on the mesh.
double default_lipschitz(const ScalarField& g);

/// Warm-started penalized solves along eps_k = eps0 * ratio^k.
Solution continuation_solve(const ScalarField& g, const ContinuationOptions& opts = {});

struct OracleOptions {
    NewtonOptions newton;
    double multiplier_tolerance = 1e-10;
    int max_outer = 200;
    std::optional<double> lipschitz;
};

struct OracleResult {
    ScalarField field;
    std::vector<int> active;          ///< vertex indices with v = 0 enforced
    std::vector<double> multipliers;  ///< one per active vertex
    int outer_iterations = 0;
    double residual = 0.0;
};

/// Primal feasible active-set solve of min (area + chi) subject to v >= 0 on thin vertices.
OracleResult constrained_oracle(const ScalarField& g, const OracleOptions& opts = {});

struct ComparisonReport {
    double max_violation = 0.0; ///< max over vertices of u - v
    int worst_vertex = -1;
    bool pass = true;
};

ComparisonReport comparison_check(const ScalarField& u, const ScalarField& v, double tol = 1e-8);

/// Second-order one-sided normal derivative at heights h and 2h above each thin vertex.
/// The trace is checked on all of B_1'; the derivative and the product only on thin vertices
/// at least `margin` away from the sphere, since a kink of the datum on the equator leaves a
/// corner layer there. A negative margin selects 1/4.
ComplementarityReport complementarity_residuals(const ScalarField& u, double margin = -1.0);

struct BarrierReport {
    double slope = 0.0;
    double lift = 0.0;
    int level = 0;
    int inner_vertices = 0;   ///< thin vertices with |x'| <= 3/4
    int inner_coincident = 0;
    double fraction = 0.0;
    int coincident = 0;       ///< all thin vertices in the coincidence set
    Solution solution;
};

/// Continuation solve of g = -a|x_{n+1}| + lift; counts contact on B'_{3/4}.
BarrierReport barrier_experiment(double a, double lift, int n, int level,
                                 const ContinuationOptions& opts = {});

} // namespace thinshield
