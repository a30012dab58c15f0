#include "thinshield/solver.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace thinshield {

namespace {

struct Problem {
    PenaltyConfig cfg;
    bool thin = true;
};

double energy_of(const ScalarField& v, const Problem& p)
{
    return p.thin ? penalized_energy(v, p.cfg) : bulk_energy(v, p.cfg.lipschitz);
}

/// Newton direction on the free unknowns: CG with Jacobi preconditioning.
Eigen::VectorXd newton_direction(const ScalarField& v, const Problem& p, const DofMap& dofs,
                                 const Eigen::VectorXd& g, const NewtonOptions& o, int& cg_its)
{
    const Eigen::SparseMatrix<double> hess = energy_hessian(v, p.cfg, p.thin, dofs);
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(o.cg_tolerance);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 4 * hess.rows()));
    cg.compute(hess);
    Eigen::VectorXd d = cg.solve(-g);
    cg_its += static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success && cg.info() != Eigen::NoConvergence)
        throw Error("newton: linear solve failed");
    return d;
}

void apply_step(ScalarField& v, const DofMap& dofs, const Eigen::VectorXd& d, double alpha)
{
    for (int k = 0; k < dofs.size(); ++k)
        v[dofs.vertex(k)] += alpha * d[k];
}

/// Backtracking Armijo search along d from v; returns the accepted step length.
/// `alpha0` caps the first trial (feasibility limit of the oracle).
double line_search(ScalarField& v, const Problem& p, const DofMap& dofs, const Eigen::VectorXd& d,
                   double slope, double energy, double alpha0, const NewtonOptions& o,
                   NewtonReport& rep)
{
    if (-slope <= o.roundoff_fraction * std::abs(energy)) {
        apply_step(v, dofs, d, alpha0);
        return alpha0;
    }
    ScalarField trial = v;
    for (double alpha = alpha0; alpha >= 1e-14; alpha *= 0.5) {
        std::copy(v.values().begin(), v.values().end(), trial.values().begin());
        apply_step(trial, dofs, d, alpha);
        const double e = energy_of(trial, p);
        if (e <= energy + o.armijo * alpha * slope) {
            v = std::move(trial);
            return alpha;
        }
    }
    std::ostringstream os;
    os << "newton: line search failed after " << rep.iterations << " iterations (residual "
       << rep.residual << ")";
    throw SolverError(os.str(), v, rep);
}

NewtonReport newton_minimize(ScalarField& v, const Problem& p, const NewtonOptions& o)
{
    p.cfg.validate();
    NewtonReport rep;
    const DofMap dofs(v.mesh());
    for (;;) {
        const Eigen::VectorXd g = dofs.restrict(energy_gradient(v, p.cfg, p.thin));
        rep.residual = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
        rep.energy = energy_of(v, p);
        rep.energies.push_back(rep.energy);
        if (rep.residual <= o.tolerance)
            return rep;
        if (rep.iterations >= o.max_iterations) {
            std::ostringstream os;
            os << "newton: no convergence in " << o.max_iterations << " iterations (residual "
               << rep.residual << ")";
            throw SolverError(os.str(), v, rep);
        }
        Eigen::VectorXd d = newton_direction(v, p, dofs, g, o, rep.cg_iterations);
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            d = -g;
            slope = -g.squaredNorm();
        }
        line_search(v, p, dofs, d, slope, rep.energy, 1.0, o, rep);
        ++rep.iterations;
    }
}

} // namespace

ScalarField solve_penalized(const ScalarField& initial, const PenaltyConfig& cfg,
                            const NewtonOptions& opts, NewtonReport* report)
{
    ScalarField v = initial;
    const NewtonReport rep = newton_minimize(v, {cfg, true}, opts);
    if (report)
        *report = rep;
    return v;
}

ScalarField solve_unconstrained(const ScalarField& initial, double lipschitz,
                                const NewtonOptions& opts, NewtonReport* report)
{
    PenaltyConfig cfg;
    cfg.lipschitz = lipschitz;
    ScalarField v = initial;
    const NewtonReport rep = newton_minimize(v, {cfg, false}, opts);
    if (report)
        *report = rep;
    return v;
}

double default_lipschitz(const ScalarField& g) { return std::max(2.0 * discrete_lipschitz(g), 1.0); }

Solution continuation_solve(const ScalarField& g, const ContinuationOptions& opts)
{
    if (!(opts.epsilon0 > 0.0) || !(opts.ratio > 0.0 && opts.ratio < 1.0) ||
        !(opts.epsilon_min > 0.0) || opts.epsilon_min > opts.epsilon0)
        throw InvalidArgument("continuation: schedule must decrease from eps0 to eps_min > 0");
    const Mesh& mesh = g.mesh();
    const double cauchy_tol =
        opts.cauchy_tolerance > 0.0 ? opts.cauchy_tolerance : 0.1 * mesh.h() * mesh.h();

    Solution sol;
    sol.lipschitz = opts.lipschitz.value_or(default_lipschitz(g));
    ScalarField v = g;
    for (int k = 0;; ++k) {
        const double eps = opts.epsilon0 * std::pow(opts.ratio, k);
        if (eps < opts.epsilon_min * (1.0 - 1e-12))
            break;
        NewtonReport rep;
        ScalarField next = solve_penalized(v, {eps, sol.lipschitz}, opts.newton, &rep);
        sol.epsilons.push_back(eps);
        sol.newton_residuals.push_back(rep.residual);
        sol.newton_iterations.push_back(rep.iterations);
        const bool have_prev = k > 0;
        if (have_prev)
            sol.cauchy_h1.push_back(h1_distance(next, v));
        v = std::move(next);
        if (have_prev && sol.cauchy_h1.back() <= cauchy_tol)
            break;
    }

    sol.max_gradient = discrete_lipschitz(v);
    std::size_t inactive = 0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        if (v.cell_gradient(c).norm() <= sol.lipschitz)
            ++inactive;
    sol.chi_inactive = static_cast<double>(inactive) / static_cast<double>(mesh.num_cells());
    sol.complementarity = complementarity_residuals(v);
    sol.field = std::move(v);
    return sol;
}

OracleResult constrained_oracle(const ScalarField& g, const OracleOptions& opts)
{
    const Mesh& mesh = g.mesh();
    const std::size_t nv = mesh.num_vertices();
    Problem p;
    p.thin = false;
    p.cfg.lipschitz = opts.lipschitz.value_or(default_lipschitz(g));
    const NewtonOptions& o = opts.newton;

    // Feasible start: zero away from the sphere, every thin vertex active.
    ScalarField v = g;
    std::vector<char> active(nv, 0);
    std::vector<char> thin(nv, 0);
    for (std::size_t i = 0; i < nv; ++i) {
        if (mesh.tag(i) == VertexTag::Sphere)
            continue;
        v[i] = 0.0;
        if (mesh.tag(i) == VertexTag::Thin)
            thin[i] = active[i] = 1;
    }

    OracleResult res;
    NewtonReport rep;
    int total_newton = 0;
    for (res.outer_iterations = 1; res.outer_iterations <= opts.max_outer; ++res.outer_iterations) {
        // Newton on the current free set, never leaving v >= 0 on thin vertices.
        for (;;) {
            const DofMap dofs(mesh, &active);
            const Eigen::VectorXd g_free = dofs.restrict(energy_gradient(v, p.cfg, false));
            rep.residual = g_free.size() ? g_free.lpNorm<Eigen::Infinity>() : 0.0;
            rep.energy = energy_of(v, p);
            if (rep.residual <= o.tolerance)
                break;
            if (++total_newton > o.max_iterations * opts.max_outer)
                throw SolverError("oracle: inner Newton budget exhausted", v, rep);
            Eigen::VectorXd d = newton_direction(v, p, dofs, g_free, o, rep.cg_iterations);
            double slope = g_free.dot(d);
            if (!(slope < 0.0)) {
                d = -g_free;
                slope = -g_free.squaredNorm();
            }
            double alpha_max = std::numeric_limits<double>::infinity();
            for (int k = 0; k < dofs.size(); ++k) {
                const std::size_t i = dofs.vertex(k);
                if (thin[i] && d[k] < 0.0)
                    alpha_max = std::min(alpha_max, -v[i] / d[k]);
            }
            const double cap = std::min(1.0, alpha_max);
            if (cap <= 1e-15) {
                // Blocked immediately: activate the offending vertices without moving.
                for (int k = 0; k < dofs.size(); ++k) {
                    const std::size_t i = dofs.vertex(k);
                    if (thin[i] && d[k] < 0.0 && -v[i] / d[k] <= 1e-15) {
                        active[i] = 1;
                        v[i] = 0.0;
                    }
                }
                continue;
            }
            line_search(v, p, dofs, d, slope, rep.energy, cap, o, rep);
            ++rep.iterations;
            for (int k = 0; k < dofs.size(); ++k) {
                const std::size_t i = dofs.vertex(k);
                if (thin[i] && v[i] <= 1e-15 * std::max(1.0, std::abs(g[i]))) {
                    active[i] = 1;
                    v[i] = 0.0;
                }
            }
        }

        // KKT: the energy gradient at an active vertex is its multiplier.
        const Eigen::VectorXd grad = energy_gradient(v, p.cfg, false);
        bool released = false;
        for (std::size_t i = 0; i < nv; ++i) {
            if (active[i] && grad[static_cast<Eigen::Index>(i)] < -opts.multiplier_tolerance) {
                active[i] = 0;
                released = true;
            }
        }
        if (!released) {
            for (std::size_t i = 0; i < nv; ++i) {
                if (active[i]) {
                    res.active.push_back(static_cast<int>(i));
                    res.multipliers.push_back(grad[static_cast<Eigen::Index>(i)]);
                }
            }
            res.residual = rep.residual;
            res.field = std::move(v);
            return res;
        }
    }
    throw SolverError("oracle: active set cycling guard exceeded", v, rep);
}

ComparisonReport comparison_check(const ScalarField& u, const ScalarField& v, double tol)
{
    if (u.mesh_ptr() != v.mesh_ptr() &&
        (u.mesh().n() != v.mesh().n() || u.mesh().level() != v.mesh().level()))
        throw InvalidArgument("comparison_check: fields live on different meshes");
    ComparisonReport rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.values().size(); ++i) {
        const double diff = u[i] - v[i];
        if (diff > rep.max_violation) {
            rep.max_violation = diff;
            rep.worst_vertex = static_cast<int>(i);
        }
    }
    rep.pass = rep.max_violation <= tol;
    return rep;
}

ComplementarityReport complementarity_residuals(const ScalarField& u, double margin)
{
    const Mesh& mesh = u.mesh();
    const int n = mesh.n();
    const double h = mesh.h();
    if (margin < 0.0)
        margin = 0.25;
    ComplementarityReport rep;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        if (mesh.tag(i) != VertexTag::Thin)
            continue;
        const double u0 = u[i];
        rep.max_negative_trace = std::max(rep.max_negative_trace, -u0);
        if (mesh.vertex(i).head(n).norm() > 1.0 - margin)
            continue;
        Point x1 = mesh.vertex(i);
        Point x2 = x1;
        x1[n] += h;
        x2[n] += 2.0 * h;
        if (!mesh.locate(x1) || !mesh.locate(x2))
            continue;
        const double dn = (-3.0 * u0 + 4.0 * u.evaluate(x1) - u.evaluate(x2)) / (2.0 * h);
        rep.max_positive_normal_derivative = std::max(rep.max_positive_normal_derivative, dn);
        rep.max_product = std::max(rep.max_product, std::abs(u0 * dn));
        ++rep.vertices_checked;
    }
    return rep;
}

BarrierReport barrier_experiment(double a, double lift, int n, int level,
                                 const ContinuationOptions& opts)
{
    const MeshPtr mesh = Mesh::half_ball(n, level);
    BarrierReport rep;
    rep.slope = a;
    rep.lift = lift;
    rep.level = level;
    rep.solution = continuation_solve(BoundaryDatum::make_barrier(a, lift).sample(mesh), opts);
    const double tol_c = 10.0 * rep.solution.epsilon_final();
    const ScalarField& u = rep.solution.field;
    for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
        if (mesh->tag(i) != VertexTag::Thin)
            continue;
        const bool touching = std::abs(u[i]) <= tol_c;
        rep.coincident += touching;
        if (mesh->vertex(i).head(n).norm() <= 0.75 + 1e-12) {
            ++rep.inner_vertices;
            rep.inner_coincident += touching;
        }
    }
    rep.fraction = rep.inner_vertices
                       ? static_cast<double>(rep.inner_coincident) / rep.inner_vertices
                       : 0.0;
    return rep;
}

} // namespace thinshield
