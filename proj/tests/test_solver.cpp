#include <doctest.h>

#include "thinshield/datum.hpp"
#include "thinshield/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace thinshield;

namespace {

double min_thin(const ScalarField& u)
{
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.mesh().num_vertices(); ++i)
        if (u.mesh().tag(i) == VertexTag::Thin)
            m = std::min(m, u[i]);
    return m;
}

ContinuationOptions fixed_schedule(double eps_min)
{
    ContinuationOptions o;
    o.epsilon_min = eps_min;
    o.cauchy_tolerance = std::numeric_limits<double>::min();
    return o;
}

} // namespace

TEST_SUITE("solver")
{
    TEST_CASE("positive constant datum is a fixed point")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const auto s = continuation_solve(BoundaryDatum::make_constant(1.0).sample(mesh));
        CHECK(max_abs_difference(s.field, ScalarField(mesh, 1.0)) < 1e-12);
        const auto c = complementarity_residuals(s.field);
        CHECK(c.max_negative_trace == 0.0);
        CHECK(c.max_positive_normal_derivative <= 1e-10);
        CHECK(c.max_product <= 1e-10);

        const auto o = constrained_oracle(BoundaryDatum::make_constant(1.0).sample(mesh));
        CHECK(o.active.empty());
        CHECK(max_abs_difference(o.field, ScalarField(mesh, 1.0)) < 1e-12);
    }

    TEST_CASE("penetration shrinks with eps and energies decrease")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const auto g = BoundaryDatum::make_barrier(1.0, 0.0).sample(mesh);
        double prev = std::numeric_limits<double>::infinity();
        for (double eps : {0.1, 0.05, 0.025}) {
            PenaltyConfig cfg;
            cfg.epsilon = eps;
            cfg.lipschitz = default_lipschitz(g);
            NewtonReport rep;
            const auto u = solve_penalized(g, cfg, {}, &rep);
            const double pen = std::max(0.0, -min_thin(u));
            CHECK(pen <= eps);
            CHECK(pen < prev);
            prev = pen;
            for (std::size_t k = 1; k < rep.energies.size(); ++k)
                CHECK(rep.energies[k] <= rep.energies[k - 1] + 1e-13 * std::abs(rep.energies[k - 1]));
            CHECK(rep.residual <= NewtonOptions{}.tolerance);
        }
    }

    TEST_CASE("empty contact reduces to the unconstrained problem")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const auto g = ScalarField::interpolate(mesh, [](const Point& x) { return 0.5 + 0.3 * x[0]; });
        const auto s = continuation_solve(g, fixed_schedule(1e-4));
        const auto free = solve_unconstrained(g, s.lipschitz);
        CHECK(min_thin(s.field) > 0.0);
        CHECK(h1_distance(s.field, free) <= 1e-6);
    }

    TEST_CASE("continuation: Cauchy differences decrease, oracle agreement")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const auto g = BoundaryDatum::make_barrier(1.0, 0.5).sample(mesh);
        const auto s = continuation_solve(g);
        REQUIRE(s.cauchy_h1.size() >= 2);
        for (std::size_t k = 1; k < s.cauchy_h1.size(); ++k)
            CHECK(s.cauchy_h1[k] < s.cauchy_h1[k - 1]);
        CHECK(s.cauchy_h1.back() <= mesh->h() * mesh->h() / 10.0);
        const auto o = constrained_oracle(g);
        CHECK(h1_distance(s.field, o.field) <= 5e-3);
    }

    TEST_CASE("oracle covers the inner thin disc for the barrier")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const auto o = constrained_oracle(BoundaryDatum::make_barrier(1.0, 1e-3).sample(mesh));
        for (std::size_t i = 0; i < mesh->num_vertices(); ++i)
            if (mesh->tag(i) == VertexTag::Thin && std::abs(mesh->vertex(i)[0]) <= 0.75)
                CHECK(std::find(o.active.begin(), o.active.end(), static_cast<int>(i)) !=
                      o.active.end());
        for (double m : o.multipliers)
            CHECK(m >= 0.0);
        CHECK(o.multipliers.size() == o.active.size());
    }

    TEST_CASE("comparison of ordered data")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const auto g = BoundaryDatum::make_barrier(1.0, 0.2).sample(mesh);
        const auto s = continuation_solve(g, fixed_schedule(1e-4));
        CHECK(comparison_check(s.field, s.field).max_violation == 0.0);

        const auto gc = BoundaryDatum::make_barrier(1.0, 0.3).sample(mesh);
        const auto sc = continuation_solve(gc, fixed_schedule(1e-4));
        const auto rep = comparison_check(s.field, sc.field);
        CHECK(rep.max_violation <= 1e-8);
        CHECK(rep.pass);

        // Smaller sphere data: the lift-1e-3 barrier solution lies below.
        const auto w = continuation_solve(BoundaryDatum::make_barrier(1.0, 1e-3).sample(mesh),
                                          fixed_schedule(1e-4));
        CHECK(comparison_check(w.field, sc.field).pass);
        CHECK_FALSE(comparison_check(sc.field, w.field).pass);
    }

    TEST_CASE("barrier experiment")
    {
        const auto rep = barrier_experiment(1.0, 1e-3, 1, 4);
        CHECK(rep.fraction == 1.0);
        CHECK(rep.inner_vertices > 0);

        const auto big = barrier_experiment(1.0, 0.9, 1, 3);
        MESSAGE("lift 0.9 contact fraction on B'_{3/4}: " << big.fraction);

        // A flat datum is already stationary, so continuation stops at the second stage
        // and contact is judged at 10 eps_final; the lift has to clear that.
        const auto flat = barrier_experiment(0.0, 1.0, 1, 3);
        CHECK(1.0 > 10.0 * flat.solution.epsilon_final());
        CHECK(flat.coincident == 0);
    }

    TEST_CASE("newton budget exhaustion raises SolverError")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const auto g = BoundaryDatum::make_barrier(1.0, 1e-3).sample(mesh);
        PenaltyConfig cfg;
        cfg.epsilon = 1e-3;
        cfg.lipschitz = default_lipschitz(g);
        NewtonOptions opts;
        opts.max_iterations = 1;
        CHECK_THROWS_AS(solve_penalized(g, cfg, opts), SolverError);
    }
}
