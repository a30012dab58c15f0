#include <doctest.h>

#include "thinshield/datum.hpp"
#include "thinshield/freeboundary.hpp"
#include "thinshield/profiles.hpp"
#include "thinshield/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace thinshield;

namespace {

ScalarField sample(MeshPtr mesh, ProfileFamily family, int m = 1)
{
    const HomogeneousProfile p{family, m};
    return ScalarField::interpolate(mesh, [&](const Point& x) { return profile_value(p, x, 1); });
}

} // namespace

TEST_SUITE("freeboundary")
{
    TEST_CASE("coincidence of a positive field is empty")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const ScalarField one(mesh, 1.0);
        CHECK(coincidence_set(one, 1e-3).empty());
        CHECK(free_boundary(one, coincidence_set(one, 1e-3)).empty());
    }

    TEST_CASE("PSI_1 vanishes on the negative half line")
    {
        auto mesh = Mesh::half_ball(1, 4);
        const auto u = sample(mesh, ProfileFamily::Psi);
        const auto lambda = coincidence_set(u, 1e-12);
        for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
            if (mesh->tag(i) != VertexTag::Thin)
                continue;
            CHECK(lambda.contains(static_cast<int>(i)) == (mesh->vertex(i)[0] <= 0.0));
        }
        const auto gamma = free_boundary(u, lambda);
        REQUIRE(gamma.points.size() == 1);
        CHECK(gamma.points[0].norm() <= mesh->h());
    }

    TEST_CASE("barrier contact set and free boundary")
    {
        const auto rep = barrier_experiment(1.0, 1e-3, 1, 4);
        const auto& u = rep.solution.field;
        const auto lambda = coincidence_set(u, 10.0 * rep.solution.epsilon_final());
        for (std::size_t i = 0; i < u.mesh().num_vertices(); ++i)
            if (u.mesh().tag(i) == VertexTag::Thin && std::abs(u.mesh().vertex(i)[0]) <= 0.75)
                CHECK(lambda.contains(static_cast<int>(i)));
        for (const Point& p : free_boundary(u, lambda).points) {
            CHECK(p.norm() > 0.75);
            CHECK(p.norm() < 1.0);
        }
    }

    TEST_CASE("distance to gamma agrees with brute force")
    {
        auto mesh = Mesh::half_ball(1, 3);
        FreeBoundary gamma;
        gamma.points = {Point::Zero()};
        gamma.edges = {{0, 0}};
        const auto d0 = distance_to_gamma(*mesh, gamma);
        for (std::size_t i = 0; i < mesh->num_vertices(); ++i)
            CHECK(d0[i] == mesh->vertex(i).norm());

        gamma.points = {Point(-0.4, 0, 0), mesh->vertex(5)};
        gamma.edges = {{0, 0}, {0, 0}};
        const auto d = distance_to_gamma(*mesh, gamma);
        CHECK(d[5] == 0.0);
        for (std::size_t i = 0; i < mesh->num_vertices(); ++i) {
            double brute = 1e300;
            for (const Point& g : gamma.points)
                brute = std::min(brute, (mesh->vertex(i) - g).norm());
            CHECK(d[i] == brute);
        }
        CHECK_THROWS_AS(distance_to_gamma(*mesh, FreeBoundary{}), InvalidArgument);
    }

    TEST_CASE("regularity exponents of homogeneous samples")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto psi = sample(mesh, ProfileFamily::Psi);
        const auto fit = regularity_exponent_fit(psi, free_boundary(psi, coincidence_set(psi, 1e-12)));
        CHECK(std::abs(fit.alpha_grad - 0.5) <= 0.1);
        CHECK(std::abs(fit.alpha_val - 1.5) <= 0.1);

        const auto phi = sample(mesh, ProfileFamily::Phi);
        FreeBoundary origin;
        origin.points = {Point::Zero()};
        origin.edges = {{0, 0}};
        CHECK(std::abs(regularity_exponent_fit(phi, origin).alpha_grad - 1.0) <= 0.1);
    }

    TEST_CASE("W22 audit")
    {
        auto mesh3 = Mesh::half_ball(1, 3);
        const auto x1 = ScalarField::interpolate(mesh3, [](const Point& x) { return 2 * x[0] + 1; });
        CHECK(w22_audit(x1, Point::Zero(), 0.25).lhs < 1e-20);

        std::vector<double> ratios;
        for (int level : {4, 5}) {
            const auto phi = sample(Mesh::half_ball(1, level), ProfileFamily::Phi);
            ratios.push_back(w22_audit(phi, Point::Zero(), 0.25).ratio);
        }
        CHECK(std::isfinite(ratios[0]));
        CHECK(ratios[1] == doctest::Approx(ratios[0]).epsilon(0.1));
        CHECK_THROWS_AS(w22_audit(x1, Point(0.6, 0, 0), 0.3), InvalidArgument);
    }

    TEST_CASE("theta Lipschitz audit")
    {
        auto mesh = Mesh::half_ball(1, 3);
        CHECK(theta_lipschitz_audit(ScalarField(mesh, 0.0)) == 0.0);
        const auto x1 = ScalarField::interpolate(mesh, [](const Point& x) { return x[0]; });
        CHECK(theta_lipschitz_audit(x1) < 1e-12);
        std::vector<double> seq;
        for (int level : {3, 4}) {
            const auto rep = barrier_experiment(1.0, 0.5, 1, level);
            seq.push_back(theta_lipschitz_audit(rep.solution.field));
        }
        CHECK(seq[1] < 4.0 * seq[0]);
    }
}
