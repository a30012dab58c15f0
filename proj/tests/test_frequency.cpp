#include <doctest.h>

#include "thinshield/datum.hpp"
#include "thinshield/error.hpp"
#include "thinshield/freeboundary.hpp"
#include "thinshield/frequency.hpp"
#include "thinshield/profiles.hpp"
#include "thinshield/solver.hpp"

#include <cmath>
#include <numbers>

using namespace thinshield;

namespace {

ScalarField profile(MeshPtr mesh, ProfileFamily family, int m = 1)
{
    const HomogeneousProfile p{family, m};
    return ScalarField::interpolate(mesh, [&](const Point& x) { return profile_value(p, x, 1); });
}

ScalarField x1_field(MeshPtr mesh)
{
    return ScalarField::interpolate(mesh, [](const Point& x) { return x[0]; });
}

} // namespace

TEST_SUITE("frequency")
{
    TEST_CASE("cutoff")
    {
        CHECK(cutoff_phi(0.25) == 1.0);
        CHECK(cutoff_phi(0.75) == doctest::Approx(0.5));
        CHECK(cutoff_phi(1.5) == 0.0);
        CHECK(cutoff_phi_prime(0.75) == -2.0);
        CHECK(cutoff_phi_prime(0.25) == 0.0);
    }

    TEST_CASE("closed forms for x1")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto u = x1_field(mesh);
        const auto w = WeightField::unit(mesh);
        for (double r : {0.2, 0.3, 0.4, 0.5}) {
            const auto rec = compute_DHE(u, w, Point::Zero(), r);
            const double d = 7.0 * std::numbers::pi * r * r / 12.0;
            CHECK(rec.D == doctest::Approx(d).epsilon(1e-2));
            CHECK(rec.H == doctest::Approx(d * r).epsilon(1e-2));
            CHECK(rec.D_alt == doctest::Approx(d).epsilon(1e-2));
            CHECK(rec.I == doctest::Approx(1.0).epsilon(1e-2));
            CHECK_FALSE(rec.degenerate);
        }
    }

    TEST_CASE("zero field is degenerate")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const ScalarField zero(mesh, 0.0);
        const auto w = WeightField::unit(mesh);
        CHECK(compute_DHE(zero, w, Point::Zero(), 0.4).degenerate);
        CHECK_THROWS_AS(frequency(zero, w, Point::Zero(), 0.4), Degenerate);
        CHECK_THROWS(compute_DHE(zero, w, Point(0.8, 0, 0), 0.4));
    }

    TEST_CASE("homogeneous profiles")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto w = WeightField::unit(mesh);
        const auto psi = profile(mesh, ProfileFamily::Psi);
        const auto phi = profile(mesh, ProfileFamily::Phi);
        const auto pi = profile(mesh, ProfileFamily::Pi);
        for (double r : {0.2, 0.3, 0.4}) {
            CHECK(std::abs(frequency(psi, w, Point::Zero(), r) - 1.5) <= 0.02);
            CHECK(std::abs(frequency(phi, w, Point::Zero(), r) - 2.0) <= 0.03);
            CHECK(std::abs(frequency(pi, w, Point::Zero(), r) - 3.0) <= 0.05);
        }
    }

    TEST_CASE("monotonicity of exact samples")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto w = WeightField::unit(mesh);
        const std::vector<double> radii{0.1, 0.2, 0.4};
        const auto psi = monotonicity_audit(profile(mesh, ProfileFamily::Psi), w, Point::Zero(), radii, 1.0);
        CHECK(psi.worst_violation <= 1e-3);
        CHECK(psi.minimal_c <= 0.05);
        CHECK(psi.pass);
        const auto x1 = monotonicity_audit(x1_field(mesh), w, Point::Zero(), radii, 0.0);
        CHECK(x1.pass);
        for (double I : x1.I)
            CHECK(I == doctest::Approx(1.0).epsilon(1e-2));
    }

    TEST_CASE("pinching")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto w = WeightField::unit(mesh);
        const auto psi = profile(mesh, ProfileFamily::Psi);
        CHECK(pinching(psi, w, Point::Zero(), 0.3, 0.3, 1.0).delta == doctest::Approx(0.0));
        const auto p = pinching(psi, w, Point::Zero(), 0.1, 0.4, 1.0);
        CHECK(p.delta == doctest::Approx(1.0 * (0.4 - 0.1)).epsilon(0.05));
    }

    TEST_CASE("doubling for x1")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto w = WeightField::unit(mesh);
        const auto u = x1_field(mesh);
        const std::vector<double> radii{0.1, 0.2, 0.4};
        const auto rep = doubling_audit(u, w, Point::Zero(), radii, 1.0, 1.0, 0.0, 1.0);
        for (std::size_t k = 0; k < radii.size(); ++k)
            CHECK(rep.H[k] / std::pow(radii[k], 3) == doctest::Approx(7.0 * std::numbers::pi / 12.0).epsilon(1e-2));
        CHECK(rep.sandwich_slack >= 0.0);
        CHECK(rep.pass);
        CHECK_THROWS_AS(doubling_audit(u, w, Point::Zero(), radii, 2.0, 3.0, 0.0, 1.0), InvalidArgument);
    }

    TEST_CASE("variation identity and residuals for x1")
    {
        std::vector<double> eps_h;
        for (int level : {4, 5}) {
            auto mesh = Mesh::half_ball(1, level);
            const auto rep = variation_identity_audit(x1_field(mesh), WeightField::unit(mesh),
                                                      Point::Zero(), {0.2, 0.3, 0.4});
            for (std::size_t k = 0; k < rep.radii.size(); ++k) {
                const double d = 7.0 * std::numbers::pi * rep.radii[k] * rep.radii[k] / 12.0;
                CHECK(rep.D[k] == doctest::Approx(d).epsilon(1e-2));
                CHECK(rep.D_alt[k] == doctest::Approx(d).epsilon(1e-2));
            }
            CHECK(rep.worst_identity <= 1e-3);
            eps_h.push_back(rep.worst_eps_H);
        }
        CHECK(eps_h[1] < eps_h[0]);
    }

    TEST_CASE("Poincare ratio of PSI_1 is scale free")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto psi = profile(mesh, ProfileFamily::Psi);
        std::vector<double> q;
        for (double r : {0.1, 0.2, 0.4}) {
            const auto rep = poincare_audit(psi, Point::Zero(), r);
            q.push_back(rep.sphere_l2 / (r * rep.ball_dirichlet));
        }
        CHECK(q[1] == doctest::Approx(q[0]).epsilon(0.05));
        CHECK(q[2] == doctest::Approx(q[1]).epsilon(0.05));
        const auto zero = poincare_audit(ScalarField(mesh, 0.0), Point::Zero(), 0.3);
        CHECK(zero.sphere_l2 == 0.0);
        CHECK(zero.constant == 0.0);
    }

    TEST_CASE("frequency lower bound")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto w = WeightField::unit(mesh);
        const std::vector<double> radii{0.1, 0.2};
        const auto psi = frequency_lower_bound_audit(profile(mesh, ProfileFamily::Psi), w, {Point::Zero()}, radii);
        CHECK(psi.min_frequency == doctest::Approx(1.5).epsilon(0.02));
        const auto phi = frequency_lower_bound_audit(profile(mesh, ProfileFamily::Phi), w, {Point::Zero()}, radii);
        CHECK(phi.min_frequency == doctest::Approx(2.0).epsilon(0.02));
        CHECK(phi.evaluated == 2);
        CHECK_THROWS_AS(frequency_lower_bound_audit(profile(mesh, ProfileFamily::Phi), w, {}, radii), InvalidArgument);

        const auto rep = barrier_experiment(1.0, 0.5, 1, 4);
        const auto& u = rep.solution.field;
        const auto gamma = free_boundary(u, coincidence_set(u, penetration_tolerance(u)));
        const auto lb = frequency_lower_bound_audit(u, theta_weight(u, rep.solution.lipschitz),
                                                    gamma.points, {0.05, 0.1, 0.2});
        CHECK(lb.min_frequency >= 1.4);
    }

    TEST_CASE("spatial oscillation")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto w = WeightField::unit(mesh);
        const auto psi = profile(mesh, ProfileFamily::Psi);
        const auto same = spatial_oscillation_audit(psi, w, Point::Zero(), Point(0.01, 0, 0),
                                                    Point(0.01, 0, 0), 0.02, 10.0, 1.0);
        CHECK(same.lhs == 0.0);
        const auto rep = spatial_oscillation_audit(psi, w, Point::Zero(), Point(-0.01, 0, 0),
                                                   Point(0.01, 0, 0), 0.02, 10.0, 1.0);
        CHECK(rep.lhs <= rep.rhs_base);
        CHECK(rep.rhs_base >= 10.0 * 0.02);
        CHECK_THROWS_AS(spatial_oscillation_audit(psi, w, Point::Zero(), Point::Zero(), Point::Zero(),
                                                  0.02, 5.0, 1.0),
                        InvalidArgument);
    }

    TEST_CASE("De Giorgi class")
    {
        auto mesh = Mesh::half_ball(1, 4);
        const auto x1 = x1_field(mesh);
        CHECK(degiorgi_class_audit(x1, Point::Zero(), 0.2, 0.0, 0).lhs < 1e-20);
        CHECK(degiorgi_class_audit(x1, Point::Zero(), 0.2, 2.0, 0).lhs == 0.0);
        CHECK_THROWS_AS(degiorgi_class_audit(x1, Point::Zero(), 0.2, -1.0, 0), InvalidArgument);

        const auto rep = barrier_experiment(1.0, 0.5, 1, 4);
        double worst = 0.0;
        for (double k : {0.0, 0.1, 0.25})
            for (int sign : {1, -1})
                worst = std::max(worst, degiorgi_class_audit(rep.solution.field, Point(0.4, 0, 0), 0.125, k, 0, sign).ratio);
        CHECK(std::isfinite(worst));
    }
}
