#include <doctest.h>

#include "thinshield/blowup.hpp"
#include "thinshield/freeboundary.hpp"
#include "thinshield/frequency.hpp"
#include "thinshield/profiles.hpp"
#include "thinshield/solver.hpp"

#include <cmath>

using namespace thinshield;

namespace {

ScalarField profile(MeshPtr mesh, ProfileFamily family, int m = 1, double scale = 1.0)
{
    const HomogeneousProfile p{family, m};
    return ScalarField::interpolate(
        mesh, [&](const Point& x) { return scale * profile_value(p, x, 1); });
}

double relative_l2(const ScalarField& a, const ScalarField& b)
{
    ScalarField d = a;
    for (std::size_t i = 0; i < d.values().size(); ++i)
        d[i] -= b[i];
    return std::sqrt(l2_inner_half(d, d) / l2_inner_half(b, b));
}

} // namespace

TEST_SUITE("blowup")
{
    TEST_CASE("profile values")
    {
        CHECK(std::abs(profile_value(ProfileFamily::Phi, 1, 1.0, 1.0)) < 1e-14);
        CHECK(profile_value(ProfileFamily::Psi, 1, 1.0, 0.0) == doctest::Approx(1.0));
        CHECK(profile_value(ProfileFamily::Pi, 1, 1.0, 0.0) == 0.0);
        CHECK(profile_value(ProfileFamily::Psi, 1, -1.0, 0.0) == doctest::Approx(0.0));
        // Even in the normal variable.
        CHECK(profile_value(ProfileFamily::Psi, 2, 0.3, 0.2) ==
              doctest::Approx(profile_value(ProfileFamily::Psi, 2, 0.3, -0.2)));
        CHECK_THROWS(profile_value(ProfileFamily::Phi, 0, 0.1, 0.1));
        CHECK(nearest_admissible_frequency(1.52) == 1.5);
        CHECK(nearest_admissible_frequency(2.9) == 3.0);
    }

    TEST_CASE("rescaling a homogeneous field is r independent")
    {
        auto source = Mesh::half_ball(1, 6);
        auto target = Mesh::half_ball(1, 4);
        const auto psi = profile(source, ProfileFamily::Psi);
        const auto a = rescale(psi, Point::Zero(), 0.2, target);
        const auto b = rescale(psi, Point::Zero(), 0.4, target);
        CHECK(relative_l2(a, b) < 1e-2);

        const auto rec = compute_DHE(a, WeightField::unit(target), Point::Zero(), 1.0);
        CHECK(rec.H == doctest::Approx(1.0).epsilon(2e-2));

        // Fixed point: the normalized profile itself, closer on finer sources.
        const auto exact = profile(target, ProfileFamily::Psi);
        const auto coarse = rescale(profile(Mesh::half_ball(1, 4), ProfileFamily::Psi), Point::Zero(), 0.3, target);
        const auto fine = rescale(psi, Point::Zero(), 0.3, target);
        auto normalized = [&](const ScalarField& f) {
            const double c = l2_inner_half(f, exact) / l2_inner_half(exact, exact);
            ScalarField g = exact;
            for (double& v : g.values())
                v *= c;
            return relative_l2(f, g);
        };
        CHECK(normalized(fine) < normalized(coarse));
    }

    TEST_CASE("self classification")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto psi = classify_blowup(profile(mesh, ProfileFamily::Psi));
        CHECK(psi.classified);
        CHECK(psi.profile == HomogeneousProfile{ProfileFamily::Psi, 1});
        CHECK(psi.homogeneity == 1.5);
        CHECK(psi.distance < 1e-2);

        const auto phi2 = classify_blowup(profile(mesh, ProfileFamily::Phi, 2));
        CHECK(phi2.profile == HomogeneousProfile{ProfileFamily::Phi, 2});
        CHECK(phi2.homogeneity == 4.0);

        const auto scaled = classify_blowup(profile(mesh, ProfileFamily::Psi, 1, 0.7));
        CHECK(scaled.profile == psi.profile);
        CHECK(scaled.distance == doctest::Approx(psi.distance).epsilon(1e-9));
        CHECK(scaled.scale == doctest::Approx(0.7 * psi.scale).epsilon(1e-9));
    }

    TEST_CASE("regular points")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const auto w = WeightField::unit(mesh);
        FreeBoundary origin;
        origin.points = {Point::Zero()};
        origin.edges = {{0, 0}};
        const auto psi = detect_regular_points(profile(mesh, ProfileFamily::Psi), w, origin, 0.3);
        CHECK(psi.marked == std::vector<int>{0});
        const auto phi = detect_regular_points(profile(mesh, ProfileFamily::Phi), w, origin, 0.3);
        CHECK(phi.marked.empty());

        const auto rep = barrier_experiment(1.0, 0.5, 1, 4);
        const auto& u = rep.solution.field;
        const auto gamma = free_boundary(u, coincidence_set(u, penetration_tolerance(u)));
        const auto reg = detect_regular_points(u, theta_weight(u, rep.solution.lipschitz), gamma);
        MESSAGE("barrier: " << reg.marked.size() << " of " << gamma.points.size() << " gamma points regular");
    }

    TEST_CASE("gamma normal in the plane")
    {
        FreeBoundary line;
        for (int k = -5; k <= 5; ++k) {
            line.points.push_back(Point(0.1 * k, 0.3 * 0.1 * k, 0));
            line.edges.push_back({0, 0});
        }
        const Point nrm = gamma_normal(line, Point::Zero(), 0.6, 2);
        CHECK(std::abs(nrm.dot(Point(1, 0.3, 0).normalized())) < 1e-12);
        CHECK(nrm.norm() == doctest::Approx(1.0));
    }
}
