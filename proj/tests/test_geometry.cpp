#include <doctest.h>

#include "thinshield/error.hpp"
#include "thinshield/freeboundary.hpp"
#include "thinshield/geometry.hpp"
#include "thinshield/profiles.hpp"
#include "thinshield/solver.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace thinshield;

namespace {

FreeBoundary points(std::vector<Point> pts)
{
    FreeBoundary g;
    g.points = std::move(pts);
    g.edges.assign(g.points.size(), {0, 0});
    return g;
}

// Grid search over line directions on the sphere, refined around the best cell.
double grid_line_flatness(const std::vector<Point>& pts, const std::vector<double>& w, double r)
{
    Point bar = Point::Zero();
    double mass = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        bar += w[k] * pts[k];
        mass += w[k];
    }
    bar /= mass;
    auto cost = [&](double a, double b) {
        const Point d(std::cos(a) * std::sin(b), std::sin(a) * std::sin(b), std::cos(b));
        double s = 0.0;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const Point y = pts[k] - bar;
            s += w[k] * (y.squaredNorm() - std::pow(y.dot(d), 2));
        }
        return s;
    };
    double ba = 0.0, bb = 0.0, best = cost(0, 0);
    double span_a = std::numbers::pi, span_b = std::numbers::pi / 2;
    double ca = std::numbers::pi, cb = std::numbers::pi / 2;
    for (int round = 0; round < 40; ++round) {
        for (int i = 0; i <= 40; ++i) {
            for (int j = 0; j <= 40; ++j) {
                const double a = ca + span_a * (i / 20.0 - 1.0), b = cb + span_b * (j / 20.0 - 1.0);
                const double c = cost(a, b);
                if (c < best) {
                    best = c;
                    ba = a;
                    bb = b;
                }
            }
        }
        ca = ba;
        cb = bb;
        span_a *= 0.25;
        span_b *= 0.25;
    }
    return best / std::pow(r, 3);
}

} // namespace

TEST_SUITE("geometry")
{
    TEST_CASE("flat clouds have zero flatness")
    {
        WeightedPointCloud mu;
        for (int k = -4; k <= 4; ++k) {
            mu.points.push_back(Point(0.1 * k, 0.2 + 0.05 * k, 0.3 - 0.02 * k));
            mu.weights.push_back(1.0 + 0.1 * k * k);
        }
        CHECK(mean_flatness(mu, Point::Zero(), 1.0, 2) < 1e-14);
        WeightedPointCloud one;
        one.points = {Point(0.1, 0.1, 0)};
        one.weights = {2.0};
        CHECK(mean_flatness(one, Point::Zero(), 0.5, 1) == 0.0);
        CHECK(mean_flatness(WeightedPointCloud{}, Point::Zero(), 0.5, 2) == 0.0);
    }

    TEST_CASE("two points in the line: beta^2 = 2 d^2 / r^2")
    {
        for (double d : {0.1, 0.3}) {
            WeightedPointCloud mu;
            mu.points = {Point(d, 0, 0), Point(-d, 0, 0)};
            mu.weights = {1.0, 1.0};
            const double r = 0.5;
            CHECK(mean_flatness(mu, Point::Zero(), r, 1) == doctest::Approx(2 * d * d / (r * r)));
            CHECK(mu.mass_in(Point::Zero(), r) == 2.0);
            CHECK(mu.mass_in(Point(d, 0, 0), 0.5 * d) == 1.0);
        }
    }

    TEST_CASE("principal axes match a grid search over lines")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-0.6, 0.6), wd(0.2, 1.5);
        for (int cloud = 0; cloud < 5; ++cloud) {
            WeightedPointCloud mu;
            for (int k = 0; k < 12; ++k) {
                mu.points.push_back(Point(u(rng), u(rng), 0.4 * u(rng)));
                mu.weights.push_back(wd(rng));
            }
            const double r = 1.2; // every atom inside
            const double eig = mean_flatness(mu, Point::Zero(), r, 2);
            CHECK(eig == doctest::Approx(grid_line_flatness(mu.points, mu.weights, r)).epsilon(1e-6));
            const auto detail = mean_flatness_detail(mu, Point::Zero(), r, 2);
            REQUIRE(detail.span.size() == 1);
            CHECK(detail.mass == doctest::Approx(std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0)));
        }
    }

    TEST_CASE("flatness against pinching")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const HomogeneousProfile p{ProfileFamily::Psi, 1};
        const auto psi = ScalarField::interpolate(mesh, [&](const Point& x) { return profile_value(p, x, 1); });
        const auto w = WeightField::unit(mesh);
        WeightedPointCloud single;
        single.points = {Point::Zero()};
        single.weights = {1.0};
        const double r = 1.0 / 19.0;
        const auto rep = flatness_vs_pinching_audit(psi, w, single, Point::Zero(), r, 7.0, 1.0);
        CHECK(rep.beta2 == 0.0);
        CHECK(rep.mass == 1.0);
        CHECK(rep.rhs_base >= r * r);
        CHECK_THROWS_AS(flatness_vs_pinching_audit(psi, w, single, Point::Zero(), 0.2, 7.0, 1.0),
                        InvalidArgument);
    }

    TEST_CASE("Minkowski content of isolated points")
    {
        auto mesh = Mesh::half_ball(1, 5);
        const std::vector<double> radii{0.1, 0.15, 0.2};
        const auto one = minkowski_audit(points({Point::Zero()}), *mesh, Point::Zero(), 0.75, radii);
        CHECK(one.points == 1);
        for (double q : one.ratio)
            CHECK(q == doctest::Approx(std::numbers::pi).epsilon(0.1));
        const auto two = minkowski_audit(points({Point(-0.4, 0, 0), Point(0.4, 0, 0)}), *mesh,
                                         Point::Zero(), 0.75, radii);
        CHECK(two.points == 2);
        CHECK(two.ratio.front() == doctest::Approx(2 * std::numbers::pi).epsilon(0.1));
        CHECK(two.max_ratio <= 2 * 2 * std::numbers::pi);
    }

    TEST_CASE("first variation vanishes on planes")
    {
        // Zero in the continuum; what remains is quadrature error of the bump fields.
        auto mesh = Mesh::half_ball(1, 4);
        const ScalarField c(mesh, 0.3);
        for (const auto& Y : standard_test_fields(1, Point(0.3, 0, 0), Point(-0.3, 0, 0)))
            CHECK(std::abs(two_valued_first_variation(c, Y)) <= 1e-6 * c1_norm(Y, 1));
        CHECK(standard_test_fields(1, Point(0.3, 0, 0), Point(-0.3, 0, 0)).size() == 12);
    }

    TEST_CASE("first variation of an unconstrained minimal graph")
    {
        auto mesh = Mesh::half_ball(1, 4);
        const auto g = ScalarField::interpolate(mesh, [](const Point& x) { return 0.5 + 0.3 * x[0]; });
        const auto u = solve_unconstrained(g, 2.0);
        for (const auto& Y : standard_test_fields(1, Point(0.3, 0, 0), Point(-0.3, 0, 0)))
            CHECK(std::abs(two_valued_first_variation(u, Y)) <= 1e-2 * c1_norm(Y, 1));
    }

    TEST_CASE("first variation over the barrier contact shrinks under refinement")
    {
        std::vector<double> worst;
        for (int level : {3, 4}) {
            const auto rep = barrier_experiment(1.0, 0.5, 1, level);
            const auto& u = rep.solution.field;
            const auto gamma = free_boundary(u, coincidence_set(u, penetration_tolerance(u)));
            REQUIRE(gamma.points.size() == 2);
            double w = 0.0;
            for (const auto& Y : standard_test_fields(1, gamma.points[0], gamma.points[1]))
                w = std::max(w, std::abs(two_valued_first_variation(u, Y)) / c1_norm(Y, 1));
            worst.push_back(w);
        }
        CHECK(worst[1] < worst[0]);
    }

    TEST_CASE("test fields must stay inside the cylinder")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const ScalarField c(mesh, 0.0);
        const auto Y = bump_test_field(1, Point(0.9, 0, 0), 0.3, 0.5, 0);
        CHECK_THROWS_AS(two_valued_first_variation(c, Y), InvalidArgument);
    }
}
