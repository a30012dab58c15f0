#include <doctest.h>

#include "thinshield/energy.hpp"
#include "thinshield/error.hpp"
#include "thinshield/field.hpp"
#include "thinshield/mesh.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace thinshield;

namespace {

double total_volume(const Mesh& mesh)
{
    double v = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        v += mesh.volume(c);
    return v;
}

} // namespace

TEST_SUITE("energy")
{
    TEST_CASE("flat and tilted graphs")
    {
        auto mesh = Mesh::half_ball(1, 3);
        const double flat = area_energy(ScalarField(mesh, 0.0));
        CHECK(flat == doctest::Approx(2.0 * total_volume(*mesh)).epsilon(1e-14));
        CHECK(std::abs(flat - M_PI) < 0.05);
        CHECK(area_energy(ScalarField(mesh, 3.7)) == doctest::Approx(flat).epsilon(1e-14));
        const auto x1 = ScalarField::interpolate(mesh, [](const Point& x) { return x[0]; });
        CHECK(area_energy(x1) == doctest::Approx(std::sqrt(2.0) * flat).epsilon(1e-12));
    }

    TEST_CASE("penalty profile")
    {
        CHECK(beta(0.5) == 0.0);
        CHECK(beta(0.0) == 0.0);
        CHECK(beta(-0.5) == doctest::Approx(-0.125));
        CHECK(beta(-3.0) == doctest::Approx(-2.5));
        for (double eps : {1e-1, 1e-3})
            CHECK(beta_eps(-eps, eps) == doctest::Approx(-1.0 / (2.0 * eps)));
        // beta is C^1 at the junction t = -1.
        CHECK(beta_prime(-1.0 + 1e-12) == doctest::Approx(beta_prime(-1.0 - 1e-12)));
    }

    TEST_CASE("chi blend")
    {
        for (double L : {0.5, 1.0, 3.0}) {
            CHECK(chi(L / 2.0, L) == 0.0);
            CHECK(chi(4.0 * L, L) == doctest::Approx(2.0 * L * L));
            CHECK(chi_prime(3.0 * L, L) == doctest::Approx(L));
            CHECK(chi(3.0 * L, L) == doctest::Approx(0.5 * L * L));
            for (double t : {0.3 * L, 1.5 * L, 2.5 * L, 5.0 * L}) {
                const double d = 1e-6 * L;
                CHECK(chi_prime(t, L) ==
                      doctest::Approx((chi(t + d, L) - chi(t - d, L)) / (2 * d)).epsilon(1e-6));
                CHECK(chi_second(t, L) ==
                      doctest::Approx((chi_prime(t + d, L) - chi_prime(t - d, L)) / (2 * d))
                          .epsilon(1e-6));
            }
        }
        CHECK_THROWS_AS(chi(-1.0, 1.0), InvalidArgument);
    }

    TEST_CASE("vector field A")
    {
        CHECK(vector_field_A(Point::Zero(), 1.0).norm() == 0.0);
        const Point a = vector_field_A(Point(1, 0, 0), 1.0);
        CHECK(a[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(a[1] == 0.0);

        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-4.0, 4.0);
        const double L = 1.0;
        for (int k = 0; k < 200; ++k) {
            const Point p(u(rng), u(rng), 0), q(u(rng), u(rng), 0);
            CHECK((vector_field_A(p, L) - vector_field_A(q, L)).norm() <= 2.5 * (p - q).norm());
            const Eigen::Matrix3d J = jacobian_A(p, L);
            for (int i = 0; i < 2; ++i) {
                const double d = 1e-6;
                Point e = Point::Zero();
                e[i] = d;
                const Point fd = (vector_field_A(p + e, L) - vector_field_A(p - e, L)) / (2 * d);
                CHECK((J.col(i).head<2>() - fd.head<2>()).norm() < 1e-6);
            }
        }
    }

    TEST_CASE("penalized energy terms")
    {
        auto mesh = Mesh::half_ball(1, 3);
        PenaltyConfig cfg;
        cfg.epsilon = 1e-2;
        cfg.lipschitz = 2.0;
        CHECK(penalized_energy(ScalarField(mesh, 0.0), cfg) ==
              doctest::Approx(area_energy(ScalarField(mesh, 0.0))));

        double weight = 0.0;
        for (std::size_t i = 0; i < mesh->num_vertices(); ++i)
            weight += mesh->thin_weight(i);
        CHECK(weight == doctest::Approx(2.0).epsilon(1e-12));

        // F_eps(-delta) = int_{-delta}^0 -2 beta_eps, by Simpson on a fine grid.
        for (double delta : {0.5 * cfg.epsilon, 3.0 * cfg.epsilon}) {
            const int m = 2000;
            const double hstep = delta / m;
            double s = 0.0;
            for (int k = 0; k <= m; ++k) {
                const double c = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                s += c * -2.0 * beta_eps(-delta + k * hstep, cfg.epsilon);
            }
            s *= hstep / 3.0;
            const ScalarField v(mesh, -delta);
            CHECK(thin_penalty_energy(v, cfg.epsilon) == doctest::Approx(2.0 * s).epsilon(1e-9));
            CHECK(thin_penalty_energy(v, cfg.epsilon) > 0.0);
        }

        const auto tilted = ScalarField::interpolate(mesh, [](const Point& x) { return 0.3 * x[0]; });
        CHECK(penalized_energy(tilted, cfg) - thin_penalty_energy(tilted, cfg.epsilon) ==
              doctest::Approx(area_energy(tilted)).epsilon(1e-14));
    }

    TEST_CASE("hessian matches finite differences of the residual")
    {
        auto mesh = Mesh::half_ball(1, 2);
        PenaltyConfig cfg;
        cfg.epsilon = 0.05;
        cfg.lipschitz = 0.3; // puts cells in every branch of chi
        // Thin values stay off -eps, where beta_eps' jumps.
        const auto v = ScalarField::interpolate(
            mesh, [](const Point& x) { return 0.6 * x[0] - 0.043 + 0.4 * x[0] * x[1]; });
        const auto H = penalized_hessian(v, cfg);
        const DofMap dofs(*mesh);
        Eigen::MatrixXd dense = Eigen::MatrixXd(H);
        double worst = 0.0;
        for (int j = 0; j < dofs.size(); ++j) {
            const double t = 1e-6;
            ScalarField plus = v, minus = v;
            plus[dofs.vertex(j)] += t;
            minus[dofs.vertex(j)] -= t;
            const Eigen::VectorXd fd =
                dofs.restrict((penalized_residual(plus, cfg) - penalized_residual(minus, cfg)) /
                              (2 * t));
            worst = std::max(worst, (dense.col(j) - fd).norm() / std::max(1.0, fd.norm()));
        }
        CHECK(worst <= 1e-6);
        CHECK((dense - dense.transpose()).norm() <= 1e-12 * dense.norm());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }

    TEST_CASE("theta weight")
    {
        auto mesh = Mesh::half_ball(1, 2);
        for (double w : theta_weight(ScalarField(mesh, 0.0), 1.0).values)
            CHECK(w == 1.0);
        const auto x1 = ScalarField::interpolate(mesh, [](const Point& x) { return x[0]; });
        for (double w : theta_weight(x1, 1.0).values)
            CHECK(w == doctest::Approx(1.0 / std::sqrt(2.0)));
    }
}
