#include "thinshield/geometry.hpp"

#include "ball_quadrature.hpp"
#include "thinshield/error.hpp"
#include "thinshield/frequency.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace thinshield {

WeightedPointCloud WeightedPointCloud::from_gamma(const FreeBoundary& gamma)
{
    WeightedPointCloud mu;
    mu.points = gamma.points;
    mu.weights.assign(gamma.points.size(), 1.0);
    return mu;
}

double WeightedPointCloud::mass_in(const Point& x, double r) const
{
    double m = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        if ((points[i] - x).norm() < r)
            m += weights[i];
    return m;
}

FlatnessResult mean_flatness_detail(const WeightedPointCloud& mu, const Point& x, double r, int n)
{
    if (!(r > 0.0))
        throw InvalidArgument("mean_flatness: radius must be positive");
    if (n != 1 && n != 2)
        throw InvalidArgument("mean_flatness: n must be 1 or 2");
    if (mu.weights.size() != mu.points.size())
        throw InvalidArgument("mean_flatness: one weight per point required");
    FlatnessResult res;
    Point bary = Point::Zero();
    for (std::size_t i = 0; i < mu.points.size(); ++i) {
        if (mu.weights[i] < 0.0)
            throw InvalidArgument("mean_flatness: negative weight");
        if ((mu.points[i] - x).norm() < r) {
            res.mass += mu.weights[i];
            bary += mu.weights[i] * mu.points[i];
        }
    }
    if (res.mass == 0.0)
        return res;
    bary /= res.mass;
    res.barycenter = bary;
    const int d = n + 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < mu.points.size(); ++i) {
        if ((mu.points[i] - x).norm() >= r)
            continue;
        const Eigen::VectorXd y = (mu.points[i] - bary).head(d);
        M += mu.weights[i] * y * y.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const Eigen::VectorXd lam = es.eigenvalues(); // ascending
    res.beta2 = std::max(0.0, lam[0] + lam[1]) / std::pow(r, n + 1);
    for (int k = 2; k < d; ++k) {
        Point v = Point::Zero();
        v.head(d) = es.eigenvectors().col(k);
        res.span.push_back(v);
    }
    return res;
}

double mean_flatness(const WeightedPointCloud& mu, const Point& x, double r, int n)
{
    return mean_flatness_detail(mu, x, r, n).beta2;
}

FlatnessPinchingReport flatness_vs_pinching_audit(const ScalarField& u, const WeightField& weight,
                                                  const WeightedPointCloud& mu, const Point& p,
                                                  double r, double R, double c_add)
{
    const int n = u.mesh().n();
    if (!(R > 6.0) || !(r > 0.0))
        throw InvalidArgument("flatness_vs_pinching_audit: needs R > 6 and r > 0");
    if (p.norm() + (2.0 * R + 5.0) * r > 1.0 + 1e-12)
        throw InvalidArgument("flatness_vs_pinching_audit: window exits the mesh");
    FlatnessPinchingReport rep;
    rep.beta2 = mean_flatness(mu, p, r, n);
    const double inner = 0.5 * (R - 5.0) * r;
    const double outer = (2.0 * R + 4.0) * r;
    for (std::size_t i = 0; i < mu.points.size(); ++i) {
        if ((mu.points[i] - p).norm() >= r || mu.weights[i] == 0.0)
            continue;
        rep.mass += mu.weights[i];
        rep.integral +=
            mu.weights[i] * pinching(u, weight, mu.points[i], inner, outer, c_add).delta;
    }
    rep.rhs_base = std::pow(r, 1.0 - n) * (rep.integral + r * r * rep.mass);
    if (rep.beta2 == 0.0)
        rep.constant = 0.0;
    else
        rep.constant = rep.rhs_base > 0.0 ? rep.beta2 / rep.rhs_base
                                          : std::numeric_limits<double>::infinity();
    return rep;
}

MinkowskiReport minkowski_audit(const FreeBoundary& gamma, const Mesh& mesh,
                                const Point& k_center, double k_radius,
                                const std::vector<double>& radii)
{
    if (!(k_radius > 0.0))
        throw InvalidArgument("minkowski_audit: K must have positive radius");
    MinkowskiReport rep;
    rep.radii = radii;
    std::sort(rep.radii.begin(), rep.radii.end());
    for (const Point& g : gamma.points)
        if ((g - k_center).norm() <= k_radius)
            ++rep.points;
    const auto fine = Mesh::half_ball(mesh.n(), mesh.level() + 1);
    // Distance from each fine centroid in K to gamma, computed once.
    std::vector<std::pair<double, double>> samples; // (distance, volume)
    const double reach = rep.radii.empty() ? 0.0 : rep.radii.back();
    for (std::size_t c = 0; c < fine->num_cells(); ++c) {
        const Point& x = fine->centroid(c);
        if ((x - k_center).norm() > k_radius)
            continue;
        double d = std::numeric_limits<double>::infinity();
        for (const Point& g : gamma.points)
            d = std::min(d, (x - g).norm());
        if (d < reach)
            samples.emplace_back(d, fine->volume(c));
    }
    for (double r : rep.radii) {
        double vol = 0.0;
        for (const auto& [d, v] : samples)
            if (d < r)
                vol += v;
        vol *= 2.0;
        rep.volume.push_back(vol);
        rep.ratio.push_back(vol / (r * r));
        rep.max_ratio = std::max(rep.max_ratio, vol / (r * r));
    }
    return rep;
}

TestVectorField bump_test_field(int n, const Point& center, double radius, double height,
                                int kind)
{
    if (kind < 0 || kind > 3)
        throw InvalidArgument("bump_test_field: kind must be 0..3");
    if (!(radius > 0.0) || !(height > 0.0))
        throw InvalidArgument("bump_test_field: support must be nonempty");
    static constexpr std::array<const char*, 4> names{"horizontal", "normal", "vertical",
                                                      "dilation"};
    TestVectorField Y;
    Y.center = center;
    Y.radius = radius;
    Y.height = height;
    Y.name = std::string(names[kind]);
    const double s2 = radius * radius, z2 = height * height;
    // phi = b(x) zeta(z) and its gradient in R^4.
    auto profile = [=](const GraphPoint& X, double& phi, GraphPoint& grad) {
        const Point dx = X.head<3>() - center;
        const double q = dx.squaredNorm() / s2;
        const double t = X[3] * X[3] / z2;
        grad.setZero();
        if (q >= 1.0 || t >= 1.0) {
            phi = 0.0;
            return;
        }
        // The linear factor in the cap breaks the z -> -z symmetry between the two sheets.
        const double lin = 1.0 + 0.5 * X[3] / height;
        const double b = std::pow(1.0 - q, 3), cap = std::pow(1.0 - t, 3);
        const double zeta = lin * cap;
        phi = b * zeta;
        grad.head<3>() = -6.0 * (1.0 - q) * (1.0 - q) / s2 * zeta * dx;
        grad[3] = b * (0.5 / height * cap - 6.0 * lin * (1.0 - t) * (1.0 - t) / z2 * X[3]);
    };
    GraphPoint dir = GraphPoint::Zero();
    if (kind == 0)
        dir[0] = 1.0;
    else if (kind == 1)
        dir[n] = 1.0;
    else if (kind == 2)
        dir[3] = 1.0;
    Y.value = [=](const GraphPoint& X) -> GraphPoint {
        double phi;
        GraphPoint grad;
        profile(X, phi, grad);
        if (kind < 3)
            return phi * dir;
        GraphPoint v = GraphPoint::Zero();
        v.head<3>() = phi * (X.head<3>() - center);
        return v;
    };
    Y.jacobian = [=](const GraphPoint& X) -> Eigen::Matrix4d {
        double phi;
        GraphPoint grad;
        profile(X, phi, grad);
        if (kind < 3)
            return dir * grad.transpose();
        GraphPoint w = GraphPoint::Zero();
        w.head<3>() = X.head<3>() - center;
        Eigen::Matrix4d J = w * grad.transpose();
        for (int i = 0; i < 3; ++i)
            J(i, i) += phi;
        return J;
    };
    return Y;
}

std::vector<TestVectorField> standard_test_fields(int n, const Point& c1, const Point& c2)
{
    std::vector<TestVectorField> out;
    for (const Point& c : {Point(Point::Zero()), c1, c2}) {
        const double s = std::min(0.4, 0.9 * (1.0 - c.norm()));
        for (int kind = 0; kind < 4; ++kind)
            out.push_back(bump_test_field(n, c, s, 2.0, kind));
    }
    return out;
}

namespace {

/// Ambient coordinates used in dimension n: x_0..x_n and the height.
std::vector<int> ambient(int n)
{
    std::vector<int> idx;
    for (int i = 0; i <= n; ++i)
        idx.push_back(i);
    idx.push_back(3);
    return idx;
}

} // namespace

double c1_norm(const TestVectorField& Y, int n)
{
    const auto idx = ambient(n);
    const int N = n == 1 ? 48 : 20;
    double sup_v = 0.0, sup_j = 0.0;
    std::array<int, 4> k{};
    const int dims = n + 2;
    const int total = static_cast<int>(std::pow(N + 1, dims));
    for (int flat = 0; flat < total; ++flat) {
        int rem = flat;
        for (int a = 0; a < dims; ++a) {
            k[a] = rem % (N + 1);
            rem /= (N + 1);
        }
        GraphPoint X = GraphPoint::Zero();
        for (int a = 0; a < dims; ++a) {
            const int i = idx[a];
            const double t = -1.0 + 2.0 * k[a] / N;
            X[i] = i == 3 ? t * Y.height : Y.center[i] + t * Y.radius;
        }
        sup_v = std::max(sup_v, Y.value(X).norm());
        sup_j = std::max(sup_j, Y.jacobian(X).norm());
    }
    return sup_v + sup_j;
}

double two_valued_first_variation(const ScalarField& u, const TestVectorField& Y)
{
    const Mesh& mesh = u.mesh();
    const int n = mesh.n();
    if (Y.center.norm() + Y.radius > 1.0 + 1e-12)
        throw InvalidArgument("two_valued_first_variation: support leaves B_1 x R");
    // Support check on samples just outside the declared support.
    {
        for (int k = 0; k < 64; ++k) {
            const double a = 2.0 * std::numbers::pi * k / 64.0;
            GraphPoint X = GraphPoint::Zero();
            X.head<3>() = Y.center;
            X[0] += 1.001 * Y.radius * std::cos(a);
            X[n] += 1.001 * Y.radius * std::sin(a);
            X[3] = 0.5 * Y.height * std::sin(3.0 * a);
            GraphPoint Z = GraphPoint::Zero();
            Z.head<3>() = Y.center + 0.5 * Y.radius * Point(std::cos(a), 0.0, 0.0);
            Z[3] = (k % 2 ? 1.001 : -1.001) * Y.height;
            if (Y.value(X).norm() > 1e-12 || Y.value(Z).norm() > 1e-12)
                throw InvalidArgument("two_valued_first_variation: Y is not supported where declared");
        }
    }
    const auto idx = ambient(n);
    const int m = n + 2;
    Point mirror_center = Y.center;
    mirror_center[n] = -mirror_center[n];
    double total = 0.0;
    std::vector<int> cells;
    // Pieces: (reflect, sign) over {false,true} x {+1,-1}.
    for (int reflect = 0; reflect < 2; ++reflect) {
        cells.clear();
        mesh.cells_near(reflect ? mirror_center : Y.center, Y.radius, cells);
        for (int sign : {1, -1}) {
            for (int c : cells) {
                Point g = u.cell_gradient(c);
                if (reflect)
                    g[n] = -g[n];
                g *= sign;
                const double area = std::sqrt(1.0 + g.squaredNorm());
                Eigen::Vector4d nu = Eigen::Vector4d::Zero();
                for (int i = 0; i <= n; ++i)
                    nu[i] = -g[i] / area;
                nu[3] = 1.0 / area;
                const Point centroid = mesh.centroid(c);
                const double mean = u.cell_mean(c);
                const Point grad = u.cell_gradient(c);
                auto visit = [&](int, const Point& x, double w, int) {
                    GraphPoint X = GraphPoint::Zero();
                    X.head<3>() = x;
                    if (reflect)
                        X[n] = -X[n];
                    X[3] = sign * (mean + grad.dot(x - centroid));
                    const Eigen::Matrix4d J = Y.jacobian(X);
                    double div = 0.0;
                    for (int a = 0; a < m; ++a) {
                        const int i = idx[a];
                        div += J(i, i);
                        for (int b = 0; b < m; ++b)
                            div -= nu[i] * J(i, idx[b]) * nu[idx[b]];
                    }
                    total += w * div * area;
                };
                const auto ids = mesh.cell(c);
                if (n == 1) {
                    detail::impl::Simplex<2> s{
                        {mesh.vertex(ids[0]), mesh.vertex(ids[1]), mesh.vertex(ids[2])}};
                    for (const auto& child : detail::impl::red_children<2>(s))
                        detail::impl::apply_rule<2>(child, mesh.volume(c) / 4.0, c, 0, visit);
                } else {
                    detail::impl::Simplex<3> s{{mesh.vertex(ids[0]), mesh.vertex(ids[1]),
                                                mesh.vertex(ids[2]), mesh.vertex(ids[3])}};
                    detail::impl::apply_rule<3>(s, mesh.volume(c), c, 0, visit);
                }
            }
        }
    }
    return total;
}

} // namespace thinshield
