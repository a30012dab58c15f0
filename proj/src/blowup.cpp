#include "thinshield/blowup.hpp"

#include "thinshield/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace thinshield {

ScalarField rescale(const ScalarField& u, const FrequencyRecord& record, MeshPtr target)
{
    const int n = u.mesh().n();
    if (target->n() != n)
        throw InvalidArgument("rescale: target mesh has a different dimension");
    check_center_radius(u.mesh(), record.x0, record.r);
    if (!(record.H > 0.0))
        throw Degenerate("rescale: H vanishes");
    const double r = record.r;
    const double factor = std::pow(r, 0.5 * n) / std::sqrt(record.H);
    std::vector<double> values(target->num_vertices());
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = factor * evaluate_near(u, Point(record.x0 + r * target->vertex(i)));
    return ScalarField(std::move(target), std::move(values));
}

ScalarField rescale(const ScalarField& u, const Point& x0, double r, MeshPtr target)
{
    const FrequencyRecord rec = compute_DHE(u, WeightField::unit(u.mesh_ptr()), x0, r);
    return rescale(u, rec, std::move(target));
}

double nearest_admissible_frequency(double I)
{
    // Candidates near I: 2m - 1/2, 2m, 2m + 1 for the two closest m.
    const int m0 = std::max(1, static_cast<int>(std::floor(I / 2.0)));
    double best = 1.5;
    for (int m = std::max(1, m0 - 1); m <= m0 + 1; ++m)
        for (double lam : {2.0 * m - 0.5, 2.0 * m, 2.0 * m + 1.0})
            if (std::abs(lam - I) < std::abs(best - I))
                best = lam;
    return best;
}

namespace {

std::vector<Point> default_directions(int n)
{
    if (n == 1)
        return {Point::UnitX(), Point(-1.0, 0.0, 0.0)};
    std::vector<Point> dirs;
    constexpr int count = 36;
    for (int k = 0; k < count; ++k) {
        const double a = 2.0 * std::numbers::pi * k / count;
        dirs.emplace_back(std::cos(a), std::sin(a), 0.0);
    }
    return dirs;
}

} // namespace

ProfileMatch classify_blowup(const ScalarField& field, const ClassifyOptions& opts)
{
    if (opts.m_max < 1)
        throw InvalidArgument("classify_blowup: m_max must be at least 1");
    const MeshPtr& mesh = field.mesh_ptr();
    const int n = mesh->n();
    const double ff = l2_inner_half(field, field);
    if (!(ff > 0.0))
        throw Degenerate("classify_blowup: zero field");
    const auto dirs = opts.directions.empty() ? default_directions(n) : opts.directions;

    ProfileMatch best;
    best.distance = std::numeric_limits<double>::infinity();
    for (ProfileFamily fam : {ProfileFamily::Phi, ProfileFamily::Psi, ProfileFamily::Pi}) {
        for (int m = 1; m <= opts.m_max; ++m) {
            const HomogeneousProfile p{fam, m};
            for (const Point& dir : dirs) {
                const auto sample = ScalarField::interpolate(
                    mesh, [&](const Point& x) { return profile_value(p, x, n, dir); });
                const double pp = l2_inner_half(sample, sample);
                if (!(pp > 0.0))
                    continue;
                const double c = std::max(0.0, l2_inner_half(field, sample) / pp);
                // ||f - c p||^2 = ff - 2c fp + c^2 pp, with fp = c pp when c > 0.
                const double d2 = c > 0.0 ? ff - c * c * pp : ff;
                const double dist = std::sqrt(std::max(0.0, d2) / ff);
                if (dist < best.distance) {
                    best.profile = p;
                    best.homogeneity = p.homogeneity();
                    best.distance = dist;
                    best.scale = c;
                    best.direction = dir;
                }
            }
        }
    }
    best.classified = best.distance <= opts.reject_distance;
    const FrequencyRecord rec = compute_DHE(field, WeightField::unit(mesh), Point::Zero(), 1.0);
    best.measured_frequency = rec.degenerate ? std::nan("") : rec.I;
    best.nearest_admissible =
        rec.degenerate ? std::nan("") : nearest_admissible_frequency(rec.I);
    return best;
}

Point gamma_normal(const FreeBoundary& gamma, const Point& x0, double radius, int n)
{
    if (n == 1)
        return Point::UnitX();
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    int count = 0;
    for (const Point& p : gamma.points) {
        if ((p - x0).norm() > radius)
            continue;
        mean += p.head<2>();
        ++count;
    }
    if (count < 2)
        throw Degenerate("gamma_normal: fewer than two free boundary points nearby");
    mean /= count;
    for (const Point& p : gamma.points) {
        if ((p - x0).norm() > radius)
            continue;
        const Eigen::Vector2d d = p.head<2>() - mean;
        m += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    const Eigen::Vector2d v = es.eigenvectors().col(0);
    return Point(v[0], v[1], 0.0);
}

namespace {

/// RMS residual of the least-squares quadratic through points of the plane, in the frame of
/// their principal axis.
double quadratic_fit_residual(const std::vector<Eigen::Vector2d>& pts)
{
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : pts)
        mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : pts)
        cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Eigen::Vector2d normal = es.eigenvectors().col(0);
    const Eigen::Vector2d tangent = es.eigenvectors().col(1);
    const Eigen::Index k = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd A(k, 3);
    Eigen::VectorXd b(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double s = (pts[i] - mean).dot(tangent);
        A(i, 0) = 1.0;
        A(i, 1) = s;
        A(i, 2) = s * s;
        b[i] = (pts[i] - mean).dot(normal);
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    return std::sqrt((A * coef - b).squaredNorm() / static_cast<double>(k));
}

} // namespace

RegularPoints detect_regular_points(const ScalarField& u, const WeightField& weight,
                                    const FreeBoundary& gamma, double r_probe, double tol_freq)
{
    const Mesh& mesh = u.mesh();
    RegularPoints out;
    out.r_probe = r_probe > 0.0 ? r_probe : trusted_radius(mesh);
    for (std::size_t i = 0; i < gamma.points.size(); ++i) {
        const Point& x0 = gamma.points[i];
        double I = std::nan("");
        if (out.r_probe <= 1.0 - x0.norm()) {
            const FrequencyRecord rec = compute_DHE(u, weight, x0, out.r_probe);
            if (!rec.degenerate)
                I = rec.I;
        }
        out.frequencies.push_back(I);
        if (std::abs(I - 1.5) <= tol_freq)
            out.marked.push_back(static_cast<int>(i));
    }
    if (mesh.n() == 2) {
        const double window = 2.0 * out.r_probe;
        for (int i : out.marked) {
            std::vector<Eigen::Vector2d> local;
            for (int j : out.marked)
                if ((gamma.points[j] - gamma.points[i]).norm() <= window)
                    local.push_back(gamma.points[j].head<2>());
            if (local.size() >= 4)
                out.curve_residual = std::max(out.curve_residual, quadratic_fit_residual(local));
        }
    }
    return out;
}

} // namespace thinshield
