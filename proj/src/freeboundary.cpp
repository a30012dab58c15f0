#include "thinshield/freeboundary.hpp"

#include "thinshield/error.hpp"
#include "thinshield/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace thinshield {

bool CoincidenceSet::contains(int v) const
{
    return std::binary_search(vertices.begin(), vertices.end(), v);
}

CoincidenceSet coincidence_set(const ScalarField& u, double tol_c)
{
    if (!(tol_c >= 0.0))
        throw InvalidArgument("coincidence_set: tolerance must be nonnegative");
    const Mesh& mesh = u.mesh();
    CoincidenceSet set;
    set.tolerance = tol_c;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        if (mesh.tag(i) != VertexTag::Thin)
            continue;
        const double a = std::abs(u[i]);
        if (a <= tol_c) {
            set.vertices.push_back(static_cast<int>(i));
            if (a > 0.5 * tol_c)
                ++set.band;
        }
    }
    return set;
}

double penetration_tolerance(const ScalarField& u, double factor)
{
    const Mesh& mesh = u.mesh();
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
        if (mesh.tag(i) == VertexTag::Thin)
            worst = std::max(worst, -u[i]);
    return std::max(factor * worst, 1e-12);
}

namespace {

std::vector<std::pair<int, int>> thin_edges(const Mesh& mesh)
{
    std::set<std::pair<int, int>> edges;
    for (std::size_t f = 0; f < mesh.num_thin_faces(); ++f) {
        const auto ids = mesh.thin_face(f);
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b)
                edges.emplace(std::min(ids[a], ids[b]), std::max(ids[a], ids[b]));
    }
    return {edges.begin(), edges.end()};
}

void least_squares(const std::vector<double>& x, const std::vector<double>& y, double& slope,
                   double& intercept)
{
    const double m = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    intercept = (sy - slope * sx) / m;
}

double nearest(const Point& x, const std::vector<Point>& pts)
{
    double best = std::numeric_limits<double>::infinity();
    for (const Point& p : pts)
        best = std::min(best, (x - p).squaredNorm());
    return std::sqrt(best);
}

} // namespace

FreeBoundary free_boundary(const ScalarField& u, const CoincidenceSet& lambda)
{
    FreeBoundary gamma;
    if (lambda.empty())
        return gamma;
    const Mesh& mesh = u.mesh();
    const double tol = lambda.tolerance;
    for (auto [a, b] : thin_edges(mesh)) {
        const bool in_a = lambda.contains(a), in_b = lambda.contains(b);
        if (in_a == in_b)
            continue;
        const int in = in_a ? a : b;
        const int out = in_a ? b : a;
        const double ui = std::abs(u[in]), uo = std::abs(u[out]);
        // Contact continuing onto the sphere is not a free boundary point.
        if (uo <= tol)
            continue;
        double t = uo > ui ? (tol - ui) / (uo - ui) : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        gamma.points.push_back(mesh.vertex(in) + t * (mesh.vertex(out) - mesh.vertex(in)));
        gamma.edges.push_back({in, out});
    }
    return gamma;
}

std::vector<double> distance_to_gamma(const Mesh& mesh, const FreeBoundary& gamma)
{
    if (gamma.empty())
        throw InvalidArgument("distance_to_gamma: empty free boundary");
    std::vector<double> d(mesh.num_vertices());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = nearest(mesh.vertex(i), gamma.points);
    return d;
}

RegularityFit regularity_exponent_fit(const ScalarField& u, const FreeBoundary& gamma,
                                      const RegularityFitOptions& opts)
{
    if (gamma.empty())
        throw InvalidArgument("regularity_exponent_fit: empty free boundary");
    const Mesh& mesh = u.mesh();
    const double dmin = opts.min_distance < 0.0 ? mesh.h() : opts.min_distance;
    if (!(dmin > 0.0) || !(opts.max_distance > dmin))
        throw InvalidArgument("regularity_exponent_fit: need 0 < min_distance < max_distance");
    // Shell k holds distances in [2^{-k-1}, 2^{-k}).
    auto shell_of = [](double d) { return static_cast<int>(std::floor(-std::log2(d))); };
    const int kmax = shell_of(dmin) - 1;
    const int kmin = static_cast<int>(std::ceil(-std::log2(opts.max_distance)));
    if (kmax < std::max(kmin, 0))
        throw Degenerate("regularity_exponent_fit: fewer than 3 usable shells");
    std::vector<double> max_grad(kmax + 1, 0.0), max_val(kmax + 1, 0.0);
    std::vector<int> count_grad(kmax + 1, 0), count_val(kmax + 1, 0);
    auto usable = [&](const Point& x, double d) {
        return d >= dmin && d < 1.0 && d < 1.0 - x.norm();
    };
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const Point& x = mesh.centroid(c);
        const double d = nearest(x, gamma.points);
        if (!usable(x, d))
            continue;
        const int k = shell_of(d);
        if (k > kmax)
            continue;
        max_grad[k] = std::max(max_grad[k], u.cell_gradient(c).norm());
        ++count_grad[k];
    }
    const auto dist = distance_to_gamma(mesh, gamma);
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        const double d = dist[i];
        if (!usable(mesh.vertex(i), d))
            continue;
        const int k = shell_of(d);
        if (k > kmax)
            continue;
        max_val[k] = std::max(max_val[k], std::abs(u[i]));
        ++count_val[k];
    }
    RegularityFit fit;
    std::vector<double> lx, lg, lv;
    for (int k = std::max(kmin, 0); k <= kmax; ++k) {
        if (count_grad[k] == 0 || count_val[k] == 0 || max_grad[k] <= 0.0 || max_val[k] <= 0.0)
            continue;
        const double d = std::exp2(-k - 0.5);
        fit.shell_distance.push_back(d);
        fit.shell_max_grad.push_back(max_grad[k]);
        fit.shell_max_val.push_back(max_val[k]);
        lx.push_back(std::log(d));
        lg.push_back(std::log(max_grad[k]));
        lv.push_back(std::log(max_val[k]));
    }
    if (lx.size() < 3)
        throw Degenerate("regularity_exponent_fit: fewer than 3 usable shells");
    double bg = 0.0, bv = 0.0;
    least_squares(lx, lg, fit.alpha_grad, bg);
    least_squares(lx, lv, fit.alpha_val, bv);
    fit.c_grad = std::exp(bg);
    fit.c_val = std::exp(bv);
    return fit;
}

W22Report w22_audit(const ScalarField& u, const Point& x0, double r)
{
    const Mesh& mesh = u.mesh();
    if (!(r > 0.0) || x0.norm() + 2.0 * r > 1.0 + 1e-12)
        throw InvalidArgument("w22_audit: B_2r(x0) must lie in the unit ball");
    W22Report rep;
    for (const InteriorFace& f : mesh.interior_faces()) {
        if ((f.midpoint - x0).norm() >= r)
            continue;
        const double jump = (u.cell_gradient(f.left) - u.cell_gradient(f.right)).squaredNorm();
        const double hf = (mesh.centroid(f.left) - mesh.centroid(f.right)).norm();
        rep.lhs += jump * f.measure / hf;
    }
    rep.rhs = ball_moments(u, x0, 2.0 * r).horizontal;
    if (rep.lhs == 0.0)
        rep.ratio = 0.0;
    else
        rep.ratio = rep.rhs > 0.0 ? rep.lhs * r * r / rep.rhs
                                  : std::numeric_limits<double>::infinity();
    return rep;
}

double theta_lipschitz_audit(const ScalarField& u)
{
    const Mesh& mesh = u.mesh();
    std::vector<double> theta(mesh.num_cells());
    for (std::size_t c = 0; c < theta.size(); ++c)
        theta[c] = 1.0 / std::sqrt(1.0 + u.cell_gradient(c).squaredNorm());
    double worst = 0.0;
    for (const InteriorFace& f : mesh.interior_faces()) {
        const double hf = (mesh.centroid(f.left) - mesh.centroid(f.right)).norm();
        worst = std::max(worst, std::abs(theta[f.left] - theta[f.right]) / hf);
    }
    return worst;
}

} // namespace thinshield
