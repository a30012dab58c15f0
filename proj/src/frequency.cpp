#include "thinshield/frequency.hpp"

#include "ball_quadrature.hpp"
#include "thinshield/error.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace thinshield {

namespace {

/// Affine restriction of u to one cell, cached across consecutive quadrature points.
class CellCache {
public:
    explicit CellCache(const ScalarField& u) : u_(u) {}

    void bind(int c)
    {
        if (c == cell_)
            return;
        cell_ = c;
        grad_ = u_.cell_gradient(c);
        centroid_ = u_.mesh().centroid(c);
        mean_ = u_.cell_mean(c);
    }
    const Point& grad() const { return grad_; }
    double value(const Point& x) const { return mean_ + grad_.dot(x - centroid_); }

private:
    const ScalarField& u_;
    int cell_ = -1;
    Point grad_ = Point::Zero();
    Point centroid_ = Point::Zero();
    double mean_ = 0.0;
};

void check_weight(const ScalarField& u, const WeightField& w)
{
    if (w.values.size() != u.mesh().num_cells())
        throw InvalidArgument("weight field does not match the mesh");
}

std::vector<double> sorted_radii(std::vector<double> radii)
{
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    return radii;
}

} // namespace

double cutoff_phi(double t)
{
    if (t <= 0.5)
        return 1.0;
    if (t <= 1.0)
        return 2.0 * (1.0 - t);
    return 0.0;
}

double cutoff_phi_prime(double t)
{
    if (t <= 0.5)
        return 0.0;
    if (t <= 1.0)
        return -2.0;
    return 0.0;
}

double trusted_radius(const Mesh& mesh) { return 10.0 * mesh.h(); }

void check_center_radius(const Mesh& mesh, const Point& x0, double r)
{
    const int n = mesh.n();
    if (std::abs(x0[n]) > 1e-12 || (n == 1 && x0[2] != 0.0))
        throw InvalidArgument("center must lie on the thin plane");
    if (!(r > 0.0) || r > 1.0 - x0.norm() + 1e-12) {
        std::ostringstream os;
        os << "radius " << r << " out of range at |x0| = " << x0.norm();
        throw InvalidArgument(os.str());
    }
}

FrequencyRecord compute_DHE(const ScalarField& u, const WeightField& weight, const Point& x0,
                            double r)
{
    const Mesh& mesh = u.mesh();
    check_weight(u, weight);
    check_center_radius(mesh, x0, r);

    FrequencyRecord rec;
    rec.x0 = x0;
    rec.r = r;
    CellCache cache(u);
    const auto q = detail::BallQuadrature::around(x0, {0.5 * r, r}, mesh);
    double D = 0.0, H = 0.0, E = 0.0, Dalt = 0.0;
    detail::integrate_ball(mesh, q, [&](int c, const Point& x, double w, int region) {
        const Point dx = x - x0;
        const double rho = dx.norm();
        cache.bind(c);
        const Point& g = cache.grad();
        const double th = w * weight.values[c];
        if (region == 0) {
            D += th * g.squaredNorm();
            return;
        }
        // Annulus: phi = 2(1 - t), -phi' = 2.
        D += th * g.squaredNorm() * 2.0 * (1.0 - rho / r);
        const double mphi = 2.0;
        const double val = cache.value(x);
        const double radial = g.dot(dx) / rho;
        H += th * mphi * val * val / rho;
        E += th * mphi * rho / (r * r) * radial * radial;
        Dalt += th * mphi * val * radial / r;
    });
    rec.D = 2.0 * D;
    rec.H = 2.0 * H;
    rec.E = 2.0 * E;
    rec.D_alt = 2.0 * Dalt;
    rec.degenerate = !(rec.H > 0.0);
    rec.I = rec.degenerate ? std::nan("") : r * rec.D / rec.H;
    return rec;
}

double frequency(const ScalarField& u, const WeightField& weight, const Point& x0, double r)
{
    const FrequencyRecord rec = compute_DHE(u, weight, x0, r);
    if (rec.degenerate)
        throw Degenerate("frequency: H vanishes (u = 0 on the annulus)");
    return rec.I;
}

BallMoments ball_moments(const ScalarField& u, const Point& x0, double r)
{
    const Mesh& mesh = u.mesh();
    check_center_radius(mesh, x0, r);
    const int n = mesh.n();
    CellCache cache(u);
    BallMoments m;
    const auto q = detail::BallQuadrature::around(x0, {r}, mesh);
    detail::integrate_ball(mesh, q, [&](int c, const Point& x, double w, int) {
        cache.bind(c);
        const double val = cache.value(x);
        const Point& g = cache.grad();
        m.l2 += w * val * val;
        m.dirichlet += w * g.squaredNorm();
        m.horizontal += w * g.head(n).squaredNorm();
    });
    return m;
}

MonotonicityReport monotonicity_audit(const ScalarField& u, const WeightField& weight,
                                      const Point& x0, const std::vector<double>& radii,
                                      double c_fit, double tol_mono)
{
    if (c_fit < 0.0)
        throw InvalidArgument("monotonicity_audit: C_fit must be nonnegative");
    MonotonicityReport rep;
    rep.radii = sorted_radii(radii);
    rep.c_fit = c_fit;
    for (double t : rep.radii)
        rep.I.push_back(frequency(u, weight, x0, t));
    for (std::size_t i = 0; i + 1 < rep.radii.size(); ++i) {
        const double t0 = rep.radii[i], t1 = rep.radii[i + 1];
        const double I0 = rep.I[i], I1 = rep.I[i + 1];
        rep.worst_violation =
            std::max(rep.worst_violation, std::exp(c_fit * t0) * I0 - std::exp(c_fit * t1) * I1);
        rep.worst_violation_additive =
            std::max(rep.worst_violation_additive, (I0 + c_fit * t0) - (I1 + c_fit * t1));
        if (I0 > 0.0 && I1 > 0.0)
            rep.minimal_c = std::max(rep.minimal_c, std::log(I0 / I1) / (t1 - t0));
        rep.minimal_c_additive = std::max(rep.minimal_c_additive, (I0 - I1) / (t1 - t0));
    }
    rep.pass = rep.worst_violation <= tol_mono;
    return rep;
}

PinchingRecord pinching(const ScalarField& u, const WeightField& weight, const Point& x,
                        double rho, double r, double c_add)
{
    if (!(rho <= r))
        throw InvalidArgument("pinching: requires rho <= r");
    PinchingRecord p;
    p.x = x;
    p.rho = rho;
    p.r = r;
    p.c_add = c_add;
    if (rho == r)
        return p;
    p.delta = frequency(u, weight, x, r) + c_add * r - frequency(u, weight, x, rho) - c_add * rho;
    return p;
}

DoublingReport doubling_audit(const ScalarField& u, const WeightField& weight, const Point& x0,
                              const std::vector<double>& radii, double A1, double A2, double C,
                              double L, double tol)
{
    if (A1 > A2)
        throw InvalidArgument("doubling_audit: A1 > A2");
    const int n = u.mesh().n();
    DoublingReport rep;
    rep.radii = sorted_radii(radii);
    for (double r : rep.radii) {
        const FrequencyRecord rec = compute_DHE(u, weight, x0, r);
        if (rec.degenerate)
            throw Degenerate("doubling_audit: degenerate H");
        if (rec.I < A1 - tol || rec.I > A2 + tol) {
            std::ostringstream os;
            os << "doubling_audit: frequency " << rec.I << " at r = " << r << " outside [" << A1
               << ", " << A2 << "]";
            throw InvalidArgument(os.str());
        }
        rep.H.push_back(rec.H);
        rep.ball_l2.push_back(2.0 * ball_moments(u, x0, r).l2);
    }
    rep.sandwich_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.radii.size(); ++i) {
        const double r = rep.radii[i];
        const double lower = 0.25 * r * rep.H[i];
        const double upper = 2.0 * std::sqrt(1.0 + L * L) * std::exp(C * r) * r * rep.H[i];
        rep.sandwich_slack =
            std::min({rep.sandwich_slack, rep.ball_l2[i] / lower - 1.0, upper / rep.ball_l2[i] - 1.0});
        if (i + 1 == rep.radii.size())
            break;
        const double r1 = rep.radii[i + 1];
        const double up0 = std::exp(-C * r) * rep.H[i] / std::pow(r, n + 2.0 * A2);
        const double up1 = std::exp(-C * r1) * rep.H[i + 1] / std::pow(r1, n + 2.0 * A2);
        rep.upper_violation = std::max(rep.upper_violation, (up1 - up0) / up0);
        const double lo0 = std::exp(C * r) * rep.H[i] / std::pow(r, n + 2.0 * A1);
        const double lo1 = std::exp(C * r1) * rep.H[i + 1] / std::pow(r1, n + 2.0 * A1);
        rep.lower_violation = std::max(rep.lower_violation, (lo0 - lo1) / lo0);
    }
    rep.pass = rep.upper_violation <= tol && rep.lower_violation <= tol && rep.sandwich_slack >= 0.0;
    return rep;
}

VariationReport variation_identity_audit(const ScalarField& u, const WeightField& weight,
                                         const Point& x0, const std::vector<double>& radii)
{
    // Step in log r shrinks with the mesh so the stencil bias vanishes under refinement.
    const double lq = std::min(std::log(1.05), 2.0 * u.mesh().h());
    const double q = std::exp(lq);
    const int n = u.mesh().n();
    VariationReport rep;
    rep.radii = sorted_radii(radii);
    for (double r : rep.radii) {
        std::array<FrequencyRecord, 5> recs;
        for (int k = -2; k <= 2; ++k) {
            recs[k + 2] = compute_DHE(u, weight, x0, r * std::pow(q, k));
            if (recs[k + 2].degenerate)
                throw Degenerate("variation_identity_audit: degenerate H");
        }
        const FrequencyRecord& mid = recs[2];
        // d/dr f = (d/ds f) / r with s = log r.
        auto derivative = [&](auto field) {
            const double ds = (8.0 * (field(recs[3]) - field(recs[1])) -
                               (field(recs[4]) - field(recs[0]))) /
                              (12.0 * lq);
            return ds / r;
        };
        const double dD = derivative([](const FrequencyRecord& f) { return f.D; });
        const double dH = derivative([](const FrequencyRecord& f) { return f.H; });
        const double eps_D = dD - (n - 1.0) / r * mid.D - 2.0 * mid.E;
        const double eps_H = dH - static_cast<double>(n) / r * mid.H - 2.0 * mid.D;
        rep.D.push_back(mid.D);
        rep.D_alt.push_back(mid.D_alt);
        rep.H.push_back(mid.H);
        // In frequency units; D alone vanishes for constant fields.
        const double scale = std::max(mid.D, mid.H / r);
        const double ident = scale > 0.0 ? std::abs(mid.D - mid.D_alt) / scale : 0.0;
        rep.identity_error.push_back(ident);
        rep.eps_D.push_back(eps_D);
        rep.eps_H.push_back(eps_H);
        rep.worst_identity = std::max(rep.worst_identity, ident);
        if (mid.D > 0.0)
            rep.worst_eps_D = std::max(rep.worst_eps_D, r * std::abs(eps_D) / mid.D);
        rep.worst_eps_H = std::max(rep.worst_eps_H, r * std::abs(eps_H) / mid.H);
    }
    return rep;
}

PoincareReport poincare_audit(const ScalarField& u, const Point& x0, double r)
{
    const Mesh& mesh = u.mesh();
    check_center_radius(mesh, x0, r);
    const int n = mesh.n();
    constexpr double pi = std::numbers::pi;
    PoincareReport rep;
    double s = 0.0;
    if (n == 1) {
        const int N = 4096;
        for (int k = 0; k < N; ++k) {
            const double th = pi * (k + 0.5) / N;
            const Point x = x0 + r * Point(std::cos(th), std::sin(th), 0.0);
            const double val = evaluate_near(u, x);
            s += val * val;
        }
        s *= r * pi / N;
    } else {
        const int Nt = 192, Np = 384;
        for (int i = 0; i < Nt; ++i) {
            const double th = 0.5 * pi * (i + 0.5) / Nt;
            double ring = 0.0;
            for (int j = 0; j < Np; ++j) {
                const double ph = 2.0 * pi * (j + 0.5) / Np;
                const Point x = x0 + r * Point(std::sin(th) * std::cos(ph),
                                               std::sin(th) * std::sin(ph), std::cos(th));
                const double val = evaluate_near(u, x);
                ring += val * val;
            }
            s += ring * std::sin(th);
        }
        s *= r * r * (0.5 * pi / Nt) * (2.0 * pi / Np);
    }
    rep.sphere_l2 = 2.0 * s;
    rep.ball_dirichlet = 2.0 * ball_moments(u, x0, r).dirichlet;
    rep.constant = rep.sphere_l2 / (r * rep.ball_dirichlet + std::pow(r, n + 3));
    return rep;
}

LowerBoundReport frequency_lower_bound_audit(const ScalarField& u, const WeightField& weight,
                                             const std::vector<Point>& gamma,
                                             const std::vector<double>& radii)
{
    if (gamma.empty())
        throw InvalidArgument("frequency_lower_bound_audit: empty free boundary");
    LowerBoundReport rep;
    rep.min_frequency = std::numeric_limits<double>::infinity();
    for (const Point& p : gamma) {
        for (double r : radii) {
            if (r > 1.0 - p.norm()) {
                ++rep.skipped;
                continue;
            }
            const FrequencyRecord rec = compute_DHE(u, weight, p, r);
            if (rec.degenerate) {
                ++rep.skipped;
                continue;
            }
            ++rep.evaluated;
            if (rec.I < rep.min_frequency) {
                rep.min_frequency = rec.I;
                rep.argmin_point = p;
                rep.argmin_radius = r;
            }
        }
    }
    return rep;
}

OscillationReport spatial_oscillation_audit(const ScalarField& u, const WeightField& weight,
                                            const Point& x0, const Point& x1, const Point& x2,
                                            double rho, double R, double c_add)
{
    if (!(R > 9.0) || !(rho > 0.0))
        throw InvalidArgument("spatial_oscillation_audit: needs R > 9 and rho > 0");
    if ((x1 - x0).norm() > rho || (x2 - x0).norm() > rho)
        throw InvalidArgument("spatial_oscillation_audit: x1, x2 must lie in B'_rho(x0)");
    if (4.0 * R * rho > 1.0 - x0.norm())
        throw InvalidArgument("spatial_oscillation_audit: B_{4R rho}(x0) leaves the domain");
    OscillationReport rep;
    const double inner = 0.5 * (R - 4.0) * rho;
    const double outer = 2.0 * (R + 2.0) * rho;
    rep.lhs = std::abs(frequency(u, weight, x1, R * rho) - frequency(u, weight, x2, R * rho));
    rep.delta1 = pinching(u, weight, x1, inner, outer, c_add).delta;
    rep.delta2 = pinching(u, weight, x2, inner, outer, c_add).delta;
    rep.rhs_base = std::sqrt(std::max(rep.delta1, 0.0)) + std::sqrt(std::max(rep.delta2, 0.0)) +
                   R * rho;
    rep.constant = rep.lhs / rep.rhs_base;
    return rep;
}

DeGiorgiReport degiorgi_class_audit(const ScalarField& u, const Point& x0, double r, double k,
                                    int direction, int sign)
{
    const Mesh& mesh = u.mesh();
    const int n = mesh.n();
    if (direction < 0 || direction > n)
        throw InvalidArgument("degiorgi_class_audit: bad direction");
    if (sign != 1 && sign != -1)
        throw InvalidArgument("degiorgi_class_audit: sign must be +1 or -1");
    if (k < 0.0)
        throw InvalidArgument("degiorgi_class_audit: level k must be nonnegative");
    check_center_radius(mesh, x0, 2.0 * r);

    auto level_part = [&](std::size_t c) {
        return std::max(sign * u.cell_gradient(c)[direction] - k, 0.0);
    };
    DeGiorgiReport rep;
    for (const InteriorFace& f : mesh.interior_faces()) {
        if ((f.midpoint - x0).norm() >= r)
            continue;
        const double jump = level_part(f.left) - level_part(f.right);
        if (jump == 0.0)
            continue;
        const double dist = (mesh.centroid(f.left) - mesh.centroid(f.right)).norm();
        rep.lhs += jump * jump * f.measure / dist;
    }
    const auto q = detail::BallQuadrature::around(x0, {2.0 * r}, mesh);
    double rhs = 0.0;
    detail::integrate_ball(mesh, q, [&](int c, const Point&, double w, int) {
        const double v = level_part(c);
        rhs += w * v * v;
    });
    rep.rhs = rhs / (r * r);
    rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
    return rep;
}

} // namespace thinshield
