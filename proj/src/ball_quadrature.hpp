#pragma once

// Quadrature over B_R(x0) intersected with the mesh, refining cells cut by given spheres.

#include "thinshield/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace thinshield::detail {

struct BallQuadrature {
    Point x0 = Point::Zero();
    /// Sorted radii of the spheres where the integrand jumps; the last one bounds the support.
    std::vector<double> kinks;
    /// Subcells cut by a kink are split until their diameter drops below this.
    double min_size = 0.0;
    /// Subcells beyond the first kink are split until their diameter drops below this.
    double max_size = 0.0;

    /// Resolution tied to both the radius and the mesh size, so quadrature error vanishes
    /// under refinement.
    static BallQuadrature around(const Point& x0, std::vector<double> kinks, const Mesh& mesh)
    {
        BallQuadrature q;
        q.x0 = x0;
        std::sort(kinks.begin(), kinks.end());
        q.kinks = std::move(kinks);
        const double R = q.kinks.back();
        const double h = mesh.h();
        if (mesh.n() == 1) {
            q.min_size = std::min(R / 256.0, h / 16.0);
            q.max_size = R / 8.0;
        } else {
            q.min_size = std::min(R / 24.0, h / 2.0);
            q.max_size = R / 4.0;
        }
        return q;
    }
};

namespace impl {

template <int D>
struct Simplex {
    std::array<Point, D + 1> p;
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

template <int D>
double diameter(const Simplex<D>& s)
{
    double d = 0.0;
    for (int i = 0; i <= D; ++i)
        for (int j = i + 1; j <= D; ++j)
            d = std::max(d, distance(s.p[i], s.p[j]));
    return d;
}

template <int D>
double volume(const Simplex<D>& s)
{
    if constexpr (D == 2) {
        const Point a = s.p[1] - s.p[0], b = s.p[2] - s.p[0];
        return 0.5 * std::abs(a[0] * b[1] - a[1] * b[0]);
    } else {
        const Point a = s.p[1] - s.p[0], b = s.p[2] - s.p[0], c = s.p[3] - s.p[0];
        return std::abs(a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                        a[2] * (b[0] * c[1] - b[1] * c[0])) /
               6.0;
    }
}

/// Degree-2 rule: edge midpoints (triangles) or the symmetric 4-point rule (tetrahedra).
template <int D, class Visit>
void apply_rule(const Simplex<D>& s, double vol, int cell, int region, Visit& visit)
{
    if (vol <= 0.0)
        return;
    if constexpr (D == 2) {
        for (int i = 0; i < 3; ++i)
            visit(cell, Point(0.5 * (s.p[i] + s.p[(i + 1) % 3])), vol / 3.0, region);
    } else {
        constexpr double a = 0.5854101966249685;
        constexpr double b = 0.1381966011250105;
        for (int i = 0; i < 4; ++i) {
            Point x = Point::Zero();
            for (int j = 0; j < 4; ++j)
                x += (i == j ? a : b) * s.p[j];
            visit(cell, x, vol / 4.0, region);
        }
    }
}

template <int D, class Visit>
void apply_rule(const Simplex<D>& s, int cell, int region, Visit& visit)
{
    apply_rule<D>(s, volume<D>(s), cell, region, visit);
}

/// Triangular prism (a0 a1 a2 | b0 b1 b2), ai joined to bi, as three tetrahedra.
template <class Visit>
void apply_prism(const std::array<Point, 3>& a, const std::array<Point, 3>& b, int cell,
                 int region, Visit& visit)
{
    apply_rule<3>(Simplex<3>{{a[0], a[1], a[2], b[2]}}, cell, region, visit);
    apply_rule<3>(Simplex<3>{{a[0], a[1], b[1], b[2]}}, cell, region, visit);
    apply_rule<3>(Simplex<3>{{a[0], b[0], b[1], b[2]}}, cell, region, visit);
}

/// Splits a simplex along the zero set of the linear interpolant of f (values at vertices);
/// pieces with f < 0 go to region `below`, the rest to `below + 1`.
template <int D, class Visit>
void apply_split(const Simplex<D>& s, const std::array<double, D + 1>& f, int cell, int below,
                 Visit& visit)
{
    std::array<int, D + 1> neg{}, pos{};
    int nn = 0, np = 0;
    for (int i = 0; i <= D; ++i) {
        if (f[i] < 0.0)
            neg[nn++] = i;
        else
            pos[np++] = i;
    }
    if (nn == 0 || np == 0) {
        apply_rule<D>(s, cell, nn ? below : below + 1, visit);
        return;
    }
    auto cross = [&](int i, int j) {
        const double t = f[i] / (f[i] - f[j]);
        return Point(s.p[i] + t * (s.p[j] - s.p[i]));
    };
    if constexpr (D == 2) {
        // One vertex alone on its side: a triangle there, a quadrilateral opposite.
        const bool lone_neg = nn == 1;
        const int v = lone_neg ? neg[0] : pos[0];
        const int a = lone_neg ? pos[0] : neg[0];
        const int b = lone_neg ? pos[1] : neg[1];
        const Point ea = cross(v, a), eb = cross(v, b);
        const int side_v = lone_neg ? below : below + 1;
        const int side_o = lone_neg ? below + 1 : below;
        apply_rule<2>(Simplex<2>{{s.p[v], ea, eb}}, cell, side_v, visit);
        apply_rule<2>(Simplex<2>{{ea, s.p[a], s.p[b]}}, cell, side_o, visit);
        apply_rule<2>(Simplex<2>{{ea, s.p[b], eb}}, cell, side_o, visit);
    } else {
        if (nn == 1 || np == 1) {
            const bool lone_neg = nn == 1;
            const int v = lone_neg ? neg[0] : pos[0];
            std::array<int, 3> o{};
            for (int k = 0; k < 3; ++k)
                o[k] = lone_neg ? pos[k] : neg[k];
            const std::array<Point, 3> e{cross(v, o[0]), cross(v, o[1]), cross(v, o[2])};
            const int side_v = lone_neg ? below : below + 1;
            const int side_o = lone_neg ? below + 1 : below;
            apply_rule<3>(Simplex<3>{{s.p[v], e[0], e[1], e[2]}}, cell, side_v, visit);
            apply_prism(e, {s.p[o[0]], s.p[o[1]], s.p[o[2]]}, cell, side_o, visit);
        } else {
            const int a = neg[0], b = neg[1], c = pos[0], d = pos[1];
            const Point eac = cross(a, c), ead = cross(a, d), ebc = cross(b, c), ebd = cross(b, d);
            apply_prism({s.p[a], eac, ead}, {s.p[b], ebc, ebd}, cell, below, visit);
            apply_prism({s.p[c], eac, ebc}, {s.p[d], ead, ebd}, cell, below + 1, visit);
        }
    }
}

template <int D>
std::array<Simplex<D>, (D == 2 ? 4 : 8)> red_children(const Simplex<D>& s)
{
    auto mid = [&](int i, int j) { return Point(0.5 * (s.p[i] + s.p[j])); };
    if constexpr (D == 2) {
        const Point m01 = mid(0, 1), m12 = mid(1, 2), m02 = mid(0, 2);
        return {Simplex<2>{{s.p[0], m01, m02}}, Simplex<2>{{m01, s.p[1], m12}},
                Simplex<2>{{m02, m12, s.p[2]}}, Simplex<2>{{m01, m12, m02}}};
    } else {
        const Point x0 = s.p[0], x1 = s.p[1], x2 = s.p[2], x3 = s.p[3];
        const Point x01 = mid(0, 1), x02 = mid(0, 2), x03 = mid(0, 3);
        const Point x12 = mid(1, 2), x13 = mid(1, 3), x23 = mid(2, 3);
        return {Simplex<3>{{x0, x01, x02, x03}},   Simplex<3>{{x01, x1, x12, x13}},
                Simplex<3>{{x02, x12, x2, x23}},   Simplex<3>{{x03, x13, x23, x3}},
                Simplex<3>{{x01, x02, x03, x13}},  Simplex<3>{{x01, x02, x12, x13}},
                Simplex<3>{{x02, x03, x13, x23}},  Simplex<3>{{x02, x12, x13, x23}}};
    }
}

template <int D, class Visit>
void recurse(const BallQuadrature& q, const Simplex<D>& s, double vol, int cell, Visit& visit)
{
    Point c = Point::Zero();
    for (const auto& p : s.p)
        c += p;
    c /= (D + 1);
    double dmax = 0.0;
    double spread = 0.0;
    for (const auto& p : s.p) {
        dmax = std::max(dmax, distance(p, q.x0));
        spread = std::max(spread, distance(p, c));
    }
    const double dmin = std::max(0.0, distance(c, q.x0) - spread);
    const int last = static_cast<int>(q.kinks.size());
    if (dmin >= q.kinks.back())
        return;
    // Region index: number of kinks below the simplex.
    int region = 0;
    while (region < last && q.kinks[region] <= dmin)
        ++region;
    int cut = -1;
    int cuts = 0;
    for (int k = 0; k < last; ++k) {
        if (dmin < q.kinks[k] && q.kinks[k] < dmax) {
            cut = k;
            ++cuts;
        }
    }
    if (cuts == 0 && region == 0) {
        apply_rule<D>(s, vol, cell, 0, visit);
        return;
    }
    const double diam = diameter(s);
    if ((cuts > 0 && diam > q.min_size) || cuts > 1 || diam > q.max_size) {
        const double child_vol = vol / (D == 2 ? 4.0 : 8.0);
        for (const auto& child : red_children<D>(s))
            recurse<D>(q, child, child_vol, cell, visit);
        return;
    }
    if (cuts == 0) {
        apply_rule<D>(s, vol, cell, region, visit);
        return;
    }
    std::array<double, D + 1> f{};
    for (int i = 0; i <= D; ++i)
        f[i] = distance(s.p[i], q.x0) - q.kinks[cut];
    if (cut + 1 == last) {
        // Beyond the outer kink nothing is integrated.
        auto inner_only = [&](int cl, const Point& x, double w, int rg) {
            if (rg < last)
                visit(cl, x, w, rg);
        };
        apply_split<D>(s, f, cell, cut, inner_only);
    } else {
        apply_split<D>(s, f, cell, cut, visit);
    }
}

} // namespace impl

/// Calls visit(cell, x, weight, region) for quadrature points covering B_R(x0) intersected
/// with the mesh, R = q.kinks.back(). `region` k means kinks[k-1] < |x - x0| < kinks[k] in the
/// piecewise-linear approximation of the spheres used for clipping; integrands should branch
/// on it rather than on |x - x0|.
template <class Visit>
void integrate_ball(const Mesh& mesh, const BallQuadrature& q, Visit&& visit)
{
    std::vector<int> cells;
    mesh.cells_near(q.x0, q.kinks.back(), cells);
    for (int c : cells) {
        const auto ids = mesh.cell(c);
        if (mesh.n() == 1) {
            impl::Simplex<2> s{{mesh.vertex(ids[0]), mesh.vertex(ids[1]), mesh.vertex(ids[2])}};
            impl::recurse<2>(q, s, mesh.volume(c), c, visit);
        } else {
            impl::Simplex<3> s{{mesh.vertex(ids[0]), mesh.vertex(ids[1]), mesh.vertex(ids[2]),
                                mesh.vertex(ids[3])}};
            impl::recurse<3>(q, s, mesh.volume(c), c, visit);
        }
    }
}

} // namespace thinshield::detail
