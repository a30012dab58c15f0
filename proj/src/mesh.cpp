#include "thinshield/mesh.hpp"

#include "thinshield/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace thinshield {

namespace {

constexpr double kSphereTol = 1e-10;
constexpr int kRings = 4; // radial rings of the planar template

std::uint64_t edge_key(int a, int b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct Builder {
    int n = 1;
    std::vector<Point> vertices;
    std::vector<std::array<int, 4>> cells;

    int add_vertex(const Point& p)
    {
        vertices.push_back(p);
        return static_cast<int>(vertices.size()) - 1;
    }

    bool on_sphere(int i) const { return std::abs(vertices[i].norm() - 1.0) < kSphereTol; }

    // Half disk: origin plus rings j = 1..kRings of radius j/kRings carrying 4j segments over
    // the upper half circle; consecutive rings are zipped together by angle.
    void planar_template()
    {
        using std::numbers::pi;
        std::vector<std::vector<int>> rings(kRings + 1);
        rings[0].push_back(add_vertex(Point::Zero()));
        for (int j = 1; j <= kRings; ++j) {
            const double radius = static_cast<double>(j) / kRings;
            const int segments = 4 * j;
            for (int k = 0; k <= segments; ++k) {
                const double theta = pi * k / segments;
                Point p(radius * std::cos(theta), radius * std::sin(theta), 0.0);
                if (k == 0 || k == segments)
                    p[1] = 0.0;
                if (j == kRings)
                    p.normalize();
                rings[j].push_back(add_vertex(p));
            }
        }
        for (int k = 0; k < 4; ++k)
            cells.push_back({rings[0][0], rings[1][k], rings[1][k + 1], -1});
        for (int j = 2; j <= kRings; ++j) {
            const auto& inner = rings[j - 1];
            const auto& outer = rings[j];
            const int si = static_cast<int>(inner.size()) - 1;
            const int so = static_cast<int>(outer.size()) - 1;
            int p = 0;
            int q = 0;
            while (p < si || q < so) {
                const double next_inner = p < si ? static_cast<double>(p + 1) / si : 2.0;
                const double next_outer = q < so ? static_cast<double>(q + 1) / so : 2.0;
                if (q < so && next_outer <= next_inner) {
                    cells.push_back({inner[p], outer[q], outer[q + 1], -1});
                    ++q;
                } else {
                    cells.push_back({inner[p], outer[q], inner[p + 1], -1});
                    ++p;
                }
            }
        }
    }

    // Half ball: origin, an inner shell at radius 1/2 and the unit sphere, both sampled at the
    // five directions +-e1, +-e2, e3. Each quadrant is a tetrahedron plus a prism split into three
    // tetrahedra with index-ordered diagonals so neighbouring prisms conform.
    void spatial_template()
    {
        const std::array<Point, 5> dirs = {Point(1, 0, 0), Point(0, 1, 0), Point(-1, 0, 0),
                                           Point(0, -1, 0), Point(0, 0, 1)};
        const int origin = add_vertex(Point::Zero());
        std::array<int, 5> inner{};
        std::array<int, 5> outer{};
        for (int k = 0; k < 5; ++k)
            inner[k] = add_vertex(0.5 * dirs[k]);
        for (int k = 0; k < 5; ++k)
            outer[k] = add_vertex(dirs[k]);
        for (int q = 0; q < 4; ++q) {
            const std::array<int, 3> loc = {q, (q + 1) % 4, 4};
            cells.push_back({origin, inner[loc[0]], inner[loc[1]], inner[loc[2]]});
            std::array<int, 3> order = loc;
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return inner[a] < inner[b]; });
            const int a = inner[order[0]], b = inner[order[1]], c = inner[order[2]];
            const int a1 = outer[order[0]], b1 = outer[order[1]], c1 = outer[order[2]];
            cells.push_back({a, b, c, c1});
            cells.push_back({a, b, b1, c1});
            cells.push_back({a, a1, b1, c1});
        }
    }

    void refine()
    {
        std::unordered_map<std::uint64_t, int> midpoints;
        midpoints.reserve(cells.size() * 3);
        auto mid = [&](int a, int b) {
            const auto key = edge_key(a, b);
            if (auto it = midpoints.find(key); it != midpoints.end())
                return it->second;
            Point p = 0.5 * (vertices[a] + vertices[b]);
            if (on_sphere(a) && on_sphere(b))
                p.normalize();
            if (vertices[a][n] == 0.0 && vertices[b][n] == 0.0)
                p[n] = 0.0;
            const int id = add_vertex(p);
            midpoints.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 4>> next;
        next.reserve(cells.size() * (n == 1 ? 4 : 8));
        for (const auto& c : cells) {
            if (n == 1) {
                const int a = c[0], b = c[1], d = c[2];
                const int ab = mid(a, b), bd = mid(b, d), da = mid(d, a);
                next.push_back({a, ab, da, -1});
                next.push_back({ab, b, bd, -1});
                next.push_back({da, bd, d, -1});
                next.push_back({ab, bd, da, -1});
            } else {
                const int x0 = c[0], x1 = c[1], x2 = c[2], x3 = c[3];
                const int x01 = mid(x0, x1), x02 = mid(x0, x2), x03 = mid(x0, x3);
                const int x12 = mid(x1, x2), x13 = mid(x1, x3), x23 = mid(x2, x3);
                next.push_back({x0, x01, x02, x03});
                next.push_back({x01, x1, x12, x13});
                next.push_back({x02, x12, x2, x23});
                next.push_back({x03, x13, x23, x3});
                next.push_back({x01, x02, x03, x13});
                next.push_back({x01, x02, x12, x13});
                next.push_back({x02, x03, x13, x23});
                next.push_back({x02, x12, x13, x23});
            }
        }
        cells = std::move(next);
    }
};

double simplex_measure(const std::vector<Point>& pts, int k)
{
    // k-dimensional measure of the simplex spanned by pts[0..k].
    Eigen::MatrixXd e(3, k);
    for (int j = 0; j < k; ++j)
        e.col(j) = pts[j + 1] - pts[0];
    const double gram = (e.transpose() * e).determinant();
    double fact = 1.0;
    for (int j = 2; j <= k; ++j)
        fact *= j;
    return std::sqrt(std::max(gram, 0.0)) / fact;
}

} // namespace

std::shared_ptr<const Mesh> Mesh::half_ball(int n, int level)
{
    if (n != 1 && n != 2)
        throw InvalidArgument("half_ball: unsupported dimension n=" + std::to_string(n));
    if (level < 0)
        throw InvalidArgument("half_ball: refinement level must be nonnegative");

    static std::mutex cache_mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const Mesh>> cache;
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find({n, level}); it != cache.end())
        return it->second;

    Builder b;
    b.n = n;
    if (n == 1)
        b.planar_template();
    else
        b.spatial_template();
    for (int l = 0; l < level; ++l)
        b.refine();

    auto mesh = std::shared_ptr<Mesh>(new Mesh());
    mesh->n_ = n;
    mesh->level_ = level;
    mesh->vertices_ = std::move(b.vertices);
    mesh->cells_ = std::move(b.cells);
    mesh->finalize();
    cache.emplace(std::make_pair(n, level), mesh);
    return mesh;
}

void Mesh::finalize()
{
    const int d = dim();
    const std::size_t nv = vertices_.size();

    tags_.assign(nv, VertexTag::Interior);
    for (std::size_t i = 0; i < nv; ++i) {
        if (std::abs(vertices_[i].norm() - 1.0) < kSphereTol)
            tags_[i] = VertexTag::Sphere;
        else if (vertices_[i][n_] == 0.0)
            tags_[i] = VertexTag::Thin;
    }

    const std::size_t nc = cells_.size();
    volumes_.resize(nc);
    centroids_.resize(nc);
    diameters_.resize(nc);
    shape_grads_.resize(nc);
    h_ = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
        auto& cell = cells_[c];
        Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
        auto fill_jacobian = [&] {
            for (int k = 1; k <= d; ++k)
                jac.col(k - 1).head(d) = (vertices_[cell[k]] - vertices_[cell[0]]).head(d);
        };
        fill_jacobian();
        double det = jac.topLeftCorner(d, d).determinant();
        if (det < 0.0) {
            std::swap(cell[0], cell[1]);
            fill_jacobian();
            det = -det;
        }
        if (!(det > 0.0))
            throw Error("mesh: degenerate simplex produced during refinement");
        volumes_[c] = det / (d == 2 ? 2.0 : 6.0);

        Point centroid = Point::Zero();
        for (int k = 0; k <= d; ++k)
            centroid += vertices_[cell[k]];
        centroids_[c] = centroid / (d + 1);

        double diam = 0.0;
        for (int a = 0; a <= d; ++a)
            for (int b2 = a + 1; b2 <= d; ++b2)
                diam = std::max(diam, (vertices_[cell[a]] - vertices_[cell[b2]]).norm());
        diameters_[c] = diam;
        h_ = std::max(h_, diam);

        Eigen::Matrix3d inv = Eigen::Matrix3d::Identity();
        inv.topLeftCorner(d, d) = jac.topLeftCorner(d, d).inverse();
        Point g0 = Point::Zero();
        for (int k = 1; k <= d; ++k) {
            Point g = Point::Zero();
            g.head(d) = inv.row(k - 1).head(d).transpose();
            shape_grads_[c][k] = g;
            g0 -= g;
        }
        shape_grads_[c][0] = g0;
        for (int k = d + 1; k < 4; ++k)
            shape_grads_[c][k] = Point::Zero();
    }

    // Faces: thin boundary faces and interior faces shared by two cells.
    thin_faces_.clear();
    thin_face_measures_.clear();
    thin_weights_.assign(nv, 0.0);
    interior_faces_.clear();
    std::unordered_map<std::uint64_t, int> first_owner;
    first_owner.reserve(nc * (d + 1));
    std::vector<Point> pts(d);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto& cell = cells_[c];
        for (int omit = 0; omit <= d; ++omit) {
            std::array<int, 3> face{-1, -1, -1};
            int m = 0;
            for (int k = 0; k <= d; ++k)
                if (k != omit)
                    face[m++] = cell[k];
            std::sort(face.begin(), face.begin() + d);
            std::uint64_t key = 0;
            for (int k = 0; k < d; ++k)
                key = (key << 21) | static_cast<std::uint64_t>(face[k]);
            for (int k = 0; k < d; ++k)
                pts[k] = vertices_[face[k]];
            if (auto it = first_owner.find(key); it != first_owner.end()) {
                InteriorFace f;
                f.left = it->second;
                f.right = static_cast<int>(c);
                f.measure = simplex_measure(pts, d - 1);
                Point mid = Point::Zero();
                for (int k = 0; k < d; ++k)
                    mid += pts[k];
                f.midpoint = mid / d;
                interior_faces_.push_back(f);
                first_owner.erase(it);
            } else {
                first_owner.emplace(key, static_cast<int>(c));
            }
            bool thin = true;
            for (int k = 0; k < d; ++k)
                thin = thin && vertices_[face[k]][n_] == 0.0;
            if (thin) {
                const double meas = simplex_measure(pts, n_);
                thin_faces_.push_back({face[0], face[1], n_ == 2 ? face[2] : -1});
                thin_face_measures_.push_back(meas);
                for (int k = 0; k < d; ++k)
                    thin_weights_[face[k]] += meas / d;
            }
        }
    }

    // Bucket grid over [-1,1]^n x [0,1].
    grid_lo_ = Point::Constant(-1.0);
    grid_lo_[n_] = 0.0;
    for (int k = d; k < 3; ++k)
        grid_lo_[k] = 0.0;
    grid_step_ = std::max(h_, 1e-3);
    grid_dims_ = {1, 1, 1};
    for (int k = 0; k < d; ++k) {
        const double extent = (k == n_) ? 1.0 : 2.0;
        grid_dims_[k] = std::max(1, static_cast<int>(std::ceil(extent / grid_step_)));
    }
    buckets_.assign(static_cast<std::size_t>(grid_dims_[0]) * grid_dims_[1] * grid_dims_[2], {});
    for (std::size_t c = 0; c < nc; ++c) {
        Point lo = vertices_[cells_[c][0]];
        Point hi = lo;
        for (int k = 1; k <= d; ++k) {
            lo = lo.cwiseMin(vertices_[cells_[c][k]]);
            hi = hi.cwiseMax(vertices_[cells_[c][k]]);
        }
        const auto a = bucket_of(lo);
        const auto b2 = bucket_of(hi);
        for (int i = a[0]; i <= b2[0]; ++i)
            for (int j = a[1]; j <= b2[1]; ++j)
                for (int k = a[2]; k <= b2[2]; ++k)
                    buckets_[bucket_index({i, j, k})].push_back(static_cast<int>(c));
    }
}

std::size_t Mesh::bucket_index(const std::array<int, 3>& ijk) const
{
    return (static_cast<std::size_t>(ijk[2]) * grid_dims_[1] + ijk[1]) * grid_dims_[0] + ijk[0];
}

std::array<int, 3> Mesh::bucket_of(const Point& x) const
{
    std::array<int, 3> ijk{0, 0, 0};
    for (int k = 0; k < dim(); ++k) {
        const int i = static_cast<int>(std::floor((x[k] - grid_lo_[k]) / grid_step_));
        ijk[k] = std::clamp(i, 0, grid_dims_[k] - 1);
    }
    return ijk;
}

std::optional<CellLocation> Mesh::locate(const Point& x) const
{
    constexpr double tol = 1e-11;
    const int d = dim();
    const auto& bucket = buckets_[bucket_index(bucket_of(x))];
    for (int c : bucket) {
        CellLocation loc;
        loc.cell = c;
        bool inside = true;
        double sum = 0.0;
        for (int k = 0; k <= d; ++k) {
            const double lam =
                1.0 / (d + 1) + shape_grads_[c][k].head(d).dot((x - centroids_[c]).head(d));
            if (lam < -tol) {
                inside = false;
                break;
            }
            loc.bary[k] = lam;
            sum += lam;
        }
        if (inside && std::abs(sum - 1.0) < 1e-9)
            return loc;
    }
    return std::nullopt;
}

void Mesh::cells_near(const Point& x, double r, std::vector<int>& out) const
{
    out.clear();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        if ((centroids_[c] - x).head(dim()).norm() <= r + diameters_[c])
            out.push_back(static_cast<int>(c));
    }
}

} // namespace thinshield
