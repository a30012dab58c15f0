#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace thinshield {

/// Points live in R^{n+1} with n+1 <= 3; unused trailing coordinates are zero.
/// The last used coordinate (index n) is the direction normal to the thin set.
using Point = Eigen::Vector3d;

enum class VertexTag : std::uint8_t { Interior, Sphere, Thin };

/// Location of a point inside the mesh: owning simplex plus barycentric coordinates.
struct CellLocation {
    int cell = -1;
    std::array<double, 4> bary{};
};

/// A face shared by two simplices, used by jump seminorms.
struct InteriorFace {
    int left = -1;
    int right = -1;
    double measure = 0.0;
    Point midpoint = Point::Zero();
};

/// Conforming simplicial mesh of the closed upper half ball B_1^+ in R^{n+1}, n in {1, 2}.
///
/// Built by uniform red refinement of a fixed coarse template; midpoints of edges on the unit
/// sphere are projected back onto it, so the mesh is nested and a deterministic function of
/// (n, level). Vertices with x_{n+1} = 0 are tagged THIN unless they sit on the sphere.
class Mesh {
public:
    static std::shared_ptr<const Mesh> half_ball(int n, int level);

    int n() const { return n_; }
    int dim() const { return n_ + 1; }
    int level() const { return level_; }
    int vertices_per_cell() const { return n_ + 2; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_cells() const { return cells_.size(); }

    const Point& vertex(std::size_t i) const { return vertices_[i]; }
    VertexTag tag(std::size_t i) const { return tags_[i]; }
    bool on_thin_plane(std::size_t i) const { return vertices_[i][n_] == 0.0; }

    std::span<const int> cell(std::size_t c) const
    {
        return {cells_[c].data(), static_cast<std::size_t>(n_ + 2)};
    }
    double volume(std::size_t c) const { return volumes_[c]; }
    const Point& centroid(std::size_t c) const { return centroids_[c]; }
    double diameter(std::size_t c) const { return diameters_[c]; }
    /// Gradient of the barycentric coordinate of local vertex k of cell c.
    const Point& shape_gradient(std::size_t c, int k) const { return shape_grads_[c][k]; }

    /// Maximal simplex diameter.
    double h() const { return h_; }

    /// Faces of the induced mesh of B_1' (n+1 vertices each).
    std::size_t num_thin_faces() const { return thin_faces_.size(); }
    std::span<const int> thin_face(std::size_t f) const
    {
        return {thin_faces_[f].data(), static_cast<std::size_t>(n_ + 1)};
    }
    double thin_face_measure(std::size_t f) const { return thin_face_measures_[f]; }
    /// Lumped (vertex-quadrature) weight of each vertex on the thin plane; zero elsewhere.
    double thin_weight(std::size_t i) const { return thin_weights_[i]; }

    std::span<const InteriorFace> interior_faces() const { return interior_faces_; }

    /// Locates a point of the closed half ball (x_{n+1} >= 0); nullopt when outside.
    std::optional<CellLocation> locate(const Point& x) const;

    /// Indices of cells whose bounding box meets the ball B_r(x).
    void cells_near(const Point& x, double r, std::vector<int>& out) const;

private:
    Mesh() = default;
    void finalize();

    int n_ = 1;
    int level_ = 0;
    std::vector<Point> vertices_;
    std::vector<VertexTag> tags_;
    std::vector<std::array<int, 4>> cells_;
    std::vector<double> volumes_;
    std::vector<Point> centroids_;
    std::vector<double> diameters_;
    std::vector<std::array<Point, 4>> shape_grads_;
    std::vector<std::array<int, 3>> thin_faces_;
    std::vector<double> thin_face_measures_;
    std::vector<double> thin_weights_;
    std::vector<InteriorFace> interior_faces_;
    double h_ = 0.0;

    // Uniform bucket grid for point location.
    Point grid_lo_ = Point::Zero();
    double grid_step_ = 1.0;
    std::array<int, 3> grid_dims_{1, 1, 1};
    std::vector<std::vector<int>> buckets_;
    std::size_t bucket_index(const std::array<int, 3>& ijk) const;
    std::array<int, 3> bucket_of(const Point& x) const;
};

using MeshPtr = std::shared_ptr<const Mesh>;

} // namespace thinshield
