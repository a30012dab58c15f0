#include "thinshield/energy.hpp"

#include "thinshield/error.hpp"

#include <algorithm>
#include <cmath>

namespace thinshield {

void PenaltyConfig::validate() const
{
    if (!(epsilon > 0.0))
        throw InvalidArgument("PenaltyConfig: epsilon must be positive");
    if (!(lipschitz > 0.0))
        throw InvalidArgument("PenaltyConfig: Lipschitz threshold must be positive");
}

double beta(double t)
{
    if (t >= 0.0)
        return 0.0;
    if (t >= -1.0)
        return -0.5 * t * t;
    return t + 0.5;
}

double beta_prime(double t)
{
    if (t >= 0.0)
        return 0.0;
    if (t >= -1.0)
        return -t;
    return 1.0;
}

double beta_eps(double t, double eps) { return beta(t / eps) / eps; }

double beta_eps_prime(double t, double eps) { return beta_prime(t / eps) / (eps * eps); }

double penalty_potential(double t, double eps)
{
    const double s = t / eps;
    if (s >= 0.0)
        return 0.0;
    if (s >= -1.0)
        return -s * s * s / 3.0;
    return 2.0 * (1.0 / 6.0 + 0.5 * s * s + 0.5 * s);
}

double chi(double t, double L)
{
    if (t < 0.0)
        throw InvalidArgument("chi: negative argument");
    if (t <= L)
        return 0.0;
    if (t <= 3.0 * L) {
        const double s = t - L;
        return s * s * s * s / (32.0 * L * L);
    }
    return 0.5 * (t - 2.0 * L) * (t - 2.0 * L);
}

double chi_prime(double t, double L)
{
    if (t < 0.0)
        throw InvalidArgument("chi_prime: negative argument");
    if (t <= L)
        return 0.0;
    if (t <= 3.0 * L) {
        const double s = t - L;
        return s * s * s / (8.0 * L * L);
    }
    return t - 2.0 * L;
}

double chi_second(double t, double L)
{
    if (t <= L)
        return 0.0;
    if (t <= 3.0 * L) {
        const double s = t - L;
        return 3.0 * s * s / (8.0 * L * L);
    }
    return 1.0;
}

Point vector_field_A(const Point& p, double L)
{
    const double t = p.norm();
    double a = 1.0 / std::sqrt(1.0 + t * t);
    if (t > L)
        a += chi_prime(t, L) / t;
    return a * p;
}

Eigen::Matrix3d jacobian_A(const Point& p, double L)
{
    const double t2 = p.squaredNorm();
    const double t = std::sqrt(t2);
    const double root = std::sqrt(1.0 + t2);
    Eigen::Matrix3d jac = (Eigen::Matrix3d::Identity() - p * p.transpose() / (1.0 + t2)) / root;
    if (t > L) {
        const Point dir = p / t;
        const Eigen::Matrix3d proj = dir * dir.transpose();
        jac += chi_prime(t, L) / t * (Eigen::Matrix3d::Identity() - proj) + chi_second(t, L) * proj;
    }
    return jac;
}

double area_energy(const ScalarField& v)
{
    const Mesh& mesh = v.mesh();
    double s = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        s += mesh.volume(c) * std::sqrt(1.0 + v.cell_gradient(c).squaredNorm());
    return 2.0 * s;
}

double bulk_energy(const ScalarField& v, double L)
{
    const Mesh& mesh = v.mesh();
    double s = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const double t = v.cell_gradient(c).norm();
        s += mesh.volume(c) * (std::sqrt(1.0 + t * t) + chi(t, L));
    }
    return 2.0 * s;
}

double thin_penalty_energy(const ScalarField& v, double eps)
{
    const Mesh& mesh = v.mesh();
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        const double w = mesh.thin_weight(i);
        if (w > 0.0)
            s += w * penalty_potential(v[i], eps);
    }
    return s;
}

double penalized_energy(const ScalarField& v, const PenaltyConfig& cfg)
{
    cfg.validate();
    return bulk_energy(v, cfg.lipschitz) + thin_penalty_energy(v, cfg.epsilon);
}

DofMap::DofMap(const Mesh& mesh, const std::vector<char>* extra_fixed)
{
    dof_of_vertex_.assign(mesh.num_vertices(), -1);
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        const bool fixed = mesh.tag(i) == VertexTag::Sphere || (extra_fixed && (*extra_fixed)[i]);
        if (!fixed) {
            dof_of_vertex_[i] = static_cast<int>(vertex_of_dof_.size());
            vertex_of_dof_.push_back(i);
        }
    }
}

Eigen::VectorXd DofMap::restrict(const Eigen::VectorXd& nodal) const
{
    Eigen::VectorXd out(size());
    for (int k = 0; k < size(); ++k)
        out[k] = nodal[static_cast<Eigen::Index>(vertex_of_dof_[k])];
    return out;
}

Eigen::VectorXd energy_gradient(const ScalarField& v, const PenaltyConfig& cfg, bool thin_penalty)
{
    cfg.validate();
    const Mesh& mesh = v.mesh();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const Point flux = 2.0 * mesh.volume(c) * vector_field_A(v.cell_gradient(c), cfg.lipschitz);
        const auto cell = mesh.cell(c);
        for (std::size_t k = 0; k < cell.size(); ++k)
            grad[cell[k]] += flux.dot(mesh.shape_gradient(c, static_cast<int>(k)));
    }
    if (thin_penalty) {
        for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
            const double w = mesh.thin_weight(i);
            if (w > 0.0)
                grad[static_cast<Eigen::Index>(i)] += 2.0 * w * beta_eps(v[i], cfg.epsilon);
        }
    }
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
        if (mesh.tag(i) == VertexTag::Sphere)
            grad[static_cast<Eigen::Index>(i)] = 0.0;
    return grad;
}

Eigen::SparseMatrix<double> energy_hessian(const ScalarField& v, const PenaltyConfig& cfg,
                                           bool thin_penalty, const DofMap& dofs)
{
    cfg.validate();
    const Mesh& mesh = v.mesh();
    const int m = mesh.vertices_per_cell();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.num_cells() * m * m + mesh.num_vertices());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::Matrix3d jac =
            2.0 * mesh.volume(c) * jacobian_A(v.cell_gradient(c), cfg.lipschitz);
        const auto cell = mesh.cell(c);
        for (int a = 0; a < m; ++a) {
            const int da = dofs.dof(cell[a]);
            if (da < 0)
                continue;
            const Point ja = jac * mesh.shape_gradient(c, a);
            for (int b = 0; b < m; ++b) {
                const int db = dofs.dof(cell[b]);
                if (db >= 0)
                    triplets.emplace_back(da, db, ja.dot(mesh.shape_gradient(c, b)));
            }
        }
    }
    if (thin_penalty) {
        for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
            const double w = mesh.thin_weight(i);
            const int di = dofs.dof(i);
            if (w > 0.0 && di >= 0)
                triplets.emplace_back(di, di, 2.0 * w * beta_eps_prime(v[i], cfg.epsilon));
        }
    }
    Eigen::SparseMatrix<double> hess(dofs.size(), dofs.size());
    hess.setFromTriplets(triplets.begin(), triplets.end());
    return hess;
}

Eigen::VectorXd penalized_residual(const ScalarField& v, const PenaltyConfig& cfg)
{
    return energy_gradient(v, cfg, true);
}

Eigen::SparseMatrix<double> penalized_hessian(const ScalarField& v, const PenaltyConfig& cfg)
{
    return energy_hessian(v, cfg, true, DofMap(v.mesh()));
}

WeightField WeightField::unit(MeshPtr mesh)
{
    WeightField w;
    w.values.assign(mesh->num_cells(), 1.0);
    w.mesh = std::move(mesh);
    return w;
}

WeightField theta_weight(const ScalarField& u, double L)
{
    if (!(L > 0.0))
        throw InvalidArgument("theta_weight: Lipschitz bound must be positive");
    const double lower = 1.0 / std::sqrt(1.0 + L * L);
    WeightField w;
    w.mesh = u.mesh_ptr();
    w.values.resize(u.mesh().num_cells());
    for (std::size_t c = 0; c < w.values.size(); ++c) {
        const double theta = 1.0 / std::sqrt(1.0 + u.cell_gradient(c).squaredNorm());
        w.values[c] = std::clamp(theta, lower, 1.0);
    }
    return w;
}

} // namespace thinshield
