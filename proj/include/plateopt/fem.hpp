// Discretization of the plate eigenproblem K u = lambda M u.
//
// Hinged (Navier) case: mixed second-order splitting with P1 spaces for the
// displacement and the auxiliary variable w = -laplacian(u); the auxiliary
// variable is eliminated through the lumped P1 mass matrix, K = A^T D^-1 A.
// Clamped case: Morley nonconforming element (vertex values plus edge
// midpoint normal derivatives), stiffness from the full Hessian contraction.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <map>
#include <stdexcept>
#include <vector>

#include "plateopt/mesh.hpp"

namespace plateopt {

using SpMat = Eigen::SparseMatrix<double>;

enum class BCKind { hinged, clamped };

class AssemblyError : public std::runtime_error {
public:
    explicit AssemblyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Condensed stiffness operator over active DOFs plus the per-element data
/// needed to build density-weighted mass matrices on the same DOF set.
struct DiscreteOperator {
    BCKind bc_kind;
    SpMat stiffness;   // active x active, symmetric positive definite
    int n_active = 0;
    int dofs_per_elem = 0;  // 3 for P1, 6 for Morley

    // local DOF -> active index, -1 where constrained by essential BCs
    std::vector<std::array<int, 6>> elem_dofs;
    // unit-density local mass matrices (dofs_per_elem square, element order)
    std::vector<Eigen::MatrixXd> elem_mass;
};

/// Density-weighted mass matrix over the operator's active DOFs.
struct MassMatrix {
    SpMat matrix;
    std::size_t density_version = 0;
};

namespace fem_detail {

// 6-point symmetric triangle rule, exact through degree 4.
struct QuadRule {
    static constexpr int n = 6;
    // barycentric coordinates and weights (sum of weights = 1)
    static const std::array<std::array<double, 3>, 6>& points() {
        static const std::array<std::array<double, 3>, 6> p = {{
            {0.816847572980459, 0.091576213509771, 0.091576213509771},
            {0.091576213509771, 0.816847572980459, 0.091576213509771},
            {0.091576213509771, 0.091576213509771, 0.816847572980459},
            {0.108103018168070, 0.445948490915965, 0.445948490915965},
            {0.445948490915965, 0.108103018168070, 0.445948490915965},
            {0.445948490915965, 0.445948490915965, 0.108103018168070},
        }};
        return p;
    }
    static const std::array<double, 6>& weights() {
        static const std::array<double, 6> w = {
            0.109951743655322, 0.109951743655322, 0.109951743655322,
            0.223381589678011, 0.223381589678011, 0.223381589678011,
        };
        return w;
    }
};

inline std::map<Edge, int> enumerate_edges(const TriMesh& mesh) {
    std::map<Edge, int> edges;
    for (const auto& tri : mesh.triangles())
        for (int e = 0; e < 3; ++e)
            edges.emplace(make_edge(tri[e], tri[(e + 1) % 3]), 0);
    int id = 0;
    for (auto& [edge, idx] : edges) idx = id++;
    return edges;
}

// P1 gradients and element stiffness for the scalar Laplacian.
inline Eigen::Matrix3d p1_laplacian(const TriMesh& mesh, int t) {
    const auto& tri = mesh.triangles()[t];
    Vec2 p0 = mesh.vertices()[tri[0]], p1 = mesh.vertices()[tri[1]], p2 = mesh.vertices()[tri[2]];
    double area = mesh.signed_area(t);
    // gradient of barycentric i is perpendicular of opposite edge / 2|T|
    std::array<Vec2, 3> grads;
    Vec2 e0 = p2 - p1, e1 = p0 - p2, e2 = p1 - p0;
    grads[0] = {-e0.y / (2.0 * area), e0.x / (2.0 * area)};
    grads[1] = {-e1.y / (2.0 * area), e1.x / (2.0 * area)};
    grads[2] = {-e2.y / (2.0 * area), e2.x / (2.0 * area)};
    Eigen::Matrix3d K;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) K(i, j) = area * grads[i].dot(grads[j]);
    return K;
}

// Morley basis coefficients in centered monomials {1, x, y, x^2, xy, y^2};
// columns of the returned matrix are the six basis functions, DOF order:
// vertex values 0..2 then edge normal derivatives 3..5 (edge e opposite no
// vertex convention: edge e connects vertices e and e+1).
inline Eigen::Matrix<double, 6, 6> morley_coefficients(const std::array<Vec2, 3>& p,
                                                       const std::array<double, 3>& normal_sign,
                                                       const Vec2& center) {
    auto mono = [&](const Vec2& q) {
        Eigen::Matrix<double, 1, 6> r;
        double x = q.x - center.x, y = q.y - center.y;
        r << 1.0, x, y, x * x, x * y, y * y;
        return r;
    };
    Eigen::Matrix<double, 6, 6> G;
    for (int v = 0; v < 3; ++v) G.row(v) = mono(p[v]);
    for (int e = 0; e < 3; ++e) {
        Vec2 a = p[e], b = p[(e + 1) % 3];
        Vec2 mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
        Vec2 tang = b - a;
        double len = tang.norm();
        Vec2 n{tang.y / len, -tang.x / len};
        n = n * normal_sign[e];
        double x = mid.x - center.x, y = mid.y - center.y;
        // d/dn of the monomials at the midpoint
        Eigen::Matrix<double, 1, 6> r;
        r << 0.0, n.x, n.y, 2.0 * x * n.x, y * n.x + x * n.y, 2.0 * y * n.y;
        G.row(3 + e) = r;
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(G);
    if (!lu.isInvertible()) throw AssemblyError("degenerate element in Morley basis");
    return lu.inverse();
}

inline SpMat from_triplets(int n, const std::vector<Eigen::Triplet<double>>& trips) {
    SpMat m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

}  // namespace fem_detail

inline DiscreteOperator assemble_hinged(const TriMesh& mesh) {
    using fem_detail::p1_laplacian;
    const int nv = mesh.num_vertices();

    // interior vertex numbering
    std::vector<int> active(nv, -1);
    int n_act = 0;
    for (int v = 0; v < nv; ++v)
        if (!mesh.is_boundary_vertex(v)) active[v] = n_act++;
    if (n_act == 0) throw AssemblyError("hinged assembly: no interior vertices");

    // A: interior block of the Laplacian stiffness (the auxiliary variable
    // w = -laplacian(u) obeys the same Dirichlet condition as u under hinged
    // support); D: lumped P1 mass restricted to interior vertices.
    std::vector<Eigen::Triplet<double>> atrips;
    Eigen::VectorXd lumped = Eigen::VectorXd::Zero(nv);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Eigen::Matrix3d Kl = p1_laplacian(mesh, t);
        const auto& tri = mesh.triangles()[t];
        double area = mesh.signed_area(t);
        for (int i = 0; i < 3; ++i) {
            lumped[tri[i]] += area / 3.0;
            if (active[tri[i]] < 0) continue;
            for (int j = 0; j < 3; ++j)
                if (active[tri[j]] >= 0)
                    atrips.emplace_back(active[tri[i]], active[tri[j]], Kl(i, j));
        }
    }
    SpMat A(n_act, n_act);
    A.setFromTriplets(atrips.begin(), atrips.end());
    SpMat Dinv(n_act, n_act);
    {
        std::vector<Eigen::Triplet<double>> dt;
        for (int v = 0; v < nv; ++v)
            if (active[v] >= 0) dt.emplace_back(active[v], active[v], 1.0 / lumped[v]);
        Dinv.setFromTriplets(dt.begin(), dt.end());
    }

    DiscreteOperator op;
    op.bc_kind = BCKind::hinged;
    op.n_active = n_act;
    op.dofs_per_elem = 3;
    op.stiffness = SpMat(A.transpose() * Dinv * A);
    op.stiffness.makeCompressed();

    op.elem_dofs.resize(mesh.num_triangles());
    op.elem_mass.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        for (int i = 0; i < 3; ++i) op.elem_dofs[t][i] = active[tri[i]];
        double area = mesh.signed_area(t);
        Eigen::MatrixXd Ml(3, 3);
        Ml << 2, 1, 1, 1, 2, 1, 1, 1, 2;
        Ml *= area / 12.0;
        op.elem_mass[t] = Ml;
    }
    return op;
}

inline DiscreteOperator assemble_clamped(const TriMesh& mesh) {
    using fem_detail::QuadRule;
    const int nv = mesh.num_vertices();
    auto edges = fem_detail::enumerate_edges(mesh);
    const int ne = static_cast<int>(edges.size());

    // boundary edge lookup
    std::set<Edge> bedges(mesh.boundary_edges().begin(), mesh.boundary_edges().end());

    // active numbering: vertex DOFs then edge DOFs, essential BCs removed
    std::vector<int> vact(nv, -1), eact(ne, -1);
    int n_act = 0;
    for (int v = 0; v < nv; ++v)
        if (!mesh.is_boundary_vertex(v)) vact[v] = n_act++;
    for (const auto& [edge, idx] : edges)
        if (!bedges.count(edge)) eact[idx] = n_act++;
    if (n_act == 0) throw AssemblyError("clamped assembly: no active DOFs");

    DiscreteOperator op;
    op.bc_kind = BCKind::clamped;
    op.n_active = n_act;
    op.dofs_per_elem = 6;
    op.elem_dofs.resize(mesh.num_triangles());
    op.elem_mass.resize(mesh.num_triangles());

    std::vector<Eigen::Triplet<double>> ktrips;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        std::array<Vec2, 3> p = {mesh.vertices()[tri[0]], mesh.vertices()[tri[1]],
                                 mesh.vertices()[tri[2]]};
        Vec2 center = mesh.centroid(t);
        double area = mesh.signed_area(t);

        std::array<double, 3> nsign;
        std::array<int, 3> eidx;
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            Edge key = make_edge(a, b);
            eidx[e] = edges.at(key);
            // global normal is tied to the (low, high) vertex order of the edge
            nsign[e] = (a < b) ? 1.0 : -1.0;
        }
        auto C = fem_detail::morley_coefficients(p, nsign, center);

        // constant Hessians of the quadratic basis functions
        Eigen::MatrixXd Kl(6, 6);
        for (int i = 0; i < 6; ++i) {
            double ixx = 2.0 * C(3, i), ixy = C(4, i), iyy = 2.0 * C(5, i);
            for (int j = 0; j < 6; ++j) {
                double jxx = 2.0 * C(3, j), jxy = C(4, j), jyy = 2.0 * C(5, j);
                Kl(i, j) = area * (ixx * jxx + 2.0 * ixy * jxy + iyy * jyy);
            }
        }

        // unit-density mass by degree-4 quadrature
        Eigen::MatrixXd Ml = Eigen::MatrixXd::Zero(6, 6);
        for (int q = 0; q < QuadRule::n; ++q) {
            const auto& bc = QuadRule::points()[q];
            Vec2 xq{bc[0] * p[0].x + bc[1] * p[1].x + bc[2] * p[2].x,
                    bc[0] * p[0].y + bc[1] * p[1].y + bc[2] * p[2].y};
            double x = xq.x - center.x, y = xq.y - center.y;
            Eigen::Matrix<double, 1, 6> mono;
            mono << 1.0, x, y, x * x, x * y, y * y;
            Eigen::Matrix<double, 1, 6> phi = mono * C;
            double w = QuadRule::weights()[q] * area;
            Ml += w * (phi.transpose() * phi);
        }

        auto& dofs = op.elem_dofs[t];
        for (int v = 0; v < 3; ++v) dofs[v] = vact[tri[v]];
        for (int e = 0; e < 3; ++e) dofs[3 + e] = eact[eidx[e]];
        op.elem_mass[t] = Ml;

        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                if (dofs[i] >= 0 && dofs[j] >= 0) ktrips.emplace_back(dofs[i], dofs[j], Kl(i, j));
    }
    op.stiffness = fem_detail::from_triplets(n_act, ktrips);
    op.stiffness.makeCompressed();
    return op;
}

inline DiscreteOperator assemble_operator(const TriMesh& mesh, BCKind kind) {
    return kind == BCKind::hinged ? assemble_hinged(mesh) : assemble_clamped(mesh);
}

/// M = sum_T rho_T * (local unit mass), scattered to active DOFs.
/// Deterministic element-order assembly, so equal inputs give bitwise equal
/// matrices and scaling rho scales every entry exactly.
inline MassMatrix assemble_mass(const TriMesh& mesh, const std::vector<double>& rho,
                                const DiscreteOperator& op, std::size_t density_version = 0) {
    if (static_cast<int>(rho.size()) != mesh.num_triangles())
        throw std::invalid_argument("assemble_mass: density field length mismatch");
    std::vector<Eigen::Triplet<double>> trips;
    const int nd = op.dofs_per_elem;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& dofs = op.elem_dofs[t];
        const auto& Ml = op.elem_mass[t];
        for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j)
                if (dofs[i] >= 0 && dofs[j] >= 0)
                    trips.emplace_back(dofs[i], dofs[j], rho[t] * Ml(i, j));
    }
    MassMatrix m;
    m.matrix = fem_detail::from_triplets(op.n_active, trips);
    m.matrix.makeCompressed();
    m.density_version = density_version;
    return m;
}

/// Per-element integral of u_h^2 for an active-DOF vector (constrained DOFs
/// are zero). Uses the same local mass matrices as assemble_mass, so
/// sum_T rho_T * elem_u2[T] equals u^T M u exactly.
inline std::vector<double> element_u2_integrals(const DiscreteOperator& op,
                                                const Eigen::VectorXd& u) {
    std::vector<double> out(op.elem_dofs.size());
    const int nd = op.dofs_per_elem;
    Eigen::VectorXd ul(nd);
    for (std::size_t t = 0; t < op.elem_dofs.size(); ++t) {
        for (int i = 0; i < nd; ++i) {
            int d = op.elem_dofs[t][i];
            ul[i] = d >= 0 ? u[d] : 0.0;
        }
        out[t] = ul.dot(op.elem_mass[t] * ul);
    }
    return out;
}

}  // namespace plateopt
