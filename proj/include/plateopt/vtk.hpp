// Legacy-text VTK unstructured grid export: cell-data density, point-data
// eigenfunction.
#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "plateopt/fem.hpp"
#include "plateopt/mesh.hpp"

namespace plateopt {

/// Displacement at every mesh vertex from an active-DOF vector (constrained
/// vertices are zero). Works for both discretizations since the first three
/// local DOFs of every element are the vertex values.
inline std::vector<double> vertex_displacements(const TriMesh& mesh, const DiscreteOperator& op,
                                                const Eigen::VectorXd& u) {
    std::vector<double> out(mesh.num_vertices(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        for (int v = 0; v < 3; ++v) {
            int d = op.elem_dofs[t][v];
            if (d >= 0) out[tri[v]] = u[d];
        }
    }
    return out;
}

inline void write_vtk(const TriMesh& mesh, const std::vector<double>& cell_density,
                      const std::vector<double>& point_eigenfunction, std::ostream& out) {
    out.precision(12);
    out << "# vtk DataFile Version 3.0\n";
    out << "plateopt solution\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << " 0\n";
    out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
    if (!cell_density.empty()) {
        out << "CELL_DATA " << mesh.num_triangles() << '\n';
        out << "SCALARS density double 1\nLOOKUP_TABLE default\n";
        for (double d : cell_density) out << d << '\n';
    }
    if (!point_eigenfunction.empty()) {
        out << "POINT_DATA " << mesh.num_vertices() << '\n';
        out << "SCALARS eigenfunction double 1\nLOOKUP_TABLE default\n";
        for (double d : point_eigenfunction) out << d << '\n';
    }
}

inline void write_vtk(const TriMesh& mesh, const std::vector<double>& cell_density,
                      const std::vector<double>& point_eigenfunction, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open VTK file for writing: " + path);
    write_vtk(mesh, cell_density, point_eigenfunction, f);
}

}  // namespace plateopt
