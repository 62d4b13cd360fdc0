// Triangle mesh core: TriMesh, conformity validation, element measures.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plateopt {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

using Triangle = std::array<int, 3>;
using Edge = std::pair<int, int>;  // stored with first < second

inline Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

class MeshError : public std::runtime_error {
public:
    explicit MeshError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Conforming triangle mesh with boundary classification.
/// Immutable after construction; validation happens in the constructor.
class TriMesh {
public:
    TriMesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles)
        : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
        if (vertices_.size() < 3) throw MeshError("mesh needs at least 3 vertices");
        if (triangles_.empty()) throw MeshError("mesh has no triangles");
        orient_and_validate();
        classify_boundary();
    }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Edge>& boundary_edges() const { return boundary_edges_; }
    const std::set<int>& boundary_vertices() const { return boundary_vertices_; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }

    bool reoriented() const { return reoriented_; }

    double signed_area(int t) const {
        const auto& tri = triangles_[t];
        const Vec2& a = vertices_[tri[0]];
        const Vec2& b = vertices_[tri[1]];
        const Vec2& c = vertices_[tri[2]];
        return 0.5 * cross(b - a, c - a);
    }

    Vec2 centroid(int t) const {
        const auto& tri = triangles_[t];
        const Vec2& a = vertices_[tri[0]];
        const Vec2& b = vertices_[tri[1]];
        const Vec2& c = vertices_[tri[2]];
        return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    }

    bool is_boundary_vertex(int v) const { return boundary_vertices_.count(v) > 0; }

private:
    void orient_and_validate() {
        const int nv = num_vertices();
        for (auto& tri : triangles_) {
            for (int v : tri) {
                if (v < 0 || v >= nv)
                    throw MeshError("triangle references vertex index out of range: " +
                                    std::to_string(v));
            }
            if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
                throw MeshError("degenerate triangle with repeated vertex");
        }
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            double a = signed_area(static_cast<int>(t));
            if (a == 0.0) throw MeshError("triangle " + std::to_string(t) + " has zero area");
            if (a < 0.0) {
                std::swap(triangles_[t][1], triangles_[t][2]);
                reoriented_ = true;
            }
        }
    }

    void classify_boundary() {
        std::map<Edge, int> edge_count;
        for (const auto& tri : triangles_) {
            for (int e = 0; e < 3; ++e) {
                ++edge_count[make_edge(tri[e], tri[(e + 1) % 3])];
            }
        }
        for (const auto& [edge, count] : edge_count) {
            if (count > 2)
                throw MeshError("non-conforming mesh: edge shared by " + std::to_string(count) +
                                " triangles");
            if (count == 1) {
                boundary_edges_.push_back(edge);
                boundary_vertices_.insert(edge.first);
                boundary_vertices_.insert(edge.second);
            }
        }
        if (boundary_edges_.empty()) throw MeshError("mesh has no boundary");
    }

    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> boundary_edges_;
    std::set<int> boundary_vertices_;
    bool reoriented_ = false;
};

/// Per-triangle areas; total is the plain left-to-right sum so it is
/// reproducible run to run.
struct ElementMeasure {
    std::vector<double> areas;
    double total_area = 0.0;
};

inline ElementMeasure element_measures(const TriMesh& mesh) {
    ElementMeasure em;
    em.areas.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        em.areas[t] = mesh.signed_area(t);
        em.total_area += em.areas[t];
    }
    return em;
}

/// Smallest interior angle over all triangles, in degrees.
inline double min_angle_deg(const TriMesh& mesh) {
    double worst = 180.0;
    for (const auto& tri : mesh.triangles()) {
        for (int i = 0; i < 3; ++i) {
            Vec2 p = mesh.vertices()[tri[i]];
            Vec2 u = mesh.vertices()[tri[(i + 1) % 3]] - p;
            Vec2 v = mesh.vertices()[tri[(i + 2) % 3]] - p;
            double ang = std::atan2(std::abs(cross(u, v)), u.dot(v)) * 180.0 / M_PI;
            worst = std::min(worst, ang);
        }
    }
    return worst;
}

}  // namespace plateopt
