// Mesh generators for the supported plate geometries.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "plateopt/delaunay.hpp"
#include "plateopt/mesh.hpp"

namespace plateopt {

namespace meshgen_detail {

// Triangulates the strip between two concentric vertex rings ordered by
// angle. Rings wrap around; the walk always advances the pointer whose next
// vertex has the smaller angle.
inline void triangulate_strip(const std::vector<int>& inner, const std::vector<double>& inner_ang,
                              const std::vector<int>& outer, const std::vector<double>& outer_ang,
                              std::vector<Triangle>& tris) {
    const int ni = static_cast<int>(inner.size());
    const int no = static_cast<int>(outer.size());
    int ai = 0, ao = 0;
    auto iang = [&](int k) { return k < ni ? inner_ang[k] : inner_ang[k - ni] + 2.0 * M_PI; };
    auto oang = [&](int k) { return k < no ? outer_ang[k] : outer_ang[k - no] + 2.0 * M_PI; };
    while (ai < ni || ao < no) {
        bool advance_outer;
        if (ai == ni)
            advance_outer = true;
        else if (ao == no)
            advance_outer = false;
        else
            advance_outer = oang(ao + 1) <= iang(ai + 1);
        if (advance_outer) {
            tris.push_back({outer[ao % no], outer[(ao + 1) % no], inner[ai % ni]});
            ++ao;
        } else {
            tris.push_back({inner[(ai + 1) % ni], outer[ao % no], inner[ai % ni]});
            ++ai;
        }
    }
}

// Unit disk meshed as hexagonal rings: ring j holds 6j vertices at radius j/nr.
inline void unit_disk_rings(int nr, std::vector<Vec2>& verts, std::vector<Triangle>& tris) {
    verts.push_back({0.0, 0.0});
    std::vector<std::vector<int>> rings(nr + 1);
    std::vector<std::vector<double>> angles(nr + 1);
    rings[0] = {0};
    angles[0] = {0.0};
    for (int j = 1; j <= nr; ++j) {
        const int nj = 6 * j;
        const double r = static_cast<double>(j) / nr;
        for (int k = 0; k < nj; ++k) {
            double a = 2.0 * M_PI * k / nj;
            rings[j].push_back(static_cast<int>(verts.size()));
            angles[j].push_back(a);
            verts.push_back({r * std::cos(a), r * std::sin(a)});
        }
    }
    // central fan
    for (int k = 0; k < 6; ++k) tris.push_back({0, rings[1][k], rings[1][(k + 1) % 6]});
    for (int j = 2; j <= nr; ++j)
        triangulate_strip(rings[j - 1], angles[j - 1], rings[j], angles[j], tris);
}

}  // namespace meshgen_detail

inline TriMesh generate_ellipse(double a, double b, double target_h) {
    if (a <= 0.0 || b <= 0.0 || target_h <= 0.0)
        throw std::invalid_argument("generate_ellipse: arguments must be positive");
    const double hr = target_h / std::max(a, b);
    const int nr = std::max(2, static_cast<int>(std::ceil(1.0 / hr)));
    std::vector<Vec2> verts;
    std::vector<Triangle> tris;
    meshgen_detail::unit_disk_rings(nr, verts, tris);
    for (auto& v : verts) {
        v.x *= a;
        v.y *= b;
    }
    return TriMesh(std::move(verts), std::move(tris));
}

inline TriMesh generate_disk(double radius, double target_h) {
    if (radius <= 0.0 || target_h <= 0.0)
        throw std::invalid_argument("generate_disk: arguments must be positive");
    return generate_ellipse(radius, radius, target_h);
}

inline TriMesh generate_rectangle(double width, double height, double target_h) {
    if (width <= 0.0 || height <= 0.0 || target_h <= 0.0)
        throw std::invalid_argument("generate_rectangle: arguments must be positive");
    const int nx = std::max(1, static_cast<int>(std::ceil(width / target_h)));
    const int ny = std::max(1, static_cast<int>(std::ceil(height / target_h)));
    std::vector<Vec2> verts;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            verts.push_back({width * i / nx, height * j / ny});
    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Triangle> tris;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            tris.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            tris.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    }
    return TriMesh(std::move(verts), std::move(tris));
}

inline TriMesh generate_rectangle_with_hole(double outer_w, double outer_h, double hole_w,
                                            double hole_h, double target_h) {
    if (outer_w <= 0.0 || outer_h <= 0.0 || target_h <= 0.0)
        throw std::invalid_argument("generate_rectangle_with_hole: non-positive dimensions");
    if (hole_w <= 0.0 || hole_h <= 0.0)
        throw std::invalid_argument("generate_rectangle_with_hole: degenerate hole");
    if (hole_w >= outer_w || hole_h >= outer_h)
        throw std::invalid_argument("generate_rectangle_with_hole: hole not strictly inside");
    const double x0 = (outer_w - hole_w) / 2.0, x1 = (outer_w + hole_w) / 2.0;
    const double y0 = (outer_h - hole_h) / 2.0, y1 = (outer_h + hole_h) / 2.0;

    // coordinate lines: uniform grid plus the hole edges snapped in exactly
    auto lines = [target_h](double len, double c0, double c1) {
        std::vector<double> xs;
        int n = std::max(2, static_cast<int>(std::ceil(len / target_h)));
        for (int i = 0; i <= n; ++i) xs.push_back(len * i / n);
        xs.push_back(c0);
        xs.push_back(c1);
        std::sort(xs.begin(), xs.end());
        std::vector<double> out;
        for (double x : xs)
            if (out.empty() || x - out.back() > 0.25 * len / n) out.push_back(x);
        out.back() = len;
        // force the exact hole coordinates onto the nearest line
        for (double c : {c0, c1}) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < out.size(); ++i)
                if (std::abs(out[i] - c) < std::abs(out[best] - c)) best = i;
            out[best] = c;
        }
        return out;
    };
    std::vector<double> xs = lines(outer_w, x0, x1);
    std::vector<double> ys = lines(outer_h, y0, y1);
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = static_cast<int>(ys.size()) - 1;

    std::vector<Vec2> verts;
    std::vector<int> vmap(static_cast<std::size_t>((nx + 1) * (ny + 1)), -1);
    auto gid = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Triangle> tris;
    auto vert = [&](int i, int j) {
        int& m = vmap[gid(i, j)];
        if (m < 0) {
            m = static_cast<int>(verts.size());
            verts.push_back({xs[i], ys[j]});
        }
        return m;
    };
    bool any_cell = false;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double cx = 0.5 * (xs[i] + xs[i + 1]);
            double cy = 0.5 * (ys[j] + ys[j + 1]);
            if (cx > x0 && cx < x1 && cy > y0 && cy < y1) continue;  // inside the hole
            any_cell = true;
            int a = vert(i, j), b = vert(i + 1, j), c = vert(i + 1, j + 1), d = vert(i, j + 1);
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        }
    }
    if (!any_cell) throw std::invalid_argument("generate_rectangle_with_hole: empty domain");
    return TriMesh(std::move(verts), std::move(tris));
}

/// Regular n-gon fan around the center: n equal triangles. Handy as an
/// equal-area fixture with one interior vertex.
inline TriMesh generate_polygon_fan(int n_sides, double radius) {
    if (n_sides < 3 || radius <= 0.0)
        throw std::invalid_argument("generate_polygon_fan: bad parameters");
    std::vector<Vec2> verts;
    verts.push_back({0.0, 0.0});
    for (int k = 0; k < n_sides; ++k) {
        double a = 2.0 * M_PI * k / n_sides;
        verts.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    std::vector<Triangle> tris;
    for (int k = 0; k < n_sides; ++k) tris.push_back({0, 1 + k, 1 + (k + 1) % n_sides});
    return TriMesh(std::move(verts), std::move(tris));
}

/// Analytic area of the crescent disk(R_outer) \ disk(R_inner, centered at
/// distance `offset` along x).
inline double crescent_area(double R_outer, double R_inner, double offset) {
    const double d = offset;
    // lens (intersection) area of the two disks
    double a1 = R_outer * R_outer *
                std::acos((d * d + R_outer * R_outer - R_inner * R_inner) / (2.0 * d * R_outer));
    double a2 = R_inner * R_inner *
                std::acos((d * d + R_inner * R_inner - R_outer * R_outer) / (2.0 * d * R_inner));
    double k = (-d + R_outer + R_inner) * (d + R_outer - R_inner) * (d - R_outer + R_inner) *
               (d + R_outer + R_inner);
    double lens = a1 + a2 - 0.5 * std::sqrt(std::max(0.0, k));
    return M_PI * R_outer * R_outer - lens;
}

inline TriMesh generate_crescent(double R_outer, double R_inner, double offset, double target_h) {
    if (R_outer <= 0.0 || R_inner <= 0.0 || target_h <= 0.0 || offset <= 0.0)
        throw std::invalid_argument("generate_crescent: arguments must be positive");
    // the two circles must properly intersect or the difference is not a crescent
    if (offset >= R_outer + R_inner)
        throw std::invalid_argument("generate_crescent: inner disk does not overlap the outer");
    if (offset <= std::abs(R_outer - R_inner))
        throw std::invalid_argument("generate_crescent: circles do not cross (no crescent)");

    const double d = offset;
    const double ax = (d * d - R_inner * R_inner + R_outer * R_outer) / (2.0 * d);
    const double hy = std::sqrt(R_outer * R_outer - ax * ax);
    const double phi_o = std::atan2(hy, ax);                   // outer-circle angle of crossing
    const double phi_i = std::atan2(hy, ax - d);               // inner-circle angle of crossing
    const Vec2 inner_c{d, 0.0};

    std::vector<Vec2> pts;
    // outer arc (the side away from the inner disk), ccw from +phi_o to 2pi-phi_o
    {
        double span = 2.0 * (M_PI - phi_o);
        int n = std::max(4, static_cast<int>(std::ceil(span * R_outer / target_h)));
        for (int k = 0; k <= n; ++k) {
            double a = phi_o + span * k / n;
            pts.push_back({R_outer * std::cos(a), R_outer * std::sin(a)});
        }
    }
    // inner arc (the part inside the outer disk), from -phi_i down through pi back to +phi_i
    {
        double span = 2.0 * (M_PI - phi_i);
        int n = std::max(4, static_cast<int>(std::ceil(span * R_inner / target_h)));
        for (int k = 1; k < n; ++k) {
            double a = -(phi_i + span * k / n);  // walk clockwise around the inner circle
            pts.push_back({inner_c.x + R_inner * std::cos(a), inner_c.y + R_inner * std::sin(a)});
        }
    }
    const std::size_t n_boundary = pts.size();

    // interior fill: hex lattice clipped away from both circles
    const double margin = 0.6 * target_h;
    const double dy = target_h * std::sqrt(3.0) / 2.0;
    int row = 0;
    for (double y = -R_outer; y <= R_outer; y += dy, ++row) {
        double x0 = (row % 2 == 0) ? -R_outer : -R_outer + 0.5 * target_h;
        for (double x = x0; x <= R_outer; x += target_h) {
            Vec2 p{x, y};
            if (p.norm() > R_outer - margin) continue;
            if ((p - inner_c).norm() < R_inner + margin) continue;
            pts.push_back(p);
        }
    }
    (void)n_boundary;

    auto tris = delaunay_triangulate(pts);
    // drop triangles outside the crescent (Delaunay covers the convex hull)
    std::vector<Triangle> kept;
    for (const auto& t : tris) {
        Vec2 c{(pts[t[0]].x + pts[t[1]].x + pts[t[2]].x) / 3.0,
               (pts[t[0]].y + pts[t[1]].y + pts[t[2]].y) / 3.0};
        if (c.norm() >= R_outer) continue;
        if ((c - inner_c).norm() <= R_inner) continue;
        kept.push_back(t);
    }
    if (kept.empty()) throw std::invalid_argument("generate_crescent: empty triangulation");

    // compact unused vertices (clipped lattice points on the hull, if any)
    std::vector<int> remap(pts.size(), -1);
    std::vector<Vec2> verts;
    for (auto& t : kept) {
        for (int& v : t) {
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(verts.size());
                verts.push_back(pts[v]);
            }
            v = remap[v];
        }
    }
    return TriMesh(std::move(verts), std::move(kept));
}

}  // namespace plateopt
