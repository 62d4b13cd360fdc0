// Bowyer-Watson Delaunay triangulation of a 2-D point set.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "plateopt/mesh.hpp"

namespace plateopt {

namespace detail {

struct DTri {
    int v[3];
    bool alive = true;
};

inline bool in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    // sign of the incircle determinant for ccw (a,b,c); evaluated in extended
    // precision with a relative guard so exactly-cocircular points (common on
    // sampled arcs) are classified as outside instead of flapping on rounding
    // noise, which would make the insertion cavity non-simple
    long double ax = a.x - p.x, ay = a.y - p.y;
    long double bx = b.x - p.x, by = b.y - p.y;
    long double cx = c.x - p.x, cy = c.y - p.y;
    long double t0 = (ax * ax + ay * ay) * (bx * cy - cx * by);
    long double t1 = (bx * bx + by * by) * (ax * cy - cx * ay);
    long double t2 = (cx * cx + cy * cy) * (ax * by - bx * ay);
    long double det = t0 - t1 + t2;
    long double mag = std::abs(t0) + std::abs(t1) + std::abs(t2);
    return det > 1e-12L * mag;
}

}  // namespace detail

/// Delaunay triangulation of `points`. Returns triangles as index triples
/// with positive orientation. Collinear inputs throw.
inline std::vector<Triangle> delaunay_triangulate(const std::vector<Vec2>& points) {
    using detail::DTri;
    const int n = static_cast<int>(points.size());
    if (n < 3) throw std::invalid_argument("delaunay: need at least 3 points");

    // super-triangle enclosing all points
    double minx = points[0].x, maxx = points[0].x, miny = points[0].y, maxy = points[0].y;
    for (const auto& p : points) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    double d = std::max(maxx - minx, maxy - miny);
    if (d == 0.0) throw std::invalid_argument("delaunay: degenerate point set");
    Vec2 mid{(minx + maxx) / 2.0, (miny + maxy) / 2.0};
    std::vector<Vec2> pts = points;
    pts.push_back({mid.x - 4.0 * d, mid.y - 2.5 * d});
    pts.push_back({mid.x + 4.0 * d, mid.y - 2.5 * d});
    pts.push_back({mid.x, mid.y + 4.0 * d});

    std::vector<DTri> tris;
    tris.push_back({{n, n + 1, n + 2}, true});

    for (int ip = 0; ip < n; ++ip) {
        const Vec2& p = pts[ip];
        // collect cavity boundary edges (edges of bad triangles not shared twice)
        std::vector<std::array<int, 2>> edges;
        for (auto& t : tris) {
            if (!t.alive) continue;
            if (detail::in_circumcircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], p)) {
                t.alive = false;
                for (int e = 0; e < 3; ++e) edges.push_back({t.v[e], t.v[(e + 1) % 3]});
            }
        }
        // remove doubled edges (interior to the cavity)
        std::vector<std::array<int, 2>> boundary;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            bool shared = false;
            for (std::size_t j = 0; j < edges.size(); ++j) {
                if (i != j && edges[i][0] == edges[j][1] && edges[i][1] == edges[j][0]) {
                    shared = true;
                    break;
                }
            }
            if (!shared) boundary.push_back(edges[i]);
        }
        for (const auto& e : boundary) tris.push_back({{e[0], e[1], ip}, true});
        // periodic compaction keeps the scan cost down
        if (tris.size() > 4096) {
            std::vector<DTri> live;
            live.reserve(tris.size());
            for (const auto& t : tris)
                if (t.alive) live.push_back(t);
            tris.swap(live);
        }
    }

    std::vector<Triangle> out;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        out.push_back({t.v[0], t.v[1], t.v[2]});
    }
    if (out.empty()) throw std::invalid_argument("delaunay: all points collinear");
    return out;
}

}  // namespace plateopt
