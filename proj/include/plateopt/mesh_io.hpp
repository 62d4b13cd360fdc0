// Text mesh I/O.
//
// Format: header `nv nt nb`, then nv lines `x y`, nt lines `i j k` (0-based),
// nb lines of boundary edge vertex pairs. `#` starts a comment.
#pragma once

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "plateopt/mesh.hpp"

namespace plateopt {

class MeshParseError : public std::runtime_error {
public:
    MeshParseError(const std::string& path, int line, const std::string& msg)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + msg) {}
};

namespace io_detail {

// Line-oriented tokenizer that strips comments and tracks line numbers.
class LineReader {
public:
    LineReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    std::istringstream next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ss(line);
            std::string probe;
            if (ss >> probe) {
                ss.clear();
                ss.seekg(0);
                return ss;
            }
        }
        throw MeshParseError(path_, lineno_, "unexpected end of file");
    }

    int lineno() const { return lineno_; }
    const std::string& path() const { return path_; }

private:
    std::istream& in_;
    std::string path_;
    int lineno_ = 0;
};

}  // namespace io_detail

inline TriMesh load_mesh(std::istream& in, const std::string& path = "<stream>") {
    io_detail::LineReader rd(in, path);
    auto hdr = rd.next();
    long nv = 0, nt = 0, nb = 0;
    if (!(hdr >> nv >> nt >> nb) || nv < 3 || nt < 1 || nb < 0)
        throw MeshParseError(path, rd.lineno(), "bad header, expected `nv nt nb`");

    std::vector<Vec2> verts;
    verts.reserve(nv);
    for (long i = 0; i < nv; ++i) {
        auto ss = rd.next();
        double x, y;
        if (!(ss >> x >> y)) throw MeshParseError(path, rd.lineno(), "bad vertex line");
        verts.push_back({x, y});
    }
    std::vector<Triangle> tris;
    tris.reserve(nt);
    for (long t = 0; t < nt; ++t) {
        auto ss = rd.next();
        int i, j, k;
        if (!(ss >> i >> j >> k)) throw MeshParseError(path, rd.lineno(), "bad triangle line");
        tris.push_back({i, j, k});
    }
    for (long e = 0; e < nb; ++e) {
        auto ss = rd.next();
        int a, b;
        if (!(ss >> a >> b)) throw MeshParseError(path, rd.lineno(), "bad boundary edge line");
        if (a < 0 || a >= nv || b < 0 || b >= nv)
            throw MeshParseError(path, rd.lineno(), "boundary edge vertex out of range");
    }

    try {
        TriMesh mesh(std::move(verts), std::move(tris));
        if (mesh.reoriented())
            std::cerr << "warning: " << path << ": inverted triangles were re-oriented\n";
        if (static_cast<long>(mesh.boundary_edges().size()) != nb)
            std::cerr << "warning: " << path << ": declared " << nb
                      << " boundary edges, mesh has " << mesh.boundary_edges().size() << "\n";
        return mesh;
    } catch (const MeshError& e) {
        throw MeshParseError(path, rd.lineno(), e.what());
    }
}

inline TriMesh load_mesh(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open mesh file: " + path);
    return load_mesh(f, path);
}

inline void save_mesh(const TriMesh& mesh, std::ostream& out) {
    out.precision(17);
    out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' '
        << mesh.boundary_edges().size() << '\n';
    for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << '\n';
    for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& e : mesh.boundary_edges()) out << e.first << ' ' << e.second << '\n';
}

inline void save_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open mesh file for writing: " + path);
    save_mesh(mesh, f);
}

}  // namespace plateopt
