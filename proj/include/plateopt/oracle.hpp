// Ground truth for tests: exhaustive optimization over tiny meshes and
// analytic eigenvalues of homogeneous plates.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plateopt/eig.hpp"
#include "plateopt/fem.hpp"
#include "plateopt/mesh.hpp"
#include "plateopt/optimize.hpp"
#include "plateopt/rearrange.hpp"

namespace plateopt {

struct OracleResult {
    double optimum_value = 0.0;
    DensityField optimizer;
    std::string instance;
    long enumeration_count = 0;
};

namespace oracle_detail {

constexpr long kGuard = 1000000;

// DFS over per-element material assignments; `visit` is called for every
// area-feasible complete assignment. Feasibility: each achieved area within
// half the largest element area of its target (the closest achievable
// quantization). Returns the number of feasible assignments, or -1 when the
// guard tripped.
inline long enumerate_assignments(const RearrangementClass& cls, const ElementMeasure& areas,
                                  const std::function<void(const std::vector<int>&)>& visit,
                                  long guard = kGuard) {
    const int m = cls.m();
    const int n = static_cast<int>(areas.areas.size());
    const double half = 0.5 * *std::max_element(areas.areas.begin(), areas.areas.end()) *
                        (1.0 + 1e-9);
    std::vector<int> assign(n, -1);
    std::vector<double> acc(m, 0.0);
    long count = 0;
    bool tripped = false;

    std::function<void(int)> dfs = [&](int k) {
        if (tripped) return;
        if (k == n) {
            for (int i = 0; i < m; ++i)
                if (std::abs(acc[i] - cls.target_areas[i]) > half) return;
            if (++count > guard) {
                tripped = true;
                return;
            }
            if (visit) visit(assign);
            return;
        }
        for (int i = 0; i < m; ++i) {
            if (acc[i] + areas.areas[k] > cls.target_areas[i] + half) continue;
            assign[k] = i;
            acc[i] += areas.areas[k];
            dfs(k + 1);
            acc[i] -= areas.areas[k];
            assign[k] = -1;
        }
    };
    dfs(0);
    return tripped ? -1 : count;
}

}  // namespace oracle_detail

inline OracleResult exhaustive_extremum(const TriMesh& mesh, const RearrangementClass& cls,
                                        BCKind bc, Direction direction, double eig_tol = 1e-10) {
    auto areas = element_measures(mesh);
    double max_elem = *std::max_element(areas.areas.begin(), areas.areas.end());
    cls.validate(areas.total_area, max_elem);

    // counting pass first so the guard refuses before any eigensolve
    long count = oracle_detail::enumerate_assignments(cls, areas, nullptr);
    if (count < 0)
        throw std::runtime_error("exhaustive_extremum: more than " +
                                 std::to_string(oracle_detail::kGuard) + " feasible assignments");
    if (count == 0) throw std::runtime_error("exhaustive_extremum: no feasible assignment");

    auto op = assemble_operator(mesh, bc);
    EigenSolver solver(op);

    OracleResult res;
    res.enumeration_count = count;
    res.instance = std::to_string(mesh.num_triangles()) + " elements, m=" +
                   std::to_string(cls.m()) + ", " +
                   (bc == BCKind::hinged ? "hinged" : "clamped") + ", " +
                   (direction == Direction::minimize ? "minimize" : "maximize");
    bool first = true;
    const bool want_min = direction == Direction::minimize;
    oracle_detail::enumerate_assignments(cls, areas, [&](const std::vector<int>& assign) {
        std::vector<double> rho(assign.size());
        for (std::size_t k = 0; k < assign.size(); ++k) rho[k] = cls.densities[assign[k]];
        auto M = assemble_mass(mesh, rho, op);
        auto pair = solver.solve(M.matrix, eig_tol, 2000);
        if (first || (want_min ? pair.lambda < res.optimum_value
                               : pair.lambda > res.optimum_value)) {
            first = false;
            res.optimum_value = pair.lambda;
            res.optimizer.values = std::move(rho);
        }
    });
    res.optimizer.achieved_areas = achieved_areas(res.optimizer.values, cls, areas);
    return res;
}

namespace oracle_detail {

// root by bisection; f must change sign on [lo, hi]
inline double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0.0) throw std::runtime_error("bisect_root: no sign change");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle_detail

/// First positive zero of the Bessel function J0.
inline double bessel_j0_first_root() {
    return oracle_detail::bisect_root([](double x) { return std::cyl_bessel_j(0.0, x); }, 2.0, 3.0);
}

/// First root of the clamped circular plate frequency equation
/// J0(k) I1(k) + I0(k) J1(k) = 0.
inline double clamped_disk_first_root() {
    auto f = [](double k) {
        return std::cyl_bessel_j(0.0, k) * std::cyl_bessel_i(1.0, k) +
               std::cyl_bessel_i(0.0, k) * std::cyl_bessel_j(1.0, k);
    };
    return oracle_detail::bisect_root(f, 2.5, 4.0);
}

struct HomogeneousDisk {
    double radius;
};
struct HomogeneousRectangle {
    double a, b;
};

inline double analytic_homogeneous(const HomogeneousDisk& d, BCKind bc, double c) {
    if (d.radius <= 0.0 || c <= 0.0) throw std::invalid_argument("bad disk parameters");
    if (bc == BCKind::hinged) {
        double j01 = bessel_j0_first_root();
        double mu = j01 * j01 / (d.radius * d.radius);  // first Dirichlet Laplacian eigenvalue
        return mu * mu / c;
    }
    double k = clamped_disk_first_root();
    return std::pow(k / d.radius, 4) / c;
}

inline double analytic_homogeneous(const HomogeneousRectangle& r, BCKind bc, double c) {
    if (r.a <= 0.0 || r.b <= 0.0 || c <= 0.0) throw std::invalid_argument("bad rectangle");
    if (bc != BCKind::hinged)
        throw std::invalid_argument("no closed form for the clamped rectangle");
    double mu = M_PI * M_PI * (1.0 / (r.a * r.a) + 1.0 / (r.b * r.b));
    return mu * mu / c;
}

}  // namespace plateopt
