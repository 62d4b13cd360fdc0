// Outer iterations for eigenvalue minimization and maximization over the
// rearrangement class.
//
// Minimization: replace rho by the bathtub maximizer of the current
// eigenfunction's u^2, which enlarges the Rayleigh-quotient denominator and
// can only lower the eigenvalue. Maximization: propose the bathtub minimizer;
// if the new eigenvalue does not increase, fall back to partial swaps of
// geometrically shrinking area until an increase is found or swaps are
// exhausted.
#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "plateopt/eig.hpp"
#include "plateopt/fem.hpp"
#include "plateopt/mesh.hpp"
#include "plateopt/rearrange.hpp"

namespace plateopt {

enum class Direction { minimize, maximize };

struct OptConfig {
    Direction direction = Direction::minimize;
    BCKind bc_kind = BCKind::hinged;
    double tol_rho = 0.0;        // 0 -> one worst-case element: (c_m-c_1)*sqrt(max elem area)
    int max_outer_iters = 200;
    double swap_frac_init = 0.05;   // initial swap area as a fraction of |Omega|
    double swap_shrink = 0.5;
    double swap_frac_min = 0.0;  // 0 -> one smallest element
    double eig_tol = 1e-9;
    int eig_max_iter = 2000;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (tol_rho < 0.0) throw std::invalid_argument("tol_rho must be >= 0");
        if (swap_shrink <= 0.0 || swap_shrink >= 1.0)
            throw std::invalid_argument("swap_shrink must be in (0,1)");
        if (max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be >= 1");
    }
};

enum class StepKind { bathtub, swap, stop };

inline const char* to_string(StepKind s) {
    switch (s) {
        case StepKind::bathtub: return "bathtub";
        case StepKind::swap: return "swap";
        default: return "stop";
    }
}

struct OptRecord {
    int iter;
    double eigenvalue;
    double delta_rho_l2;
    StepKind step_kind;
};

struct OptRun {
    std::vector<OptRecord> trace;
    DensityField final_density;
    EigenPair final_pair;
    std::string termination_reason;
    double wall_seconds = 0.0;
};

/// Deterministic default start: materials in vertical stripes.
inline DensityField stripe_density(const TriMesh& mesh, const RearrangementClass& cls,
                                   const ElementMeasure& areas) {
    std::vector<int> order(mesh.num_triangles());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return mesh.centroid(a).x < mesh.centroid(b).x; });
    return rearrange_detail::fill_by_order(order, cls, areas);
}

inline DensityField random_density(const TriMesh& mesh, const RearrangementClass& cls,
                                   const ElementMeasure& areas, std::uint64_t seed) {
    std::vector<int> order(mesh.num_triangles());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return rearrange_detail::fill_by_order(order, cls, areas);
}

namespace optimize_detail {

// L2 norm of the extreme densities flipping on one worst-case element. This
// sits strictly below the norm of any class-preserving move (which flips at
// least a pair), so real swaps are never mistaken for convergence.
inline double default_tol_rho(const RearrangementClass& cls, const ElementMeasure& areas) {
    double max_a = *std::max_element(areas.areas.begin(), areas.areas.end());
    return (cls.densities.back() - cls.densities.front()) * std::sqrt(max_a);
}

inline ScalarElementField driving_field(const DiscreteOperator& op, const ElementMeasure& areas,
                                        const Eigen::VectorXd& u) {
    auto f = element_u2_integrals(op, u);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::max(0.0, f[k]) / areas.areas[k];
    return f;
}

// Single-element exchanges between a denser and a lighter material, ranked by
// the predicted change of sum rho*f*area: decreasing it is the first-order
// proxy for raising the eigenvalue (maximize), increasing it for lowering it
// (minimize). Only the most promising few elements per material pair are
// combined, so the candidate list stays small on fine meshes.
inline std::vector<DensityField> exchange_candidates(const DensityField& rho,
                                                     const ScalarElementField& f,
                                                     const RearrangementClass& cls,
                                                     const ElementMeasure& areas,
                                                     std::size_t max_candidates,
                                                     bool for_minimize = false) {
    const int m = cls.m();
    std::vector<std::vector<int>> holders(m);
    for (std::size_t k = 0; k < rho.values.size(); ++k)
        for (int i = 0; i < m; ++i)
            if (rho.values[k] == cls.densities[i]) {
                holders[i].push_back(static_cast<int>(k));
                break;
            }
    auto fa = [&](int k) { return f[k] * areas.areas[k]; };

    struct Cand {
        double gain;
        int a, b;  // a holds the denser material, b the lighter
    };
    std::vector<Cand> cands;
    const std::size_t per_side = 8;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            auto hi = holders[j];
            auto lo = holders[i];
            std::size_t nh = std::min(per_side, hi.size()), nl = std::min(per_side, lo.size());
            double sgn = for_minimize ? -1.0 : 1.0;
            std::partial_sort(hi.begin(), hi.begin() + nh, hi.end(),
                              [&](int x, int y) { return sgn * fa(x) > sgn * fa(y); });
            std::partial_sort(lo.begin(), lo.begin() + nl, lo.end(),
                              [&](int x, int y) { return sgn * fa(x) < sgn * fa(y); });
            double dc = cls.densities[j] - cls.densities[i];
            for (std::size_t p = 0; p < nh; ++p)
                for (std::size_t q = 0; q < nl; ++q)
                    cands.push_back({sgn * dc * (fa(hi[p]) - fa(lo[q])), hi[p], lo[q]});
        }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& x, const Cand& y) { return x.gain > y.gain; });
    if (cands.size() > max_candidates) cands.resize(max_candidates);

    // exchanging elements of unequal area perturbs the achieved areas; keep
    // only trials that stay within half the maximum element area of the
    // targets so repeated swaps cannot drift out of the rearrangement class
    double max_a = 0.5 * *std::max_element(areas.areas.begin(), areas.areas.end());
    std::vector<DensityField> out;
    out.reserve(cands.size());
    for (const auto& c : cands) {
        DensityField trial = rho;
        std::swap(trial.values[c.a], trial.values[c.b]);
        trial.achieved_areas = achieved_areas(trial.values, cls, areas);
        bool in_class = true;
        for (int i = 0; i < m; ++i)
            if (std::abs(trial.achieved_areas[i] - cls.target_areas[i]) > max_a) in_class = false;
        if (in_class) out.push_back(std::move(trial));
    }
    return out;
}

}  // namespace optimize_detail

inline OptRun minimize_eigenvalue(const TriMesh& mesh, const RearrangementClass& cls,
                                  const DensityField& rho0, const OptConfig& cfg) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    auto areas = element_measures(mesh);
    cls.validate(areas.total_area,
                 *std::max_element(areas.areas.begin(), areas.areas.end()));
    double tol_rho = cfg.tol_rho > 0.0 ? cfg.tol_rho : optimize_detail::default_tol_rho(cls, areas);

    auto op = assemble_operator(mesh, cfg.bc_kind);
    EigenSolver solver(op);

    OptRun run;
    DensityField rho = rho0;
    if (rho.achieved_areas.empty()) rho.achieved_areas = achieved_areas(rho.values, cls, areas);
    Eigen::VectorXd warm;
    std::size_t version = 0;

    auto eval = [&](const DensityField& r) {
        auto M = assemble_mass(mesh, r.values, op, version++);
        return solver.solve(M.matrix, cfg.eig_tol, cfg.eig_max_iter, warm.size() ? &warm : nullptr);
    };

    try {
        auto pair = eval(rho);
        warm = pair.u;
        run.final_pair = pair;
        for (int n = 0; n < cfg.max_outer_iters; ++n) {
            auto f = optimize_detail::driving_field(op, areas, pair.u);
            auto next = bathtub_maximize(f, cls, areas);

            // the bathtub step decreases the eigenvalue for the exact
            // eigenfunction; with a near-degenerate discrete pair it can
            // oscillate, so only strictly decreasing steps are taken and
            // anything else counts as a stall — this breaks limit cycles of
            // any period and makes the trace monotone by construction
            bool stalled = next == rho;
            EigenPair next_pair;
            if (!stalled) {
                next_pair = eval(next);
                stalled = !(next_pair.lambda < pair.lambda);
            }
            if (stalled) {
                // probe ranked single-element exchanges before stopping —
                // symmetric domains can stall the map on tied driving fields
                // away from the optimum. Only gains clearly above solver noise
                // are taken, so the escape resolves discrete ties without
                // walking the near-flat plateau of a fine mesh indefinitely
                bool escaped = false;
                for (auto& trial : optimize_detail::exchange_candidates(
                         rho, f, cls, areas, 64, /*for_minimize=*/true)) {
                    auto tp = eval(trial);
                    if (tp.lambda < pair.lambda * (1.0 - 1e-6)) {
                        double delta = l2_distance(trial, rho, areas);
                        rho = std::move(trial);
                        warm = tp.u;
                        pair = tp;
                        run.final_pair = pair;
                        run.trace.push_back({n, pair.lambda, delta, StepKind::swap});
                        escaped = true;
                        break;
                    }
                }
                if (escaped) {
                    if (n == cfg.max_outer_iters - 1) {
                        run.termination_reason = "max-iters";
                        run.final_density = rho;
                    }
                    continue;
                }
                run.trace.push_back({n, pair.lambda, 0.0, StepKind::stop});
                run.termination_reason = "fixed-point";
                run.final_density = rho;
                break;
            }
            double delta = l2_distance(next, rho, areas);
            rho = std::move(next);
            warm = next_pair.u;
            pair = next_pair;
            run.final_pair = pair;
            if (delta < tol_rho) {
                run.trace.push_back({n, pair.lambda, delta, StepKind::stop});
                run.termination_reason = "tol-rho";
                run.final_density = rho;
                break;
            }
            run.trace.push_back({n, pair.lambda, delta, StepKind::bathtub});
            if (n == cfg.max_outer_iters - 1) {
                run.termination_reason = "max-iters";
                run.final_density = rho;
            }
        }
        run.final_density = rho;
    } catch (ConvergenceError& e) {
        run.termination_reason = std::string("eigensolver-failure: ") + e.what();
        run.final_density = rho;
        run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        throw;  // trace stays attached to the exception site via run in caller tests
    }
    run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

inline OptRun maximize_eigenvalue(const TriMesh& mesh, const RearrangementClass& cls,
                                  const DensityField& rho0, const OptConfig& cfg) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    auto areas = element_measures(mesh);
    double max_elem = *std::max_element(areas.areas.begin(), areas.areas.end());
    double min_elem = *std::min_element(areas.areas.begin(), areas.areas.end());
    cls.validate(areas.total_area, max_elem);
    double tol_rho = cfg.tol_rho > 0.0 ? cfg.tol_rho : optimize_detail::default_tol_rho(cls, areas);
    double swap_area_min =
        cfg.swap_frac_min > 0.0 ? cfg.swap_frac_min * areas.total_area : min_elem;

    auto op = assemble_operator(mesh, cfg.bc_kind);
    EigenSolver solver(op);

    OptRun run;
    DensityField rho = rho0;
    if (rho.achieved_areas.empty()) rho.achieved_areas = achieved_areas(rho.values, cls, areas);
    Eigen::VectorXd warm;
    std::size_t version = 0;
    double swap_area = cfg.swap_frac_init * areas.total_area;

    auto eval = [&](const DensityField& r) {
        auto M = assemble_mass(mesh, r.values, op, version++);
        return solver.solve(M.matrix, cfg.eig_tol, cfg.eig_max_iter, warm.size() ? &warm : nullptr);
    };

    auto pair = eval(rho);
    warm = pair.u;
    run.final_pair = pair;

    for (int n = 0; n < cfg.max_outer_iters; ++n) {
        auto f = optimize_detail::driving_field(op, areas, pair.u);
        auto candidate = bathtub_minimize(f, cls, areas);

        if (candidate == rho) {
            run.trace.push_back({n, pair.lambda, 0.0, StepKind::stop});
            run.termination_reason = "fixed-point";
            break;
        }

        DensityField accepted;
        EigenPair accepted_pair;
        StepKind kind = StepKind::bathtub;
        auto cand_pair = eval(candidate);
        if (cand_pair.lambda > pair.lambda) {
            accepted = std::move(candidate);
            accepted_pair = cand_pair;
        } else {
            // partial swapping at geometrically shrinking scale; trials whose
            // achieved areas drift more than half an element off the targets
            // are skipped so repeated swaps stay inside the rearrangement class
            bool found = false;
            auto in_class = [&](const DensityField& r) {
                for (int i = 0; i < cls.m(); ++i)
                    if (std::abs(r.achieved_areas[i] - cls.target_areas[i]) > 0.5 * max_elem)
                        return false;
                return true;
            };
            while (swap_area >= swap_area_min * (1.0 - 1e-12)) {
                DensityField trial;
                try {
                    trial = partial_swap(rho, f, cls, areas, swap_area, cfg.rng_seed + n);
                } catch (const NoSwapAvailable&) {
                    break;
                }
                if (!in_class(trial)) {
                    if (swap_area <= min_elem) break;
                    swap_area *= cfg.swap_shrink;
                    continue;
                }
                auto trial_pair = eval(trial);
                if (trial_pair.lambda > pair.lambda) {
                    accepted = std::move(trial);
                    accepted_pair = trial_pair;
                    kind = StepKind::swap;
                    found = true;
                    break;
                }
                if (swap_area <= min_elem) break;  // already at one-element scale
                swap_area *= cfg.swap_shrink;
            }
            if (!found) {
                // last resort before giving up: ranked single-element
                // exchanges, which can climb out of layouts where the
                // extreme-rank swap fails but a neighboring one succeeds
                for (auto& trial :
                     optimize_detail::exchange_candidates(rho, f, cls, areas, 64)) {
                    auto trial_pair = eval(trial);
                    if (trial_pair.lambda > pair.lambda * (1.0 + 1e-6)) {
                        accepted = std::move(trial);
                        accepted_pair = trial_pair;
                        kind = StepKind::swap;
                        found = true;
                        break;
                    }
                }
            }
            if (!found) {
                run.trace.push_back({n, pair.lambda, 0.0, StepKind::stop});
                run.termination_reason = "swap-exhausted";
                break;
            }
        }

        double delta = l2_distance(accepted, rho, areas);
        rho = std::move(accepted);
        warm = accepted_pair.u;
        pair = accepted_pair;
        run.final_pair = pair;
        if (delta < tol_rho) {
            run.trace.push_back({n, pair.lambda, delta, StepKind::stop});
            run.termination_reason = "tol-rho";
            break;
        }
        run.trace.push_back({n, pair.lambda, delta, kind});
        if (n == cfg.max_outer_iters - 1) run.termination_reason = "max-iters";
    }
    run.final_density = rho;
    run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

inline OptRun optimize(const TriMesh& mesh, const RearrangementClass& cls, const DensityField& rho0,
                       const OptConfig& cfg) {
    return cfg.direction == Direction::minimize ? minimize_eigenvalue(mesh, cls, rho0, cfg)
                                                : maximize_eigenvalue(mesh, cls, rho0, cfg);
}

inline void write_trace_csv(const OptRun& run, std::ostream& out) {
    out.precision(17);
    out << "iter,eigenvalue,delta_rho_l2,step_kind\n";
    for (const auto& r : run.trace)
        out << r.iter << ',' << r.eigenvalue << ',' << r.delta_rho_l2 << ','
            << to_string(r.step_kind) << '\n';
}

}  // namespace plateopt
