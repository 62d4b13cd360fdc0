// Discrete rearrangement class and the bathtub extremizers.
//
// A density field assigns one of the class densities c_1 < ... < c_m to every
// triangle. The bathtub operations sort the elements by the driving field f
// (the element average of u^2) and fill the target areas greedily, which is
// the exact discrete solution of min/max of sum rho_k f_k area_k. A bisection
// variant over level thresholds is available as well.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "plateopt/mesh.hpp"

namespace plateopt {

struct RearrangementClass {
    std::vector<double> densities;     // c_1 < ... < c_m, all positive
    std::vector<double> target_areas;  // S_1..S_m, sum = |Omega|

    int m() const { return static_cast<int>(densities.size()); }

    void validate(double total_area, double max_elem_area) const {
        if (densities.size() < 2) throw std::invalid_argument("need at least 2 materials");
        if (densities.size() != target_areas.size())
            throw std::invalid_argument("densities/target_areas size mismatch");
        for (std::size_t i = 0; i < densities.size(); ++i) {
            if (densities[i] <= 0.0) throw std::invalid_argument("densities must be positive");
            if (i > 0 && densities[i] <= densities[i - 1])
                throw std::invalid_argument("densities must be strictly increasing");
            if (target_areas[i] <= 0.0) throw std::invalid_argument("target areas must be positive");
        }
        double s = std::accumulate(target_areas.begin(), target_areas.end(), 0.0);
        if (std::abs(s - total_area) > max_elem_area)
            throw std::invalid_argument("target areas must sum to the domain area (got " +
                                        std::to_string(s) + " vs " + std::to_string(total_area) +
                                        ")");
    }
};

struct DensityField {
    std::vector<double> values;          // per element, each one of the class densities
    std::vector<double> achieved_areas;  // realized area per material

    bool operator==(const DensityField& o) const { return values == o.values; }
};

using ScalarElementField = std::vector<double>;  // per-element nonnegative values

inline std::vector<double> achieved_areas(const std::vector<double>& values,
                                          const RearrangementClass& cls,
                                          const ElementMeasure& areas) {
    std::vector<double> acc(cls.m(), 0.0);
    for (std::size_t k = 0; k < values.size(); ++k) {
        auto it = std::find(cls.densities.begin(), cls.densities.end(), values[k]);
        if (it == cls.densities.end())
            throw std::invalid_argument("density value not in rearrangement class");
        acc[it - cls.densities.begin()] += areas.areas[k];
    }
    return acc;
}

/// F(s) = measure of {f > s}.
inline double distribution_function(const ScalarElementField& f, const ElementMeasure& areas,
                                    double s) {
    double a = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f[k] > s) a += areas.areas[k];
    return a;
}

namespace rearrange_detail {

// Elements sorted by f descending (minimize) or ascending (maximize), ties
// broken by element index for determinism.
inline std::vector<int> sorted_order(const ScalarElementField& f, bool descending) {
    std::vector<int> order(f.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return descending ? f[a] > f[b] : f[a] < f[b];
    });
    return order;
}

// Greedy prefix fill: walk the sorted elements and assign material i until
// the cumulative area is as close to S_i as the element quantization allows.
inline DensityField fill_by_order(const std::vector<int>& order, const RearrangementClass& cls,
                                  const ElementMeasure& areas) {
    const int m = cls.m();
    DensityField rho;
    rho.values.assign(order.size(), cls.densities.back());
    std::size_t pos = 0;
    for (int i = 0; i < m; ++i) {
        double target = cls.target_areas[i];
        double acc = 0.0;
        // last material takes the remainder
        while (pos < order.size() && (i == m - 1 || acc < target)) {
            double a = areas.areas[order[pos]];
            if (i < m - 1 && acc + a - target > target - acc && acc > 0.0) break;
            rho.values[order[pos]] = cls.densities[i];
            acc += a;
            ++pos;
        }
    }
    rho.achieved_areas = achieved_areas(rho.values, cls, areas);
    return rho;
}

}  // namespace rearrange_detail

enum class BathtubMode { minimize, maximize };

/// Level thresholds t_1..t_{m-1} by bisection on the distribution function of
/// the remaining domain. For minimize, D_i = {f >= t_i}; for maximize,
/// D_i = {f <= t_i}. Returns the thresholds; `quantized` is set when the
/// element quantization prevented reaching the area tolerance.
inline std::vector<double> levels_bisection(const ScalarElementField& f,
                                            const RearrangementClass& cls,
                                            const ElementMeasure& areas, BathtubMode mode,
                                            double tol, bool* quantized = nullptr) {
    if (tol <= 0.0) throw std::invalid_argument("levels_bisection: tol must be positive");
    if (quantized) *quantized = false;
    const int m = cls.m();
    std::vector<char> remaining(f.size(), 1);
    double fmax = f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());

    auto rem_measure = [&](double theta) {
        // area of the remaining domain selected by the threshold
        double a = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            if (!remaining[k]) continue;
            bool in = (mode == BathtubMode::minimize) ? f[k] >= theta : f[k] <= theta;
            if (in) a += areas.areas[k];
        }
        return a;
    };

    std::vector<double> thresholds;
    for (int i = 0; i < m - 1; ++i) {
        double lo = 0.0, hi = fmax;
        double best = hi, best_err = std::abs(rem_measure(hi) - cls.target_areas[i]);
        for (int it = 0; it < 200; ++it) {
            double theta = 0.5 * (lo + hi);
            double F = rem_measure(theta);
            double err = std::abs(F - cls.target_areas[i]);
            if (err < best_err) {
                best_err = err;
                best = theta;
            }
            if (err < tol) break;
            bool too_small = F < cls.target_areas[i];
            // growing the selected set means lowering the threshold in
            // minimize mode and raising it in maximize mode
            if (mode == BathtubMode::minimize) {
                (too_small ? hi : lo) = theta;
            } else {
                (too_small ? lo : hi) = theta;
            }
        }
        if (best_err >= tol && quantized) *quantized = true;
        thresholds.push_back(best);
        for (std::size_t k = 0; k < f.size(); ++k) {
            if (!remaining[k]) continue;
            bool in = (mode == BathtubMode::minimize) ? f[k] >= best : f[k] <= best;
            if (in) remaining[k] = 0;
        }
    }
    return thresholds;
}

/// Exact discrete minimizer of sum_k rho_k f_k area_k over the class:
/// c_1 goes to the largest-f region, c_m to the smallest.
inline DensityField bathtub_minimize(const ScalarElementField& f, const RearrangementClass& cls,
                                     const ElementMeasure& areas) {
    auto order = rearrange_detail::sorted_order(f, /*descending=*/true);
    return rearrange_detail::fill_by_order(order, cls, areas);
}

/// Exact discrete maximizer: c_1 to the smallest-f region, c_m to the largest.
inline DensityField bathtub_maximize(const ScalarElementField& f, const RearrangementClass& cls,
                                     const ElementMeasure& areas) {
    auto order = rearrange_detail::sorted_order(f, /*descending=*/false);
    return rearrange_detail::fill_by_order(order, cls, areas);
}

inline double linear_objective(const DensityField& rho, const ScalarElementField& f,
                               const ElementMeasure& areas) {
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += rho.values[k] * f[k] * areas.areas[k];
    return s;
}

inline double l2_distance(const DensityField& a, const DensityField& b,
                          const ElementMeasure& areas) {
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("l2_distance: field length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        double d = a.values[k] - b.values[k];
        s += d * d * areas.areas[k];
    }
    return std::sqrt(s);
}

class NoSwapAvailable : public std::runtime_error {
public:
    NoSwapAvailable() : std::runtime_error("no admissible partial swap exists") {}
};

/// Exchanges ~swap_area between two materials so that sum rho f strictly
/// decreases: the highest-f elements of the denser material take the lighter
/// density and the lowest-f elements of the lighter material take the denser
/// one. Material pairs are tried in descending density gap. Throws
/// NoSwapAvailable when no exchange can decrease the objective.
inline DensityField partial_swap(const DensityField& rho, const ScalarElementField& f,
                                 const RearrangementClass& cls, const ElementMeasure& areas,
                                 double swap_area, std::uint64_t rng_seed = 0) {
    if (swap_area <= 0.0) throw std::invalid_argument("partial_swap: swap_area must be positive");
    const int m = cls.m();

    // pairs ordered by density gap, descending; rng breaks exact ties
    std::vector<std::pair<int, int>> pairs;  // (low material, high material)
    for (int j = 0; j < m; ++j)
        for (int i = j + 1; i < m; ++i) pairs.emplace_back(j, i);
    std::mt19937_64 rng(rng_seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    std::stable_sort(pairs.begin(), pairs.end(), [&](auto& a, auto& b) {
        return cls.densities[a.second] - cls.densities[a.first] >
               cls.densities[b.second] - cls.densities[b.first];
    });

    for (auto [jlo, ihi] : pairs) {
        double clo = cls.densities[jlo], chi = cls.densities[ihi];
        std::vector<int> low_elems, high_elems;
        for (std::size_t k = 0; k < rho.values.size(); ++k) {
            if (rho.values[k] == clo) low_elems.push_back(static_cast<int>(k));
            if (rho.values[k] == chi) high_elems.push_back(static_cast<int>(k));
        }
        if (low_elems.empty() || high_elems.empty()) continue;
        // B: highest-f holders of the dense material; A: lowest-f holders of
        // the light material
        std::stable_sort(high_elems.begin(), high_elems.end(),
                         [&](int a, int b) { return f[a] > f[b]; });
        std::stable_sort(low_elems.begin(), low_elems.end(),
                         [&](int a, int b) { return f[a] < f[b]; });

        DensityField out = rho;
        double area_b = 0.0, area_a = 0.0, sum_fb = 0.0, sum_fa = 0.0;
        std::size_t bi = 0, ai = 0;
        std::vector<int> setA, setB;
        while (bi < high_elems.size() && ai < low_elems.size()) {
            // grow the lagging side so |A| tracks |B|
            if (area_b <= area_a && area_b < swap_area) {
                int k = high_elems[bi++];
                setB.push_back(k);
                area_b += areas.areas[k];
                sum_fb += f[k] * areas.areas[k];
            } else if (area_a < area_b) {
                int k = low_elems[ai++];
                setA.push_back(k);
                area_a += areas.areas[k];
                sum_fa += f[k] * areas.areas[k];
            } else {
                break;  // both sides reached the requested area
            }
        }
        if (setA.empty() || setB.empty()) continue;
        if (sum_fb <= sum_fa) {
            // try the minimal one-element exchange before giving up on the pair
            setB = {high_elems[0]};
            setA = {low_elems[0]};
            sum_fb = f[setB[0]] * areas.areas[setB[0]];
            sum_fa = f[setA[0]] * areas.areas[setA[0]];
            if (sum_fb <= sum_fa) continue;
        }
        for (int k : setB) out.values[k] = clo;
        for (int k : setA) out.values[k] = chi;
        out.achieved_areas = achieved_areas(out.values, cls, areas);
        return out;
    }
    throw NoSwapAvailable();
}

/// One line per element `elem_index density_value`, preceded by a JSON-style
/// header with the class parameters and the realized areas.
inline void save_density(const DensityField& rho, const RearrangementClass& cls,
                         std::ostream& out) {
    out.precision(17);
    out << "# {\"densities\": [";
    for (std::size_t i = 0; i < cls.densities.size(); ++i)
        out << (i ? ", " : "") << cls.densities[i];
    out << "], \"target_areas\": [";
    for (std::size_t i = 0; i < cls.target_areas.size(); ++i)
        out << (i ? ", " : "") << cls.target_areas[i];
    out << "], \"achieved_areas\": [";
    for (std::size_t i = 0; i < rho.achieved_areas.size(); ++i)
        out << (i ? ", " : "") << rho.achieved_areas[i];
    out << "]}\n";
    for (std::size_t k = 0; k < rho.values.size(); ++k) out << k << ' ' << rho.values[k] << '\n';
}

inline void save_density(const DensityField& rho, const RearrangementClass& cls,
                         const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open density file for writing: " + path);
    save_density(rho, cls, f);
}

inline std::vector<double> load_density_values(std::istream& in) {
    std::vector<std::pair<long, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        long idx;
        double val;
        if (ss >> idx >> val) rows.emplace_back(idx, val);
    }
    std::sort(rows.begin(), rows.end());
    std::vector<double> values;
    values.reserve(rows.size());
    for (auto& [idx, val] : rows) {
        if (idx != static_cast<long>(values.size()))
            throw std::runtime_error("density file: non-contiguous element indices");
        values.push_back(val);
    }
    return values;
}

}  // namespace plateopt
