// Run specifications: flat key-value spec files, the run driver that emits
// all artifacts, and the batch runner.
//
// Spec grammar: `key = value` lines, `#` comments, optional `[section]`
// headers (cosmetic only; keys are global). See docs in the README.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "plateopt/mesh.hpp"
#include "plateopt/mesh_gen.hpp"
#include "plateopt/mesh_io.hpp"
#include "plateopt/optimize.hpp"
#include "plateopt/rearrange.hpp"
#include "plateopt/vtk.hpp"

namespace plateopt {

class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RunSpec {
    std::string name;
    std::string geometry;  // disk|rectangle|ellipse|crescent|rectangle_with_hole|mesh_file
    std::map<std::string, double> geom_params;
    std::string mesh_file;
    double target_h = 0.1;
    double scale_to_area = 0.0;  // 0 = no rescaling

    std::vector<double> densities;
    std::vector<double> target_areas;    // absolute, or
    std::vector<double> area_fractions;  // fractions of the meshed area

    BCKind bc = BCKind::hinged;
    Direction direction = Direction::minimize;
    std::string init = "stripes";  // stripes|random
    int restarts = 1;
    std::uint64_t seed = 0;
    double tol_rho = 0.0;
    int max_outer_iters = 200;
    double eig_tol = 1e-9;
    double swap_frac_init = 0.05;
    double swap_shrink = 0.5;
    std::string output_dir;
};

namespace spec_detail {

inline std::map<std::string, std::string> parse_kv(std::istream& in, const std::string& path) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[' && t.back() == ']') continue;  // section header
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw SpecError(path + ":" + std::to_string(lineno) + ": expected `key = value`");
        std::string key = trim(t.substr(0, eq)), val = trim(t.substr(eq + 1));
        if (key.empty() || val.empty())
            throw SpecError(path + ":" + std::to_string(lineno) + ": empty key or value");
        if (kv.count(key))
            throw SpecError(path + ":" + std::to_string(lineno) + ": duplicate key `" + key + "`");
        kv[key] = val;
    }
    return kv;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::istringstream ss(s);
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    if (out.empty()) throw SpecError("field `" + key + "`: expected numbers");
    return out;
}

}  // namespace spec_detail

inline RunSpec parse_spec(std::istream& in, const std::string& path = "<stream>") {
    auto kv = spec_detail::parse_kv(in, path);
    auto used = std::map<std::string, bool>{};
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        used[key] = true;
        return &it->second;
    };
    auto require = [&](const std::string& key) -> const std::string& {
        auto* v = get(key);
        if (!v) throw SpecError(path + ": missing required field `" + key + "`");
        return *v;
    };
    auto num = [&](const std::string& key, double dflt) {
        auto* v = get(key);
        return v ? std::stod(*v) : dflt;
    };

    RunSpec spec;
    spec.name = require("name");
    spec.geometry = require("geometry");
    const std::vector<std::string> geoms = {"disk",     "rectangle",           "ellipse",
                                            "crescent", "rectangle_with_hole", "mesh_file"};
    if (std::find(geoms.begin(), geoms.end(), spec.geometry) == geoms.end())
        throw SpecError(path + ": field `geometry`: unknown kind `" + spec.geometry + "`");

    if (spec.geometry == "mesh_file") {
        spec.mesh_file = require("mesh_path");
    } else {
        spec.target_h = std::stod(require("target_h"));
        for (const char* p : {"radius", "width", "height", "a", "b", "r_outer", "r_inner",
                              "offset", "outer_w", "outer_h", "hole_w", "hole_h"}) {
            if (auto* v = get(p)) spec.geom_params[p] = std::stod(*v);
        }
        spec.scale_to_area = num("scale_to_area", 0.0);
    }

    spec.densities = spec_detail::parse_list(require("densities"), "densities");
    if (auto* v = get("target_areas")) spec.target_areas = spec_detail::parse_list(*v, "target_areas");
    if (auto* v = get("area_fractions"))
        spec.area_fractions = spec_detail::parse_list(*v, "area_fractions");
    if (spec.target_areas.empty() == spec.area_fractions.empty())
        throw SpecError(path + ": exactly one of `target_areas` or `area_fractions` is required");

    std::string bc = require("bc");
    if (bc == "hinged")
        spec.bc = BCKind::hinged;
    else if (bc == "clamped")
        spec.bc = BCKind::clamped;
    else
        throw SpecError(path + ": field `bc`: expected hinged or clamped");

    std::string dir = require("direction");
    if (dir == "minimize")
        spec.direction = Direction::minimize;
    else if (dir == "maximize")
        spec.direction = Direction::maximize;
    else
        throw SpecError(path + ": field `direction`: expected minimize or maximize");

    if (auto* v = get("init")) {
        spec.init = *v;
        if (spec.init != "stripes" && spec.init != "random")
            throw SpecError(path + ": field `init`: expected stripes or random");
    }
    spec.restarts = static_cast<int>(num("restarts", 1));
    if (spec.restarts < 1) throw SpecError(path + ": field `restarts`: must be >= 1");
    spec.seed = static_cast<std::uint64_t>(num("seed", 0));
    spec.tol_rho = num("tol_rho", 0.0);
    spec.max_outer_iters = static_cast<int>(num("max_outer_iters", 200));
    spec.eig_tol = num("eig_tol", 1e-9);
    spec.swap_frac_init = num("swap_frac_init", 0.05);
    spec.swap_shrink = num("swap_shrink", 0.5);
    if (auto* v = get("output_dir")) spec.output_dir = *v;
    if (spec.output_dir.empty()) spec.output_dir = "out/" + spec.name;

    for (const auto& [key, val] : kv)
        if (!used.count(key))
            throw SpecError(path + ": unknown field `" + key + "`");
    return spec;
}

inline RunSpec parse_spec_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SpecError("cannot open spec file: " + path);
    return parse_spec(f, path);
}

inline TriMesh build_mesh(const RunSpec& spec) {
    auto p = [&](const std::string& key) {
        auto it = spec.geom_params.find(key);
        if (it == spec.geom_params.end())
            throw SpecError("geometry `" + spec.geometry + "` needs field `" + key + "`");
        return it->second;
    };
    double analytic = 0.0;
    if (spec.geometry == "mesh_file") return load_mesh(spec.mesh_file);
    if (spec.geometry == "disk")
        analytic = M_PI * p("radius") * p("radius");
    else if (spec.geometry == "rectangle")
        analytic = p("width") * p("height");
    else if (spec.geometry == "ellipse")
        analytic = M_PI * p("a") * p("b");
    else if (spec.geometry == "crescent")
        analytic = crescent_area(p("r_outer"), p("r_inner"), p("offset"));
    else
        analytic = p("outer_w") * p("outer_h") - p("hole_w") * p("hole_h");

    double s = spec.scale_to_area > 0.0 ? std::sqrt(spec.scale_to_area / analytic) : 1.0;
    if (spec.geometry == "disk") return generate_disk(s * p("radius"), spec.target_h);
    if (spec.geometry == "rectangle")
        return generate_rectangle(s * p("width"), s * p("height"), spec.target_h);
    if (spec.geometry == "ellipse") return generate_ellipse(s * p("a"), s * p("b"), spec.target_h);
    if (spec.geometry == "crescent")
        return generate_crescent(s * p("r_outer"), s * p("r_inner"), s * p("offset"),
                                 spec.target_h);
    return generate_rectangle_with_hole(s * p("outer_w"), s * p("outer_h"), s * p("hole_w"),
                                        s * p("hole_h"), spec.target_h);
}

inline RearrangementClass resolve_class(const RunSpec& spec, const ElementMeasure& areas) {
    RearrangementClass cls;
    cls.densities = spec.densities;
    if (!spec.area_fractions.empty()) {
        double fsum = std::accumulate(spec.area_fractions.begin(), spec.area_fractions.end(), 0.0);
        if (std::abs(fsum - 1.0) > 1e-9)
            throw SpecError("area_fractions must sum to 1");
        for (double f : spec.area_fractions) cls.target_areas.push_back(f * areas.total_area);
    } else {
        double s = std::accumulate(spec.target_areas.begin(), spec.target_areas.end(), 0.0);
        if (std::abs(s - areas.total_area) > 0.01 * areas.total_area)
            throw SpecError("target_areas sum " + std::to_string(s) +
                            " deviates more than 1% from the meshed area " +
                            std::to_string(areas.total_area));
        // renormalize onto the meshed (polygonal) area
        for (double a : spec.target_areas) cls.target_areas.push_back(a * areas.total_area / s);
    }
    double max_elem = *std::max_element(areas.areas.begin(), areas.areas.end());
    cls.validate(areas.total_area, max_elem);
    return cls;
}

struct RunResult {
    RunSpec spec;
    OptRun best;
    int best_restart = 0;
    std::vector<double> restart_eigenvalues;
    double mesh_area = 0.0;
};

inline OptConfig make_config(const RunSpec& spec) {
    OptConfig cfg;
    cfg.direction = spec.direction;
    cfg.bc_kind = spec.bc;
    cfg.tol_rho = spec.tol_rho;
    cfg.max_outer_iters = spec.max_outer_iters;
    cfg.eig_tol = spec.eig_tol;
    cfg.swap_frac_init = spec.swap_frac_init;
    cfg.swap_shrink = spec.swap_shrink;
    cfg.rng_seed = spec.seed;
    return cfg;
}

inline RunResult execute(const RunSpec& spec, const TriMesh& mesh) {
    auto areas = element_measures(mesh);
    auto cls = resolve_class(spec, areas);
    auto cfg = make_config(spec);

    RunResult result;
    result.spec = spec;
    result.mesh_area = areas.total_area;
    for (int r = 0; r < spec.restarts; ++r) {
        DensityField rho0 = (r == 0 && spec.init == "stripes")
                                ? stripe_density(mesh, cls, areas)
                                : random_density(mesh, cls, areas, spec.seed + r);
        OptConfig c = cfg;
        c.rng_seed = spec.seed + r;
        auto run = optimize(mesh, cls, rho0, c);
        result.restart_eigenvalues.push_back(run.final_pair.lambda);
        bool better = result.restart_eigenvalues.size() == 1 ||
                      (spec.direction == Direction::minimize
                           ? run.final_pair.lambda < result.best.final_pair.lambda
                           : run.final_pair.lambda > result.best.final_pair.lambda);
        if (better) {
            result.best = std::move(run);
            result.best_restart = r;
        }
    }
    return result;
}

inline nlohmann::json metadata_json(const RunResult& res) {
    const auto& spec = res.spec;
    nlohmann::json j;
    j["name"] = spec.name;
    j["geometry"] = spec.geometry;
    j["bc"] = spec.bc == BCKind::hinged ? "hinged" : "clamped";
    j["direction"] = spec.direction == Direction::minimize ? "minimize" : "maximize";
    j["seed"] = spec.seed;
    j["restarts"] = spec.restarts;
    j["mesh_area"] = res.mesh_area;
    j["termination_reason"] = res.best.termination_reason;
    j["iterations"] = res.best.trace.size();
    j["final_eigenvalue"] = res.best.final_pair.lambda;
    j["eig_residual"] = res.best.final_pair.residual;
    j["achieved_areas"] = res.best.final_density.achieved_areas;
    j["densities"] = spec.densities;
    j["best_restart"] = res.best_restart;
    j["restart_eigenvalues"] = res.restart_eigenvalues;
    j["wall_seconds"] = res.best.wall_seconds;
    j["config"] = {{"tol_rho", spec.tol_rho},
                   {"max_outer_iters", spec.max_outer_iters},
                   {"eig_tol", spec.eig_tol},
                   {"swap_frac_init", spec.swap_frac_init},
                   {"swap_shrink", spec.swap_shrink},
                   {"init", spec.init}};
    return j;
}

/// Runs one spec and writes mesh, trace CSV, final density, VTK file and the
/// metadata record into its output directory.
inline RunResult run_spec(const RunSpec& spec) {
    auto mesh = build_mesh(spec);
    auto result = execute(spec, mesh);

    namespace fs = std::filesystem;
    fs::create_directories(spec.output_dir);
    save_mesh(mesh, spec.output_dir + "/mesh.txt");
    {
        std::ofstream f(spec.output_dir + "/trace.csv");
        write_trace_csv(result.best, f);
    }
    {
        auto areas = element_measures(mesh);
        auto cls = resolve_class(spec, areas);
        save_density(result.best.final_density, cls, spec.output_dir + "/final_density.txt");
    }
    {
        auto op = assemble_operator(mesh, spec.bc);
        auto pts = vertex_displacements(mesh, op, result.best.final_pair.u);
        write_vtk(mesh, result.best.final_density.values, pts, spec.output_dir + "/solution.vtk");
    }
    {
        std::ofstream f(spec.output_dir + "/metadata.json");
        f << metadata_json(result).dump(2) << '\n';
    }
    return result;
}

struct BatchRow {
    std::string name;
    std::string geometry;
    std::string direction;
    double eigenvalue = 0.0;
    std::string status;  // "ok" or the error message
};

/// Runs every *.spec in `dir` (alphabetical), each into its own subdirectory
/// of `output_root`. Failures are recorded per spec; the batch continues.
inline std::vector<BatchRow> run_batch(const std::string& dir, const std::string& output_root,
                                       int workers = 1) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".spec") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<RunSpec> specs;
    std::set<std::string> names;
    for (const auto& f : files) {
        auto spec = parse_spec_file(f.string());
        if (!names.insert(spec.name).second)
            throw SpecError("duplicate spec name `" + spec.name + "` in batch");
        spec.output_dir = output_root + "/" + spec.name;
        specs.push_back(std::move(spec));
    }

    std::vector<BatchRow> rows(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < specs.size();) {
            BatchRow row;
            row.name = specs[i].name;
            row.geometry = specs[i].geometry;
            row.direction = specs[i].direction == Direction::minimize ? "minimize" : "maximize";
            try {
                auto res = run_spec(specs[i]);
                row.eigenvalue = res.best.final_pair.lambda;
                row.status = "ok";
            } catch (const std::exception& e) {
                row.status = e.what();
            }
            rows[i] = std::move(row);
        }
    };
    workers = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

}  // namespace plateopt
