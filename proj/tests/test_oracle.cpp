#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "plateopt/mesh_gen.hpp"
#include "plateopt/oracle.hpp"

using namespace plateopt;

TEST_CASE("bessel roots from the root finder") {
    CHECK(bessel_j0_first_root() == Catch::Approx(2.404826).epsilon(1e-6));
    CHECK(clamped_disk_first_root() == Catch::Approx(3.19622).epsilon(1e-4));
}

TEST_CASE("analytic homogeneous eigenvalues") {
    SECTION("hinged disk R=sqrt(2)") {
        CHECK(analytic_homogeneous(HomogeneousDisk{std::sqrt(2.0)}, BCKind::hinged, 1.0) ==
              Catch::Approx(8.3613).epsilon(1e-4));
    }
    SECTION("hinged 4x4 rectangle") {
        double v = analytic_homogeneous(HomogeneousRectangle{4, 4}, BCKind::hinged, 1.0);
        CHECK(v == Catch::Approx(std::pow(M_PI, 4) / 64.0).epsilon(1e-12));
        CHECK(v == Catch::Approx(1.5221).epsilon(1e-4));
    }
    SECTION("clamped unit disk") {
        CHECK(analytic_homogeneous(HomogeneousDisk{1.0}, BCKind::clamped, 1.0) ==
              Catch::Approx(104.363).epsilon(1e-3));
    }
    SECTION("density scaling") {
        double v1 = analytic_homogeneous(HomogeneousDisk{1.0}, BCKind::hinged, 1.0);
        double v2 = analytic_homogeneous(HomogeneousDisk{1.0}, BCKind::hinged, 2.0);
        CHECK(v2 == Catch::Approx(v1 / 2.0).margin(1e-12));
    }
    SECTION("clamped rectangle has no closed form") {
        CHECK_THROWS_AS(analytic_homogeneous(HomogeneousRectangle{1, 1}, BCKind::clamped, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("exhaustive enumeration counts") {
    SECTION("two elements, 1/1 split") {
        TriMesh mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
        auto areas = element_measures(mesh);
        RearrangementClass cls{{1, 2}, {areas.total_area / 2, areas.total_area / 2}};
        auto res = exhaustive_extremum(mesh, cls, BCKind::clamped, Direction::minimize);
        CHECK(res.enumeration_count == 2);
    }
    SECTION("8-element square, 4/4 split") {
        auto mesh = generate_rectangle(2, 2, 1.0);
        auto areas = element_measures(mesh);
        RearrangementClass cls{{1, 2}, {areas.total_area / 2, areas.total_area / 2}};
        auto res = exhaustive_extremum(mesh, cls, BCKind::hinged, Direction::maximize);
        CHECK(res.enumeration_count == 70);  // C(8,4)
    }
    SECTION("10-element fan, 5/5 split") {
        auto mesh = generate_polygon_fan(10, 1.0);
        auto areas = element_measures(mesh);
        RearrangementClass cls{{1, 2}, {areas.total_area / 2, areas.total_area / 2}};
        auto res = exhaustive_extremum(mesh, cls, BCKind::hinged, Direction::minimize);
        CHECK(res.enumeration_count == 252);  // C(10,5)
    }
}

TEST_CASE("min and max bracket every assignment") {
    auto mesh = generate_rectangle(2, 2, 1.0);
    auto areas = element_measures(mesh);
    RearrangementClass cls{{1, 2}, {areas.total_area / 2, areas.total_area / 2}};
    auto lo = exhaustive_extremum(mesh, cls, BCKind::hinged, Direction::minimize);
    auto hi = exhaustive_extremum(mesh, cls, BCKind::hinged, Direction::maximize);
    CHECK(hi.optimum_value >= lo.optimum_value);
    CHECK(hi.optimum_value > lo.optimum_value);  // the instance is not degenerate
}

TEST_CASE("permutation invariance of the extremum") {
    auto mesh = generate_rectangle(2, 2, 1.0);
    auto areas = element_measures(mesh);
    RearrangementClass cls{{1, 2}, {areas.total_area / 2, areas.total_area / 2}};
    auto base = exhaustive_extremum(mesh, cls, BCKind::hinged, Direction::minimize);
    // relabel elements by reversing their order
    std::vector<Triangle> tris(mesh.triangles().rbegin(), mesh.triangles().rend());
    TriMesh relabeled(mesh.vertices(), tris);
    auto rev = exhaustive_extremum(relabeled, cls, BCKind::hinged, Direction::minimize);
    CHECK(rev.optimum_value == Catch::Approx(base.optimum_value).epsilon(1e-10));
    CHECK(rev.enumeration_count == base.enumeration_count);
}

TEST_CASE("analytic and discrete agree under refinement") {
    double exact = analytic_homogeneous(HomogeneousDisk{1.0}, BCKind::hinged, 1.0);
    std::vector<double> errors;
    for (double h : {0.25, 0.125, 0.0625}) {
        auto mesh = generate_disk(1.0, h);
        auto op = assemble_hinged(mesh);
        std::vector<double> rho(mesh.num_triangles(), 1.0);
        auto M = assemble_mass(mesh, rho, op);
        errors.push_back(std::abs(principal_eigenpair(op, M, 1e-10, 2000).lambda - exact) / exact);
    }
    double order = std::log2(errors[0] / errors[2]) / 2.0;
    CHECK(order >= 1.8);
}

TEST_CASE("combinatorial guard refuses large instances") {
    auto mesh = generate_rectangle(4, 4, 0.5);  // 128 elements
    auto areas = element_measures(mesh);
    RearrangementClass cls{{1, 2}, {areas.total_area / 2, areas.total_area / 2}};
    CHECK_THROWS_WITH(exhaustive_extremum(mesh, cls, BCKind::hinged, Direction::minimize),
                      Catch::Matchers::ContainsSubstring("1000000"));
}
