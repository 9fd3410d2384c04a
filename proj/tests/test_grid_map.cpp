#include <doctest.h>

#include <cmath>
#include <vector>

#include "risktrace/errors.hpp"
#include "risktrace/grid_map.hpp"
#include "risktrace/rng.hpp"
#include "test_support.hpp"

using namespace risktrace;
using test::rel_err;

namespace {

RiskParams reference_params() {
    return RiskParams::from_scales(RiskParams::default_p0(), 1.0, 1.0, 100.0);
}

} // namespace

TEST_CASE("grid indexing floors toward negative infinity") {
    GridSpec spec;
    CHECK(spec.index_of(0.2, 0.9, 3.5) == CellIndex{0, 0, 3});
    CHECK(spec.index_of(-0.2, -1.0, -0.5) == CellIndex{-1, -1, -1});
    const CellIndex idx{4, -7, 12};
    const PresenceCell p = spec.cell_point(idx);
    CHECK(p.x == 4.5);
    CHECK(p.y == -6.5);
    CHECK(p.t == 12.0);
    CHECK(spec.index_of(p.x, p.y, p.t) == idx);
    CHECK(spec.on_grid(p));
    CHECK_FALSE(spec.on_grid({4.2, -6.5, 12.0}));
    CHECK_FALSE(spec.on_grid({4.5, -6.5, 12.3}));
}

TEST_CASE("grid spec with offset origin and coarser cells") {
    GridSpec spec{100.0, -50.0, 1000, 2.0, 5.0};
    CHECK(spec.index_of(101.0, -49.0, 1012.0) == CellIndex{0, 0, 2});
    const PresenceCell p = spec.cell_point({3, -2, 4});
    CHECK(p.x == doctest::Approx(107.0));
    CHECK(p.y == doctest::Approx(-53.0));
    CHECK(p.t == doctest::Approx(1020.0));
    CHECK(spec.on_grid(p));
    CHECK_THROWS_AS((GridSpec{0, 0, 0, 0.0, 1.0}).validate(), DomainError);
    CHECK_THROWS_AS((GridSpec{0, 0, 0, 1.0, -1.0}).validate(), DomainError);
}

TEST_CASE("index overflow is rejected") {
    GridSpec spec;
    CHECK_THROWS_AS(spec.index_of(3.0e9, 0.0, 0.0), DiscretizationError);
    CHECK_THROWS_AS(spec.index_of(0.0, -3.0e9, 0.0), DiscretizationError);
}

TEST_CASE("discretize: stationary point for 10 seconds") {
    GridSpec spec;
    std::vector<PathSample> path{{0.0, 3.2, 7.8}, {9.0, 3.2, 7.8}};
    const Trajectory t = discretize(path, spec);
    REQUIRE(t.cells.size() == 10);
    for (std::size_t n = 0; n < t.cells.size(); ++n) {
        CHECK(t.cells[n].x == 3.5);
        CHECK(t.cells[n].y == 7.5);
        CHECK(t.cells[n].t == static_cast<double>(n));
    }
}

TEST_CASE("discretize: unit-speed path along x from a cell center") {
    GridSpec spec;
    std::vector<PathSample> path{{0.0, 0.5, 2.5}, {4.0, 4.5, 2.5}};
    const Trajectory t = discretize(path, spec);
    REQUIRE(t.cells.size() == 5);
    for (std::size_t n = 0; n < t.cells.size(); ++n) {
        CHECK(spec.index_of(t.cells[n].x, t.cells[n].y, t.cells[n].t) ==
              CellIndex{static_cast<std::int32_t>(n), 2, static_cast<std::int64_t>(n)});
    }
}

TEST_CASE("discretize: diagonal path matches the per-tick floor oracle") {
    GridSpec spec;
    const double speed = 0.75;
    const double t0 = 2.3;
    const double x0 = 0.4, y0 = -1.1;
    const double dur = 20.0;
    const double c = 1.0 / std::sqrt(2.0);
    std::vector<PathSample> path{{t0, x0, y0},
                                 {t0 + dur, x0 + speed * dur * c, y0 + speed * dur * c}};
    const Trajectory t = discretize(path, spec);
    REQUIRE(!t.cells.empty());
    std::size_t n = 0;
    for (std::int64_t k = static_cast<std::int64_t>(std::ceil(t0));
         k <= static_cast<std::int64_t>(std::floor(t0 + dur)); ++k, ++n) {
        const double w = (static_cast<double>(k) - t0) / dur;
        const double x = x0 + w * speed * dur * c;
        const double y = y0 + w * speed * dur * c;
        REQUIRE(n < t.cells.size());
        CHECK(spec.index_of(t.cells[n].x, t.cells[n].y, t.cells[n].t) ==
              CellIndex{static_cast<std::int32_t>(std::floor(x)),
                        static_cast<std::int32_t>(std::floor(y)), k});
    }
    CHECK(n == t.cells.size());
}

TEST_CASE("discretize rejects unordered samples and handles edge inputs") {
    GridSpec spec;
    std::vector<PathSample> bad{{1.0, 0, 0}, {1.0, 1, 0}};
    CHECK_THROWS_AS(discretize(bad, spec), OrderingError);
    bad = {{2.0, 0, 0}, {1.0, 1, 0}};
    CHECK_THROWS_AS(discretize(bad, spec), OrderingError);
    CHECK(discretize({}, spec).cells.empty());
    // A sub-second path that spans no tick produces no cells.
    std::vector<PathSample> tiny{{0.2, 0, 0}, {0.7, 0.5, 0}};
    CHECK(discretize(tiny, spec).cells.empty());
    // A single sample sitting exactly on a tick produces one cell.
    std::vector<PathSample> point{{4.0, 1.2, 3.4}};
    const Trajectory t = discretize(point, spec);
    REQUIRE(t.cells.size() == 1);
    CHECK(t.cells[0] == PresenceCell{1.5, 3.5, 4.0});
}

TEST_CASE("build: one patient cell stores risk p0 at its own cell") {
    GridSpec spec;
    const RiskParams params = reference_params();
    Trajectory patient;
    patient.cells = {spec.cell_point({5, 5, 10})};
    std::vector<Trajectory> patients{patient};
    const RiskMap map = build_risk_map(patients, params, spec, 1e-9);
    CHECK(rel_err(lookup_cell(map, patient.cells[0]), params.p0) < 1e-12);
    CHECK(map.size() > 0);
}

TEST_CASE("build: empty patient list gives an empty map") {
    const RiskMap map = build_risk_map({}, reference_params(), GridSpec{}, 1e-9);
    CHECK(map.size() == 0);
    CHECK(lookup_cell(map, {0.5, 0.5, 0.0}) == 0.0);
}

TEST_CASE("build rejects bad eps and off-grid trajectories") {
    std::vector<Trajectory> none;
    CHECK_THROWS_AS(build_risk_map(none, reference_params(), GridSpec{}, 0.0), DomainError);
    CHECK_THROWS_AS(build_risk_map(none, reference_params(), GridSpec{}, 1.0), DomainError);
    CHECK_THROWS_AS(build_risk_map(none, reference_params(), GridSpec{}, -0.5), DomainError);
    Trajectory off;
    off.cells = {{0.31, 0.5, 2.0}};
    std::vector<Trajectory> patients{off};
    CHECK_THROWS_AS(build_risk_map(patients, reference_params(), GridSpec{}, 1e-9),
                    DiscretizationError);
}

TEST_CASE("build matches direct per-cell aggregation over two trajectories") {
    RngStream rng(21);
    GridSpec spec;
    const RiskParams params = RiskParams::from_scales(RiskParams::default_p0(), 1.0, 1.0, 8.0);
    std::vector<Trajectory> patients{test::random_trajectory(rng, spec, 12, 8, 40),
                                     test::random_trajectory(rng, spec, 9, 8, 40)};
    const std::vector<PresenceCell> all_cells = test::concat_cells(patients);
    const RiskMap map = build_risk_map(patients, params, spec, 1e-14);

    // Oracle: direct per-cell aggregation over the concatenated presence
    // list, both on stored cells and on a probe neighborhood around them.
    for (const MapEntry& entry : map.entries()) {
        const PresenceCell cell = spec.cell_point(entry.index);
        const double expected = cell_risk(cell, all_cells, params);
        CHECK(std::abs(lookup_cell(map, cell) - expected) < 1e-12);
    }
    for (int n = 0; n < 200; ++n) {
        const PresenceCell probe = spec.cell_point(
            {static_cast<std::int32_t>(rng.uniform_int(-10, 10)),
             static_cast<std::int32_t>(rng.uniform_int(-10, 10)), rng.uniform_int(0, 45)});
        const double expected = cell_risk(probe, all_cells, params);
        CHECK(std::abs(lookup_cell(map, probe) - expected) < 1e-12);
    }
}

TEST_CASE("lookup: absent cells read zero, stored log_q reads back as risk") {
    GridSpec spec;
    std::vector<MapEntry> entries{{{1, 2, 3}, std::log(0.5)}};
    const RiskMap map(spec, reference_params(), 1e-9, std::move(entries));
    CHECK(lookup_cell(map, spec.cell_point({1, 2, 3})) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lookup_cell(map, spec.cell_point({0, 2, 3})) == 0.0);
    CHECK(map.lookup_log_q({9, 9, 9}) == 0.0);
}

TEST_CASE("map construction validates entry structure") {
    GridSpec spec;
    std::vector<MapEntry> unsorted{{{2, 0, 0}, -0.5}, {{1, 0, 0}, -0.5}};
    CHECK_THROWS_AS(RiskMap(spec, reference_params(), 1e-9, std::move(unsorted)), DomainError);
    std::vector<MapEntry> dup{{{1, 0, 0}, -0.5}, {{1, 0, 0}, -0.5}};
    CHECK_THROWS_AS(RiskMap(spec, reference_params(), 1e-9, std::move(dup)), DomainError);
    std::vector<MapEntry> nonneg{{{1, 0, 0}, 0.0}};
    CHECK_THROWS_AS(RiskMap(spec, reference_params(), 1e-9, std::move(nonneg)), DomainError);
}

TEST_CASE("evaluate: trajectory avoiding all stored cells has zero risk") {
    GridSpec spec;
    const RiskParams params = RiskParams::from_scales(0.1, 0.5, 0.5, 2.0);
    Trajectory patient;
    patient.cells = {spec.cell_point({0, 0, 0})};
    std::vector<Trajectory> patients{patient};
    const RiskMap map = build_risk_map(patients, params, spec, 1e-6);
    Trajectory user;
    user.cells = {spec.cell_point({50, 50, 1}), spec.cell_point({51, 50, 2})};
    CHECK(evaluate_trajectory(map, user) == 0.0);
}

TEST_CASE("evaluate: single-cell trajectory reads the stored cell risk") {
    GridSpec spec;
    const RiskParams params = reference_params();
    Trajectory patient;
    patient.cells = {spec.cell_point({3, 4, 7})};
    std::vector<Trajectory> patients{patient};
    const RiskMap map = build_risk_map(patients, params, spec, 1e-9);
    Trajectory user;
    user.cells = {spec.cell_point({3, 5, 9})};
    CHECK(rel_err(evaluate_trajectory(map, user), lookup_cell(map, user.cells[0])) < 1e-15);
}

TEST_CASE("evaluate rejects cells off the map grid") {
    GridSpec spec;
    const RiskMap map = build_risk_map({}, reference_params(), spec, 1e-9);
    Trajectory user;
    user.cells = {{0.25, 0.5, 0.0}};
    CHECK_THROWS_AS(evaluate_trajectory(map, user), DiscretizationError);
}

TEST_CASE("map-path evaluation converges to the direct double product") {
    RngStream rng(31);
    GridSpec spec;
    for (int instance = 0; instance < 10; ++instance) {
        const RiskParams params = RiskParams::from_scales(
            RiskParams::default_p0(), 1.0, 1.0, rng.uniform(3.0, 12.0));
        std::vector<Trajectory> patients{test::random_trajectory(rng, spec, 15, 10, 60)};
        Trajectory user = test::random_trajectory(rng, spec, 100, 10, 200);
        const RiskMap map = build_risk_map(patients, params, spec, 1e-12);
        const double via_map = evaluate_trajectory(map, user);
        const double direct = trajectory_risk(user, patients[0].cells, params);
        CHECK(std::abs(via_map - direct) < 1e-9);
        // Truncation only ever drops risk.
        CHECK(via_map <= direct + 1e-15);
    }
}

TEST_CASE("truncation deficit is bounded by 1 - (1 - eps)^M") {
    RngStream rng(13);
    GridSpec spec;
    const double eps = 1e-9;
    for (int instance = 0; instance < 10; ++instance) {
        const RiskParams params =
            RiskParams::from_scales(RiskParams::default_p0(), 1.0, 1.0, rng.uniform(3.0, 10.0));
        std::vector<Trajectory> patients{test::random_trajectory(rng, spec, 10, 6, 40)};
        Trajectory user = test::random_trajectory(rng, spec, 30, 6, 40);
        const RiskMap map = build_risk_map(patients, params, spec, eps);
        const double via_map = evaluate_trajectory(map, user);
        const double direct = trajectory_risk(user, patients[0].cells, params);
        const double bound =
            -std::expm1(static_cast<double>(user.cells.size()) * std::log1p(-eps));
        CHECK(via_map <= direct + 1e-15);
        CHECK(direct - via_map <= bound + 1e-15);
    }
}

TEST_CASE("every stored cell carries at least eps of risk") {
    RngStream rng(17);
    GridSpec spec;
    const double eps = 1e-6;
    std::vector<Trajectory> patients{test::random_trajectory(rng, spec, 20, 10, 50)};
    const RiskMap map =
        build_risk_map(patients, RiskParams::from_scales(0.01, 1.0, 2.0, 5.0), spec, eps);
    REQUIRE(map.size() > 0);
    for (const MapEntry& entry : map.entries()) {
        CHECK(entry.log_q <= std::log1p(-eps) + 1e-12);
    }
}

TEST_CASE("map size scales with the truncation footprint, not the domain") {
    GridSpec spec;
    const RiskParams params = RiskParams::from_scales(0.01, 1.0, 1.0, 3.0);
    Trajectory patient;
    // Two single-cell patients a kilometer and an hour apart.
    patient.cells = {spec.cell_point({0, 0, 0})};
    Trajectory far;
    far.cells = {spec.cell_point({1000, 1000, 3600})};
    std::vector<Trajectory> patients{patient, far};
    const double eps = 1e-9;
    const RiskMap map = build_risk_map(patients, params, spec, eps);
    const double reach = std::sqrt(std::log(params.p0 / eps));
    const double box = (2 * std::floor(reach * params.sigma_x) + 1) *
                       (2 * std::floor(reach * params.sigma_y) + 1) *
                       (std::floor(reach * params.sigma_t) + 1);
    CHECK(map.size() <= 2 * static_cast<std::size_t>(box));
    CHECK(map.size() >= 2);
}

TEST_CASE("merging maps equals building from the union of patients") {
    RngStream rng(23);
    GridSpec spec;
    const RiskParams params = RiskParams::from_scales(RiskParams::default_p0(), 1.0, 1.0, 6.0);
    const double eps = 1e-9;
    for (int instance = 0; instance < 5; ++instance) {
        std::vector<Trajectory> group_a{test::random_trajectory(rng, spec, 10, 6, 30)};
        std::vector<Trajectory> group_b{test::random_trajectory(rng, spec, 8, 6, 30),
                                        test::random_trajectory(rng, spec, 5, 6, 30)};
        std::vector<Trajectory> both = group_a;
        both.insert(both.end(), group_b.begin(), group_b.end());

        const RiskMap merged = merge_risk_maps(build_risk_map(group_a, params, spec, eps),
                                               build_risk_map(group_b, params, spec, eps));
        const RiskMap direct = build_risk_map(both, params, spec, eps);
        REQUIRE(merged.size() == direct.size());
        for (std::size_t n = 0; n < merged.size(); ++n) {
            CHECK(merged.entries()[n].index == direct.entries()[n].index);
            CHECK(rel_err(merged.entries()[n].log_q, direct.entries()[n].log_q) < 1e-12);
        }
    }
}

TEST_CASE("merge requires identical grid, parameters, and eps") {
    GridSpec spec;
    const RiskParams params = reference_params();
    const RiskMap a = build_risk_map({}, params, spec, 1e-9);
    const RiskMap b = build_risk_map({}, params, spec, 1e-8);
    CHECK_THROWS_AS(merge_risk_maps(a, b), DomainError);
    GridSpec other;
    other.origin_x = 5.0;
    const RiskMap c = build_risk_map({}, params, other, 1e-9);
    CHECK_THROWS_AS(merge_risk_maps(a, c), DomainError);
}
