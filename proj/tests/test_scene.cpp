#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <set>

#include "mapfix/features.hpp"
#include "mapfix/scene.hpp"

using namespace mapfix;

TEST_CASE("case table") {
    CHECK(case_building_count(Case::B3Single) == 3);
    CHECK(case_building_count(Case::B6Multi) == 6);
    CHECK(case_mode(Case::B3Multi) == PathMode::MultiPath);
    CHECK(case_mode(Case::B6Single) == PathMode::SinglePath);
    Case c;
    CHECK(parse_case("6m", c));
    CHECK(c == Case::B6Multi);
    CHECK(!parse_case("9x", c));
    CHECK(std::string(case_name(Case::B3Single)) == "3s");
}

TEST_CASE("rx lattice covers a 12x10 grid at z = rx_height") {
    SceneParams p;
    const auto rx = rx_lattice(p);
    std::set<double> xs, ys;
    for (const auto& r : rx) {
        xs.insert(r.x);
        ys.insert(r.y);
        CHECK(r.z == doctest::Approx(p.rx_height));
        CHECK(r.x >= p.extent * p.lattice_margin - 1e-9);
        CHECK(r.x <= p.extent * (1 - p.lattice_margin) + 1e-9);
        CHECK(r.y >= p.extent * p.lattice_margin - 1e-9);
        CHECK(r.y <= p.extent * (1 - p.lattice_margin) + 1e-9);
    }
    CHECK(xs.size() * ys.size() == 120);
}

TEST_CASE("tx constellation: 7 stations at tx_height, one central") {
    SceneParams p;
    const auto tx = tx_positions(p);
    int central = 0;
    for (const auto& t : tx) {
        CHECK(t.z == doctest::Approx(p.tx_height));
        CHECK(t.x >= 0.0);
        CHECK(t.x <= p.extent);
        if (std::abs(t.x - p.extent / 2) < p.extent / 4 &&
            std::abs(t.y - p.extent / 2) < p.extent / 4)
            ++central;
    }
    CHECK(central == 1);
}

TEST_CASE("generate_scene is deterministic and respects the case") {
    for (Case c : {Case::B3Single, Case::B6Multi}) {
        const Scene a = generate_scene(c, 123);
        const Scene b = generate_scene(c, 123);
        REQUIRE(a.buildings.size() == static_cast<std::size_t>(case_building_count(c)));
        REQUIRE(b.buildings.size() == a.buildings.size());
        for (std::size_t i = 0; i < a.buildings.size(); ++i) {
            CHECK(a.buildings[i].x_min == b.buildings[i].x_min);
            CHECK(a.buildings[i].y_min == b.buildings[i].y_min);
            CHECK(a.buildings[i].width == b.buildings[i].width);
            CHECK(a.buildings[i].depth == b.buildings[i].depth);
            CHECK(a.buildings[i].height == b.buildings[i].height);
        }
        CHECK(a.mode == case_mode(c));
        const Scene d = generate_scene(c, 124);
        CHECK(a.buildings[0].x_min != d.buildings[0].x_min);
    }
}

TEST_CASE("buildings stay in bounds, in range, non-overlapping") {
    SceneParams p;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Scene s = generate_scene(Case::B6Single, seed, p);
        for (std::size_t i = 0; i < s.buildings.size(); ++i) {
            const Building& b = s.buildings[i];
            CHECK(b.width >= p.side_min);
            CHECK(b.width <= p.side_max);
            CHECK(b.depth >= p.side_min);
            CHECK(b.depth <= p.side_max);
            CHECK(b.height >= p.height_min);
            CHECK(b.height <= p.height_max);
            CHECK(b.x_min >= 0.0);
            CHECK(b.y_min >= 0.0);
            CHECK(b.x_min + b.width <= p.extent);
            CHECK(b.y_min + b.depth <= p.extent);
            for (std::size_t j = i + 1; j < s.buildings.size(); ++j) {
                const Building& o = s.buildings[j];
                const bool sep = b.x_min + b.width <= o.x_min ||
                                 o.x_min + o.width <= b.x_min ||
                                 b.y_min + b.depth <= o.y_min ||
                                 o.y_min + o.depth <= b.y_min;
                CHECK(sep);
            }
        }
    }
}

TEST_CASE("rasterize marks covered cells with the building height") {
    const Scene s = generate_scene(Case::B3Single, 7);
    const ElevationGrid g = rasterize(s, 128);
    REQUIRE(g.h == 128);
    REQUIRE(g.w == 128);
    CHECK(g.resolution == doctest::Approx(s.extent / 128.0));
    int covered = 0;
    for (int i = 0; i < g.h; ++i) {
        for (int j = 0; j < g.w; ++j) {
            const double cx = (j + 0.5) * g.resolution;
            const double cy = (i + 0.5) * g.resolution;
            double expect = 0.0;
            for (const Building& b : s.buildings)
                if (b.contains_xy(cx, cy)) expect = std::max(expect, b.height);
            CHECK(g.at(i, j) == doctest::Approx(expect));
            if (expect > 0) ++covered;
        }
    }
    CHECK(covered > 0);
}

TEST_CASE("scene JSON round trip") {
    const Scene s = generate_scene(Case::B6Multi, 99);
    const Scene t = scene_from_json(scene_to_json(s));
    CHECK(t.extent == s.extent);
    CHECK(t.mode == s.mode);
    CHECK(t.seed == s.seed);
    REQUIRE(t.buildings.size() == s.buildings.size());
    for (std::size_t i = 0; i < s.buildings.size(); ++i) {
        CHECK(t.buildings[i].x_min == s.buildings[i].x_min);
        CHECK(t.buildings[i].height == s.buildings[i].height);
    }
    for (int i = 0; i < 7; ++i) CHECK(t.tx[i].x == s.tx[i].x);
    for (int i = 0; i < 120; ++i) CHECK(t.rx[i].y == s.rx[i].y);
}

TEST_CASE("ELEV round trip is bit exact") {
    const Scene s = generate_scene(Case::B3Multi, 5);
    const ElevationGrid g = rasterize(s, 64);
    const std::string path = "test_scene_roundtrip.elev";
    write_elevation(path, g);
    const ElevationGrid r = read_elevation(path);
    std::remove(path.c_str());
    REQUIRE(r.h == g.h);
    REQUIRE(r.w == g.w);
    CHECK(r.resolution == g.resolution);
    for (std::size_t i = 0; i < g.cells.size(); ++i) CHECK(r.cells[i] == g.cells[i]);
}

TEST_CASE("raster reconstruction recovers footprints within one cell") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Scene s = generate_scene(Case::B6Single, seed);
        const ElevationGrid g = rasterize(s, 128);
        const auto rec = reconstruct_buildings(g);
        REQUIRE(rec.size() == s.buildings.size());
        const double cell = s.extent / 128.0;
        for (const Building& b : s.buildings) {
            bool matched = false;
            for (const Building& r : rec) {
                if (std::abs(r.height - b.height) > 1e-4) continue;
                matched = std::abs(r.x_min - b.x_min) <= cell &&
                          std::abs(r.y_min - b.y_min) <= cell &&
                          std::abs(r.width - b.width) <= 2 * cell &&
                          std::abs(r.depth - b.depth) <= 2 * cell;
                if (matched) break;
            }
            CHECK(matched);
        }
    }
}
