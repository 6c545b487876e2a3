#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "conley/grid.hpp"

using namespace conley;

static GridPtr grid2(int res) {
    return std::make_shared<Grid>(std::vector<double>{-1.0, -1.0},
                                  std::vector<double>{1.0, 1.0},
                                  std::vector<int>{res, res});
}

TEST_CASE("id and multi-index round trip") {
    auto g = grid2(8);
    for (CubeId id = 0; id < 64; ++id) {
        auto mi = g->from_id(id);
        CHECK(g->to_id(mi) == id);
    }
    auto c = g->center(g->to_id({3, 5}));
    CHECK(c[0] == Catch::Approx(-1.0 + 3.5 * 0.25));
    CHECK(c[1] == Catch::Approx(-1.0 + 5.5 * 0.25));
}

TEST_CASE("point location uses half open cells") {
    auto g = grid2(4);
    std::vector<int> mi(2);
    REQUIRE(g->cube_of_point({-1.0, -1.0}, mi));
    CHECK(mi == std::vector<int>{0, 0});
    REQUIRE(g->cube_of_point({0.0, 0.0}, mi));
    CHECK(mi == std::vector<int>{2, 2});
    REQUIRE(g->cube_of_point({1.0, 1.0}, mi));  // top corner folds into last cell
    CHECK(mi == std::vector<int>{3, 3});
    CHECK_FALSE(g->cube_of_point({1.0001, 0.0}, mi));
}

TEST_CASE("axis ranges use open overlap") {
    auto g = grid2(4);  // cell width 0.5
    int jlo = -1, jhi = -1;
    REQUIRE(g->axis_range(0, -0.5, 0.0, jlo, jhi));
    CHECK(jlo == 1);
    CHECK(jhi == 1);  // touching neighbours do not count
    REQUIRE(g->axis_range(0, -0.6, 0.1, jlo, jhi));
    CHECK(jlo == 0);
    CHECK(jhi == 2);
    CHECK_FALSE(g->axis_range(0, 0.9, 1.2, jlo, jhi));  // sticks out of the box
    CHECK(jlo == 3);
    CHECK(jhi == 3);  // clamped overlap is still reported
}

TEST_CASE("cube set algebra") {
    auto g = grid2(4);
    CubeSet a(g), b(g);
    a.ids = {g->to_id({0, 0}), g->to_id({1, 1}), g->to_id({2, 2})};
    a.canonicalize();
    b.ids = {g->to_id({1, 1})};
    b.canonicalize();
    CHECK(b.is_subset_of(a));
    CHECK_FALSE(a.is_subset_of(b));
    auto u = set_union(a, b);
    CHECK(u.ids.size() == 3u);
    auto i = set_intersect(a, b);
    CHECK(i.ids.size() == 1u);
    auto m = set_minus(a, b);
    CHECK(m.ids.size() == 2u);
    CHECK_FALSE(m.contains(g->to_id({1, 1})));
}

TEST_CASE("interior of a 3x3 block is its center") {
    auto g = grid2(8);
    CubeSet a(g);
    for (int i = 2; i <= 4; ++i)
        for (int j = 2; j <= 4; ++j) a.ids.push_back(g->to_id({i, j}));
    a.canonicalize();
    auto inter = topological_interior(a);
    REQUIRE(inter.ids.size() == 1u);
    CHECK(inter.ids[0] == g->to_id({3, 3}));
    auto bd = boundary_cubes(a);
    CHECK(bd.ids.size() == 8u);
}

TEST_CASE("cubes on the grid edge are never interior") {
    auto g = grid2(4);
    CubeSet a(g);
    for (CubeId id = 0; id < 16; ++id) a.ids.push_back(id);
    a.canonicalize();
    auto inter = topological_interior(a);
    REQUIRE(inter.ids.size() == 4u);
    for (auto id : inter.ids) {
        auto mi = g->from_id(id);
        CHECK(mi[0] >= 1);
        CHECK(mi[0] <= 2);
        CHECK(mi[1] >= 1);
        CHECK(mi[1] <= 2);
    }
}

TEST_CASE("thicken dilates by the Moore neighbourhood and clips") {
    auto g = grid2(4);
    CubeSet a(g);
    a.ids = {g->to_id({0, 0})};
    a.canonicalize();
    auto t = thicken(a, 1);
    CHECK(t.ids.size() == 4u);  // clipped at the corner
    CubeSet c(g);
    c.ids = {g->to_id({2, 2})};
    c.canonicalize();
    CHECK(thicken(c, 1).ids.size() == 9u);
}

TEST_CASE("text serialization round trips byte for byte") {
    auto g = std::make_shared<Grid>(std::vector<double>{-1.25, 0.0},
                                    std::vector<double>{0.75, 2.0},
                                    std::vector<int>{8, 16});
    CubeSet a(g);
    std::mt19937 rng(3u);
    for (int k = 0; k < 30; ++k)
        a.ids.push_back(rng() % (8 * 16));
    a.canonicalize();
    auto text = cubeset_to_text(a);
    auto back = cubeset_from_text(text);
    CHECK(back.ids == a.ids);
    CHECK(back.grid->res == g->res);
    CHECK(cubeset_to_text(back) == text);
    CHECK_THROWS_AS(cubeset_from_text("dim nope"), ParseError);
}

TEST_CASE("ids enumerate in lexicographic multi index order") {
    auto g = grid2(4);
    CubeId prev = g->to_id({0, 0});
    CHECK(prev == 0u);
    // row-major: last axis varies fastest
    CHECK(g->to_id({0, 1}) == 1u);
    CHECK(g->to_id({1, 0}) == 4u);
}
