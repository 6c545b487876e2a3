#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conley/transition.hpp"
#include "oracle.hpp"

using namespace conley;

namespace {

GridPtr grid2(int res, double half = 1.0) {
    return std::make_shared<Grid>(std::vector<double>{-half, -half},
                                  std::vector<double>{half, half},
                                  std::vector<int>{res, res});
}

}  // namespace

TEST_CASE("zero field maps every cube into its own padded neighbourhood") {
    std::vector<std::vector<PolyTerm>> comps(2);  // identically zero field
    auto f = field_from_poly(2, comps, {});
    FlowConfig cfg;
    auto g = grid2(8);
    auto tg = transition_graph(f, cfg, g, 0.125, 0.25, 4);
    for (CubeId id = 0; id < 64; ++id) {
        auto mi = g->from_id(id);
        REQUIRE(!tg.succ[id].empty());
        CHECK(std::binary_search(tg.succ[id].begin(), tg.succ[id].end(),
                                 (std::uint32_t)id));
        for (auto s : tg.succ[id]) {
            auto mj = g->from_id(s);
            CHECK(std::abs(mi[0] - mj[0]) <= 1);
            CHECK(std::abs(mi[1] - mj[1]) <= 1);
        }
        bool edge = mi[0] == 0 || mi[0] == 7 || mi[1] == 0 || mi[1] == 7;
        CHECK(tg.escape[id] == (edge ? 1 : 0));
    }
}

TEST_CASE("images enclose the true flow image of cube centers") {
    auto f = field_from_catalog("SADDLE2");
    FlowConfig cfg;
    auto g = grid2(16, 1.0);
    double tau = 0.125;
    auto tg = transition_graph(f, cfg, g, tau, 0.25, 8);
    std::mt19937 rng(42u);
    int checked = 0;
    for (int it = 0; it < 200; ++it) {
        CubeId id = rng() % (16u * 16u);
        auto c = g->center(id);
        auto y = oracle::saddle2(c, tau);
        std::vector<int> mi(2);
        if (!g->cube_of_point(y, mi)) {
            CHECK(tg.escape[id] == 1);
            continue;
        }
        CHECK(std::binary_search(tg.succ[id].begin(), tg.succ[id].end(),
                                 (std::uint32_t)g->to_id(mi)));
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("pred is the transpose of succ") {
    auto f = field_from_catalog("SINK2");
    FlowConfig cfg;
    auto g = grid2(12);
    auto tg = transition_graph(f, cfg, g, 0.125, 0.25, 4);
    std::size_t n = g->num_cubes();
    std::vector<std::vector<std::uint32_t>> tr(n);
    for (std::size_t i = 0; i < n; ++i)
        for (auto s : tg.succ[i]) tr[s].push_back((std::uint32_t)i);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(tr[i].begin(), tr[i].end());
        CHECK(tr[i] == tg.pred[i]);
    }
}

TEST_CASE("adjoint swaps successors and predecessors") {
    auto f = field_from_catalog("SADDLE2");
    FlowConfig cfg;
    auto g = grid2(10);
    auto tg = transition_graph(f, cfg, g, 0.125, 0.25, 4);
    auto ad = tg.adjoint();
    CHECK(ad.succ == tg.pred);
    CHECK(ad.pred == tg.succ);
    CHECK(ad.reversed_field != tg.reversed_field);
    auto back = ad.adjoint();
    CHECK(back.succ == tg.succ);
}

TEST_CASE("step count rounds T up to whole tau steps") {
    std::vector<std::vector<PolyTerm>> comps(2);
    auto f = field_from_poly(2, comps, {});
    FlowConfig cfg;
    auto g = grid2(4);
    auto tg = transition_graph(f, cfg, g, 0.25, 0.25, 2);
    CHECK(tg.steps_of(0.0) == 0);
    CHECK(tg.steps_of(0.25) == 1);
    CHECK(tg.steps_of(0.26) == 2);
    CHECK(tg.steps_of(1.0) == 4);
}

TEST_CASE("reversed graphs flow the other way") {
    auto f = field_from_catalog("SINK2");
    FlowConfig fwd, bwd;
    bwd.reversed = true;
    auto g = grid2(16);
    auto tf = transition_graph(f, fwd, g, 0.25, 0.25, 8);
    auto tb = transition_graph(f, bwd, g, 0.25, 0.25, 8);
    // cube far from the origin: forward images move inward, reversed move outward
    CubeId far = g->to_id({14, 14});
    auto c = g->center(g->to_id({14, 14}));
    double r0 = std::hypot(c[0], c[1]);
    for (auto s : tf.succ[far]) {
        auto cs = g->center((CubeId)s);
        CHECK(std::hypot(cs[0], cs[1]) < r0 + 1e-9);
    }
    CHECK(tb.escape[far] == 1);  // reversed sink pushes the corner cube outward
}

TEST_CASE("coarse step is rejected") {
    auto f = field_from_catalog("SADDLE2");
    FlowConfig cfg;
    cfg.step = 0.5;
    auto g = grid2(4);
    CHECK_THROWS_AS(transition_graph(f, cfg, g, 0.125, 0.25, 2), Error);
}
