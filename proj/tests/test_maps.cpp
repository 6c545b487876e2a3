#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "conley/maps.hpp"

using namespace conley;

namespace {

GridPtr grid2(int res, double half = 1.2) {
    return std::make_shared<Grid>(Vec{-half, -half}, Vec{half, half},
                                  std::vector<int>{res, res});
}

CubeSet annulus(GridPtr g, double r0, double r1) {
    return build_cubeset_from_predicate(g, [&](const Vec& c) {
        double r = std::hypot(c[0], c[1]);
        return r >= r0 && r <= r1;
    });
}

PointMap identity_map() {
    return [](const Vec& x) { return PointImage::at(x); };
}

}  // namespace

TEST_CASE("identity point map induces the identity") {
    auto g = grid2(24);
    auto n = annulus(g, 0.45, 0.95);
    PairComplex pc(n, CubeSet(g));
    REQUIRE(pc.rank(1) == 1);
    auto h = induced_point_map(pc, pc, identity_map());
    CHECK(h == identity_morphism(pc.signature()));
    CHECK(h.is_iso());
}

TEST_CASE("cell-level excision map is an isomorphism") {
    auto g = grid2(24);
    CubeSet n = annulus(g, 0.45, 0.95);
    CubeSet blob = build_cubeset_from_predicate(g, [](const Vec& c) {
        return c[0] > 1.05 && c[1] > 1.05;
    });
    CubeSet l = build_cubeset_from_predicate(g, [](const Vec& c) {
        double r = std::hypot(c[0], c[1]);
        return r >= 0.45 && r <= 0.95 && c[0] > 0.6;
    });
    PairComplex small(n, l);
    PairComplex big(n.set_union(blob), l.set_union(blob));
    auto h = induced_cellwise(small, big);
    CHECK(h.is_iso());
    auto back = induced_cellwise(big, small);
    auto round = compose(back, h);
    CHECK(round == identity_morphism(small.signature()));
}

TEST_CASE("rotation by ninety degrees is an isomorphism on the annulus") {
    auto g = grid2(24);
    auto n = annulus(g, 0.45, 0.95);
    PairComplex pc(n, CubeSet(g));
    PointMap rot = [](const Vec& x) { return PointImage::at(Vec{-x[1], x[0]}); };
    auto h = induced_point_map(pc, pc, rot);
    CHECK(h.is_iso());
    IntMat m = h.at(1);
    REQUIRE(m.rows == 1);
    CHECK(std::abs(m(0, 0)) == 1);
}

TEST_CASE("angle doubling has degree two on the circle") {
    auto g = grid2(32);
    auto nsrc = annulus(g, 0.55, 0.85);
    auto ndst = annulus(g, 0.5, 0.9);
    PairComplex src(nsrc, CubeSet(g));
    PairComplex dst(ndst, CubeSet(g));
    REQUIRE(src.rank(1) == 1);
    PointMap dbl = [](const Vec& x) {
        double r = std::hypot(x[0], x[1]);
        // z^2 / |z| keeps the radius and doubles the angle
        return PointImage::at(Vec{(x[0] * x[0] - x[1] * x[1]) / r, 2.0 * x[0] * x[1] / r});
    };
    int used = 0;
    auto h = induced_point_map(src, dst, dbl, 64, &used);
    IntMat m = h.at(1);
    REQUIRE(m.rows == 1);
    REQUIRE(m.cols == 1);
    CHECK(std::abs(m(0, 0)) == 2);
    CHECK(used > 1);  // needs a genuine subdivision
    CHECK(h.at(0) == IntMat::identity(1));  // the component maps onto the component
}

TEST_CASE("point maps compose functorially") {
    auto g = grid2(24);
    auto n0 = annulus(g, 0.5, 0.9);
    auto n1 = annulus(g, 0.45, 0.95);
    auto n2 = annulus(g, 0.4, 1.0);
    PairComplex p0(n0, CubeSet(g)), p1(n1, CubeSet(g)), p2(n2, CubeSet(g));
    PointMap rot = [](const Vec& x) { return PointImage::at(Vec{-x[1], x[0]}); };
    PointMap ref = [](const Vec& x) { return PointImage::at(Vec{x[1], x[0]}); };
    auto hf = induced_point_map(p0, p1, rot);
    auto hg = induced_point_map(p1, p2, ref);
    PointMap both = [&](const Vec& x) {
        Vec y{-x[1], x[0]};
        return PointImage::at(Vec{y[1], y[0]});
    };
    auto direct = induced_point_map(p0, p2, both);
    CHECK(compose(hg, hf) == direct);
}

TEST_CASE("constant basepoint map induces zero") {
    auto g = grid2(16);
    auto n = annulus(g, 0.45, 0.95);
    auto l = build_cubeset_from_predicate(g, [](const Vec& c) {
        double r = std::hypot(c[0], c[1]);
        return r >= 0.45 && r <= 0.95 && c[0] > 0.6;
    });
    PairComplex src(n, l), dst(n, l);
    PointMap bot = [](const Vec&) { return PointImage::basepoint(); };
    auto h = induced_point_map(src, dst, bot);
    CHECK(h.mats.empty());
}

TEST_CASE("partially defined map collapses through the basepoint") {
    // interval rel endpoints, mapped at double speed; the outer half is sent
    // to the basepoint, so cells at the cut must mix bot with exit vertices
    auto g = grid2(16, 1.0);  // w = 0.125
    CubeSet n(g), l(g);
    for (int i = 2; i <= 13; ++i) n.ids.push_back(g->to_id({i, 8}));
    l.ids = {g->to_id({2, 8}), g->to_id({13, 8})};
    n.canonicalize();
    l.canonicalize();
    PairComplex pc(n, l);
    REQUIRE(pc.rank(1) == 1);

    // x spans [-0.75, 0.75]; identity on the left exit cube, then doubled
    // speed until the image enters the right exit cube, beyond which the
    // point is discarded.  A pair map: both exit cubes land inside exits.
    PointMap f = [&](const Vec& x) {
        double t = x[0];
        if (t > -0.625) t = 2.0 * (x[0] + 0.625) - 0.625;
        if (t > 0.70) return PointImage::basepoint();
        return PointImage::at(Vec{t, x[1]});
    };
    auto h = induced_point_map(pc, pc, f);
    IntMat m = h.at(1);
    REQUIRE(m.rows == 1);
    CHECK(std::abs(m(0, 0)) == 1);
}

TEST_CASE("product model: tensor of interval generators fills the square") {
    auto g1 = std::make_shared<Grid>(Vec{0.0}, Vec{1.0}, std::vector<int>{8});
    CubeSet n1(g1), l1(g1);
    for (CubeId i = 0; i < 8; ++i) n1.ids.push_back(i);
    l1.ids = {0, 7};
    n1.canonicalize();
    l1.canonicalize();
    PairComplex pa(n1, l1), pb(n1, l1);
    REQUIRE(pa.rank(1) == 1);

    auto g2 = std::make_shared<Grid>(Vec{0.0, 0.0}, Vec{1.0, 1.0},
                                     std::vector<int>{8, 8});
    CubeSet n2(g2), l2(g2);
    for (CubeId id = 0; id < 64; ++id) n2.ids.push_back(id);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            if (i == 0 || i == 7 || j == 0 || j == 7) l2.ids.push_back(g2->to_id({i, j}));
    n2.canonicalize();
    l2.canonicalize();
    PairComplex dst(n2, l2);
    REQUIRE(dst.rank(2) == 1);

    std::map<std::pair<CellKey, CellKey>, long long> prod;
    for (auto& [ka, va] : pa.degree(1).gens[0])
        for (auto& [kb, vb] : pb.degree(1).gens[0]) prod[{ka, kb}] = va * vb;

    for (int r : {1, 2}) {
        ProductChainModel model(pa, pb, r);
        ChainMapEngine<ProductChainModel> eng(model, dst, identity_map());
        Chain img = eng.image(prod);
        CHECK(dst.boundary(img).empty());
        auto coords = dst.coordinates(2, img);
        REQUIRE(coords.size() == 1u);
        CHECK(std::abs(coords[0]) == 1);
    }
}

TEST_CASE("discontinuous maps are rejected at the refinement cap") {
    auto g = grid2(16);
    auto n = annulus(g, 0.45, 0.95);
    PairComplex pc(n, CubeSet(g));
    PointMap jump = [](const Vec& x) {
        // tears the annulus along the vertical axis
        double shift = x[0] >= 0 ? 0.15 : -0.15;
        double r = std::hypot(x[0], x[1]);
        Vec y{x[0] + shift * x[1] / r, x[1] - shift * x[0] / r};
        double rr = std::hypot(y[0], y[1]);
        y[0] *= r / rr;
        y[1] *= r / rr;
        return PointImage::at(y);
    };
    CHECK_THROWS_AS(induced_point_map(pc, pc, jump, 8), NotCellular);
}

TEST_CASE("morphism algebra") {
    HomologySignature s;
    s.set(0, 1);
    s.set(1, 2);
    auto id = identity_morphism(s);
    CHECK(id.is_iso());
    CHECK(compose(id, id) == id);

    HomologyMorphism f;
    f.src = f.dst = s;
    IntMat m(2, 2);
    m(0, 0) = 1; m(0, 1) = 1; m(1, 1) = 1;
    f.mats[1] = m;
    f.mats[0] = IntMat::identity(1);
    CHECK(f.is_iso());
    auto ff = compose(f, f);
    CHECK(ff.at(1)(0, 1) == 2);

    HomologyMorphism zero;
    zero.src = zero.dst = s;
    CHECK_FALSE(zero.is_iso());
    CHECK(compose(zero, f) == zero);
}
