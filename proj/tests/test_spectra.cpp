#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "conley/spectra.hpp"
#include "oracle.hpp"

using namespace conley;
using Catch::Matchers::ContainsSubstring;

namespace {

HomologySignature sig_of(std::initializer_list<
                         std::pair<int, std::pair<int, std::vector<long long>>>> items) {
    HomologySignature s;
    for (auto& [deg, grp] : items) s.set(deg, grp.first, grp.second);
    return s;
}

SpectrumObject obj(HomologySignature s, int m = 0, Rational n = Rational(0)) {
    return SpectrumObject(std::move(s), m, n);
}

HomologySignature random_sig(std::mt19937& rng, bool with_torsion) {
    static const long long orders[3] = {2, 3, 4};
    std::uniform_int_distribution<int> keep(0, 2), fr(0, 2), tn(0, 2), pick(0, 2);
    HomologySignature s;
    for (int d = 0; d <= 3; ++d) {
        if (keep(rng) == 0) continue;
        std::vector<long long> tors;
        if (with_torsion)
            for (int i = tn(rng); i > 0; --i) tors.push_back(orders[pick(rng)]);
        std::sort(tors.begin(), tors.end());
        s.set(d, fr(rng), tors);
    }
    return s;
}

// torsion compared as multisets of prime powers so Z/2+Z/3 and Z/6 agree
using PrimaryForm = std::map<int, std::pair<int, std::multiset<long long>>>;

PrimaryForm primary(const std::map<int, std::pair<int, std::vector<long long>>>& groups) {
    PrimaryForm out;
    for (auto& [d, g] : groups) {
        std::multiset<long long> ms;
        for (long long t : g.second)
            for (long long p = 2; p <= t; ++p) {
                long long pk = 1;
                while (t % p == 0) { pk *= p; t /= p; }
                if (pk > 1) ms.insert(pk);
            }
        if (g.first || !ms.empty()) out[d] = {g.first, ms};
    }
    return out;
}

// random morphism of the forced shift between two objects, zero where either
// side has no generators
SpectrumMorphism random_morphism(const SpectrumObject& a, const SpectrumObject& b,
                                 std::mt19937& rng) {
    std::uniform_int_distribution<int> entry(-2, 2);
    Rational dn = a.n - b.n;
    int shift = (a.m - b.m) + 2 * (int)dn.num;
    std::map<int, IntMat> mats;
    for (auto& [k, g] : a.sig.groups) {
        int rows = b.count(k + shift), cols = a.count(k);
        if (!rows || !cols) continue;
        IntMat m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = entry(rng);
        mats[k] = std::move(m);
    }
    return spectrum_morphism(a, b, std::move(mats));
}

IntMat mat1(long long v) {
    IntMat m(1, 1);
    m(0, 0) = v;
    return m;
}

}  // namespace

TEST_CASE("sphere objects and the monoidal unit") {
    SpectrumObject unit = spectrum_unit();
    CHECK(unit.sig.free_rank(0) == 1);
    CHECK(unit.m == 0);
    CHECK(unit.n == Rational(0));
    CHECK(unit.pointed);

    SpectrumObject x = obj(sig_of({{0, {1, {2}}}, {2, {2, {3}}}}), 4, Rational(-1));
    CHECK(smash(unit, x) == x);
    CHECK(smash(x, unit) == x);

    SpectrumObject s1 = sphere_object(1);
    SpectrumObject t = smash(s1, s1);
    CHECK(t.sig == sig_of({{2, {1, {}}}}));
    CHECK(t.m == 0);
    CHECK(t.n == Rational(0));

    CHECK_THROWS_AS(SpectrumObject(sig_of({{0, {1, {}}}}), 1, Rational(0)), OddShift);
}

TEST_CASE("smash follows the integer Kunneth rule with Tor") {
    SpectrumObject a = obj(sig_of({{1, {0, {2}}}}));
    SpectrumObject ab = smash(a, a);
    CHECK(ab.sig == sig_of({{2, {0, {2}}}, {3, {0, {2}}}}));

    SpectrumObject c = obj(sig_of({{0, {1, {2}}}, {1, {1, {}}}}));
    SpectrumObject d = obj(sig_of({{0, {0, {2}}}, {2, {1, {3}}}}));
    SpectrumObject cd = smash(c, d);
    CHECK(cd.sig == sig_of({{0, {0, {2, 2}}},
                            {1, {0, {2, 2}}},
                            {2, {1, {2, 3}}},
                            {3, {1, {3}}}}));

    oracle::Complex tc = oracle::tensor(oracle::realize(c.sig.groups),
                                        oracle::realize(d.sig.groups));
    CHECK(primary(cd.sig.groups) == primary(oracle::homology_of_complex(tc)));
}

TEST_CASE("kunneth signature matches the brute force tensor complex") {
    std::mt19937 rng(20240811);
    for (int iter = 0; iter < 300; ++iter) {
        SpectrumObject a = obj(random_sig(rng, true));
        SpectrumObject b = obj(random_sig(rng, true));
        auto got = primary(smash(a, b).sig.groups);
        oracle::Complex tc = oracle::tensor(oracle::realize(a.sig.groups),
                                            oracle::realize(b.sig.groups));
        auto want = primary(oracle::homology_of_complex(tc));
        REQUIRE(got == want);
    }
}

TEST_CASE("smash is associative commutative and tracks indices") {
    std::mt19937 rng(7211);
    for (int iter = 0; iter < 200; ++iter) {
        SpectrumObject a = obj(random_sig(rng, true), 2, Rational(1));
        SpectrumObject b = obj(random_sig(rng, true), -2, Rational(1, 1));
        SpectrumObject c = obj(random_sig(rng, true), 0, Rational(-3));
        CHECK(smash(smash(a, b), c) == smash(a, smash(b, c)));
        CHECK(smash(a, b).sig == smash(b, a).sig);
        CHECK(smash(a, b).m == a.m + b.m);
        CHECK(smash(a, b).n == a.n + b.n);
    }
    SpectrumObject p = obj(sig_of({{0, {1, {}}}}));
    p.pointed = false;
    CHECK_FALSE(smash(p, spectrum_unit()).pointed);
    CHECK(smash(spectrum_unit(), spectrum_unit()).pointed);
}

TEST_CASE("desuspension shifts indices and refuses odd steps") {
    SpectrumObject a = obj(sig_of({{1, {2, {5}}}}), 2, Rational(3));
    CHECK(desuspend(a, 0, 0) == a);
    SpectrumObject d = desuspend(a, 4, -2);
    CHECK(d.sig == a.sig);
    CHECK(d.m == -2);
    CHECK(d.n == Rational(5));
    CHECK(suspend(d, 4, -2) == a);
    CHECK_THROWS_AS(desuspend(a, 3, 0), OddShift);

    // smashing a desuspension with the matching sphere restores the grading
    int p = 2;
    long long q = 1;
    SpectrumObject back = smash(desuspend(a, p, q), sphere_object(p + 2 * (int)q));
    CHECK(back.m == a.m - p);
    CHECK(back.n == a.n - Rational(q));
    for (auto& [k, g] : a.sig.groups) {
        CHECK(back.sig.free_rank(k + p + 2 * (int)q) == g.first);
        CHECK(*back.sig.torsion(k + p + 2 * (int)q) == g.second);
    }
}

TEST_CASE("hom-sets demand an integral complex shift") {
    SpectrumObject a = obj(sig_of({{0, {1, {}}}}), 0, Rational(0));
    SpectrumObject b = obj(sig_of({{0, {1, {}}}}), 0, Rational(1, 2));
    CHECK_THROWS_AS(spectrum_morphism(a, b, {}), NonIntegerComplexShift);
    CHECK_THROWS_AS(spectrum_morphism(b, a, {}), NonIntegerComplexShift);

    SpectrumObject c = obj(sig_of({{2, {1, {}}}}), -2, Rational(0));
    SpectrumMorphism f = spectrum_morphism(a, c, {{0, mat1(7)}});
    CHECK(f.shift == 2);
    CHECK(f.at(0)(0, 0) == 7);

    SpectrumObject e = obj(sig_of({{-2, {1, {}}}}), 0, Rational(1));
    SpectrumMorphism g = spectrum_morphism(a, e, {{0, mat1(1)}});
    CHECK(g.shift == -2);
    CHECK(g.at(0)(0, 0) == 1);

    CHECK_THROWS_AS(spectrum_morphism(a, c, {{0, IntMat(2, 1)}}), ShiftMismatch);
}

TEST_CASE("identity and composition behave") {
    std::mt19937 rng(90125);
    SpectrumObject a = obj(random_sig(rng, true), 2, Rational(0));
    SpectrumObject b = obj(random_sig(rng, true), 0, Rational(1));
    SpectrumObject c = obj(random_sig(rng, true), 0, Rational(0));
    for (int iter = 0; iter < 100; ++iter) {
        SpectrumMorphism f = random_morphism(a, b, rng);
        SpectrumMorphism g = random_morphism(b, c, rng);
        CHECK(compose(identity_spectrum_morphism(b), f) == f);
        CHECK(compose(f, identity_spectrum_morphism(a)) == f);
        SpectrumMorphism gf = compose(g, f);
        CHECK(gf.shift == f.shift + g.shift);
        SpectrumMorphism h = random_morphism(c, a, rng);
        CHECK(compose(h, gf) == compose(compose(h, g), f));
    }
    SpectrumMorphism f = random_morphism(a, b, rng);
    CHECK_THROWS_AS(compose(f, f), ShiftMismatch);
}

TEST_CASE("symmetry swaps factors with the graded sign") {
    SpectrumObject s0 = sphere_object(0);
    SpectrumObject x = obj(sig_of({{0, {1, {2}}}, {1, {2, {}}}, {2, {0, {4}}}}));
    CHECK(symmetry(s0, x) == identity_spectrum_morphism(smash(s0, x)));

    SpectrumObject s1 = sphere_object(1);
    SpectrumMorphism tw = symmetry(s1, s1);
    CHECK(tw.at(2)(0, 0) == -1);

    std::mt19937 rng(5150);
    for (int iter = 0; iter < 100; ++iter) {
        SpectrumObject a = obj(random_sig(rng, true), 2, Rational(-1));
        SpectrumObject b = obj(random_sig(rng, true), 0, Rational(2));
        SpectrumMorphism ab = symmetry(a, b);
        CHECK(compose(symmetry(b, a), ab) ==
              identity_spectrum_morphism(smash(a, b)));
    }
}

TEST_CASE("smash of morphisms multiplies matrices on free signatures") {
    SpectrumObject s1 = sphere_object(1);
    SpectrumMorphism f = spectrum_morphism(s1, s1, {{1, mat1(2)}});
    SpectrumMorphism g = spectrum_morphism(s1, s1, {{1, mat1(3)}});
    SpectrumMorphism fg = smash_morphism(f, g);
    CHECK(fg.at(2)(0, 0) == 6);

    // an even shift on one factor rides along
    SpectrumObject lo = obj(sig_of({{0, {1, {}}}}), 2, Rational(0));
    SpectrumObject hi = obj(sig_of({{2, {1, {}}}}), 0, Rational(0));
    SpectrumMorphism sh = spectrum_morphism(lo, hi, {{0, mat1(5)}});
    SpectrumMorphism shg = smash_morphism(sh, g);
    CHECK(shg.shift == 2);
    CHECK(shg.at(1)(0, 0) == 15);

    SpectrumObject t = obj(sig_of({{1, {0, {2}}}}));
    CHECK_THROWS_WITH(smash_morphism(identity_spectrum_morphism(t), g),
                      ContainsSubstring("torsion-free"));

    std::mt19937 rng(61802);
    for (int iter = 0; iter < 60; ++iter) {
        SpectrumObject a1 = obj(random_sig(rng, false), 2, Rational(0));
        SpectrumObject a2 = obj(random_sig(rng, false), 0, Rational(0));
        SpectrumObject b1 = obj(random_sig(rng, false), 0, Rational(1));
        SpectrumObject b2 = obj(random_sig(rng, false), 0, Rational(0));
        SpectrumMorphism fa = random_morphism(a1, a2, rng);
        SpectrumMorphism gb = random_morphism(b1, b2, rng);

        CHECK(smash_morphism(identity_spectrum_morphism(a1),
                             identity_spectrum_morphism(b1)) ==
              identity_spectrum_morphism(smash(a1, b1)));

        // interchange with composition
        SpectrumObject a3 = obj(random_sig(rng, false), 0, Rational(-1));
        SpectrumObject b3 = obj(random_sig(rng, false), 2, Rational(0));
        SpectrumMorphism fa2 = random_morphism(a2, a3, rng);
        SpectrumMorphism gb2 = random_morphism(b2, b3, rng);
        CHECK(smash_morphism(compose(fa2, fa), compose(gb2, gb)) ==
              compose(smash_morphism(fa2, gb2), smash_morphism(fa, gb)));

        // naturality of the symmetry
        CHECK(compose(symmetry(a2, b2), smash_morphism(fa, gb)) ==
              compose(smash_morphism(gb, fa), symmetry(a1, b1)));
    }
}

TEST_CASE("systems verify endpoints and naturality squares") {
    SpectrumObject z = sphere_object(0);
    SpectrumMorphism one = spectrum_morphism(z, z, {{0, mat1(1)}});
    SpectrumMorphism neg = spectrum_morphism(z, z, {{0, mat1(-1)}});
    SpectrumMorphism idz = identity_spectrum_morphism(z);

    SystemObject ind = make_system(SystemDirection::ind, {z, z, z}, {one, one});
    SystemObject pro = make_system(SystemDirection::pro, {z, z, z}, {neg, neg});

    auto fam = system_morphism(ind, ind, {idz, idz, idz});
    CHECK(fam.size() == 3);
    CHECK(system_morphism(pro, pro, {neg, neg, neg}).size() == 3);

    try {
        system_morphism(ind, ind, {idz, idz, neg});
        FAIL("square should not commute");
    } catch (const SquareFails& e) {
        CHECK_THAT(e.what(), ContainsSubstring("step 1"));
    }

    CHECK_THROWS_AS(system_morphism(ind, pro, {idz, idz, idz}), ShiftMismatch);
    CHECK_THROWS_AS(system_morphism(ind, ind, {idz, idz}), ShiftMismatch);
    CHECK_THROWS_AS(make_system(SystemDirection::ind, {z, z, z}, {one}),
                    ShiftMismatch);

    // pro systems read their connecting morphisms backwards
    SpectrumObject w = obj(sig_of({{0, {2, {}}}}));
    SpectrumMorphism proj = spectrum_morphism(w, z, {{0, [] {
        IntMat m(1, 2);
        m(0, 0) = 1;
        return m;
    }()}});
    SystemObject pro2 = make_system(SystemDirection::pro, {z, w}, {proj});
    CHECK(pro2.connecting[0].src == w);
    CHECK_THROWS_AS(make_system(SystemDirection::ind, {z, w}, {proj}),
                    ShiftMismatch);
}
