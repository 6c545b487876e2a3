// Homology-level model of the suspension-indexed stable category: an object
// is a finite signature together with an even real suspension index and a
// rational complex one, morphisms are graded integer matrices.  Genuine
// stable-homotopy morphism sets are not computable here; everything below is
// the image of that category under induced homology.
#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "conley/core.hpp"
#include "conley/homology.hpp"

namespace conley {

struct SpectrumObject {
    HomologySignature sig;
    int m = 0;    // real suspension index, kept even
    Rational n;   // complex suspension index
    bool pointed = true;

    SpectrumObject() = default;
    SpectrumObject(HomologySignature s, int m_, Rational n_, bool ptd = true)
        : sig(std::move(s)), m(m_), n(n_), pointed(ptd) {
        if (m % 2) throw OddShift("real suspension index must be even");
        // canonical storage: ascending torsion, no trivial orders or groups
        for (auto it = sig.groups.begin(); it != sig.groups.end();) {
            auto& [fr, tors] = it->second;
            tors.erase(std::remove_if(tors.begin(), tors.end(),
                                      [](long long t) { return t <= 1; }),
                       tors.end());
            std::sort(tors.begin(), tors.end());
            if (fr == 0 && tors.empty()) it = sig.groups.erase(it);
            else ++it;
        }
    }

    int count(int k) const { return sig.free_rank(k) + (int)sig.torsion(k)->size(); }

    bool operator==(const SpectrumObject& o) const {
        return sig == o.sig && m == o.m && n == o.n;
    }
    bool operator!=(const SpectrumObject& o) const { return !(*this == o); }
};

inline SpectrumObject sphere_object(int deg) {
    HomologySignature s;
    s.set(deg, 1);
    return SpectrumObject(std::move(s), 0, Rational(0));
}

inline SpectrumObject spectrum_unit() { return sphere_object(0); }

inline SpectrumObject desuspend(const SpectrumObject& a, int dm, long long dn) {
    if (dm % 2) throw OddShift("desuspension step must be even, got " +
                               std::to_string(dm));
    SpectrumObject r = a;
    r.m -= dm;
    r.n = r.n - Rational(dn);
    return r;
}

inline SpectrumObject suspend(const SpectrumObject& a, int dm, long long dn) {
    return desuspend(a, -dm, -dn);
}

// ---------------------------------------------------------------------------
// Kunneth bookkeeping.  A product generator remembers which factor degrees
// and which factor generators it came from; generator indices run over the
// free part first, then torsion.  Free product generators keep enumeration
// order (first factor degree ascending, then the two indices); torsion ones
// are stably sorted by order so product signatures stay in canonical
// ascending form.
// ---------------------------------------------------------------------------

namespace spectra_detail {

struct KunnethGen {
    bool tor;        // Tor-term: sits one degree above its factors
    int p, q;        // factor degrees
    int ia, ib;      // generator index within each factor group
    long long order; // 0 for free

    bool operator<(const KunnethGen& o) const {
        return std::tie(tor, p, q, ia, ib) < std::tie(o.tor, o.p, o.q, o.ia, o.ib);
    }
};

struct KunnethBasis {
    std::vector<KunnethGen> free_gens;
    std::vector<KunnethGen> tor_gens;  // sorted by order, stable
    std::map<KunnethGen, int> position;  // into free resp. torsion block

    int count() const { return (int)(free_gens.size() + tor_gens.size()); }
};

inline long long gen_order(const HomologySignature& A, int p, int ia,
                           const HomologySignature& B, int q, int ib) {
    int fa = A.free_rank(p), fb = B.free_rank(q);
    bool ta = ia >= fa, tb = ib >= fb;
    if (!ta && !tb) return 0;
    long long oa = ta ? (*A.torsion(p))[ia - fa] : 0;
    long long ob = tb ? (*B.torsion(q))[ib - fb] : 0;
    if (ta && tb) return std::gcd(oa, ob);
    return ta ? oa : ob;
}

inline KunnethBasis kunneth_basis(const HomologySignature& A,
                                  const HomologySignature& B, int k) {
    KunnethBasis basis;
    std::vector<KunnethGen> tors;
    for (auto& [p, ga] : A.groups) {
        int q = k - p;
        int ca = ga.first + (int)ga.second.size();
        int cb = B.free_rank(q) + (int)B.torsion(q)->size();
        for (int ia = 0; ia < ca; ++ia)
            for (int ib = 0; ib < cb; ++ib) {
                long long o = gen_order(A, p, ia, B, q, ib);
                if (o == 1) continue;
                KunnethGen g{false, p, q, ia, ib, o};
                if (o == 0) basis.free_gens.push_back(g);
                else tors.push_back(g);
            }
    }
    for (auto& [p, ga] : A.groups) {
        int q = k - 1 - p;
        const auto& tb = *B.torsion(q);
        for (int i = 0; i < (int)ga.second.size(); ++i)
            for (int j = 0; j < (int)tb.size(); ++j) {
                long long o = std::gcd(ga.second[i], tb[j]);
                if (o <= 1) continue;
                tors.push_back({true, p, q, ga.first + i, B.free_rank(q) + j, o});
            }
    }
    std::stable_sort(tors.begin(), tors.end(),
                     [](const KunnethGen& x, const KunnethGen& y) {
                         return x.order < y.order;
                     });
    basis.tor_gens = std::move(tors);
    for (int i = 0; i < (int)basis.free_gens.size(); ++i)
        basis.position[basis.free_gens[i]] = i;
    for (int i = 0; i < (int)basis.tor_gens.size(); ++i)
        basis.position[basis.tor_gens[i]] = i;
    return basis;
}

inline std::set<int> degree_span(const HomologySignature& A,
                                 const HomologySignature& B) {
    std::set<int> degs;
    for (auto& [p, ga] : A.groups)
        for (auto& [q, gb] : B.groups) {
            degs.insert(p + q);
            degs.insert(p + q + 1);
        }
    return degs;
}

}  // namespace spectra_detail

inline SpectrumObject smash(const SpectrumObject& a, const SpectrumObject& b) {
    HomologySignature sig;
    for (int k : spectra_detail::degree_span(a.sig, b.sig)) {
        auto basis = spectra_detail::kunneth_basis(a.sig, b.sig, k);
        std::vector<long long> tors;
        for (auto& g : basis.tor_gens) tors.push_back(g.order);
        if (!basis.free_gens.empty() || !tors.empty())
            sig.set(k, (int)basis.free_gens.size(), tors);
    }
    return SpectrumObject(std::move(sig), a.m + b.m, a.n + b.n,
                          a.pointed && b.pointed);
}

// ---------------------------------------------------------------------------
// Morphisms.  The total shift (m1-m2) + 2(n1-n2) is always even because real
// indices are even and the complex difference must be integral; hom-sets with
// a fractional complex difference are empty by decree and construction
// refuses them.
// ---------------------------------------------------------------------------

struct SpectrumMorphism {
    SpectrumObject src, dst;
    int shift = 0;
    std::map<int, IntMat> mats;  // degree k of src -> degree k+shift of dst

    IntMat at(int k) const {
        auto it = mats.find(k);
        if (it != mats.end()) return it->second;
        return IntMat(dst.count(k + shift), src.count(k));
    }

    void normalize() {
        for (auto it = mats.begin(); it != mats.end();) {
            IntMat& m = it->second;
            int kd = it->first + shift;
            int fr = dst.sig.free_rank(kd);
            const auto& tor = *dst.sig.torsion(kd);
            for (int i = 0; i < (int)tor.size(); ++i)
                for (int j = 0; j < m.cols; ++j) {
                    long long d = tor[i];
                    long long v = m(fr + i, j) % d;
                    m(fr + i, j) = v < 0 ? v + d : v;
                }
            if (m.is_zero()) it = mats.erase(it);
            else ++it;
        }
    }

    bool operator==(const SpectrumMorphism& o) const {
        if (src != o.src || dst != o.dst || shift != o.shift) return false;
        std::set<int> degs;
        for (auto& [k, m] : mats) degs.insert(k);
        for (auto& [k, m] : o.mats) degs.insert(k);
        for (int k : degs)
            if (!(at(k) == o.at(k))) return false;
        return true;
    }
    bool operator!=(const SpectrumMorphism& o) const { return !(*this == o); }
};

inline SpectrumMorphism spectrum_morphism(const SpectrumObject& src,
                                          const SpectrumObject& dst,
                                          std::map<int, IntMat> mats) {
    Rational dn = src.n - dst.n;
    if (!dn.is_integer())
        throw NonIntegerComplexShift("hom-set is empty: complex shift " + dn.str());
    SpectrumMorphism f;
    f.src = src;
    f.dst = dst;
    f.shift = (src.m - dst.m) + 2 * (int)dn.num;
    for (auto& [k, m] : mats) {
        if (m.cols != src.count(k) || m.rows != dst.count(k + f.shift))
            throw ShiftMismatch("matrix at degree " + std::to_string(k) +
                                " has the wrong shape");
    }
    f.mats = std::move(mats);
    f.normalize();
    return f;
}

inline SpectrumMorphism identity_spectrum_morphism(const SpectrumObject& a) {
    std::map<int, IntMat> mats;
    for (auto& [k, g] : a.sig.groups) mats[k] = IntMat::identity(a.count(k));
    return spectrum_morphism(a, a, std::move(mats));
}

inline SpectrumMorphism compose(const SpectrumMorphism& g,
                                const SpectrumMorphism& f) {
    if (f.dst != g.src)
        throw ShiftMismatch("composition endpoints disagree");
    SpectrumMorphism h;
    h.src = f.src;
    h.dst = g.dst;
    h.shift = f.shift + g.shift;
    std::set<int> degs;
    for (auto& [k, m] : f.mats) degs.insert(k);
    for (auto& [k, m] : g.mats) degs.insert(k - f.shift);
    for (int k : degs) {
        IntMat m = g.at(k + f.shift) * f.at(k);
        if (!m.is_zero()) h.mats[k] = m;
    }
    h.normalize();
    return h;
}

// Kunneth interchange with the sign (-1)^{pq} on the degree-(p,q) factors.
inline SpectrumMorphism symmetry(const SpectrumObject& a,
                                 const SpectrumObject& b) {
    SpectrumObject ab = smash(a, b), ba = smash(b, a);
    std::map<int, IntMat> mats;
    for (int k : spectra_detail::degree_span(a.sig, b.sig)) {
        auto src = spectra_detail::kunneth_basis(a.sig, b.sig, k);
        auto dst = spectra_detail::kunneth_basis(b.sig, a.sig, k);
        if (src.count() == 0) continue;
        IntMat m(ba.count(k), ab.count(k));
        int ffree = (int)dst.free_gens.size();
        auto place = [&](const spectra_detail::KunnethGen& g, int col) {
            spectra_detail::KunnethGen sw{g.tor, g.q, g.p, g.ib, g.ia, g.order};
            long long sgn = (g.p * g.q) % 2 ? -1 : 1;
            int pos = dst.position.at(sw);
            m(g.order == 0 ? pos : ffree + pos, col) = sgn;
        };
        for (int j = 0; j < (int)src.free_gens.size(); ++j)
            place(src.free_gens[j], j);
        for (int j = 0; j < (int)src.tor_gens.size(); ++j)
            place(src.tor_gens[j], (int)src.free_gens.size() + j);
        mats[k] = std::move(m);
    }
    return spectrum_morphism(ab, ba, std::move(mats));
}

// Smash of morphisms.  Because every shift is even there is no Koszul sign
// to track; torsion bookkeeping under tensor needs generator choices the
// signature does not carry, so this stays on free signatures.
inline SpectrumMorphism smash_morphism(const SpectrumMorphism& f,
                                       const SpectrumMorphism& g) {
    for (const SpectrumObject* o : {&f.src, &f.dst, &g.src, &g.dst})
        for (auto& [k, grp] : o->sig.groups)
            if (!grp.second.empty())
                throw Error("smash of morphisms needs torsion-free signatures");
    SpectrumObject src = smash(f.src, g.src), dst = smash(f.dst, g.dst);
    std::map<int, IntMat> mats;
    for (int k : spectra_detail::degree_span(f.src.sig, g.src.sig)) {
        auto sb = spectra_detail::kunneth_basis(f.src.sig, g.src.sig, k);
        if (sb.free_gens.empty()) continue;
        auto db = spectra_detail::kunneth_basis(f.dst.sig, g.dst.sig,
                                                k + f.shift + g.shift);
        IntMat m((int)db.free_gens.size(), (int)sb.free_gens.size());
        for (int j = 0; j < (int)sb.free_gens.size(); ++j) {
            auto& sg = sb.free_gens[j];
            IntMat mf = f.at(sg.p), mg = g.at(sg.q);
            for (int i = 0; i < (int)db.free_gens.size(); ++i) {
                auto& dg = db.free_gens[i];
                if (dg.p != sg.p + f.shift || dg.q != sg.q + g.shift) continue;
                m(i, j) = mf(dg.ia, sg.ia) * mg(dg.ib, sg.ib);
            }
        }
        if (!m.is_zero()) mats[k] = std::move(m);
    }
    return spectrum_morphism(src, dst, std::move(mats));
}

// ---------------------------------------------------------------------------
// Direct and inverse systems with naturality checking.
// ---------------------------------------------------------------------------

enum class SystemDirection { ind, pro };

struct SystemObject {
    SystemDirection direction = SystemDirection::ind;
    std::vector<SpectrumObject> levels;
    // connecting[i] runs levels[i] -> levels[i+1] for ind,
    // levels[i+1] -> levels[i] for pro
    std::vector<SpectrumMorphism> connecting;
};

inline SystemObject make_system(SystemDirection dir,
                                std::vector<SpectrumObject> levels,
                                std::vector<SpectrumMorphism> connecting) {
    if (!levels.empty() && connecting.size() + 1 != levels.size())
        throw ShiftMismatch("system needs one connecting morphism per step");
    for (size_t i = 0; i < connecting.size(); ++i) {
        const SpectrumObject& from =
            dir == SystemDirection::ind ? levels[i] : levels[i + 1];
        const SpectrumObject& to =
            dir == SystemDirection::ind ? levels[i + 1] : levels[i];
        if (connecting[i].src != from || connecting[i].dst != to)
            throw ShiftMismatch("connecting morphism " + std::to_string(i) +
                                " does not match its levels");
    }
    SystemObject s;
    s.direction = dir;
    s.levels = std::move(levels);
    s.connecting = std::move(connecting);
    return s;
}

// verifies every naturality square of a per-level family and hands it back
inline std::vector<SpectrumMorphism> system_morphism(
    const SystemObject& src, const SystemObject& dst,
    std::vector<SpectrumMorphism> family) {
    if (src.direction != dst.direction)
        throw ShiftMismatch("system directions disagree");
    if (family.size() != src.levels.size() || src.levels.size() != dst.levels.size())
        throw ShiftMismatch("family size does not match the systems");
    for (size_t i = 0; i < family.size(); ++i)
        if (family[i].src != src.levels[i] || family[i].dst != dst.levels[i])
            throw ShiftMismatch("family member " + std::to_string(i) +
                                " has wrong endpoints");
    for (size_t i = 0; i + 1 < family.size(); ++i) {
        bool ok;
        if (src.direction == SystemDirection::ind)
            ok = compose(dst.connecting[i], family[i]) ==
                 compose(family[i + 1], src.connecting[i]);
        else
            ok = compose(family[i], src.connecting[i]) ==
                 compose(dst.connecting[i], family[i + 1]);
        if (!ok)
            throw SquareFails("naturality square at step " + std::to_string(i));
    }
    return family;
}

}  // namespace conley
