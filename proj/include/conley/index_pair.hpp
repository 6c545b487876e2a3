#pragma once

// Index-pair machinery on top of the transition graph: invariant parts,
// isolation certificates, the constructive pre-index -> index pair theorem,
// isolating blocks, flow maps between pairs, strong Morse splits and index
// triples for attractor-repeller decompositions.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "flow.hpp"
#include "grid.hpp"
#include "homology.hpp"
#include "maps.hpp"
#include "transition.hpp"

namespace conley {

struct CheckItem {
    std::string name;
    bool pass = true;
    std::vector<std::vector<int>> witnesses;  // cube multi-indices
};

struct Certificate {
    std::vector<CheckItem> items;

    bool pass() const {
        for (const auto& it : items)
            if (!it.pass) return false;
        return true;
    }
    const CheckItem* find(const std::string& n) const {
        for (const auto& it : items)
            if (it.name == n) return &it;
        return nullptr;
    }
    void add(std::string name, bool ok) {
        items.push_back(CheckItem{std::move(name), ok, {}});
    }
    void add(std::string name, bool ok, const Grid& g,
             const std::vector<CubeId>& bad) {
        CheckItem it;
        it.name = std::move(name);
        it.pass = ok;
        for (CubeId id : bad) it.witnesses.push_back(g.from_id(id));
        items.push_back(std::move(it));
    }
    void absorb(const Certificate& o, const std::string& prefix) {
        for (const auto& it : o.items) {
            items.push_back(it);
            items.back().name = prefix + it.name;
        }
    }
    std::string failing() const {
        std::string s;
        for (const auto& it : items)
            if (!it.pass) {
                if (!s.empty()) s += ", ";
                s += it.name;
            }
        return s;
    }
};

struct IndexPair {
    CubeSet N, L, ambient;
    double T = 0.0;
    int steps = 0;
    Certificate cert;
};

namespace detail {

inline std::vector<char> mask_of(const Grid& g, const CubeSet& A) {
    std::vector<char> m(g.num_cubes(), 0);
    for (CubeId id : A.ids) m[id] = 1;
    return m;
}

inline CubeSet unmask(GridPtr g, const std::vector<char>& m) {
    CubeSet out(g);
    for (CubeId id = 0; id < m.size(); ++id)
        if (m[id]) out.ids.push_back(id);
    return out;
}

// nodes of the A-restricted graph lying on some directed cycle
inline std::vector<char> cycle_nodes(const TransitionGraph& G,
                                     const std::vector<char>& inA) {
    const std::uint64_t n = inA.size();
    std::vector<int> comp(n, -1), low(n, 0), num(n, -1);
    std::vector<char> onstk(n, 0), cyc(n, 0);
    std::vector<std::uint32_t> stk;
    int counter = 0, ncomp = 0;

    // iterative Tarjan; frame = (node, next-successor-position)
    std::vector<std::pair<std::uint32_t, std::size_t>> frames;
    for (std::uint64_t s = 0; s < n; ++s) {
        if (!inA[s] || num[s] >= 0) continue;
        frames.push_back({(std::uint32_t)s, 0});
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos == 0) {
                num[v] = low[v] = counter++;
                stk.push_back(v);
                onstk[v] = 1;
            }
            bool descended = false;
            const auto& sv = G.succ[v];
            while (pos < sv.size()) {
                std::uint32_t w = sv[pos++];
                if (!inA[w]) continue;
                if (num[w] < 0) {
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (onstk[w]) low[v] = std::min(low[v], num[w]);
            }
            if (descended) continue;
            if (low[v] == num[v]) {
                std::uint32_t w;
                do {
                    w = stk.back();
                    stk.pop_back();
                    onstk[w] = 0;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
            std::uint32_t fin = v;
            frames.pop_back();
            if (!frames.empty()) {
                auto& [p, ppos] = frames.back();
                (void)ppos;
                low[p] = std::min(low[p], low[fin]);
            }
        }
    }
    // component sizes; a node is cyclic if its SCC has >1 node or a self-loop
    std::vector<int> csize(ncomp, 0);
    for (std::uint64_t v = 0; v < n; ++v)
        if (inA[v] && comp[v] >= 0) ++csize[comp[v]];
    for (std::uint64_t v = 0; v < n; ++v) {
        if (!inA[v]) continue;
        if (csize[comp[v]] > 1) {
            cyc[v] = 1;
            continue;
        }
        for (std::uint32_t w : G.succ[v])
            if (w == v) {
                cyc[v] = 1;
                break;
            }
    }
    return cyc;
}

inline void bfs_closure(const std::vector<std::vector<std::uint32_t>>& adj,
                        const std::vector<char>& inA, std::vector<char>& seen) {
    std::vector<std::uint32_t> queue;
    for (std::uint64_t v = 0; v < seen.size(); ++v)
        if (seen[v]) queue.push_back((std::uint32_t)v);
    while (!queue.empty()) {
        std::uint32_t v = queue.back();
        queue.pop_back();
        for (std::uint32_t w : adj[v])
            if (inA[w] && !seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
    }
}

}  // namespace detail

// cubes lying on a bi-infinite walk inside A: reachable from a cycle and
// co-reachable to a cycle, all within A
inline CubeSet invariant_part(const TransitionGraph& G, const CubeSet& A) {
    auto inA = detail::mask_of(*G.grid, A);
    auto cyc = detail::cycle_nodes(G, inA);
    std::vector<char> fwd = cyc, bwd = cyc;
    detail::bfs_closure(G.succ, inA, fwd);
    detail::bfs_closure(G.pred, inA, bwd);
    for (std::size_t v = 0; v < fwd.size(); ++v) fwd[v] = fwd[v] && bwd[v];
    return detail::unmask(A.grid, fwd);
}

// cubes with a k_minus-step backward and k_plus-step forward walk in A
inline CubeSet bounded_invariant(const TransitionGraph& G, const CubeSet& A,
                                 int k_minus, int k_plus) {
    if (k_minus < 0 || k_plus < 0) throw Error("negative walk length");
    auto inA = detail::mask_of(*G.grid, A);
    auto live = [&](const std::vector<std::vector<std::uint32_t>>& adj, int k) {
        std::vector<char> cur = inA;
        for (int j = 0; j < k; ++j) {
            std::vector<char> nxt(cur.size(), 0);
            for (CubeId id : A.ids) {
                for (std::uint32_t w : adj[id])
                    if (cur[w]) {
                        nxt[id] = 1;
                        break;
                    }
            }
            cur.swap(nxt);
        }
        return cur;
    };
    auto f = live(G.succ, k_plus);
    auto b = live(G.pred, k_minus);
    for (std::size_t v = 0; v < f.size(); ++v) f[v] = f[v] && b[v];
    return detail::unmask(A.grid, f);
}

inline Certificate is_isolating(const TransitionGraph& G, const CubeSet& A,
                                double T) {
    Certificate cert;
    CubeSet core = (T > 0.0)
                       ? bounded_invariant(G, A, G.steps_of(T), G.steps_of(T))
                       : invariant_part(G, A);
    CubeSet itr = topological_interior(A);
    CubeSet bad = set_minus(core, itr);
    cert.add(T > 0.0 ? "bounded-core-in-interior" : "invariant-in-interior",
             bad.ids.empty(), *G.grid, bad.ids);
    return cert;
}

// forward reachability closure of K inside A
inline CubeSet positive_hull(const TransitionGraph& G, const CubeSet& A,
                             const CubeSet& K) {
    if (!K.is_subset_of(A)) throw NotContained("positive_hull: K not inside A");
    auto inA = detail::mask_of(*G.grid, A);
    auto seen = detail::mask_of(*G.grid, K);
    detail::bfs_closure(G.succ, inA, seen);
    return detail::unmask(A.grid, seen);
}

// pre-index certificate: (i) forward prefixes of K1-cubes deep in the forward
// core stay one layer inside A, (ii) K2 misses the forward core, with the
// one-layer margin the pair builder needs for K2 to land in its exit set
inline Certificate is_preindex(const TransitionGraph& G, const CubeSet& A,
                               const CubeSet& K1, const CubeSet& K2,
                               double T) {
    Certificate cert;
    const int k = G.steps_of(T);
    CubeSet shrunk = topological_interior(A);
    auto inA = detail::mask_of(*G.grid, A);
    auto inShrunk = detail::mask_of(*G.grid, shrunk);

    CubeSet deep = bounded_invariant(G, A, 0, k + 2);
    std::vector<CubeId> bad1;
    for (CubeId c : set_intersect(K1, deep).ids) {
        std::vector<char> cur(inA.size(), 0);
        cur[c] = 1;
        bool ok = true;
        for (int j = 0; j <= 2 && ok; ++j) {
            std::vector<char> nxt(inA.size(), 0);
            for (CubeId v = 0; v < cur.size() && ok; ++v) {
                if (!cur[v]) continue;
                if (!inShrunk[v]) ok = false;
                for (std::uint32_t w : G.succ[v])
                    if (inA[w]) nxt[w] = 1;
            }
            cur.swap(nxt);
        }
        if (!ok) bad1.push_back(c);
    }
    cert.add("forward-core-clearance", bad1.empty(), *G.grid, bad1);

    CubeSet fwdT = bounded_invariant(G, A, 0, k);
    CubeSet hit = set_intersect(K2, fwdT);
    cert.add("exit-candidates-clear-core", hit.ids.empty(), *G.grid, hit.ids);

    CubeSet v0 = bounded_invariant(G, A, 0, std::max(k - 1, 0));
    CubeSet margin = set_intersect(K2, set_intersect(thicken(v0, 1), A));
    cert.add("exit-candidates-clear-margin", margin.ids.empty(), *G.grid,
             margin.ids);
    return cert;
}

// index-pair axioms for an expected invariant set S, plus horizon conditions
// when T > 0: the exit test is escape-aware (a cube whose image leaves the
// grid counts as exiting)
inline Certificate validate_index_pair_for(const TransitionGraph& G,
                                           const CubeSet& S,
                                           const CubeSet& A, const CubeSet& N,
                                           const CubeSet& L, double T) {
    Certificate cert;
    cert.add("nesting", L.is_subset_of(N) && N.is_subset_of(A));
    if (!cert.pass()) return cert;

    CubeSet nml = set_minus(N, L);
    CubeSet invNml = invariant_part(G, nml);

    CubeSet diff = set_union(set_minus(invNml, S), set_minus(S, invNml));
    cert.add("invariant-part-matches", diff.ids.empty(), *G.grid, diff.ids);

    CubeSet itr = topological_interior(nml);
    CubeSet out = set_minus(invNml, itr);
    cert.add("invariant-part-interior", out.ids.empty(), *G.grid, out.ids);

    auto inN = detail::mask_of(*G.grid, N);
    auto inL = detail::mask_of(*G.grid, L);
    std::vector<CubeId> leak;
    for (CubeId c : nml.ids) {
        bool ok = !G.escape[c];
        if (ok)
            for (std::uint32_t w : G.succ[c])
                if (!inN[w]) {
                    ok = false;
                    break;
                }
        if (!ok) leak.push_back(c);
    }
    cert.add("exit-through-L", leak.empty(), *G.grid, leak);

    std::vector<CubeId> stray;
    for (CubeId c : L.ids) {
        for (std::uint32_t w : G.succ[c])
            if (inN[w] && !inL[w]) {
                stray.push_back(c);
                break;
            }
    }
    cert.add("L-positively-invariant-in-N", stray.empty(), *G.grid, stray);

    if (T > 0.0) {
        const int k = G.steps_of(T);
        auto inA = detail::mask_of(*G.grid, A);
        auto closed_in_A = [&](const CubeSet& X, const std::vector<char>& mx) {
            std::vector<CubeId> bad;
            for (CubeId c : X.ids)
                for (std::uint32_t w : G.succ[c])
                    if (inA[w] && !mx[w]) {
                        bad.push_back(c);
                        break;
                    }
            return bad;
        };
        auto badN = closed_in_A(N, inN);
        cert.add("tame-N-positively-invariant-in-A", badN.empty(), *G.grid,
                 badN);
        auto badL = closed_in_A(L, inL);
        cert.add("tame-L-positively-invariant-in-A", badL.empty(), *G.grid,
                 badL);

        CubeSet core = bounded_invariant(G, A, k, k);
        CubeSet miss = set_minus(core, N);
        cert.add("tame-core-in-N", miss.ids.empty(), *G.grid, miss.ids);

        CubeSet fwd = bounded_invariant(G, A, 0, k);
        CubeSet touch = set_intersect(fwd, L);
        cert.add("tame-forward-clear-of-L", touch.ids.empty(), *G.grid,
                 touch.ids);
    }
    return cert;
}

inline Certificate validate_index_pair(const TransitionGraph& G,
                                       const CubeSet& A, const CubeSet& N,
                                       const CubeSet& L, double T) {
    return validate_index_pair_for(G, invariant_part(G, A), A, N, L, T);
}

// constructive theorem: from a pre-index pair (K1,K2) in A with horizon T to
// an index pair (P_A(B) u P_A(A\V), P_A(A\V)).  The forward horizon of V0 is
// one step short of T so that cubes with T of forward life can never be
// swept into the exit set, and B is a thickened K1 u A^{[-T,T]} so the
// invariant part sits in the interior.
inline IndexPair build_index_pair_from_preindex(const TransitionGraph& G,
                                                const CubeSet& A,
                                                const CubeSet& K1,
                                                const CubeSet& K2, double T) {
    Certificate pre = is_preindex(G, A, K1, K2, T);
    if (!pre.pass())
        throw NotPreIndex("pre-index check failed: " + pre.failing());
    const int k = G.steps_of(T);

    CubeSet v0 = bounded_invariant(G, A, 0, std::max(k - 1, 0));
    CubeSet v = set_intersect(thicken(v0, 1), A);
    CubeSet b =
        set_intersect(thicken(set_union(K1, bounded_invariant(G, A, k, k)), 1),
                      A);
    CubeSet l = positive_hull(G, A, set_minus(A, v));
    CubeSet n = set_union(positive_hull(G, A, b), l);

    IndexPair pair;
    pair.N = n;
    pair.L = l;
    pair.ambient = A;
    pair.T = T;
    pair.steps = k;
    pair.cert = validate_index_pair(G, A, n, l, T);
    if (!pair.cert.pass())
        throw TamenessUnachievable("constructed pair fails validation: " +
                                   pair.cert.failing());
    return pair;
}

// doubling search for a horizon making (K1,K2) a usable pre-index pair in an
// isolating A; both conditions only relax as T grows
inline double find_tame_horizon(const TransitionGraph& G, const CubeSet& A,
                                const CubeSet& K1, const CubeSet& K2,
                                double T0 = 1.0, double Tmax = 64.0) {
    for (double T = T0; T <= Tmax * (1.0 + 1e-12); T *= 2.0) {
        if (is_isolating(G, A, T).pass() && is_preindex(G, A, K1, K2, T).pass())
            return T;
    }
    throw TamenessUnachievable("no usable horizon up to the cap");
}

struct BlockData {
    CubeSet N, n_minus, n_plus, ambiguous;
    Certificate cert;
};

// combinatorial isolating block: the bounded-invariant core grown one layer.
// Exit side n- = forward closure (inside N) of the cubes leaking out of N,
// entry side n+ = backward closure of the cubes receiving from outside; both
// may run a little deeper than the topological boundary.  A boundary cube is
// ambiguous when the flow threads it interior-to-interior, or when it sits
// in neither collar.
inline BlockData isolating_block(const TransitionGraph& G, const CubeSet& A,
                                 double T) {
    const int kh = G.steps_of(T / 2.0);
    CubeSet core = bounded_invariant(G, A, kh, kh);
    if (core.ids.empty()) throw NotIsolating("empty bounded core");
    BlockData blk{CubeSet(A.grid), CubeSet(A.grid), CubeSet(A.grid),
                  CubeSet(A.grid), Certificate{}};
    blk.N = set_intersect(thicken(core, 1), A);

    auto inN = detail::mask_of(*G.grid, blk.N);
    CubeSet leak_out(A.grid), leak_in(A.grid);
    for (CubeId c : blk.N.ids) {
        bool out = G.escape[c] != 0;
        if (!out)
            for (std::uint32_t w : G.succ[c])
                if (!inN[w]) {
                    out = true;
                    break;
                }
        if (out) leak_out.ids.push_back(c);
        for (std::uint32_t w : G.pred[c])
            if (!inN[w]) {
                leak_in.ids.push_back(c);
                break;
            }
    }
    leak_out.canonicalize();
    leak_in.canonicalize();
    blk.n_minus = positive_hull(G, blk.N, leak_out);
    TransitionGraph rg = G.adjoint();
    blk.n_plus = positive_hull(rg, blk.N, leak_in);

    CubeSet bdry = boundary_cubes(blk.N);
    CubeSet inner = set_minus(blk.N, bdry);
    auto inInner = detail::mask_of(*G.grid, inner);
    for (CubeId c : bdry.ids) {
        bool to_inner = false, from_inner = false;
        for (std::uint32_t w : G.succ[c])
            if (inInner[w]) {
                to_inner = true;
                break;
            }
        for (std::uint32_t w : G.pred[c])
            if (inInner[w]) {
                from_inner = true;
                break;
            }
        bool covered = blk.n_minus.contains(c) || blk.n_plus.contains(c);
        if ((to_inner && from_inner) || !covered)
            blk.ambiguous.ids.push_back(c);
    }
    blk.ambiguous.canonicalize();
    if (!blk.ambiguous.ids.empty()) {
        std::ostringstream os;
        os << "ambiguous boundary cubes: " << blk.ambiguous.ids.size();
        for (std::size_t i = 0; i < blk.ambiguous.ids.size() && i < 4; ++i) {
            os << (i ? " " : " [");
            const auto mi = G.grid->from_id(blk.ambiguous.ids[i]);
            os << "(";
            for (std::size_t j = 0; j < mi.size(); ++j)
                os << (j ? "," : "") << mi[j];
            os << ")";
        }
        os << "]";
        throw BlockFailed(os.str());
    }

    blk.cert.absorb(is_isolating(G, A, T), "isolation:");
    blk.cert.absorb(validate_index_pair(G, blk.N, blk.N, blk.n_minus, 0.0),
                    "fwd:");
    blk.cert.absorb(validate_index_pair(rg, blk.N, blk.N, blk.n_plus, 0.0),
                    "bwd:");

    const int k = G.steps_of(T);
    CubeSet tame_core = bounded_invariant(G, blk.N, k, k);
    CubeSet out = set_minus(tame_core, topological_interior(blk.N));
    blk.cert.add("tame-block-core-interior", out.ids.empty(), *G.grid,
                 out.ids);
    if (!blk.cert.pass())
        throw BlockFailed("block validation failed: " + blk.cert.failing());
    return blk;
}

namespace detail {

// Cubes whose closed extent contains x.  Points landing exactly on a grid
// face (vertex probes do) belong to the cubes on both sides; the region
// tests below must see the closed realization, or boundary cells of N get
// classified as dead and whole generators silently collapse.
inline void incident_cubes(const Grid& g, const Vec& x,
                           std::vector<CubeId>& out) {
    out.clear();
    int nopt[8];
    int opt[8][2];
    for (int i = 0; i < g.dim; ++i) {
        if (x[i] < g.lo[i] - 1e-12 || x[i] > g.hi[i] + 1e-12) return;
        double u = (x[i] - g.lo[i]) / g.w[i];
        int k = (int)std::floor(u);
        double frac = u - k;
        if (k >= g.res[i]) { k = g.res[i] - 1; frac = 1.0; }
        if (k < 0) { k = 0; frac = 0.0; }
        nopt[i] = 1;
        opt[i][0] = k;
        if (frac < 1e-9 && k > 0) opt[i][nopt[i]++] = k - 1;
        else if (frac > 1.0 - 1e-9 && k + 1 < g.res[i]) opt[i][nopt[i]++] = k + 1;
    }
    int combos = 1;
    for (int i = 0; i < g.dim; ++i) combos *= nopt[i];
    std::vector<int> mi(g.dim);
    for (int c = 0; c < combos; ++c) {
        int t = c;
        for (int i = 0; i < g.dim; ++i) {
            mi[i] = opt[i][t % nopt[i]];
            t /= nopt[i];
        }
        out.push_back(g.to_id(mi));
    }
}

inline bool in_pair_region(const CubeSet& N, const CubeSet& L, const Vec& x) {
    std::vector<CubeId> ids;
    incident_cubes(*N.grid, x, ids);
    for (CubeId id : ids)
        if (N.contains(id) && !L.contains(id)) return true;
    return false;
}

inline bool in_region(const CubeSet& A, const Vec& x) {
    std::vector<CubeId> ids;
    incident_cubes(*A.grid, x, ids);
    for (CubeId id : ids)
        if (A.contains(id)) return true;
    return false;
}

template <class Member>
bool window_ok(const VectorFieldSpec& f, const FlowConfig& cfg, Vec x,
               double span, Member&& member) {
    if (!member(x)) return false;
    double t = 0.0;
    while (t < span - 1e-12) {
        double dt = std::min(cfg.step, span - t);
        x = advance(f, cfg, x, dt);
        t += dt;
        if (!member(x)) return false;
    }
    return true;
}

}  // namespace detail

// Salamon's flow map between index pairs of the same invariant set:
// x maps to its time-3T image when the first 2T of orbit stay in N\L and the
// window [T,3T] stays in N'\L'; otherwise to the basepoint
inline PointImage flow_map_point(const VectorFieldSpec& f,
                                 const FlowConfig& cfg, const CubeSet& N,
                                 const CubeSet& L, const CubeSet& N2,
                                 const CubeSet& L2, double T, const Vec& x) {
    if (!detail::window_ok(f, cfg, x, 2.0 * T, [&](const Vec& p) {
            return detail::in_pair_region(N, L, p);
        }))
        return PointImage::basepoint();
    Vec mid = advance(f, cfg, x, T);
    if (!detail::window_ok(f, cfg, mid, 2.0 * T, [&](const Vec& p) {
            return detail::in_pair_region(N2, L2, p);
        }))
        return PointImage::basepoint();
    return PointImage::at(advance(f, cfg, mid, 2.0 * T));
}

// simplified form available when the source pair is T-tame: the first
// membership window can be tested against the ambient set alone
inline PointImage flow_map_point_tame(const VectorFieldSpec& f,
                                      const FlowConfig& cfg, const CubeSet& A,
                                      const CubeSet& N2, const CubeSet& L2,
                                      double T, const Vec& x) {
    if (!detail::window_ok(f, cfg, x, 3.0 * T, [&](const Vec& p) {
            return detail::in_region(A, p);
        }))
        return PointImage::basepoint();
    Vec mid = advance(f, cfg, x, T);
    if (!detail::window_ok(f, cfg, mid, 2.0 * T, [&](const Vec& p) {
            return detail::in_pair_region(N2, L2, p);
        }))
        return PointImage::basepoint();
    return PointImage::at(advance(f, cfg, mid, 2.0 * T));
}

inline PointMap flow_point_map(VectorFieldSpec f, FlowConfig cfg, CubeSet N,
                               CubeSet L, CubeSet N2, CubeSet L2, double T) {
    return [=](const Vec& x) {
        return flow_map_point(f, cfg, N, L, N2, L2, T, x);
    };
}

// Homology of the flow map between two index pairs of one invariant set.
// The horizon is a genuine tuning knob: it must be long enough that deaths
// happen through the target's exit set (the second window binding before the
// first makes the quotient map continuous), yet short enough that the
// transition zones, of width ~ e^{-3T} in the expanding directions, survive
// vertex sampling at a feasible subdivision.  Flow maps at all horizons
// between the same two pairs are homotopic, so any admissible choice gives
// the same matrices.
inline HomologyMorphism induced_flow_map(const VectorFieldSpec& f,
                                         const FlowConfig& cfg,
                                         const CubeSet& N1, const CubeSet& L1,
                                         const CubeSet& N2, const CubeSet& L2,
                                         double T, int max_refine = 64,
                                         int* refinement_used = nullptr) {
    PairComplex src(N1, L1), dst(N2, L2);
    PointMap m = flow_point_map(f, cfg, N1, L1, N2, L2, T);
    return induced_point_map(src, dst, m, max_refine, refinement_used);
}

// One-step combinatorial index map of a validated pair: a cube is carried by
// its successor set, which the exit axiom keeps inside N and positive
// invariance of L keeps compatible with the collapse.  Enclosure boxes are
// contractible, so the carrier construction never needs refinement; the
// result is homotopic to the flow map at horizon tau.
inline HomologyMorphism induced_step_map(const TransitionGraph& G,
                                         const CubeSet& N, const CubeSet& L) {
    const Grid& g = *G.grid;
    std::vector<char> rel(g.num_cubes(), 0), inn(g.num_cubes(), 0);
    for (CubeId c : N.ids) { rel[c] = 1; inn[c] = 1; }
    for (CubeId c : L.ids) rel[c] = 0;
    auto step = [&G, rel, inn](CubeId c) -> std::vector<CubeId> {
        if (!rel[c]) return {};
        if (G.escape[c]) throw NotCellular("index step map: relative cube escapes");
        std::vector<CubeId> out;
        for (std::uint32_t v : G.succ[c]) {
            if (!inn[v]) throw NotCellular("index step map: successor leaves the pair");
            out.push_back(v);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    PairComplex pc(N, L);
    return induced_cube_map(pc, pc, step);
}

struct LevelFunction {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
};

inline LevelFunction linear_level(Vec coeffs) {
    LevelFunction lf;
    Vec c = coeffs;
    lf.value = [c](const Vec& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * x[i];
        return s;
    };
    lf.grad = [c](const Vec&) { return c; };
    return lf;
}

struct MorseSplit {
    CubeSet A1, A2, interface_cubes;
    Certificate cert;
};

// split A along a level set transverse to the flow; straddling cubes belong
// to both halves.  Certifies strict crossing on interface samples and the
// graph-level one-way traffic between the halves.
inline MorseSplit strong_morse_split(const VectorFieldSpec& field,
                                     const FlowConfig& cfg,
                                     const TransitionGraph& G, const CubeSet& A,
                                     const LevelFunction& lev, double theta,
                                     double eps_trans) {
    const Grid& g = *G.grid;
    MorseSplit ms{CubeSet(A.grid), CubeSet(A.grid), CubeSet(A.grid),
                  Certificate{}};
    const double sign = cfg.reversed ? -1.0 : 1.0;

    for (CubeId c : A.ids) {
        Vec blo, bhi;
        g.cube_box(c, blo, bhi);
        double lmin = 1e300, lmax = -1e300;
        Vec p(g.dim);
        for (int mask = 0; mask < (1 << g.dim); ++mask) {
            for (int i = 0; i < g.dim; ++i)
                p[i] = (mask >> i & 1) ? bhi[i] : blo[i];
            double val = lev.value(p);
            lmin = std::min(lmin, val);
            lmax = std::max(lmax, val);
        }
        double lc = lev.value(g.center(c));
        bool straddle = lmin < theta && theta < lmax;
        if (straddle) ms.interface_cubes.ids.push_back(c);
        if (lc <= theta || straddle) ms.A1.ids.push_back(c);
        if (lc >= theta || straddle) ms.A2.ids.push_back(c);
    }
    ms.A1.canonicalize();
    ms.A2.canonicalize();
    ms.interface_cubes.canonicalize();

    std::vector<CubeId> slow;
    Vec p(g.dim), v(g.dim);
    for (CubeId c : ms.interface_cubes.ids) {
        Vec blo, bhi;
        g.cube_box(c, blo, bhi);
        bool ok = true;
        for (int mask = 0; mask <= (1 << g.dim) && ok; ++mask) {
            if (mask == (1 << g.dim)) {
                p = g.center(c);
            } else {
                for (int i = 0; i < g.dim; ++i)
                    p[i] = (mask >> i & 1) ? bhi[i] : blo[i];
            }
            field.eval(p, v);
            Vec gr = lev.grad(p);
            double s = 0.0;
            for (int i = 0; i < g.dim; ++i) s += gr[i] * sign * v[i];
            if (!(s > eps_trans)) ok = false;
        }
        if (!ok) slow.push_back(c);
    }
    ms.cert.add("interface-transversal", slow.empty(), g, slow);
    if (!slow.empty())
        throw TransversalityFailed("flow not transverse to the level set on " +
                                   std::to_string(slow.size()) + " cubes");

    // one-way traffic: nothing may flow back from the strictly-A2 side into
    // A1, nor from A1's past into strictly-A1 territory from A2
    auto in1 = detail::mask_of(g, ms.A1);
    auto in2 = detail::mask_of(g, ms.A2);
    auto inA = detail::mask_of(g, A);
    std::vector<CubeId> back;
    for (CubeId c : A.ids) {
        if (!in2[c] || in1[c]) continue;  // strictly A2
        for (std::uint32_t w : G.succ[c])
            if (inA[w] && in1[w] && !in2[w]) {
                back.push_back(c);
                break;
            }
    }
    ms.cert.add("A2-positively-invariant", back.empty(), g, back);
    std::vector<CubeId> fore;
    for (CubeId c : A.ids) {
        if (!in1[c] || in2[c]) continue;  // strictly A1
        for (std::uint32_t w : G.pred[c])
            if (inA[w] && in2[w] && !in1[w]) {
                fore.push_back(c);
                break;
            }
    }
    ms.cert.add("A1-negatively-invariant", fore.empty(), g, fore);
    return ms;
}

struct IndexTriple {
    CubeSet N1, N2, N3;
    CubeSet A1, A2;
    double T = 0.0;
    int steps = 0;
    Certificate cert;
};

// index triple for the attractor-repeller pair (inv A2, inv A1) of a strong
// Morse split: the big pair plus the forward sweep of the A2 side inside N1
inline IndexTriple index_triple(const TransitionGraph& G, const CubeSet& A,
                                const CubeSet& A1, const CubeSet& A2,
                                double T) {
    IndexPair base =
        build_index_pair_from_preindex(G, A, CubeSet(A.grid), CubeSet(A.grid),
                                       T);
    IndexTriple tr{base.N, CubeSet(A.grid), base.L, A1, A2, T, base.steps,
                   Certificate{}};
    CubeSet sweep =
        positive_hull(G, tr.N1, set_intersect(tr.N1, A2));
    tr.N2 = set_union(tr.N3, sweep);

    tr.cert.absorb(base.cert, "pair:");
    CubeSet s_att = invariant_part(G, set_intersect(A2, tr.N1));
    tr.cert.absorb(
        validate_index_pair_for(G, s_att, A, tr.N2, tr.N3, 0.0), "attractor:");
    CubeSet s_rep = invariant_part(G, set_intersect(A1, tr.N1));
    tr.cert.absorb(
        validate_index_pair_for(G, s_rep, A, tr.N1, tr.N2, 0.0), "repeller:");
    if (!tr.cert.pass())
        throw TamenessUnachievable("index triple fails validation: " +
                                   tr.cert.failing());
    return tr;
}

// inclusion (N2,N3) -> (N1,N3) inducing the attractor map on homology
inline HomologyMorphism attractor_map(const IndexTriple& tr) {
    PairComplex src(tr.N2, tr.N3), dst(tr.N1, tr.N3);
    return induced_cellwise(src, dst);
}

// collapse (N1,N3) -> (N1,N2) inducing the repeller map on homology
inline HomologyMorphism repeller_map(const IndexTriple& tr) {
    PairComplex src(tr.N1, tr.N3), dst(tr.N1, tr.N2);
    return induced_cellwise(src, dst);
}

}  // namespace conley
