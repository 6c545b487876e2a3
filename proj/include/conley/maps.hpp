// Induced maps on relative cubical homology.
//
// Cell-level maps (inclusions, quotients) are evaluated directly.  Point
// maps go through a carrier construction: the source complex is subdivided
// until the snapped vertex images of every subcell span at most one target
// cell per axis; the chain image is then solved degree by degree inside that
// carrier cube.  The subdivision level is escalated geometrically and
// NotCellular is thrown at the cap.
#pragma once

#include <cmath>
#include <functional>
#include <set>

#include "conley/homology.hpp"

namespace conley {

// point map with an explicit basepoint value (collapsed part of the target)
struct PointImage {
    bool bot = false;
    Vec y;
    static PointImage basepoint() { return {true, {}}; }
    static PointImage at(Vec v) { return {false, std::move(v)}; }
};
using PointMap = std::function<PointImage(const Vec&)>;

namespace detail {

// control-flow failure: retry with a finer subdivision
struct CarrierFail : Error {
    using Error::Error;
};

// Relative cells of a carrier region in the target pair, split by degree.
// The region is handed over as the full closure of whatever cube or box was
// selected, so the cell lists are closed under taking faces (modulo L) and
// the boundary matrices below see every face they need.
struct CarrierComplex {
    const PairComplex* dst = nullptr;
    std::map<int, std::vector<CellKey>> cells;  // sorted, relative cells only
    bool touches_L = false;                     // closure meets the collapsed part
    bool inside_N = true;                       // closure stays inside the pair

    static CarrierComplex build(const PairComplex& dst, const std::vector<CellKey>& closure) {
        CarrierComplex cc;
        cc.dst = &dst;
        for (CellKey ck : closure) {
            if (dst.carried_by_L(ck)) {
                cc.touches_L = true;
                continue;
            }
            if (!dst.in_relative(ck)) {
                cc.inside_N = false;
                continue;
            }
            cc.cells[dst.codec.dim_of(ck)].push_back(ck);
        }
        for (auto& [d, v] : cc.cells) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        return cc;
    }

    const std::vector<CellKey>& at(int d) const {
        static const std::vector<CellKey> none;
        auto it = cells.find(d);
        return it == cells.end() ? none : it->second;
    }

    IntMat boundary_matrix(const std::vector<CellKey>& rows,
                           const std::vector<CellKey>& cols) const {
        IntMat m((int)rows.size(), (int)cols.size());
        std::vector<std::pair<CellKey, int>> fs;
        for (int j = 0; j < (int)cols.size(); ++j) {
            dst->codec.faces(cols[j], fs);
            for (auto& [fk, sg] : fs) {
                if (dst->carried_by_L(fk)) continue;
                auto p = std::lower_bound(rows.begin(), rows.end(), fk);
                if (p != rows.end() && *p == fk) m((int)(p - rows.begin()), j) += sg;
            }
        }
        return m;
    }

    // H_k of the carrier pair must vanish, otherwise the preimage choice in
    // degree k is not unique up to boundaries
    bool acyclic(int k) const {
        auto it = acy_.find(k);
        if (it != acy_.end()) return it->second;
        IntMat dk = boundary_matrix(at(k - 1), at(k));
        IntMat dk1 = boundary_matrix(at(k), at(k + 1));
        auto sk = smith_full(dk), sk1 = smith_full(dk1);
        bool tors = false;
        for (int i = 0; i < sk1.rank; ++i)
            if (sk1.S(i, i) > 1) tors = true;
        bool ok = ((int)at(k).size() - sk.rank - sk1.rank == 0) && !tors;
        acy_[k] = ok;
        return ok;
    }

    Chain solve(int k, const Chain& beta) const {
        if (!acyclic(k))
            throw CarrierFail("carrier pair is not acyclic in this degree");
        const auto& cols = at(k);
        const auto& rows = at(k - 1);
        IntMat m = boundary_matrix(rows, cols);
        IntMat b((int)rows.size(), 1);
        for (auto& [ck, cv] : beta) {
            auto p = std::lower_bound(rows.begin(), rows.end(), ck);
            if (p == rows.end() || *p != ck)
                throw CarrierFail("boundary image leaves the carrier");
            b((int)(p - rows.begin()), 0) = cv;
        }
        auto sm = smith_full(m);
        IntMat ub = sm.U * b;
        IntMat y((int)cols.size(), 1);
        for (int i = 0; i < (int)rows.size(); ++i) {
            if (i < sm.rank) {
                if (ub(i, 0) % sm.S(i, i) != 0)
                    throw CarrierFail("no integral solution in the carrier");
                if (i < (int)cols.size()) y(i, 0) = ub(i, 0) / sm.S(i, i);
            } else if (ub(i, 0) != 0) {
                throw CarrierFail("boundary image not a carrier boundary");
            }
        }
        IntMat x = sm.V * y;
        Chain out;
        for (int j = 0; j < (int)cols.size(); ++j)
            if (x(j, 0)) out[cols[j]] = x(j, 0);
        return out;
    }

  private:
    mutable std::map<int, bool> acy_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Source models for the chain-map engine.  A model presents a subdivided
// view of the source complex: keys for refined cells, their geometry, full
// signed faces and the collapsed-carrier test.
// ---------------------------------------------------------------------------

class GridChainModel {
  public:
    using OrigKey = CellKey;
    using Key = CellKey;

    GridChainModel(const PairComplex& pc, int r)
        : pc_(pc), r_(r), grid_(*pc.grid) {
        Grid fine(grid_.lo, grid_.hi, scaled_res(grid_, r));
        codec_ = CellCodec(fine);
        fine_w_ = fine.w;
    }

    int refinement() const { return r_; }
    int dim(Key k) const { return codec_.dim_of(k); }

    void subdivide(OrigKey orig, std::vector<Key>& out) const {
        out.clear();
        int a[8], e[8];
        pc_.codec.unpack(orig, a, e);
        std::vector<int> steps(grid_.dim);
        int total = 1;
        for (int i = 0; i < grid_.dim; ++i) {
            steps[i] = e[i] ? r_ : 1;
            total *= steps[i];
        }
        std::vector<int> it(grid_.dim, 0);
        int fine_a[8], fine_e[8];
        for (int c = 0; c < total; ++c) {
            for (int i = 0; i < grid_.dim; ++i) {
                fine_a[i] = a[i] * r_ + it[i];
                fine_e[i] = e[i];
            }
            out.push_back(codec_.pack(fine_a, fine_e));
            for (int i = grid_.dim - 1; i >= 0; --i) {
                if (++it[i] < steps[i]) break;
                it[i] = 0;
            }
        }
    }

    void faces(Key k, std::vector<std::pair<Key, int>>& out) const { codec_.faces(k, out); }

    // carried by the collapsed subcomplex L of the source pair
    bool carried(Key k) const { return pc_.carried_by_L(coarse_key(k)); }
    // inside the closure of N at all (else the subdivided chain is corrupt)
    bool in_closure(Key k) const { return pc_.carried_by_N(coarse_key(k)); }

    void vertices(Key k, std::vector<Key>& out) const {
        out.clear();
        int a[8], e[8];
        codec_.unpack(k, a, e);
        std::vector<int> axes;
        for (int i = 0; i < grid_.dim; ++i)
            if (e[i]) axes.push_back(i);
        int va[8], ve[8];
        for (int i = 0; i < grid_.dim; ++i) { va[i] = a[i]; ve[i] = 0; }
        int n = 1 << axes.size();
        for (int c = 0; c < n; ++c) {
            for (size_t t = 0; t < axes.size(); ++t)
                va[axes[t]] = a[axes[t]] + ((c >> t) & 1);
            out.push_back(codec_.pack(va, ve));
        }
    }

    Vec position(Key vertex) const {
        int a[8], e[8];
        codec_.unpack(vertex, a, e);
        Vec p(grid_.dim);
        for (int i = 0; i < grid_.dim; ++i) p[i] = grid_.lo[i] + a[i] * fine_w_[i];
        return p;
    }

  private:
    static std::vector<int> scaled_res(const Grid& g, int r) {
        std::vector<int> res = g.res;
        for (int& x : res) x *= r;
        return res;
    }
    Key coarse_key(Key k) const {
        int a[8], e[8], ca[8], ce[8];
        codec_.unpack(k, a, e);
        for (int i = 0; i < grid_.dim; ++i) {
            if (e[i]) { ca[i] = a[i] / r_; ce[i] = 1; }
            else if (a[i] % r_ == 0) { ca[i] = a[i] / r_; ce[i] = 0; }
            else { ca[i] = a[i] / r_; ce[i] = 1; }
        }
        return pc_.codec.pack(ca, ce);
    }

    const PairComplex& pc_;
    int r_;
    const Grid& grid_;
    CellCodec codec_;
    Vec fine_w_;
};

// smash product of two pairs: cells are pairs of factor cells, the collapsed
// part is (L1 x N2) u (N1 x L2)
class ProductChainModel {
  public:
    using OrigKey = std::pair<CellKey, CellKey>;
    using Key = std::pair<CellKey, CellKey>;

    ProductChainModel(const PairComplex& a, const PairComplex& b, int r)
        : ma_(a, r), mb_(b, r) {}

    int refinement() const { return ma_.refinement(); }
    int dim(const Key& k) const { return ma_.dim(k.first) + mb_.dim(k.second); }

    void subdivide(const OrigKey& orig, std::vector<Key>& out) const {
        out.clear();
        std::vector<CellKey> sa, sb;
        ma_.subdivide(orig.first, sa);
        mb_.subdivide(orig.second, sb);
        for (auto x : sa)
            for (auto y : sb) out.push_back({x, y});
    }

    // d(s x t) = ds x t + (-1)^{dim s} s x dt
    void faces(const Key& k, std::vector<std::pair<Key, int>>& out) const {
        out.clear();
        std::vector<std::pair<CellKey, int>> fa, fb;
        ma_.faces(k.first, fa);
        mb_.faces(k.second, fb);
        for (auto& [f, s] : fa) out.push_back({{f, k.second}, s});
        int sgn = ma_.dim(k.first) % 2 == 0 ? 1 : -1;
        for (auto& [f, s] : fb) out.push_back({{k.first, f}, sgn * s});
    }

    bool carried(const Key& k) const {
        return ma_.carried(k.first) || mb_.carried(k.second);
    }
    bool in_closure(const Key& k) const {
        return ma_.in_closure(k.first) && mb_.in_closure(k.second);
    }

    void vertices(const Key& k, std::vector<Key>& out) const {
        out.clear();
        std::vector<CellKey> va, vb;
        ma_.vertices(k.first, va);
        mb_.vertices(k.second, vb);
        for (auto x : va)
            for (auto y : vb) out.push_back({x, y});
    }

    Vec position(const Key& vertex) const {
        Vec p = ma_.position(vertex.first), q = mb_.position(vertex.second);
        p.insert(p.end(), q.begin(), q.end());
        return p;
    }

  private:
    GridChainModel ma_, mb_;
};

// ---------------------------------------------------------------------------
// The engine: evaluates the chain image of source chains lazily.
// ---------------------------------------------------------------------------

template <class Model>
class ChainMapEngine {
  public:
    ChainMapEngine(const Model& model, const PairComplex& dst, PointMap f)
        : model_(model), dst_(dst), f_(std::move(f)) {}

    // image of a source chain written on original (unsubdivided) cells
    Chain image(const std::map<typename Model::OrigKey, long long>& chain) {
        Chain out;
        std::vector<typename Model::Key> sub;
        for (auto& [orig, coef] : chain) {
            model_.subdivide(orig, sub);
            for (auto& s : sub) {
                const Chain& ph = phi(s);
                for (auto& [ck, cv] : ph) chain_add(out, ck, coef * cv);
            }
        }
        return out;
    }

  private:
    using Key = typename Model::Key;

    struct VertexInfo {
        int cls;                // 0 basepoint, 1 collapsed in target, 2 relative
        std::vector<int> snap;  // target vertex anchor (cls >= 1)
        CellKey cell = 0;       // target vertex cell (cls >= 1)
    };

    const VertexInfo& classify(const Key& v) {
        auto it = vmemo_.find(v);
        if (it != vmemo_.end()) return it->second;
        VertexInfo info;
        PointImage im = f_(model_.position(v));
        if (im.bot) {
            info.cls = 0;
        } else {
            const Grid& g = *dst_.grid;
            if ((int)im.y.size() != g.dim)
                throw Error("chain map: point image dimension mismatch");
            info.snap.resize(g.dim);
            int a[8], e[8];
            for (int i = 0; i < g.dim; ++i) {
                double t = (im.y[i] - g.lo[i]) / g.w[i];
                int s = (int)std::lround(t);
                if (s < 0 || s > g.res[i])
                    throw detail::CarrierFail("image vertex outside the target grid");
                info.snap[i] = s;
                a[i] = s;
                e[i] = 0;
            }
            info.cell = dst_.codec.pack(a, e);
            if (dst_.carried_by_L(info.cell)) info.cls = 1;
            else if (dst_.in_relative(info.cell)) info.cls = 2;
            else throw detail::CarrierFail("image vertex outside the target pair");
        }
        return vmemo_.emplace(v, std::move(info)).first->second;
    }

    const Chain& phi(const Key& s) {
        auto it = memo_.find(s);
        if (it != memo_.end()) return it->second;
        if (!model_.in_closure(s)) throw Error("chain map: source cell outside its complex");
        Chain result;
        if (model_.carried(s)) return memo_.emplace(s, std::move(result)).first->second;

        int k = model_.dim(s);
        if (k == 0) {
            const VertexInfo& vi = classify(s);
            if (vi.cls == 2) result[vi.cell] = 1;
            return memo_.emplace(s, std::move(result)).first->second;
        }

        std::vector<Key> vs;
        model_.vertices(s, vs);
        bool any_bot = false, any_rel = false;
        for (auto& v : vs) {
            const VertexInfo& vi = classify(v);
            if (vi.cls == 0) any_bot = true;
            if (vi.cls == 2) any_rel = true;
        }
        if (any_bot && !any_rel)
            return memo_.emplace(s, std::move(result)).first->second;

        // carrier box from the snapped anchors of the live vertices.  A cell
        // straddling the basepoint boundary is fine as long as its live part
        // reaches the collapsed region of the target: that is what continuity
        // of a quotient map looks like after discretization.
        const Grid& g = *dst_.grid;
        std::vector<int> mn(g.dim), mx(g.dim);
        bool first = true;
        for (auto& v : vs) {
            const VertexInfo& vi = classify(v);
            if (vi.cls == 0) continue;
            for (int i = 0; i < g.dim; ++i) {
                if (first || vi.snap[i] < mn[i]) mn[i] = vi.snap[i];
                if (first || vi.snap[i] > mx[i]) mx[i] = vi.snap[i];
            }
            first = false;
        }
        for (int i = 0; i < g.dim; ++i)
            if (mx[i] - mn[i] > kSpanCap)
                throw detail::CarrierFail("snapped images spread beyond the carrier cap");
        Box box{mn, mx};
        const detail::CarrierComplex& cc = carrier(box);
        if (!cc.inside_N)
            throw detail::CarrierFail("carrier box outside the target pair");
        if (any_bot && !cc.touches_L)
            throw detail::CarrierFail(
                "cell mixes basepoint and relative vertices away from the "
                "collapsed region");

        // beta = phi of the relative boundary
        Chain beta;
        std::vector<std::pair<Key, int>> fs;
        model_.faces(s, fs);
        for (auto& [fk, sg] : fs) {
            if (model_.carried(fk)) continue;
            const Chain& pf = phi(fk);
            for (auto& [ck, cv] : pf) chain_add(beta, ck, (long long)sg * cv);
        }

        int cdim = 0;
        for (int i = 0; i < g.dim; ++i)
            if (mx[i] > mn[i]) ++cdim;
        if (beta.empty() && cdim < k && !any_bot) {
            return memo_.emplace(s, std::move(result)).first->second;
        }

        result = cc.solve(k, beta);
        return memo_.emplace(s, std::move(result)).first->second;
    }

    static constexpr int kSpanCap = 8;

    struct Box {
        std::vector<int> lo, hi;  // vertex index range per axis
        bool operator<(const Box& o) const {
            return lo != o.lo ? lo < o.lo : hi < o.hi;
        }
    };

    // all cells of the closed box region, any dimension
    std::vector<CellKey> box_cells(const Box& box) const {
        const Grid& g = *dst_.grid;
        std::vector<CellKey> out;
        int a[8], e[8];
        std::vector<int> it(g.dim, 0);
        std::vector<int> opts(g.dim);
        for (int i = 0; i < g.dim; ++i)
            opts[i] = 2 * (box.hi[i] - box.lo[i]) + 1;
        int total = 1;
        for (int i = 0; i < g.dim; ++i) total *= opts[i];
        for (int t = 0; t < total; ++t) {
            for (int i = 0; i < g.dim; ++i) {
                a[i] = box.lo[i] + it[i] / 2;
                e[i] = it[i] % 2;
            }
            out.push_back(dst_.codec.pack(a, e));
            for (int i = g.dim - 1; i >= 0; --i) {
                if (++it[i] < opts[i]) break;
                it[i] = 0;
            }
        }
        return out;
    }

    const detail::CarrierComplex& carrier(const Box& box) {
        auto it = carriers_.find(box);
        if (it != carriers_.end()) return it->second;
        return carriers_.emplace(box, detail::CarrierComplex::build(dst_, box_cells(box)))
            .first->second;
    }

    const Model& model_;
    const PairComplex& dst_;
    PointMap f_;
    std::map<Key, Chain> memo_;
    std::map<Key, VertexInfo> vmemo_;
    std::map<Box, detail::CarrierComplex> carriers_;
};

// ---------------------------------------------------------------------------
// Cube-carrier engine.  The map is prescribed on top cubes of the source
// pair as a set of target cubes each (empty set = the cube dies into the
// basepoint).  A lower cell carries the intersection of the carriers of the
// cubes containing it, so carriers shrink when passing to faces, which is
// the nesting the acyclic-carrier argument needs.  Cells adjoining dead
// cubes are accepted only when their carrier reaches the collapsed region:
// that is quotient-map continuity after discretization.
// ---------------------------------------------------------------------------

using CubeImageMap = std::function<std::vector<CubeId>(CubeId)>;

class CubeCarrierEngine {
  public:
    CubeCarrierEngine(const PairComplex& src, const PairComplex& dst, CubeImageMap f)
        : src_(src), dst_(dst), f_(std::move(f)) {}

    Chain image(const Chain& chain) {
        Chain out;
        for (auto& [ck, coef] : chain) {
            const Chain& ph = phi(ck);
            for (auto& [dk, dv] : ph) chain_add(out, dk, coef * dv);
        }
        return out;
    }

  private:
    static constexpr int kCarrierCap = 512;

    // sorted endpoint set for a source cube, memoized
    const std::vector<CubeId>& cube_carrier(CubeId c) {
        auto it = cmemo_.find(c);
        if (it == cmemo_.end()) it = cmemo_.emplace(c, f_(c)).first;
        return it->second;
    }

    // cubes of the source pair whose closure contains the cell
    std::vector<CubeId> adjacent_cubes(CellKey s) const {
        const Grid& g = *src_.grid;
        int a[8], e[8];
        src_.codec.unpack(s, a, e);
        std::vector<int> axes;
        for (int i = 0; i < g.dim; ++i)
            if (!e[i]) axes.push_back(i);
        int ca[8], ce[8];
        for (int i = 0; i < g.dim; ++i) ce[i] = 1;
        std::vector<CubeId> out;
        std::vector<int> mi(g.dim);
        int n = 1 << axes.size();
        for (int c = 0; c < n; ++c) {
            for (int i = 0; i < g.dim; ++i) ca[i] = a[i];
            for (size_t t = 0; t < axes.size(); ++t)
                if ((c >> t) & 1) --ca[axes[t]];
            bool ok = true;
            for (int i = 0; i < g.dim; ++i)
                if (ca[i] < 0 || ca[i] >= g.res[i]) ok = false;
            if (!ok) continue;
            if (!src_.in_relative(src_.codec.pack(ca, ce))) continue;
            for (int i = 0; i < g.dim; ++i) mi[i] = ca[i];
            out.push_back(g.to_id(mi));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    const detail::CarrierComplex& carrier(const std::vector<CubeId>& cubes) {
        auto it = carriers_.find(cubes);
        if (it != carriers_.end()) return it->second;
        if ((int)cubes.size() > kCarrierCap)
            throw NotCellular("cube map: carrier exceeds the size cap");
        const Grid& g = *dst_.grid;
        std::set<CellKey> cells;
        int a[8], e[8];
        for (CubeId c : cubes) {
            auto mi = g.from_id(c);
            int total = 1;
            for (int i = 0; i < g.dim; ++i) total *= 3;
            for (int t = 0; t < total; ++t) {
                int rest = t;
                for (int i = 0; i < g.dim; ++i) {
                    switch (rest % 3) {
                        case 0: a[i] = mi[i]; e[i] = 1; break;
                        case 1: a[i] = mi[i]; e[i] = 0; break;
                        default: a[i] = mi[i] + 1; e[i] = 0; break;
                    }
                    rest /= 3;
                }
                cells.insert(dst_.codec.pack(a, e));
            }
        }
        std::vector<CellKey> closure(cells.begin(), cells.end());
        return carriers_
            .emplace(cubes, detail::CarrierComplex::build(dst_, closure))
            .first->second;
    }

    const Chain& phi(CellKey s) {
        auto it = memo_.find(s);
        if (it != memo_.end()) return it->second;
        Chain result;
        if (src_.carried_by_L(s))
            return memo_.emplace(s, std::move(result)).first->second;
        if (!src_.in_relative(s)) throw Error("cube map: source cell outside its complex");

        bool any_dead = false;
        std::vector<const std::vector<CubeId>*> live;
        for (CubeId c : adjacent_cubes(s)) {
            const auto& im = cube_carrier(c);
            if (im.empty()) any_dead = true;
            else live.push_back(&im);
        }
        if (live.empty())
            return memo_.emplace(s, std::move(result)).first->second;

        std::vector<CubeId> inter = *live[0];
        std::vector<CubeId> tmp;
        for (size_t i = 1; i < live.size() && !inter.empty(); ++i) {
            tmp.clear();
            std::set_intersection(inter.begin(), inter.end(), live[i]->begin(),
                                  live[i]->end(), std::back_inserter(tmp));
            inter.swap(tmp);
        }
        if (inter.empty()) throw NotCellular("cube map: adjacent carriers do not meet");

        const detail::CarrierComplex& cc = carrier(inter);
        if (any_dead && !cc.touches_L)
            throw NotCellular(
                "cube map: cell adjoins dead cubes away from the collapsed region");

        int k = src_.codec.dim_of(s);
        if (k == 0) {
            const auto& verts = cc.at(0);
            if (!verts.empty()) result[verts[0]] = 1;
            return memo_.emplace(s, std::move(result)).first->second;
        }

        Chain beta;
        std::vector<std::pair<CellKey, int>> fs;
        src_.codec.faces(s, fs);
        for (auto& [fk, sg] : fs) {
            if (src_.carried_by_L(fk)) continue;
            const Chain& pf = phi(fk);
            for (auto& [ck, cv] : pf) chain_add(beta, ck, (long long)sg * cv);
        }
        try {
            result = cc.solve(k, beta);
        } catch (const detail::CarrierFail& e) {
            throw NotCellular(std::string("cube map: ") + e.what());
        }
        return memo_.emplace(s, std::move(result)).first->second;
    }

    const PairComplex& src_;
    const PairComplex& dst_;
    CubeImageMap f_;
    std::map<CellKey, Chain> memo_;
    std::map<CubeId, std::vector<CubeId>> cmemo_;
    std::map<std::vector<CubeId>, detail::CarrierComplex> carriers_;
};

// ---------------------------------------------------------------------------
// Homology morphisms: one integer matrix per degree, torsion rows mod their
// order.  Rows index target generators (free first), columns source ones.
// ---------------------------------------------------------------------------

struct HomologyMorphism {
    HomologySignature src, dst;
    std::map<int, IntMat> mats;

    int src_count(int k) const { return src.free_rank(k) + (int)src.torsion(k)->size(); }
    int dst_count(int k) const { return dst.free_rank(k) + (int)dst.torsion(k)->size(); }

    IntMat at(int k) const {
        auto it = mats.find(k);
        if (it != mats.end()) return it->second;
        return IntMat(dst_count(k), src_count(k));
    }

    void normalize() {
        // reduce torsion rows and drop all-zero degree matrices
        for (auto it = mats.begin(); it != mats.end();) {
            IntMat& m = it->second;
            int fr = dst.free_rank(it->first);
            const auto& tor = *dst.torsion(it->first);
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

    bool operator==(const HomologyMorphism& o) const {
        if (!(src == o.src) || !(dst == o.dst)) return false;
        std::set<int> degs;
        for (auto& [k, m] : mats) degs.insert(k);
        for (auto& [k, m] : o.mats) degs.insert(k);
        for (int k : degs)
            if (!(at(k) == o.at(k))) return false;
        return true;
    }

    // bijective on every degree: square blocks with unit determinant on the
    // free parts and no torsion present
    bool is_iso() const {
        std::set<int> degs;
        for (auto& [k, g] : src.groups) degs.insert(k);
        for (auto& [k, g] : dst.groups) degs.insert(k);
        for (int k : degs) {
            if (!src.torsion(k)->empty() || !dst.torsion(k)->empty()) return false;
            if (src.free_rank(k) != dst.free_rank(k)) return false;
            IntMat m = at(k);
            if (m.rows != m.cols) return false;
            if (m.rows == 0) continue;
            long long d = m.det();
            if (d != 1 && d != -1) return false;
        }
        return true;
    }
};

inline HomologyMorphism identity_morphism(const HomologySignature& s) {
    HomologyMorphism h;
    h.src = h.dst = s;
    for (auto& [k, g] : s.groups) {
        int n = g.first + (int)g.second.size();
        h.mats[k] = IntMat::identity(n);
    }
    return h;
}

inline HomologyMorphism compose(const HomologyMorphism& g, const HomologyMorphism& f) {
    if (!(f.dst == g.src)) throw Error("compose: middle signatures differ");
    HomologyMorphism h;
    h.src = f.src;
    h.dst = g.dst;
    std::set<int> degs;
    for (auto& [k, m] : f.mats) degs.insert(k);
    for (auto& [k, m] : g.mats) degs.insert(k);
    for (int k : degs) {
        IntMat m = g.at(k) * f.at(k);
        if (!m.is_zero()) h.mats[k] = m;
    }
    h.normalize();
    return h;
}

// ---------------------------------------------------------------------------
// Builders.
// ---------------------------------------------------------------------------

// cell-level map: every relative source cell is either collapsed in the
// target or present verbatim (inclusions N c N', quotient maps, excision).
// With collapse_missing set, cells absent from the target complex also
// collapse; the caller is vouching that the quotient identifying them is
// continuous (the cells' closures meet the rest of the pair inside L').
inline HomologyMorphism induced_cellwise(const PairComplex& src, const PairComplex& dst,
                                         bool collapse_missing = false) {
    HomologyMorphism h;
    h.src = src.signature();
    h.dst = dst.signature();
    for (auto& [deg, grp] : h.src.groups) {
        const auto& basis = src.degree(deg);
        int cols = (int)basis.gens.size();
        int rows = h.dst_count(deg);
        IntMat m(rows, cols);
        for (int j = 0; j < cols; ++j) {
            Chain img;
            for (auto& [ck, cv] : basis.gens[j]) {
                if (dst.carried_by_L(ck)) continue;
                if (!dst.in_relative(ck)) {
                    if (collapse_missing) continue;
                    throw NotCellular("cell-level map: source cell missing from target");
                }
                chain_add(img, ck, cv);
            }
            auto coords = dst.coordinates(deg, img);
            for (int i = 0; i < rows; ++i) m(i, j) = coords[i];
        }
        if (!m.is_zero()) h.mats[deg] = m;
    }
    h.normalize();
    return h;
}

// cube-carrier induced morphism; carriers come from a prescribed multivalued
// cube map and there is no refinement to escalate, so failures are terminal
inline HomologyMorphism induced_cube_map(const PairComplex& src, const PairComplex& dst,
                                         CubeImageMap f) {
    HomologyMorphism h;
    h.src = src.signature();
    h.dst = dst.signature();
    CubeCarrierEngine eng(src, dst, std::move(f));
    for (auto& [deg, grp] : h.src.groups) {
        const auto& basis = src.degree(deg);
        int cols = (int)basis.gens.size();
        IntMat m(h.dst_count(deg), cols);
        for (int j = 0; j < cols; ++j) {
            Chain img = eng.image(basis.gens[j]);
            if (!dst.boundary(img).empty())
                throw Error("induced map: generator image is not a cycle");
            auto coords = dst.coordinates(deg, img);
            for (int i = 0; i < m.rows; ++i) m(i, j) = coords[i];
        }
        if (!m.is_zero()) h.mats[deg] = m;
    }
    h.normalize();
    return h;
}

// point-map induced morphism with refinement escalation; also available
// under the name induced_homology_map below
inline HomologyMorphism induced_point_map(const PairComplex& src, const PairComplex& dst,
                                          const PointMap& f, int max_refine = 64,
                                          int* refinement_used = nullptr) {
    HomologyMorphism h;
    h.src = src.signature();
    h.dst = dst.signature();
    for (int r = 1; r <= max_refine; r *= 2) {
        try {
            GridChainModel model(src, r);
            ChainMapEngine<GridChainModel> eng(model, dst, f);
            h.mats.clear();
            for (auto& [deg, grp] : h.src.groups) {
                const auto& basis = src.degree(deg);
                int cols = (int)basis.gens.size();
                IntMat m(h.dst_count(deg), cols);
                for (int j = 0; j < cols; ++j) {
                    Chain img = eng.image(basis.gens[j]);
                    if (!dst.boundary(img).empty())
                        throw Error("induced map: generator image is not a cycle");
                    auto coords = dst.coordinates(deg, img);
                    for (int i = 0; i < m.rows; ++i) m(i, j) = coords[i];
                }
                if (!m.is_zero()) h.mats[deg] = m;
            }
            h.normalize();
            if (refinement_used) *refinement_used = r;
            return h;
        } catch (const detail::CarrierFail&) {
            continue;
        }
    }
    throw NotCellular("point map not cellular at the refinement cap");
}

inline HomologyMorphism induced_homology_map(const PairComplex& src,
                                             const PairComplex& dst,
                                             const PointMap& f,
                                             int max_refine = 64,
                                             int* refinement_used = nullptr) {
    return induced_point_map(src, dst, f, max_refine, refinement_used);
}

}  // namespace conley
