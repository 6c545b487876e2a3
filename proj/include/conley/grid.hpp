// Uniform grids and finite cube sets.
//
// A CubeSet is a sorted vector of linearized multi-indices over a shared
// Grid; all set algebra is done on the sorted id vectors so results are
// canonical and serialization is reproducible byte for byte.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "conley/core.hpp"

namespace conley {

using CubeId = std::uint64_t;

struct Grid {
    int dim = 0;
    Vec lo, hi;             // box corners, lo < hi per axis
    std::vector<int> res;   // cubes per axis
    Vec w;                  // cell widths

    Grid() = default;
    Grid(Vec lo_, Vec hi_, std::vector<int> res_)
        : dim((int)res_.size()), lo(std::move(lo_)), hi(std::move(hi_)), res(std::move(res_)) {
        if ((int)lo.size() != dim || (int)hi.size() != dim)
            throw Error("Grid: box/res dimension mismatch");
        w.resize(dim);
        for (int i = 0; i < dim; ++i) {
            if (!(lo[i] < hi[i])) throw Error("Grid: box_lo must be < box_hi");
            if (res[i] < 1) throw Error("Grid: res must be >= 1");
            w[i] = (hi[i] - lo[i]) / res[i];
        }
    }

    bool operator==(const Grid& o) const {
        return dim == o.dim && lo == o.lo && hi == o.hi && res == o.res;
    }

    std::uint64_t num_cubes() const {
        std::uint64_t n = 1;
        for (int r : res) n *= (std::uint64_t)r;
        return n;
    }

    // row-major linearization; id order == lexicographic multi-index order
    CubeId to_id(const std::vector<int>& mi) const {
        CubeId id = 0;
        for (int i = 0; i < dim; ++i) id = id * (CubeId)res[i] + (CubeId)mi[i];
        return id;
    }
    std::vector<int> from_id(CubeId id) const {
        std::vector<int> mi(dim);
        for (int i = dim - 1; i >= 0; --i) {
            mi[i] = (int)(id % (CubeId)res[i]);
            id /= (CubeId)res[i];
        }
        return mi;
    }

    Vec center(CubeId id) const {
        auto mi = from_id(id);
        Vec c(dim);
        for (int i = 0; i < dim; ++i) c[i] = lo[i] + (mi[i] + 0.5) * w[i];
        return c;
    }
    void cube_box(CubeId id, Vec& blo, Vec& bhi) const {
        auto mi = from_id(id);
        blo.resize(dim);
        bhi.resize(dim);
        for (int i = 0; i < dim; ++i) {
            blo[i] = lo[i] + mi[i] * w[i];
            bhi[i] = blo[i] + w[i];
        }
    }

    // cells are half-open [k*w, (k+1)*w) except the last, which is closed
    bool cube_of_point(const Vec& x, std::vector<int>& mi) const {
        mi.resize(dim);
        for (int i = 0; i < dim; ++i) {
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
            int k = (int)std::floor((x[i] - lo[i]) / w[i]);
            if (k >= res[i]) k = res[i] - 1;
            mi[i] = k;
        }
        return true;
    }

    // indices whose open cells meet the open interval (blo, bhi) on one axis;
    // returns false if the interval sticks out of the grid box
    bool axis_range(int axis, double blo, double bhi, int& jlo, int& jhi) const {
        bool inside = blo >= lo[axis] - 1e-12 && bhi <= hi[axis] + 1e-12;
        double a = (blo - lo[axis]) / w[axis];
        double b = (bhi - lo[axis]) / w[axis];
        jlo = (int)std::floor(a);
        if ((double)(jlo + 1) <= a) ++jlo;  // open overlap: (j+1) must exceed a
        jhi = (int)std::ceil(b) - 1;
        if ((double)jhi >= b) --jhi;        // open overlap: j must be below b
        if (jlo < 0) jlo = 0;
        if (jhi > res[axis] - 1) jhi = res[axis] - 1;
        return inside;
    }
};

using GridPtr = std::shared_ptr<const Grid>;

class CubeSet {
  public:
    GridPtr grid;
    std::vector<CubeId> ids;  // sorted, unique

    CubeSet() = default;
    explicit CubeSet(GridPtr g) : grid(std::move(g)) {}
    CubeSet(GridPtr g, std::vector<CubeId> v) : grid(std::move(g)), ids(std::move(v)) {
        canonicalize();
    }

    void canonicalize() {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
    size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
    bool contains(CubeId id) const {
        return std::binary_search(ids.begin(), ids.end(), id);
    }
    bool operator==(const CubeSet& o) const {
        return *grid == *o.grid && ids == o.ids;
    }
    bool is_subset_of(const CubeSet& o) const {
        return std::includes(o.ids.begin(), o.ids.end(), ids.begin(), ids.end());
    }

    CubeSet set_union(const CubeSet& o) const {
        CubeSet r(grid);
        std::set_union(ids.begin(), ids.end(), o.ids.begin(), o.ids.end(),
                       std::back_inserter(r.ids));
        return r;
    }
    CubeSet set_intersect(const CubeSet& o) const {
        CubeSet r(grid);
        std::set_intersection(ids.begin(), ids.end(), o.ids.begin(), o.ids.end(),
                              std::back_inserter(r.ids));
        return r;
    }
    CubeSet set_minus(const CubeSet& o) const {
        CubeSet r(grid);
        std::set_difference(ids.begin(), ids.end(), o.ids.begin(), o.ids.end(),
                            std::back_inserter(r.ids));
        return r;
    }
};

namespace detail {
// Moore offsets: {-1,0,1}^dim minus the origin
inline const std::vector<std::vector<int>>& moore_offsets(int dim) {
    static std::vector<std::vector<std::vector<int>>> cache(9);
    auto& c = cache[dim];
    if (c.empty()) {
        int n = 1;
        for (int i = 0; i < dim; ++i) n *= 3;
        for (int k = 0; k < n; ++k) {
            std::vector<int> off(dim);
            int t = k;
            bool zero = true;
            for (int i = 0; i < dim; ++i) {
                off[i] = t % 3 - 1;
                t /= 3;
                if (off[i]) zero = false;
            }
            if (!zero) c.push_back(off);
        }
    }
    return c;
}
}  // namespace detail

// dilation by the Moore neighborhood, clipped to the grid
inline CubeSet thicken(const CubeSet& A) {
    const Grid& g = *A.grid;
    CubeSet r = A;
    for (CubeId id : A.ids) {
        auto mi = g.from_id(id);
        for (const auto& off : detail::moore_offsets(g.dim)) {
            auto nb = mi;
            bool ok = true;
            for (int i = 0; i < g.dim; ++i) {
                nb[i] += off[i];
                if (nb[i] < 0 || nb[i] >= g.res[i]) { ok = false; break; }
            }
            if (ok) r.ids.push_back(g.to_id(nb));
        }
    }
    r.canonicalize();
    return r;
}

inline CubeSet thicken(const CubeSet& A, int layers) {
    CubeSet r = A;
    for (int i = 0; i < layers; ++i) r = thicken(r);
    return r;
}

inline CubeSet set_union(const CubeSet& a, const CubeSet& b) { return a.set_union(b); }
inline CubeSet set_intersect(const CubeSet& a, const CubeSet& b) { return a.set_intersect(b); }
inline CubeSet set_minus(const CubeSet& a, const CubeSet& b) { return a.set_minus(b); }

// cubes all of whose Moore neighbours lie in A and which do not touch the
// grid's outer boundary
inline CubeSet topological_interior(const CubeSet& A) {
    const Grid& g = *A.grid;
    CubeSet r(A.grid);
    for (CubeId id : A.ids) {
        auto mi = g.from_id(id);
        bool interior = true;
        for (int i = 0; i < g.dim && interior; ++i)
            if (mi[i] == 0 || mi[i] == g.res[i] - 1) interior = false;
        for (const auto& off : detail::moore_offsets(g.dim)) {
            if (!interior) break;
            auto nb = mi;
            for (int i = 0; i < g.dim; ++i) nb[i] += off[i];
            if (!A.contains(g.to_id(nb))) interior = false;
        }
        if (interior) r.ids.push_back(id);
    }
    return r;  // already sorted (subset scan in order)
}

inline CubeSet boundary_cubes(const CubeSet& A) {
    return A.set_minus(topological_interior(A));
}

inline CubeSet cubeset_from_indices(GridPtr g, const std::vector<std::vector<int>>& mis) {
    CubeSet s(g);
    for (const auto& mi : mis) s.ids.push_back(g->to_id(mi));
    s.canonicalize();
    return s;
}

// every cube whose center satisfies pred
template <class Pred>
CubeSet build_cubeset_from_predicate(GridPtr g, Pred&& pred) {
    CubeSet s(g);
    std::uint64_t n = g->num_cubes();
    for (CubeId id = 0; id < n; ++id)
        if (pred(g->center(id))) s.ids.push_back(id);
    return s;  // ascending by construction
}

// ---------------------------------------------------------------------------
// Text serialization.  Header line, then one sorted multi-index per line.
// Round-trips bit-exactly (floats printed with max precision).
// ---------------------------------------------------------------------------

inline std::string cubeset_to_text(const CubeSet& A) {
    const Grid& g = *A.grid;
    std::ostringstream os;
    char buf[64];
    os << "dim " << g.dim << " res";
    for (int r : g.res) os << " " << r;
    os << " box";
    for (double v : g.lo) { std::snprintf(buf, sizeof buf, " %.17g", v); os << buf; }
    for (double v : g.hi) { std::snprintf(buf, sizeof buf, " %.17g", v); os << buf; }
    os << "\n";
    for (CubeId id : A.ids) {
        auto mi = g.from_id(id);
        for (int i = 0; i < g.dim; ++i) os << (i ? " " : "") << mi[i];
        os << "\n";
    }
    return os.str();
}

inline CubeSet cubeset_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string kw;
    int dim;
    if (!(is >> kw >> dim) || kw != "dim") throw ParseError("cubeset: bad header");
    std::vector<int> res(dim);
    if (!(is >> kw) || kw != "res") throw ParseError("cubeset: expected 'res'");
    for (int& r : res)
        if (!(is >> r)) throw ParseError("cubeset: bad res");
    Vec lo(dim), hi(dim);
    if (!(is >> kw) || kw != "box") throw ParseError("cubeset: expected 'box'");
    for (double& v : lo)
        if (!(is >> v)) throw ParseError("cubeset: bad box");
    for (double& v : hi)
        if (!(is >> v)) throw ParseError("cubeset: bad box");
    auto g = std::make_shared<Grid>(lo, hi, res);
    CubeSet s(g);
    std::vector<int> mi(dim);
    while (true) {
        for (int i = 0; i < dim; ++i) {
            if (!(is >> mi[i])) {
                if (i == 0) { s.canonicalize(); return s; }
                throw ParseError("cubeset: truncated multi-index");
            }
            if (mi[i] < 0 || mi[i] >= res[i]) throw ParseError("cubeset: index out of range");
        }
        s.ids.push_back(g->to_id(mi));
    }
}

inline void save_cubeset(const CubeSet& A, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << cubeset_to_text(A);
}

inline CubeSet load_cubeset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return cubeset_from_text(ss.str());
}

}  // namespace conley
