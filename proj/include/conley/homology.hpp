// Integer homology of relative cubical complexes.
//
// The chain complex of a pair (N, L) of cube sets uses the full face lattice
// of N's cubes minus the faces carried by L.  Homology is computed by first
// eliminating incidence pairs with unit coefficient (recorded in a replay
// trace so cycles can be projected to the residual complex and residual
// generators lifted back), then running Smith normal form with tracked
// transforms on the small residual boundary matrices.  Everything is exact
// integer arithmetic.
#pragma once

#include <bit>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "conley/grid.hpp"

namespace conley {

using CellKey = std::uint64_t;
using Chain = std::map<CellKey, long long>;  // ordered -> deterministic iteration

inline void chain_add(Chain& c, CellKey k, long long v) {
    if (v == 0) return;
    auto it = c.find(k);
    if (it == c.end()) c.emplace(k, v);
    else if ((it->second += v) == 0) c.erase(it);
}

// ---------------------------------------------------------------------------
// Cell encoding.  An elementary cell is, per axis, either the vertex
// {anchor} (extent 0) or the interval [anchor, anchor+1] (extent 1) in grid
// vertex coordinates.  Cells pack into 64 bits: per axis anchor + extent bit.
// ---------------------------------------------------------------------------

struct CellCodec {
    int dim = 0;
    std::vector<int> bits;    // anchor bits per axis
    std::vector<int> shift;   // field offset per axis (anchor then extent bit)
    std::vector<int> nverts;  // res+1 per axis

    CellCodec() = default;
    explicit CellCodec(const Grid& g) : dim(g.dim) {
        bits.resize(dim);
        shift.resize(dim);
        nverts.resize(dim);
        int off = 0;
        for (int i = 0; i < dim; ++i) {
            nverts[i] = g.res[i] + 1;
            bits[i] = std::bit_width((unsigned)nverts[i]);
            shift[i] = off;
            off += bits[i] + 1;
        }
        if (off > 64) throw Error("grid too fine for 64-bit cell keys");
    }

    CellKey pack(const int* anchor, const int* ext) const {
        CellKey k = 0;
        for (int i = 0; i < dim; ++i)
            k |= ((CellKey)anchor[i] | ((CellKey)(ext[i] ? 1 : 0) << bits[i])) << shift[i];
        return k;
    }
    void unpack(CellKey k, int* anchor, int* ext) const {
        for (int i = 0; i < dim; ++i) {
            CellKey f = k >> shift[i];
            anchor[i] = (int)(f & (((CellKey)1 << bits[i]) - 1));
            ext[i] = (int)((f >> bits[i]) & 1);
        }
    }
    int dim_of(CellKey k) const {
        int d = 0;
        for (int i = 0; i < dim; ++i) d += (int)((k >> (shift[i] + bits[i])) & 1);
        return d;
    }

    // signed faces: for the t-th nondegenerate axis, (-1)^t * (upper - lower)
    void faces(CellKey k, std::vector<std::pair<CellKey, int>>& out) const {
        out.clear();
        int anchor[8], ext[8];
        unpack(k, anchor, ext);
        int t = 0;
        for (int i = 0; i < dim; ++i) {
            if (!ext[i]) continue;
            int sgn = (t % 2 == 0) ? 1 : -1;
            ext[i] = 0;
            anchor[i] += 1;
            out.emplace_back(pack(anchor, ext), sgn);   // upper
            anchor[i] -= 1;
            out.emplace_back(pack(anchor, ext), -sgn);  // lower
            ext[i] = 1;
            ++t;
        }
    }

    // all 3^dim faces (including the cube itself) of the top cube at mi
    void cube_faces(const std::vector<int>& mi, std::vector<CellKey>& out) const {
        out.clear();
        int n = 1;
        for (int i = 0; i < dim; ++i) n *= 3;
        int anchor[8], ext[8];
        for (int c = 0; c < n; ++c) {
            int t = c;
            for (int i = 0; i < dim; ++i) {
                int ch = t % 3;
                t /= 3;
                if (ch == 0) { anchor[i] = mi[i]; ext[i] = 0; }
                else if (ch == 1) { anchor[i] = mi[i]; ext[i] = 1; }
                else { anchor[i] = mi[i] + 1; ext[i] = 0; }
            }
            out.push_back(pack(anchor, ext));
        }
    }
};

// ---------------------------------------------------------------------------
// Homology signature: degree -> (free rank, torsion orders >= 2).
// ---------------------------------------------------------------------------

struct HomologySignature {
    std::map<int, std::pair<int, std::vector<long long>>> groups;
    bool unpointed = false;  // L was empty; groups are absolute H_*(N)

    void set(int deg, int free_rank, std::vector<long long> torsion = {}) {
        if (free_rank == 0 && torsion.empty()) { groups.erase(deg); return; }
        groups[deg] = {free_rank, std::move(torsion)};
    }
    int free_rank(int deg) const {
        auto it = groups.find(deg);
        return it == groups.end() ? 0 : it->second.first;
    }
    const std::vector<long long>* torsion(int deg) const {
        static const std::vector<long long> none;
        auto it = groups.find(deg);
        return it == groups.end() ? &none : &it->second.second;
    }
    bool trivial() const { return groups.empty(); }
    bool operator==(const HomologySignature& o) const { return groups == o.groups; }
    bool operator!=(const HomologySignature& o) const { return !(*this == o); }
    long long euler() const {
        long long e = 0;
        for (auto& [d, g] : groups) e += (d % 2 == 0 ? 1 : -1) * (long long)g.first;
        return e;
    }
    int max_degree() const {
        int m = -1;
        for (auto& [d, g] : groups) m = std::max(m, d);
        return m;
    }
    std::string str() const {
        if (groups.empty()) return unpointed ? "0 (unpointed)" : "0";
        std::string s;
        for (auto& [d, g] : groups) {
            if (!s.empty()) s += ", ";
            s += "H" + std::to_string(d) + "=";
            std::string parts;
            for (int i = 0; i < g.first; ++i) parts += parts.empty() ? "Z" : "+Z";
            for (long long t : g.second)
                parts += (parts.empty() ? "Z/" : "+Z/") + std::to_string(t);
            s += parts;
        }
        if (unpointed) s += " (unpointed)";
        return s;
    }
};

// ---------------------------------------------------------------------------
// Smith normal form with tracked transforms: U * A * V = S.
// ---------------------------------------------------------------------------

struct SmithData {
    IntMat S, U, Uinv, V, Vinv;
    int rank = 0;  // number of nonzero diagonal entries
};

inline SmithData smith_full(const IntMat& A) {
    SmithData sd;
    sd.S = A;
    sd.U = IntMat::identity(A.rows);
    sd.Uinv = IntMat::identity(A.rows);
    sd.V = IntMat::identity(A.cols);
    sd.Vinv = IntMat::identity(A.cols);
    IntMat& S = sd.S;

    auto row_swap = [&](int i, int j) {
        if (i == j) return;
        for (int c = 0; c < S.cols; ++c) std::swap(S(i, c), S(j, c));
        for (int c = 0; c < sd.U.cols; ++c) std::swap(sd.U(i, c), sd.U(j, c));
        for (int r = 0; r < sd.Uinv.rows; ++r) std::swap(sd.Uinv(r, i), sd.Uinv(r, j));
    };
    auto col_swap = [&](int i, int j) {
        if (i == j) return;
        for (int r = 0; r < S.rows; ++r) std::swap(S(r, i), S(r, j));
        for (int r = 0; r < sd.V.rows; ++r) std::swap(sd.V(r, i), sd.V(r, j));
        for (int c = 0; c < sd.Vinv.cols; ++c) std::swap(sd.Vinv(i, c), sd.Vinv(j, c));
    };
    auto row_add = [&](int i, int j, long long f) {  // row i += f * row j
        if (f == 0) return;
        for (int c = 0; c < S.cols; ++c) S(i, c) += f * S(j, c);
        for (int c = 0; c < sd.U.cols; ++c) sd.U(i, c) += f * sd.U(j, c);
        for (int r = 0; r < sd.Uinv.rows; ++r) sd.Uinv(r, j) -= f * sd.Uinv(r, i);
    };
    auto col_add = [&](int i, int j, long long f) {  // col i += f * col j
        if (f == 0) return;
        for (int r = 0; r < S.rows; ++r) S(r, i) += f * S(r, j);
        for (int r = 0; r < sd.V.rows; ++r) sd.V(r, i) += f * sd.V(r, j);
        for (int c = 0; c < sd.Vinv.cols; ++c) sd.Vinv(j, c) -= f * sd.Vinv(i, c);
    };
    auto row_neg = [&](int i) {
        for (int c = 0; c < S.cols; ++c) S(i, c) = -S(i, c);
        for (int c = 0; c < sd.U.cols; ++c) sd.U(i, c) = -sd.U(i, c);
        for (int r = 0; r < sd.Uinv.rows; ++r) sd.Uinv(r, i) = -sd.Uinv(r, i);
    };

    int n = std::min(S.rows, S.cols);
    for (int t = 0; t < n; ++t) {
        // locate the smallest nonzero entry in the trailing block
        int pi = -1, pj = -1;
        long long best = 0;
        for (int i = t; i < S.rows; ++i)
            for (int j = t; j < S.cols; ++j) {
                long long v = S(i, j) < 0 ? -S(i, j) : S(i, j);
                if (v != 0 && (pi < 0 || v < best)) { best = v; pi = i; pj = j; }
            }
        if (pi < 0) break;
        row_swap(t, pi);
        col_swap(t, pj);

        bool again = true;
        while (again) {
            again = false;
            for (int i = t + 1; i < S.rows; ++i) {
                if (S(i, t) == 0) continue;
                long long q = S(i, t) / S(t, t);
                row_add(i, t, -q);
                if (S(i, t) != 0) {  // remainder smaller than pivot: swap up
                    row_swap(t, i);
                    again = true;
                }
            }
            for (int j = t + 1; j < S.cols; ++j) {
                if (S(t, j) == 0) continue;
                long long q = S(t, j) / S(t, t);
                col_add(j, t, -q);
                if (S(t, j) != 0) {
                    col_swap(t, j);
                    again = true;
                }
            }
            if (!again) {
                // divisibility: pivot must divide the trailing block
                for (int i = t + 1; i < S.rows && !again; ++i)
                    for (int j = t + 1; j < S.cols && !again; ++j)
                        if (S(i, j) % S(t, t) != 0) {
                            row_add(t, i, 1);
                            again = true;
                        }
            }
        }
        if (S(t, t) < 0) row_neg(t);
        ++sd.rank;
    }
    return sd;
}

// ---------------------------------------------------------------------------
// PairComplex: build, reduce, homology with generators and coordinates.
// ---------------------------------------------------------------------------

class PairComplex {
  public:
    GridPtr grid;
    CellCodec codec;
    bool unpointed = false;

    struct DegreeBasis {
        int free_rank = 0;
        std::vector<long long> torsion;   // ascending divisibility, entries >= 2
        std::vector<Chain> gens;          // free generators first, then torsion
    };

    PairComplex(const CubeSet& N, const CubeSet& L) : grid(N.grid), codec(*N.grid) {
        if (!(*N.grid == *L.grid)) throw Error("PairComplex: N and L on different grids");
        if (!L.is_subset_of(N)) throw NotNested("L is not contained in N");
        unpointed = L.empty();
        build(N, L);
        check_dd_zero();
        reduce();
        residual_homology();
    }

    int num_cells() const { return (int)keys_.size(); }
    int num_cells_of_dim(int d) const {
        int c = 0;
        for (int x : cell_dim_)
            if (x == d) ++c;
        return c;
    }
    bool in_relative(CellKey k) const { return index_of_.count(k) != 0; }
    bool carried_by_L(CellKey k) const { return l_faces_.count(k) != 0; }
    bool carried_by_N(CellKey k) const { return in_relative(k) || carried_by_L(k); }

    const DegreeBasis& degree(int d) const {
        static const DegreeBasis empty;
        return (d >= 0 && d < (int)basis_.size()) ? basis_[d] : empty;
    }
    int rank(int d) const { return degree(d).free_rank; }

    HomologySignature signature() const {
        HomologySignature s;
        s.unpointed = unpointed;
        for (int d = 0; d < (int)basis_.size(); ++d)
            s.set(d, basis_[d].free_rank, basis_[d].torsion);
        return s;
    }

    // relative boundary of a chain (faces carried by L are dropped)
    Chain boundary(const Chain& c) const {
        Chain out;
        std::vector<std::pair<CellKey, int>> fs;
        for (auto& [k, v] : c) {
            codec.faces(k, fs);
            for (auto& [fk, sg] : fs) {
                if (carried_by_L(fk)) continue;
                if (!in_relative(fk)) throw Error("boundary: face outside the complex");
                chain_add(out, fk, (long long)sg * v);
            }
        }
        return out;
    }

    // coordinates of a relative cycle in the homology basis of its degree:
    // free entries first, then torsion entries reduced mod their order
    std::vector<long long> coordinates(int deg, const Chain& cycle) const {
        // to reduction indices
        std::map<std::uint32_t, long long> z;
        for (auto& [k, v] : cycle) {
            auto it = index_of_.find(k);
            if (it == index_of_.end()) throw Error("coordinates: cell not in complex");
            if (cell_dim_[it->second] != deg) throw Error("coordinates: mixed degrees");
            z[it->second] = v;
        }
        // replay eliminations
        for (const TraceStep& st : trace_) {
            if (cell_dim_[st.a] == deg) {
                auto it = z.find(st.a);
                if (it != z.end()) {
                    long long mu = it->second;
                    z.erase(it);
                    long long f = mu / st.lam;  // lam = +-1
                    for (auto& [x, cx] : st.r) {
                        auto& ref = z[x];
                        ref -= f * cx;
                        if (ref == 0) z.erase(x);
                    }
                }
            }
            if (cell_dim_[st.b] == deg) z.erase(st.b);
        }
        // into residual coordinates
        const DegreeData& dd = deg_data_[deg];
        std::vector<long long> y(dd.cells.size(), 0);
        for (auto& [idx, v] : z) {
            auto it = dd.pos.find(idx);
            if (it == dd.pos.end()) throw Error("coordinates: not a cycle (residual mismatch)");
            y[it->second] = v;
        }
        return residual_coords(deg, y);
    }

  private:
    // --- complex data -----------------------------------------------------
    std::vector<CellKey> keys_;
    std::unordered_map<CellKey, std::uint32_t> index_of_;
    std::unordered_set<CellKey> l_faces_;
    std::vector<std::int8_t> cell_dim_;
    std::vector<std::vector<std::pair<std::uint32_t, long long>>> orig_bnd_;

    // --- reduction --------------------------------------------------------
    struct TraceStep {
        std::uint32_t a, b;
        long long lam;
        std::vector<std::pair<std::uint32_t, long long>> rowA;  // cofaces of a, excl b
        std::vector<std::pair<std::uint32_t, long long>> r;     // bnd b, excl a
    };
    std::vector<TraceStep> trace_;
    std::vector<std::uint32_t> residual_cells_;

    // --- residual homology ------------------------------------------------
    struct DegreeData {
        std::vector<std::uint32_t> cells;              // residual cells of this degree
        std::unordered_map<std::uint32_t, int> pos;    // cell index -> position
        IntMat Zmat;       // columns: lattice basis of cycles
        SmithData zsm;     // smith of Zmat (for exact solves)
        IntMat Uq, Uqinv;  // quotient transforms
        std::vector<long long> dlist;  // diagonal of quotient SNF
        int qrank = 0;
        std::vector<int> coord_order;  // rows of Uq: free rows then torsion rows
    };
    std::vector<DegreeData> deg_data_;
    std::vector<DegreeBasis> basis_;

    void build(const CubeSet& N, const CubeSet& L) {
        const Grid& g = *grid;
        std::vector<CellKey> fs;
        for (CubeId id : L.ids) {
            codec.cube_faces(g.from_id(id), fs);
            for (CellKey k : fs) l_faces_.insert(k);
        }
        std::unordered_set<CellKey> seen;
        std::vector<CellKey> rel;
        for (CubeId id : N.ids) {
            codec.cube_faces(g.from_id(id), fs);
            for (CellKey k : fs)
                if (!l_faces_.count(k) && seen.insert(k).second) rel.push_back(k);
        }
        std::sort(rel.begin(), rel.end());
        keys_ = std::move(rel);
        index_of_.reserve(keys_.size() * 2);
        cell_dim_.resize(keys_.size());
        for (std::uint32_t i = 0; i < keys_.size(); ++i) {
            index_of_[keys_[i]] = i;
            cell_dim_[i] = (std::int8_t)codec.dim_of(keys_[i]);
        }
        orig_bnd_.resize(keys_.size());
        std::vector<std::pair<CellKey, int>> faces;
        for (std::uint32_t i = 0; i < keys_.size(); ++i) {
            codec.faces(keys_[i], faces);
            for (auto& [fk, sg] : faces) {
                if (l_faces_.count(fk)) continue;
                auto it = index_of_.find(fk);
                if (it == index_of_.end())
                    throw Error("PairComplex: face closure violated");
                orig_bnd_[i].emplace_back(it->second, (long long)sg);
            }
            std::sort(orig_bnd_[i].begin(), orig_bnd_[i].end());
        }
    }

    void check_dd_zero() const {
        std::map<std::uint32_t, long long> acc;
        for (std::uint32_t i = 0; i < keys_.size(); ++i) {
            if (cell_dim_[i] < 2) continue;
            acc.clear();
            for (auto& [f, s] : orig_bnd_[i])
                for (auto& [f2, s2] : orig_bnd_[f]) acc[f2] += s * s2;
            for (auto& [k, v] : acc)
                if (v != 0) throw Error("PairComplex: boundary of boundary nonzero");
        }
    }

    void reduce() {
        size_t n = keys_.size();
        std::vector<std::map<std::uint32_t, long long>> bnd(n), cob(n);
        for (std::uint32_t i = 0; i < n; ++i)
            for (auto& [f, s] : orig_bnd_[i]) {
                bnd[i][f] = s;
                cob[f][i] = s;
            }
        std::vector<char> alive(n, 1);
        std::deque<std::uint32_t> queue;
        for (std::uint32_t i = 0; i < n; ++i) queue.push_back(i);

        auto unit = [](long long v) { return v == 1 || v == -1; };

        auto eliminate = [&](std::uint32_t a, std::uint32_t b) {
            long long lam = bnd[b][a];
            TraceStep st;
            st.a = a;
            st.b = b;
            st.lam = lam;
            for (auto& [c, mu] : cob[a])
                if (c != b) st.rowA.emplace_back(c, mu);
            for (auto& [x, cx] : bnd[b])
                if (x != a) st.r.emplace_back(x, cx);

            // bnd[c] -= (mu/lam) * bnd[b] for the other cofaces of a
            for (auto& [c, mu] : st.rowA) {
                long long f = mu / lam;
                auto& bc = bnd[c];
                for (auto& [x, cx] : bnd[b]) {
                    auto it = bc.find(x);
                    long long nv = (it == bc.end() ? 0 : it->second) - f * cx;
                    if (nv == 0) {
                        if (it != bc.end()) { bc.erase(it); cob[x].erase(c); }
                    } else {
                        if (it == bc.end()) { bc[x] = nv; cob[x][c] = nv; }
                        else { it->second = nv; cob[x][c] = nv; }
                    }
                }
                queue.push_back(c);
            }
            // drop b from boundaries of its cofaces (valid after the updates)
            for (auto& [e, nu] : cob[b]) {
                bnd[e].erase(b);
                queue.push_back(e);
            }
            for (auto& [x, cx] : bnd[b]) {
                cob[x].erase(b);
                queue.push_back(x);
            }
            for (auto& [f, s] : bnd[a]) cob[f].erase(a);
            bnd[a].clear();
            cob[a].clear();
            bnd[b].clear();
            cob[b].clear();
            alive[a] = alive[b] = 0;
            trace_.push_back(std::move(st));
        };

        while (true) {
            bool did = false;
            while (!queue.empty()) {
                std::uint32_t c = queue.front();
                queue.pop_front();
                if (!alive[c]) continue;
                if (bnd[c].size() == 1 && unit(bnd[c].begin()->second) &&
                    alive[bnd[c].begin()->first]) {
                    eliminate(bnd[c].begin()->first, c);
                    did = true;
                } else if (cob[c].size() == 1 && unit(cob[c].begin()->second) &&
                           alive[cob[c].begin()->first]) {
                    eliminate(c, cob[c].begin()->first);
                    did = true;
                }
            }
            // fallback: any remaining unit incidence, smallest fill first
            long long best_fill = -1;
            std::uint32_t ba = 0, bb = 0;
            for (std::uint32_t b = 0; b < n; ++b) {
                if (!alive[b]) continue;
                for (auto& [a, v] : bnd[b]) {
                    if (!unit(v) || !alive[a]) continue;
                    long long fill =
                        ((long long)cob[a].size() - 1) * ((long long)bnd[b].size() - 1);
                    if (best_fill < 0 || fill < best_fill) {
                        best_fill = fill;
                        ba = a;
                        bb = b;
                    }
                }
            }
            if (best_fill < 0) {
                if (!did) break;
                continue;
            }
            eliminate(ba, bb);
        }

        // residual boundary matrices are read from bnd below
        for (std::uint32_t i = 0; i < n; ++i)
            if (alive[i]) residual_cells_.push_back(i);
        residual_bnd_.resize(n);
        for (std::uint32_t i : residual_cells_)
            residual_bnd_[i].assign(bnd[i].begin(), bnd[i].end());
    }
    std::vector<std::vector<std::pair<std::uint32_t, long long>>> residual_bnd_;

    void residual_homology() {
        int top = codec.dim;
        deg_data_.assign(top + 1, {});
        basis_.assign(top + 1, {});
        for (std::uint32_t i : residual_cells_) {
            DegreeData& dd = deg_data_[cell_dim_[i]];
            dd.pos[i] = (int)dd.cells.size();
            dd.cells.push_back(i);
        }
        // boundary matrices D_k : C_k -> C_{k-1}
        std::vector<IntMat> D(top + 2);
        for (int k = 0; k <= top; ++k) {
            int rows = k > 0 ? (int)deg_data_[k - 1].cells.size() : 0;
            D[k] = IntMat(rows, (int)deg_data_[k].cells.size());
            if (k == 0) continue;
            for (int j = 0; j < (int)deg_data_[k].cells.size(); ++j)
                for (auto& [f, s] : residual_bnd_[deg_data_[k].cells[j]])
                    D[k](deg_data_[k - 1].pos.at(f), j) = s;
        }
        D[top + 1] = IntMat((int)deg_data_[top].cells.size(), 0);

        for (int k = 0; k <= top; ++k) {
            DegreeData& dd = deg_data_[k];
            int nk = (int)dd.cells.size();
            // cycle lattice: kernel columns of D_k
            SmithData sk = smith_full(D[k]);
            int z = nk - sk.rank;
            dd.Zmat = IntMat(nk, z);
            for (int j = 0; j < z; ++j)
                for (int i = 0; i < nk; ++i) dd.Zmat(i, j) = sk.V(i, sk.rank + j);
            dd.zsm = smith_full(dd.Zmat);
            for (int t = 0; t < dd.zsm.rank; ++t)
                if (dd.zsm.S(t, t) != 1)
                    throw Error("cycle lattice not saturated");
            if (dd.zsm.rank != z) throw Error("cycle basis degenerate");

            // boundaries in cycle coordinates
            SmithData sk1 = smith_full(D[k + 1]);
            int nb = sk1.rank;
            IntMat Q(z, nb);
            for (int j = 0; j < nb; ++j) {
                std::vector<long long> bvec(nk);
                for (int i = 0; i < nk; ++i)
                    bvec[i] = sk1.S(j, j) * sk1.Uinv(i, j);
                std::vector<long long> c = solve_in_cycles(dd, bvec);
                for (int i = 0; i < z; ++i) Q(i, j) = c[i];
            }
            SmithData sq = smith_full(Q);
            dd.Uq = sq.U;
            dd.Uqinv = sq.Uinv;
            dd.qrank = sq.rank;
            dd.dlist.resize(sq.rank);
            for (int t = 0; t < sq.rank; ++t) dd.dlist[t] = sq.S(t, t);

            // basis: free rows (beyond qrank) first, then torsion rows (d>1)
            DegreeBasis& db = basis_[k];
            for (int i = dd.qrank; i < z; ++i) dd.coord_order.push_back(i);
            for (int i = 0; i < dd.qrank; ++i)
                if (dd.dlist[i] > 1) dd.coord_order.push_back(i);
            db.free_rank = z - dd.qrank;
            for (int i = 0; i < dd.qrank; ++i)
                if (dd.dlist[i] > 1) db.torsion.push_back(dd.dlist[i]);

            for (int i : dd.coord_order) {
                // generator in residual cells: Zmat * Uqinv[:, i]
                std::map<std::uint32_t, long long> res_chain;
                for (int r = 0; r < nk; ++r) {
                    long long v = 0;
                    for (int j = 0; j < z; ++j) v += dd.Zmat(r, j) * dd.Uqinv(j, i);
                    if (v) res_chain[dd.cells[r]] = v;
                }
                db.gens.push_back(lift_chain(res_chain, k));
            }
        }
    }

    // exact solve Zmat * c = b in the cycle lattice
    std::vector<long long> solve_in_cycles(const DegreeData& dd,
                                           const std::vector<long long>& b) const {
        int nk = dd.Zmat.rows, z = dd.Zmat.cols;
        // U * Zmat * V = S (diag of ones, rank z) => c = V * take(U * b)
        std::vector<long long> ub(nk, 0);
        for (int i = 0; i < nk; ++i)
            for (int j = 0; j < nk; ++j) ub[i] += dd.zsm.U(i, j) * b[j];
        for (int i = z; i < nk; ++i)
            if (ub[i] != 0) throw Error("vector not in cycle lattice");
        std::vector<long long> c(z, 0);
        for (int i = 0; i < z; ++i)
            for (int j = 0; j < z; ++j) c[i] += dd.zsm.V(i, j) * ub[j];
        return c;
    }

    std::vector<long long> residual_coords(int deg, const std::vector<long long>& y) const {
        const DegreeData& dd = deg_data_[deg];
        std::vector<long long> c = solve_in_cycles(dd, y);
        int z = dd.Zmat.cols;
        std::vector<long long> h(z, 0);
        for (int i = 0; i < z; ++i)
            for (int j = 0; j < z; ++j) h[i] += dd.Uq(i, j) * c[j];
        std::vector<long long> out;
        for (int i : dd.coord_order) {
            if (i < dd.qrank) {
                long long d = dd.dlist[i];
                long long v = h[i] % d;
                if (v < 0) v += d;
                out.push_back(v);
            } else {
                out.push_back(h[i]);
            }
        }
        return out;
    }

    // lift a residual chain back to the original complex through the trace
    Chain lift_chain(std::map<std::uint32_t, long long> c, int deg) const {
        for (auto it = trace_.rbegin(); it != trace_.rend(); ++it) {
            const TraceStep& st = *it;
            if (cell_dim_[st.b] != deg) continue;
            long long s = 0;
            for (auto& [x, coef] : st.rowA) {
                auto f = c.find(x);
                if (f != c.end()) s += coef * f->second;
            }
            if (s != 0) {
                auto& ref = c[st.b];
                ref -= s / st.lam;
                if (ref == 0) c.erase(st.b);
            }
        }
        Chain out;
        for (auto& [i, v] : c) out[keys_[i]] = v;
        // generators must be relative cycles
        Chain bd;
        std::vector<std::pair<CellKey, int>> fs;
        for (auto& [k, v] : out) {
            codec.faces(k, fs);
            for (auto& [fk, sg] : fs)
                if (!l_faces_.count(fk)) chain_add(bd, fk, (long long)sg * v);
        }
        if (!bd.empty()) throw Error("lifted generator is not a cycle");
        return out;
    }
};

inline HomologySignature relative_homology(const CubeSet& N, const CubeSet& L) {
    return PairComplex(N, L).signature();
}

}  // namespace conley
