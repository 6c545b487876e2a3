// Combinatorial enclosure of the time-tau flow map.
//
// Each cube is sampled at its corners, its center and a fixed Halton tail;
// the images are advanced by tau and their bounding box, inflated by `pad`
// cell widths, determines the outgoing edges.  The enclosure is sampled (not
// rigorous); pad and the sample count are the robustness knobs.
#pragma once

#include <cstdlib>
#include <thread>

#include "conley/flow.hpp"
#include "conley/grid.hpp"

namespace conley {

namespace detail {
inline double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}
inline int env_threads() {
    const char* s = std::getenv("CONLEY_THREADS");
    if (!s) return 1;
    int n = std::atoi(s);
    return n < 1 ? 1 : n;
}
}  // namespace detail

struct TransitionGraph {
    GridPtr grid;
    double tau = 0;
    double pad = 0.25;      // in cell widths
    int extra_samples = 8;  // Halton points beyond corners + center
    bool reversed_field = false;

    std::vector<std::vector<std::uint32_t>> succ, pred;
    std::vector<char> escape;  // image box stuck out of the grid

    int steps_of(double T) const {
        return T <= 0 ? 0 : (int)std::ceil(T / tau - 1e-9);
    }

    // adjoint relation; escapes are not transported (the forward sampling
    // carries no information about backward images outside the grid)
    TransitionGraph adjoint() const {
        TransitionGraph r = *this;
        std::swap(r.succ, r.pred);
        r.reversed_field = !reversed_field;
        std::fill(r.escape.begin(), r.escape.end(), 0);
        return r;
    }
};

inline TransitionGraph transition_graph(const VectorFieldSpec& field, const FlowConfig& cfg,
                                        GridPtr grid, double tau, double pad = 0.25,
                                        int extra_samples = 8) {
    if (cfg.step > tau + 1e-12) throw Error("transition_graph: cfg.step must be <= tau");
    const Grid& g = *grid;
    int d = g.dim;
    std::uint64_t n = g.num_cubes();
    if (n > 0x7fffffffull) throw Error("transition_graph: grid too large");

    TransitionGraph tg;
    tg.grid = grid;
    tg.tau = tau;
    tg.pad = pad;
    tg.extra_samples = extra_samples;
    tg.reversed_field = cfg.reversed;
    tg.succ.resize(n);
    tg.pred.resize(n);
    tg.escape.assign(n, 0);

    // sample offsets in [0,1]^d, shared by every cube
    std::vector<Vec> offs;
    int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        Vec o(d);
        for (int i = 0; i < d; ++i) o[i] = (c >> i) & 1 ? 1.0 : 0.0;
        offs.push_back(o);
    }
    offs.push_back(Vec(d, 0.5));
    static const int bases[] = {2, 3, 5, 7, 11, 13};
    for (int s = 1; s <= extra_samples; ++s) {
        Vec o(d);
        for (int i = 0; i < d; ++i) o[i] = detail::halton(s, bases[i]);
        offs.push_back(o);
    }

    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        Vec blo, bhi, x(d), img_lo(d), img_hi(d);
        for (CubeId id = begin; id < end; ++id) {
            g.cube_box(id, blo, bhi);
            bool first = true;
            for (const Vec& o : offs) {
                for (int i = 0; i < d; ++i) x[i] = blo[i] + o[i] * (bhi[i] - blo[i]);
                Vec y = advance(field, cfg, x, tau);
                for (int i = 0; i < d; ++i) {
                    if (first || y[i] < img_lo[i]) img_lo[i] = y[i];
                    if (first || y[i] > img_hi[i]) img_hi[i] = y[i];
                }
                first = false;
            }
            bool inside = true;
            std::vector<int> jlo(d), jhi(d);
            for (int i = 0; i < d; ++i) {
                double p = pad * g.w[i];
                if (!g.axis_range(i, img_lo[i] - p, img_hi[i] + p, jlo[i], jhi[i]))
                    inside = false;
            }
            if (!inside) tg.escape[id] = 1;
            // enumerate the index rectangle
            std::vector<int> mi = jlo;
            bool any = true;
            for (int i = 0; i < d; ++i)
                if (jlo[i] > jhi[i]) any = false;
            while (any) {
                tg.succ[id].push_back((std::uint32_t)g.to_id(mi));
                int i = d - 1;
                while (i >= 0) {
                    if (++mi[i] <= jhi[i]) break;
                    mi[i] = jlo[i];
                    --i;
                }
                if (i < 0) break;
            }
            std::sort(tg.succ[id].begin(), tg.succ[id].end());
        }
    };

    int threads = std::min<std::uint64_t>(detail::env_threads(), n);
    if (threads <= 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            std::uint64_t b = t * chunk, e = std::min<std::uint64_t>(n, b + chunk);
            if (b < e) pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }

    for (CubeId id = 0; id < n; ++id)
        for (std::uint32_t s : tg.succ[id]) tg.pred[s].push_back((std::uint32_t)id);
    for (auto& p : tg.pred) std::sort(p.begin(), p.end());
    return tg;
}

}  // namespace conley
