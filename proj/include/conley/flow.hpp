// Vector fields and their numerical flow.
//
// Fields come from a small catalog of closed-form benchmarks or from
// polynomial coefficient tables.  Time advance is classical RK4 with a fixed
// substep; everything downstream (transition graphs, index pairs) treats this
// integrator as the ground-truth dynamics, so it must be deterministic.
#pragma once

#include <cmath>
#include <random>

#include "conley/core.hpp"

namespace conley {

struct PolyTerm {
    double coeff = 0;
    std::vector<int> exps;  // one exponent per coordinate
};

struct VectorFieldSpec {
    int dim = 0;
    std::string tag;  // catalog name, or "poly"
    std::vector<std::vector<PolyTerm>> components;  // used when tag == "poly"
    std::vector<Vec> lattice;  // translation symmetry generators (may be empty)

    enum Code { POLY, SADDLE2, SINK2, SOURCE2, DOUBLEWELL2, PERIODIC1 };
    Code code = POLY;

    void eval(const Vec& x, Vec& out) const {
        switch (code) {
            case SADDLE2:
                out[0] = x[0];
                out[1] = -x[1];
                return;
            case SINK2:
                out[0] = -x[0];
                out[1] = -x[1];
                return;
            case SOURCE2:
                out[0] = x[0];
                out[1] = x[1];
                return;
            case DOUBLEWELL2:
                out[0] = x[0] - x[0] * x[0] * x[0];
                out[1] = -x[1];
                return;
            case PERIODIC1:
                out[0] = -std::sin(2.0 * M_PI * x[0]);
                return;
            case POLY:
                for (int c = 0; c < dim; ++c) {
                    double s = 0;
                    for (const PolyTerm& t : components[c]) {
                        double m = t.coeff;
                        for (int j = 0; j < dim; ++j)
                            for (int e = 0; e < t.exps[j]; ++e) m *= x[j];
                        s += m;
                    }
                    out[c] = s;
                }
                return;
        }
    }
    Vec eval(const Vec& x) const {
        Vec out(dim);
        eval(x, out);
        return out;
    }
    bool has_lattice() const { return !lattice.empty(); }
};

inline VectorFieldSpec field_from_catalog(const std::string& tag) {
    VectorFieldSpec f;
    f.tag = tag;
    if (tag == "SADDLE2") { f.code = VectorFieldSpec::SADDLE2; f.dim = 2; }
    else if (tag == "SINK2") { f.code = VectorFieldSpec::SINK2; f.dim = 2; }
    else if (tag == "SOURCE2") { f.code = VectorFieldSpec::SOURCE2; f.dim = 2; }
    else if (tag == "DOUBLEWELL2") { f.code = VectorFieldSpec::DOUBLEWELL2; f.dim = 2; }
    else if (tag == "PERIODIC1") {
        f.code = VectorFieldSpec::PERIODIC1;
        f.dim = 1;
        f.lattice = {Vec{1.0}};
    } else {
        throw ParseError("unknown catalog field '" + tag + "'");
    }
    return f;
}

// lattice generators must be translation symmetries of the field; sampled
// check, 100 points per generator
inline void check_lattice_equivariance(const VectorFieldSpec& f, double tol = 1e-9) {
    if (!f.has_lattice()) return;
    std::mt19937 rng(20240901u);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (const Vec& g : f.lattice) {
        if ((int)g.size() != f.dim) throw ParseError("lattice generator dim mismatch");
        for (int s = 0; s < 100; ++s) {
            Vec x(f.dim);
            for (double& xi : x) xi = dist(rng);
            Vec vx = f.eval(x), vxg = f.eval(vadd(x, g));
            if (sup_norm(vsub(vx, vxg)) > tol)
                throw ParseError("field is not equivariant under its lattice (tag " +
                                 f.tag + ")");
        }
    }
}

inline VectorFieldSpec field_from_poly(int dim,
                                       std::vector<std::vector<PolyTerm>> comps,
                                       std::vector<Vec> lattice = {}) {
    if ((int)comps.size() != dim) throw ParseError("poly field needs one table per coordinate");
    VectorFieldSpec f;
    f.tag = "poly";
    f.code = VectorFieldSpec::POLY;
    f.dim = dim;
    f.components = std::move(comps);
    f.lattice = std::move(lattice);
    for (auto& comp : f.components)
        for (auto& t : comp)
            if ((int)t.exps.size() != dim)
                throw ParseError("poly term exponent count != dim");
    check_lattice_equivariance(f);
    return f;
}

struct FlowConfig {
    double step = 1.0 / 64;  // RK4 substep; must be <= the sampling interval tau
    bool reversed = false;   // integrate -v instead of v
};

constexpr double kFlowGuard = 1e6;  // admissible box half-width

// advance x by time t >= 0 with ceil(t/step) RK4 substeps of equal size.
// Throws NonFinite if the trajectory leaves [-kFlowGuard, kFlowGuard]^dim.
inline Vec advance(const VectorFieldSpec& f, const FlowConfig& cfg, Vec x, double t) {
    if (t < 0) throw Error("advance: negative time (use cfg.reversed)");
    if (t == 0) return x;
    int n = (int)std::ceil(t / cfg.step - 1e-12);
    if (n < 1) n = 1;
    double h = t / n;
    double sgn = cfg.reversed ? -1.0 : 1.0;
    int d = f.dim;
    Vec k1(d), k2(d), k3(d), k4(d), tmp(d);
    for (int s = 0; s < n; ++s) {
        f.eval(x, k1);
        for (int i = 0; i < d; ++i) tmp[i] = x[i] + sgn * 0.5 * h * k1[i];
        f.eval(tmp, k2);
        for (int i = 0; i < d; ++i) tmp[i] = x[i] + sgn * 0.5 * h * k2[i];
        f.eval(tmp, k3);
        for (int i = 0; i < d; ++i) tmp[i] = x[i] + sgn * h * k3[i];
        f.eval(tmp, k4);
        for (int i = 0; i < d; ++i)
            x[i] += sgn * h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        for (int i = 0; i < d; ++i)
            if (!std::isfinite(x[i]) || x[i] < -kFlowGuard || x[i] > kFlowGuard)
                throw NonFinite("trajectory escaped the admissible box");
    }
    return x;
}

// floor(T/tau)+1 samples at multiples of tau; consecutive samples satisfy
// p[i+1] == advance(p[i], tau) exactly (same substep composition)
inline std::vector<Vec> orbit_segment(const VectorFieldSpec& f, const FlowConfig& cfg,
                                      const Vec& x0, double T, double tau) {
    if (tau <= 0) throw Error("orbit_segment: tau must be positive");
    int n = (int)std::floor(T / tau + 1e-12);
    std::vector<Vec> pts;
    pts.reserve(n + 1);
    pts.push_back(x0);
    for (int i = 0; i < n; ++i) pts.push_back(advance(f, cfg, pts.back(), tau));
    return pts;
}

inline Vec lattice_translate(const VectorFieldSpec& f, const Vec& x,
                             const std::vector<long long>& coeffs) {
    if (!f.has_lattice()) throw NoLattice("field '" + f.tag + "' has no lattice");
    if (coeffs.size() != f.lattice.size())
        throw Error("lattice_translate: coefficient count mismatch");
    Vec y = x;
    for (size_t i = 0; i < coeffs.size(); ++i)
        for (int j = 0; j < f.dim; ++j) y[j] += (double)coeffs[i] * f.lattice[i][j];
    return y;
}

}  // namespace conley
