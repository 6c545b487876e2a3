// Shared small types: error hierarchy, dense integer matrices, exact rationals.
#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace conley {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors.  Every named failure mode in the toolkit is a distinct type so
// callers (and the CLI report writer) can tell them apart.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CONLEY_ERROR(NAME)                                          \
    struct NAME : Error {                                           \
        explicit NAME(const std::string& w) : Error(#NAME ": " + w) {} \
    }

CONLEY_ERROR(NonFinite);          // trajectory left the admissible box
CONLEY_ERROR(NoLattice);          // lattice operation on a spec without one
CONLEY_ERROR(NotNested);          // relative pair with L not inside N
CONLEY_ERROR(NotContained);       // seed set not inside the ambient set
CONLEY_ERROR(NotPreIndex);        // pre-index-pair conditions fail
CONLEY_ERROR(TamenessUnachievable); // constructed pair fails the tame certificate
CONLEY_ERROR(NotIsolating);       // invariant part touches the boundary
CONLEY_ERROR(BlockFailed);        // ambiguous boundary cubes remain
CONLEY_ERROR(NotCellular);        // map not cellular at the refinement cap
CONLEY_ERROR(TransversalityFailed);
CONLEY_ERROR(CollarTooThin);      // block too thin for the requested collar
CONLEY_ERROR(BallTooThin);
CONLEY_ERROR(BallTooSmall);       // block not inside the (R/2)-ball
CONLEY_ERROR(LevelUnavailable);   // system level outside the computed range
CONLEY_ERROR(ShiftMismatch);      // morphism degree shifts disagree
CONLEY_ERROR(NonIntegerComplexShift); // empty hom-set: n1 - n2 not an integer
CONLEY_ERROR(SquareFails);        // naturality square does not commute
CONLEY_ERROR(OddShift);           // desuspension by an odd first index
CONLEY_ERROR(BoxTooSmall);        // analytic region meets the grid boundary
CONLEY_ERROR(DimUnsupported);
CONLEY_ERROR(ParseError);
CONLEY_ERROR(SchemaError);

#undef CONLEY_ERROR

// ---------------------------------------------------------------------------
// Exact rationals (for the fractional suspension index n).
// ---------------------------------------------------------------------------

struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw Error("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }
    bool is_integer() const { return den == 1; }
    friend Rational operator+(Rational a, Rational b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator-(Rational a, Rational b) {
        return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    std::string str() const {
        return is_integer() ? std::to_string(num)
                            : std::to_string(num) + "/" + std::to_string(den);
    }
};

// ---------------------------------------------------------------------------
// Dense int64 matrices.  Small sizes only (homology ranks, residual SNF
// blocks); rank and determinant use fraction-free elimination with 128-bit
// intermediates so no floating point enters any verification path.
// ---------------------------------------------------------------------------

struct IntMat {
    int rows = 0, cols = 0;
    std::vector<long long> a;  // row-major

    IntMat() = default;
    IntMat(int r, int c) : rows(r), cols(c), a((size_t)r * c, 0) {}

    static IntMat identity(int n) {
        IntMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }
    long long& operator()(int i, int j) { return a[(size_t)i * cols + j]; }
    long long operator()(int i, int j) const { return a[(size_t)i * cols + j]; }

    bool operator==(const IntMat& o) const {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
    bool operator!=(const IntMat& o) const { return !(*this == o); }

    IntMat operator*(const IntMat& o) const {
        if (cols != o.rows) throw Error("IntMat: shape mismatch in product");
        IntMat r(rows, o.cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) {
                long long v = (*this)(i, k);
                if (v == 0) continue;
                for (int j = 0; j < o.cols; ++j) r(i, j) += v * o(k, j);
            }
        return r;
    }
    IntMat operator-(const IntMat& o) const {
        if (rows != o.rows || cols != o.cols) throw Error("IntMat: shape mismatch");
        IntMat r = *this;
        for (size_t i = 0; i < a.size(); ++i) r.a[i] -= o.a[i];
        return r;
    }
    bool is_zero() const {
        for (long long v : a) if (v) return false;
        return true;
    }

    // rank over Q, fraction-free Gauss with 128-bit intermediates
    int rank() const {
        auto i128gcd = [](__int128 x, __int128 y) {
            if (x < 0) x = -x;
            if (y < 0) y = -y;
            while (y) { __int128 t = x % y; x = y; y = t; }
            return x;
        };
        std::vector<std::vector<__int128>> m(rows, std::vector<__int128>(cols));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m[i][j] = (*this)(i, j);
        int r = 0;
        for (int c = 0; c < cols && r < rows; ++c) {
            int p = -1;
            for (int i = r; i < rows; ++i)
                if (m[i][c] != 0) { p = i; break; }
            if (p < 0) continue;
            std::swap(m[p], m[r]);
            for (int i = r + 1; i < rows; ++i) {
                if (m[i][c] == 0) continue;
                __int128 f = m[i][c], g = m[r][c];
                __int128 d = 0;
                for (int j = c; j < cols; ++j) {
                    m[i][j] = m[i][j] * g - m[r][j] * f;
                    d = i128gcd(d, m[i][j]);
                }
                if (d > 1)
                    for (int j = c; j < cols; ++j) m[i][j] /= d;
            }
            ++r;
        }
        return r;
    }

    long long det() const {
        if (rows != cols) throw Error("IntMat: det of non-square matrix");
        int n = rows;
        if (n == 0) return 1;
        // Bareiss
        std::vector<std::vector<__int128>> m(n, std::vector<__int128>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m[i][j] = (*this)(i, j);
        __int128 prev = 1;
        int sign = 1;
        for (int k = 0; k < n - 1; ++k) {
            if (m[k][k] == 0) {
                int p = -1;
                for (int i = k + 1; i < n; ++i)
                    if (m[i][k] != 0) { p = i; break; }
                if (p < 0) return 0;
                std::swap(m[p], m[k]);
                sign = -sign;
            }
            for (int i = k + 1; i < n; ++i)
                for (int j = k + 1; j < n; ++j)
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            prev = m[k][k];
        }
        return sign * (long long)m[n - 1][n - 1];
    }
};

// small numeric helpers -----------------------------------------------------

inline double sup_norm(const Vec& v) {
    double m = 0;
    for (double x : v) m = std::max(m, x < 0 ? -x : x);
    return m;
}
inline Vec vsub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}
inline Vec vadd(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

}  // namespace conley
