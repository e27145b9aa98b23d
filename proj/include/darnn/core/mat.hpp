#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "darnn/core/error.hpp"

namespace darnn {

using Index = std::size_t;

/// Dense row-major matrix. Biases are stored as H×1 so that every learnable
/// tensor in the project shares one type and one registry path.
template <class Real>
struct Mat {
    Index rows = 0;
    Index cols = 0;
    std::vector<Real> a;

    Mat() = default;
    Mat(Index r, Index c) : rows(r), cols(c), a(r * c, Real(0)) {}

    Real& operator()(Index i, Index j) { return a[i * cols + j]; }
    const Real& operator()(Index i, Index j) const { return a[i * cols + j]; }

    Index size() const { return a.size(); }

    void fill(Real v) {
        for (auto& x : a) x = v;
    }

    void zero() { fill(Real(0)); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

template <class Real>
using Vec = std::vector<Real>;

template <class Real>
inline void require_shape(const Mat<Real>& m, Index rows, Index cols, const char* name) {
    if (m.rows != rows || m.cols != cols) {
        throw ShapeError(std::string(name) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(m.rows) + "x" +
                         std::to_string(m.cols));
    }
}

template <class Real>
inline void require_len(const Vec<Real>& v, Index len, const char* name) {
    if (v.size() != len) {
        throw ShapeError(std::string(name) + ": expected length " + std::to_string(len) +
                         ", got " + std::to_string(v.size()));
    }
}

/// y = W x
template <class Real>
inline void matvec(const Mat<Real>& W, const Vec<Real>& x, Vec<Real>& y) {
    y.assign(W.rows, Real(0));
    for (Index i = 0; i < W.rows; ++i) {
        const Real* row = W.a.data() + i * W.cols;
        Real s = Real(0);
        for (Index j = 0; j < W.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

/// y += W x
template <class Real>
inline void matvec_add(const Mat<Real>& W, const Vec<Real>& x, Vec<Real>& y) {
    for (Index i = 0; i < W.rows; ++i) {
        const Real* row = W.a.data() + i * W.cols;
        Real s = Real(0);
        for (Index j = 0; j < W.cols; ++j) s += row[j] * x[j];
        y[i] += s;
    }
}

/// y += W^T g
template <class Real>
inline void matvec_t_add(const Mat<Real>& W, const Vec<Real>& g, Vec<Real>& y) {
    for (Index i = 0; i < W.rows; ++i) {
        const Real gi = g[i];
        if (gi == Real(0)) continue;
        const Real* row = W.a.data() + i * W.cols;
        for (Index j = 0; j < W.cols; ++j) y[j] += row[j] * gi;
    }
}

/// A += g x^T
template <class Real>
inline void add_outer(Mat<Real>& A, const Vec<Real>& g, const Vec<Real>& x) {
    for (Index i = 0; i < A.rows; ++i) {
        const Real gi = g[i];
        if (gi == Real(0)) continue;
        Real* row = A.a.data() + i * A.cols;
        for (Index j = 0; j < A.cols; ++j) row[j] += gi * x[j];
    }
}

template <class Real>
inline void add_inplace(Vec<Real>& y, const Vec<Real>& x) {
    for (Index i = 0; i < y.size(); ++i) y[i] += x[i];
}

/// y += a ⊙ b
template <class Real>
inline void hadamard_add(Vec<Real>& y, const Vec<Real>& a, const Vec<Real>& b) {
    for (Index i = 0; i < y.size(); ++i) y[i] += a[i] * b[i];
}

template <class Real>
inline Vec<Real> hadamard(const Vec<Real>& a, const Vec<Real>& b) {
    Vec<Real> r(a.size());
    for (Index i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
    return r;
}

template <class Real>
inline bool all_finite(const Real* p, Index n) {
    for (Index i = 0; i < n; ++i) {
        if (!std::isfinite(static_cast<double>(p[i]))) return false;
    }
    return true;
}

}  // namespace darnn
