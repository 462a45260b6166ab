#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hilfer/errors.hpp"

namespace hilfer::linalg {

/// Dense row-major square matrix, sized for desk-scale generators.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n, double fill = 0.0) : n_(n), a_(static_cast<std::size_t>(n) * n, fill) {}

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    const std::vector<double>& data() const { return a_; }

    Matrix& operator+=(const Matrix& o) {
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        const int n = a.n_;
        Matrix c(n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    double one_norm() const {
        double best = 0.0;
        for (int j = 0; j < n_; ++j) {
            double s = 0.0;
            for (int i = 0; i < n_; ++i) s += std::fabs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    bool finite() const {
        for (double v : a_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

private:
    int n_ = 0;
    std::vector<double> a_;
};

/// Solve A X = B in place via LU with partial pivoting; returns X.
inline Matrix lu_solve(Matrix a, Matrix b) {
    const int n = a.dim();
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int p = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(p, col))) p = r;
        if (a(p, col) == 0.0) throw DomainError("lu_solve: singular matrix");
        if (p != col) {
            for (int j = 0; j < n; ++j) std::swap(a(p, j), a(col, j));
            for (int j = 0; j < n; ++j) std::swap(b(p, j), b(col, j));
        }
        const double inv = 1.0 / a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) * inv;
            if (f == 0.0) continue;
            a(r, col) = f;
            for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
            for (int j = 0; j < n; ++j) b(r, j) -= f * b(col, j);
        }
    }
    // back substitution
    for (int col = n - 1; col >= 0; --col) {
        const double inv = 1.0 / a(col, col);
        for (int j = 0; j < n; ++j) b(col, j) *= inv;
        for (int r = 0; r < col; ++r) {
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) b(r, j) -= f * b(col, j);
        }
    }
    return b;
}

/// Matrix exponential by Pade(13) with scaling and squaring (Higham 2005).
inline Matrix expm(const Matrix& m) {
    static const double b13[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0,
    };
    const double theta13 = 5.371920351148152;
    const int n = m.dim();

    int squarings = 0;
    double nrm = m.one_norm();
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    }
    Matrix a = m;
    if (squarings > 0) a *= std::ldexp(1.0, -squarings);

    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a2 * a4;
    const Matrix ident = Matrix::identity(n);

    Matrix u_inner = b13[13] * a6 + b13[11] * a4 + b13[9] * a2;
    u_inner = a6 * u_inner;
    u_inner += b13[7] * a6 + b13[5] * a4 + b13[3] * a2 + b13[1] * ident;
    const Matrix u = a * u_inner;

    Matrix v = b13[12] * a6 + b13[10] * a4 + b13[8] * a2;
    v = a6 * v;
    v += b13[6] * a6 + b13[4] * a4 + b13[2] * a2 + b13[0] * ident;

    Matrix num = v, den = v;
    num += u;
    Matrix neg_u = u;
    neg_u *= -1.0;
    den += neg_u;
    Matrix r = lu_solve(den, num);
    for (int s = 0; s < squarings; ++s) r = r * r;
    return r;
}

/// Induced 2-norm via deterministic power iteration on A^T A.
inline double spectral_norm(const Matrix& m) {
    const int n = m.dim();
    if (n == 1) return std::fabs(m(0, 0));
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * (i + 1); // fixed asymmetric start
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        // w = A^T (A v)
        std::vector<double> av = m.apply(v);
        std::vector<double> w(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) w[j] += m(i, j) * av[i];
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        double next = 0.0;
        for (int i = 0; i < n; ++i) {
            w[i] /= norm;
            next += w[i] * v[i];
        }
        v = std::move(w);
        if (it > 4 && std::fabs(norm - lambda) <= 1e-14 * std::max(1.0, norm)) {
            lambda = norm;
            break;
        }
        lambda = norm;
    }
    return std::sqrt(lambda);
}

inline double nrm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

} // namespace hilfer::linalg
