#include "linalg.hpp"

#include <algorithm>
#include <cmath>

namespace randlmi {

Mat Mat::identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat& Mat::add_scaled(const Mat& other, double s) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += s * other.a_[i];
    return *this;
}

Mat& Mat::shift_diag(double s) {
    for (int i = 0; i < n_; ++i) (*this)(i, i) += s;
    return *this;
}

void Mat::symmetrize() {
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j) {
            double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
            (*this)(i, j) = v;
            (*this)(j, i) = v;
        }
}

double Mat::norm_inf() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::fabs(v));
    return m;
}

double Mat::asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            m = std::max(m, std::fabs((*this)(i, j) - (*this)(j, i)));
    return m;
}

bool cholesky_in_place(Mat& a) {
    const int n = a.n();
    for (int k = 0; k < n; ++k) {
        double d = a(k, k);
        for (int j = 0; j < k; ++j) d -= a(k, j) * a(k, j);
        if (!(d > 0.0)) return false;  // also rejects NaN
        d = std::sqrt(d);
        a(k, k) = d;
        for (int i = k + 1; i < n; ++i) {
            double s = a(i, k);
            for (int j = 0; j < k; ++j) s -= a(i, j) * a(k, j);
            a(i, k) = s / d;
        }
    }
    // zero the strict upper triangle so the result is a clean factor
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a(i, j) = 0.0;
    return true;
}

bool cholesky_succeeds(Mat a) { return cholesky_in_place(a); }

bool is_positive_definite(const Mat& m, double tau) {
    Mat shifted = m;
    shifted.shift_diag(-tau);
    return cholesky_succeeds(std::move(shifted));
}

bool is_positive_semidefinite(const Mat& m, double tau) {
    Mat shifted = m;
    shifted.shift_diag(tau);
    return cholesky_succeeds(std::move(shifted));
}

double definiteness_tolerance(const Mat& m) { return 1e-9 * std::max(1.0, m.norm_inf()); }

std::vector<double> sym_eigenvalues(Mat a) {
    const int n = a.n();
    if (n == 0) return {};
    // Cyclic Jacobi sweeps until off-diagonal mass is negligible.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-30 * std::max(1.0, a.norm_inf() * a.norm_inf())) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double sym_min_eigenvalue(const Mat& a) { return sym_eigenvalues(a).front(); }

double determinant(Mat a) {
    const int n = a.n();
    if (n == 0) return 1.0;
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(a(i, k)) > std::fabs(a(piv, k))) piv = i;
        if (a(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        det *= a(k, k);
        for (int i = k + 1; i < n; ++i) {
            double f = a(i, k) / a(k, k);
            for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

bool solve_spd(Mat a, std::span<const double> b, std::span<double> x) {
    const int n = a.n();
    if (!cholesky_in_place(a)) return false;
    // forward: L y = b
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int j = 0; j < i; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    // backward: L^T x = y
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int j = i + 1; j < n; ++j) s -= a(j, i) * x[j];
        x[i] = s / a(i, i);
    }
    return true;
}

Mat spd_inverse(const Mat& a) {
    const int n = a.n();
    Mat chol = a;
    if (!cholesky_in_place(chol)) return Mat();
    Mat inv(n);
    std::vector<double> col(n);
    std::vector<double> e(n, 0.0);
    for (int c = 0; c < n; ++c) {
        e[c] = 1.0;
        for (int i = 0; i < n; ++i) {
            double s = e[i];
            for (int j = 0; j < i; ++j) s -= chol(i, j) * col[j];
            col[i] = s / chol(i, i);
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = col[i];
            for (int j = i + 1; j < n; ++j) s -= chol(j, i) * col[j];
            col[i] = s / chol(i, i);
        }
        for (int i = 0; i < n; ++i) inv(i, c) = col[i];
        e[c] = 0.0;
    }
    inv.symmetrize();
    return inv;
}

}  // namespace randlmi
