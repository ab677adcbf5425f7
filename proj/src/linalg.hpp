#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace randlmi {

// Dense square matrix, row major. Sized for this library's scale: constraint
// blocks of a dozen rows and Newton systems of at most a few hundred.
class Mat {
public:
    Mat() = default;
    explicit Mat(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0.0) {}

    int n() const { return n_; }
    bool empty() const { return n_ == 0; }

    double& operator()(int r, int c) { return a_[static_cast<size_t>(r) * n_ + c]; }
    double operator()(int r, int c) const { return a_[static_cast<size_t>(r) * n_ + c]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    static Mat identity(int n);

    Mat& add_scaled(const Mat& other, double s);  // *this += s * other
    Mat& shift_diag(double s);                    // *this += s * I

    void symmetrize();          // (M + M^T) / 2, in place
    double norm_inf() const;    // max |entry|
    double asymmetry() const;   // max |M - M^T| entry

private:
    int n_ = 0;
    std::vector<double> a_;
};

// In-place lower Cholesky of a symmetric matrix. Returns false on a
// nonpositive pivot (matrix not positive definite).
bool cholesky_in_place(Mat& a);

// Smallest Cholesky pivot of a copy; < = 0 or NaN means the factorization
// failed. Kept separate so definiteness checks do not disturb the input.
bool cholesky_succeeds(Mat a);

// lambda_min-based checks with absolute tolerance tau, realized as Cholesky
// existence of shifted copies: PD means lambda_min > tau, PSD means
// lambda_min >= -tau.
bool is_positive_definite(const Mat& m, double tau);
bool is_positive_semidefinite(const Mat& m, double tau);

// Scale-aware default tolerance, 1e-9 * max(1, |M|_inf).
double definiteness_tolerance(const Mat& m);

// Eigenvalues of a symmetric matrix by cyclic Jacobi, ascending order.
std::vector<double> sym_eigenvalues(Mat a);

double sym_min_eigenvalue(const Mat& a);

// Determinant via LU with partial pivoting.
double determinant(Mat a);

// Solves A x = b for symmetric positive definite A (Cholesky). Returns false
// if the factorization fails.
bool solve_spd(Mat a, std::span<const double> b, std::span<double> x);

// Inverse of a symmetric positive definite matrix via Cholesky. Returns an
// empty matrix on failure.
Mat spd_inverse(const Mat& a);

}  // namespace randlmi
