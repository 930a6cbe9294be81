#pragma once

#include "imuon/core.hpp"

namespace imuon {

// Dense kernels shared by every other module. All functions are pure and
// thread-safe; inputs are validated for finiteness at the boundary.

struct SvdFactors {
  Matrix U;      // orthonormal columns, min(rows, cols) of them
  Vector sigma;  // nonincreasing, nonnegative
  Matrix V;      // orthonormal columns
};

// Compact SVD with min(rows, cols) columns.
SvdFactors svd(const Matrix& M);

// Polar factor U V^T on the compact SVD. Singular values of the result lie
// in {0, 1}: directions with sigma_i <= 1e-12 * sigma_1 map to zero, so
// Ortho(0) = 0 and rank-deficient inputs keep their null space.
Matrix polar_exact(const Matrix& M);

// Plain cubic Newton-Schulz iteration X <- 1.5 X - 0.5 X X^T X starting from
// M / ||M||_F. Stops when ||X^T X - I||_F <= tol. Wide inputs are handled by
// transposition. Throws ConvergenceFailure (carrying the last residual) when
// max_iters is exhausted.
Matrix polar_newton_schulz(const Matrix& M, int max_iters = tolerances::newton_schulz_max_iters,
                           double tol = tolerances::newton_schulz_tol);

struct SymEig {
  Matrix Q;       // orthogonal
  Vector lambda;  // nonincreasing
};

// Symmetric eigendecomposition; the input is symmetrized internally.
SymEig sym_eig(const Matrix& S);

// Q diag(sign(lambda_i)) Q^T with |lambda| <= eig_zero_factor * max|lambda|
// mapped to 0.
Matrix matrix_sign_sym(const Matrix& S);

struct SpdRoots {
  Matrix half;
  Matrix inv_half;
};

// X^{1/2} and X^{-1/2} via eigendecomposition. Throws NotPositiveDefinite
// when lambda_min <= spd_floor_factor * trace(X)/n.
SpdRoots spd_sqrt_invsqrt(const Matrix& X);

struct ThinQr {
  Matrix Q;  // orthonormal columns
  Matrix R;  // upper triangular, positive diagonal
};

// Thin QR with the column sign fix that makes the factorization unique.
// Throws RankDeficient when |R_ii| <= qr_rank_factor * ||M||_F.
ThinQr thin_qr(const Matrix& M);

// exp(S) for symmetric S, via sym_eig.
Matrix spd_exp(const Matrix& S);

inline Matrix skew_part(const Matrix& M) { return 0.5 * (M - M.transpose()); }

inline Matrix sym_part(const Matrix& M) { return 0.5 * (M + M.transpose()); }

// Power-iteration lower bound on ||M||_2 with a deterministic start vector.
double spectral_norm_estimate(const Matrix& M, int power_iters);

}  // namespace imuon
