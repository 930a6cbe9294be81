#pragma once

#include "imuon/core.hpp"
#include "imuon/norms.hpp"

#include <variant>

namespace imuon {

// Points. Fixed-rank carries the (B, A) factor representative of X = B A;
// the other three carry the matrix itself.
struct FixedRankPoint {
  Matrix B;  // m x r, full column rank
  Matrix A;  // r x n, full row rank
};
struct SpdPoint {
  Matrix X;  // n x n symmetric positive definite
};
struct StiefelPoint {
  Matrix X;  // m x r, X^T X = I
};
struct GrassmannPoint {
  Matrix X;  // m x r orthonormal basis, defined up to right O(r)
};
using ManifoldPoint = std::variant<FixedRankPoint, SpdPoint, StiefelPoint, GrassmannPoint>;

// Tangent vectors, matched to the point representation.
struct FixedRankTangent {
  Matrix Bdot;
  Matrix Adot;
};
struct SpdTangent {
  Matrix Xi;  // symmetric
};
struct StiefelTangent {
  Matrix Xi;  // X^T Xi + Xi^T X = 0
};
struct GrassmannTangent {
  Matrix Xi;  // X^T Xi = 0
};
using TangentVector = std::variant<FixedRankTangent, SpdTangent, StiefelTangent, GrassmannTangent>;

ManifoldKind kind_of(const ManifoldPoint& x);
ManifoldDims dims_of(const ManifoldPoint& x);

// Checks the point invariants (orthonormality, positive definiteness,
// factor conditioning); throws InvalidInput on violation.
void validate_point(const ManifoldPoint& x);

// Relative residual of the tangent-space membership condition; ~1e-15 for
// vectors produced by this module.
double tangent_residual(const ManifoldPoint& x, const TangentVector& xi);

TangentVector zero_tangent(const ManifoldPoint& x);
TangentVector scale_tangent(const TangentVector& xi, double alpha);
TangentVector add_tangent(const TangentVector& a, const TangentVector& b);

// Riemannian metric: the coupled quotient metric on fixed-rank, the
// affine-invariant metric on SPD, the Euclidean trace metric on
// Stiefel/Grassmann.
double metric_inner(const ManifoldPoint& x, const TangentVector& xi, const TangentVector& zeta);

// Riemannian gradient from the ambient Euclidean gradient (fixed-rank takes
// the m x n gradient of f(BA); SPD a symmetric n x n; Stiefel/Grassmann the
// raw m x r gradient).
TangentVector riemannian_grad(const ManifoldPoint& x, const Matrix& egrad);

// Scaled gradient H = G_x^{1/2}(grad f), stored per manifold in the
// coordinates the LMO consumes. Fixed-rank uses the thin-QR route: HB and HA
// are the polar inputs egrad * Qhat_A and Qhat_B^T * egrad, with the inverse
// Gram scaling deferred to the triangular solves in lmo_direction.
struct FixedRankScaled {
  Matrix HB, HA;  // m x r and r x n
  Matrix RA, RB;  // upper-triangular QR factors of A^T and B
};
struct SpdScaled {
  Matrix H;  // X^{1/2} egrad X^{1/2}, symmetric
  Matrix Xhalf, Xinvhalf;
};
struct StiefelScaled {
  Matrix S;     // skew(X^T egrad), r x r
  Matrix Nhat;  // egrad - X (X^T egrad); X_perp is never formed
};
struct GrassmannScaled {
  Matrix Hhat;  // (I - X X^T) egrad
};
using ScaledGradient = std::variant<FixedRankScaled, SpdScaled, StiefelScaled, GrassmannScaled>;

ScaledGradient scale_gradient(const ManifoldPoint& x, const Matrix& egrad);

// Singular-value profiles of the scaled blocks, for dual-norm monitoring.
// Non-frobenius families on product manifolds see one profile per block;
// frobenius sees the joint profile (a single stacked block).
std::vector<Vector> scaled_block_sigmas(const ScaledGradient& sg, const NormSpec& norm);

struct LmoResult {
  TangentVector xi_star;
  double dual_value;    // g_x(xi*, grad f), computed through metric_inner
  double riem_norm_sq;  // ||xi*||_x^2, computed through metric_inner
  double H_dual;        // max over blocks of phi°(H_block)
};

// Closed-form intrinsic LMO: maximizes g_x(xi, grad f) over the intrinsic
// phi-ball of radius tau. Product manifolds use the per-block l_inf product
// norm for every family except frobenius, which uses the joint Riemannian
// norm and returns the normalized Riemannian gradient direction. specnuc is
// rejected on product manifolds (no analytic radius, no budget split).
LmoResult lmo_direction(const ManifoldPoint& x, const Matrix& egrad, const NormSpec& norm,
                        double tau);

// Moves along +eta * xi: factor step on fixed-rank, geodesic exponential on
// SPD, sign-fixed thin-QR on Stiefel/Grassmann. Optimizers pass -xi*.
ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& xi, double eta);

// Quotient representative change (B, A) -> (B N^{-1}, N A).
FixedRankPoint gauge_transform(const FixedRankPoint& x, const Matrix& N);

// Ambient velocity Bdot A + B Adot of a fixed-rank tangent.
Matrix ambient_update(const FixedRankPoint& x, const FixedRankTangent& xi);

// Reference LMO through dense Gram roots (AA^T)^{+-1/2}, (B^T B)^{+-1/2}.
// Differs from the QR route by a right O(r) gauge on degenerate spectra, so
// cross-checks compare ambient updates, not factors. Debug/verification use.
LmoResult fixed_rank_lmo_gram(const FixedRankPoint& x, const Matrix& egrad, const NormSpec& norm,
                              double tau);

// Point (de)serialization in the matrix text format, header
// "kind rows cols [r]". Implemented in io.cpp.
std::string point_to_text(const ManifoldPoint& x);
ManifoldPoint point_from_text(const std::string& text);

}  // namespace imuon
