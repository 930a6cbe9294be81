#pragma once

#include "imuon/manifolds.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace imuon {

struct OracleResult {
  double value = 0.0;
  Matrix argmax;
  int iterations = 0;
  double residual = 0.0;
};

using TangentProjector = std::function<Matrix(const Matrix&)>;

// Brute-force verification of the closed-form LMO: maximizes <Z, H> over
// {Z in the projector's subspace, phi(Z) <= tau} by projected ascent
// Z <- Proj(Z + alpha H), with the projection onto the intersection computed
// by Dykstra alternation between the subspace projector and the norm-ball
// projector. Supports the spectral / frobenius / nuclear balls; the other
// families are verified at the vector level instead.
OracleResult dykstra_lmo(const Matrix& H, const TangentProjector& tangent_projector,
                         const NormSpec& norm, double tau, double tol, int max_outer = 2000);

// Projection of a sorted nonnegative vector onto {z >= 0, sum z <= tau}.
Vector simplex_ball_project(const Vector& sigma, double tau);

// Entrywise central differences of f around X0.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& X0,
                        double h);
// Variant for functions of symmetric matrices: perturbs (i,j) and (j,i)
// together and returns the symmetric gradient convention.
Matrix finite_diff_grad_sym(const std::function<double(const Matrix&)>& f, const Matrix& X0,
                            double h);

// Monte-Carlo lower bound on C_phi(x): random tangents, normalized onto the
// intrinsic unit phi-ball, followed by coordinate ascent on the squared
// singular-value profile of each scaled block (pairs move together on the
// Stiefel skew block).
double estimate_c_phi(const ManifoldPoint& x, const NormSpec& norm, int samples,
                      int ascent_iters, std::mt19937_64& rng);

struct CheckReport {
  std::string name;
  double worst_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Randomized invariance checks for one (manifold, norm) cell: the dual-value
// identity, the C_phi norm bound, tangent membership, SV-invariance of the
// scaled space, and for fixed-rank the GL(r) gauge invariance plus the
// QR-vs-Gram cross-check.
std::vector<CheckReport> invariance_suite(ManifoldKind kind, const ManifoldDims& dims,
                                          const NormSpec& norm, double tau, int trials,
                                          std::uint64_t seed);

// Closed form vs Dykstra oracle across random instances of one cell.
CheckReport oracle_agreement_check(ManifoldKind kind, const ManifoldDims& dims,
                                   const NormSpec& norm, double tau, int trials,
                                   std::uint64_t seed, double tol);

}  // namespace imuon
