#pragma once

#include "imuon/manifolds.hpp"

namespace imuon {

enum class BaselineKind { Egd, FactorwiseMuon, Spectron, NumuonEuclid, MuonEuclid, ScaledGd };

std::string to_string(BaselineKind kind);
BaselineKind baseline_from_string(const std::string& tag);

// Factor-wise Euclidean spectral LMO: Bdot = tau Ortho(egrad A^T),
// Adot = tau Ortho(B^T egrad), stepped as B - eta Bdot, A - eta Adot.
// Ortho(0) = 0 on degenerate gradients.
FixedRankPoint factorwise_muon_step(const FixedRankPoint& x, const Matrix& egrad_X, double tau,
                                    double eta);

// Spectron rescaling: rho = eta / (||A||_2 + ||B||_2 + 1) with power-iteration
// norm estimates (50 iterations by default for determinism; pass 1 for the
// single-step mode). MB/MA are the matrices to orthogonalize: factor momenta,
// or the raw factor gradients when running without momentum.
FixedRankPoint spectron_step(const FixedRankPoint& x, const Matrix& MB, const Matrix& MA,
                             double eta, int power_iters = 50);

// Euclidean norm-matched LMO step in ambient coordinates. Fixed-rank applies
// the LMO per factor gradient (frobenius normalizes the factor pair jointly);
// SPD steps X - eta Z and fails with NotPositiveDefinite when the iterate
// leaves the cone (never silently projected); Stiefel/Grassmann step in the
// ambient space and return via the sign-fixed thin QR.
ManifoldPoint euclid_lmo_step(const ManifoldPoint& x, const Matrix& egrad, const NormSpec& norm,
                              double tau, double eta);

// ScaledGD direction (grad_B (AA^T)^{-1}, (B^T B)^{-1} grad_A), unnormalized.
FixedRankTangent scaledgd_direction(const FixedRankPoint& x, const Matrix& egrad_X);

// Per-block cosine between the frobenius intrinsic direction and the ScaledGD
// direction; 1 by convention on a zero gradient. Contract: >= 1 - 1e-10.
double scaledgd_equivalence_check(const FixedRankPoint& x, const Matrix& egrad_X, double tau);

}  // namespace imuon
