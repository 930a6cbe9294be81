#pragma once

#include "imuon/core.hpp"

#include <optional>
#include <string>

namespace imuon {

enum class NormFamily { Spectral, Frobenius, Nuclear, KyFan, Schatten, SpecNuc };

// Tagged norm family. kyfan carries k, schatten carries p in [1, 64]
// (p = inf is rejected; use spectral), specnuc carries the (tau_spec,
// tau_nuc) budget pair which replaces the LMO's tau argument.
struct NormSpec {
  NormFamily family = NormFamily::Spectral;
  int k = 1;
  double p = 2.0;
  double tau_spec = 1.0;
  double tau_nuc = 1.0;

  static NormSpec spectral() { return NormSpec{NormFamily::Spectral, 1, 2.0, 1.0, 1.0}; }
  static NormSpec frobenius() { return NormSpec{NormFamily::Frobenius, 1, 2.0, 1.0, 1.0}; }
  static NormSpec nuclear() { return NormSpec{NormFamily::Nuclear, 1, 2.0, 1.0, 1.0}; }
  static NormSpec kyfan(int k) { return NormSpec{NormFamily::KyFan, k, 2.0, 1.0, 1.0}; }
  static NormSpec schatten(double p) { return NormSpec{NormFamily::Schatten, 1, p, 1.0, 1.0}; }
  static NormSpec specnuc(double tau_spec, double tau_nuc) {
    return NormSpec{NormFamily::SpecNuc, 1, 2.0, tau_spec, tau_nuc};
  }

  // Canonical string form: "spectral", "frobenius", "nuclear", "kyfan:k=3",
  // "schatten:p=4", "specnuc:ts=1,tn=2.5".
  std::string to_string() const;
  static NormSpec parse(const std::string& text);

  void validate() const;
};

struct VectorLmoResult {
  Vector z;      // nonnegative maximizer
  double value;  // optimal <z, sigma>
};

// Closed-form maximizer of <z, sigma> over the family's ball at radius tau.
// sigma must be sorted nonincreasing and nonnegative. For specnuc the tau
// argument is ignored; the (tau_spec, tau_nuc) pair governs. Family
// coincidences (kyfan(1) = nuclear, kyfan(min-dim) = spectral, schatten(1) =
// nuclear, schatten(2) = frobenius) are routed to a single code path so the
// outputs are bit-identical.
VectorLmoResult vector_lmo(const Vector& sigma, const NormSpec& norm, double tau);

// Dual norm phi° of the family's constraint gauge, evaluated on sorted
// nonnegative sigma. This is the quantity appearing in the LMO value
// tau * phi°(sigma): spectral -> l1, frobenius -> l2, nuclear -> max,
// kyfan(k) -> sum of the k largest, schatten(p) -> l_q with 1/p + 1/q = 1.
// specnuc exposes no standalone dual and throws InvalidInput.
double dual_norm(const Vector& sigma, const NormSpec& norm);

// Primal gauge of the family evaluated on a nonnegative value profile z
// (not necessarily sorted). The feasible set at radius tau is
// {gauge(z) <= tau} for every family except specnuc, whose feasible set is
// {gauge(z) <= 1} with the budgets baked into the gauge.
double norm_gauge(const Vector& z, const NormSpec& norm);

struct MatrixLmoResult {
  Matrix Z;
  double value;
};

// Von Neumann alignment: Z* = U diag(z*) V^T on the SVD of H. Components of
// z* on singular values below 1e-12 * sigma_1 are zeroed (compact-SVD
// convention), so the maximizer of a rank-deficient H never leaves the span
// of H's nonzero singular directions.
MatrixLmoResult matrix_lmo(const Matrix& H, const NormSpec& norm, double tau);

// Analytic squared Riemannian radius C_phi of the intrinsic unit phi-ball,
// per (family, manifold). Returns nullopt for specnuc. Product manifolds
// (fixed-rank, Stiefel) use the l_inf product norm per block except for
// frobenius, which is the joint Riemannian norm with C_phi = 1 everywhere.
std::optional<double> c_phi_analytic(const NormSpec& norm, ManifoldKind kind,
                                     const ManifoldDims& dims);

}  // namespace imuon
