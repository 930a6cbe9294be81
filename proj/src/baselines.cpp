#include "imuon/baselines.hpp"

#include "imuon/matcore.hpp"

#include <cmath>

namespace imuon {

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Egd: return "egd";
    case BaselineKind::FactorwiseMuon: return "fw-muon";
    case BaselineKind::Spectron: return "spectron";
    case BaselineKind::NumuonEuclid: return "numuon";
    case BaselineKind::MuonEuclid: return "muon";
    case BaselineKind::ScaledGd: return "scaledgd";
  }
  return "egd";
}

BaselineKind baseline_from_string(const std::string& tag) {
  if (tag == "egd") return BaselineKind::Egd;
  if (tag == "fw-muon") return BaselineKind::FactorwiseMuon;
  if (tag == "spectron") return BaselineKind::Spectron;
  if (tag == "numuon") return BaselineKind::NumuonEuclid;
  if (tag == "muon") return BaselineKind::MuonEuclid;
  if (tag == "scaledgd") return BaselineKind::ScaledGd;
  throw InvalidInput("unknown baseline tag: " + tag);
}

namespace {

Matrix ortho_or_zero(const Matrix& M) {
  if (M.norm() == 0.0) return Matrix::Zero(M.rows(), M.cols());
  return polar_exact(M);
}

}  // namespace

FixedRankPoint factorwise_muon_step(const FixedRankPoint& x, const Matrix& egrad_X, double tau,
                                    double eta) {
  require_finite(egrad_X, "factorwise_muon_step egrad");
  const Matrix Bdot = tau * ortho_or_zero(egrad_X * x.A.transpose());
  const Matrix Adot = tau * ortho_or_zero(x.B.transpose() * egrad_X);
  return FixedRankPoint{x.B - eta * Bdot, x.A - eta * Adot};
}

FixedRankPoint spectron_step(const FixedRankPoint& x, const Matrix& MB, const Matrix& MA,
                             double eta, int power_iters) {
  const double na = spectral_norm_estimate(x.A, power_iters);
  const double nb = spectral_norm_estimate(x.B, power_iters);
  const double rho = eta / (na + nb + 1.0);
  return FixedRankPoint{x.B - rho * ortho_or_zero(MB), x.A - rho * ortho_or_zero(MA)};
}

ManifoldPoint euclid_lmo_step(const ManifoldPoint& x, const Matrix& egrad, const NormSpec& norm,
                              double tau, double eta) {
  norm.validate();
  require_finite(egrad, "euclid_lmo_step egrad");
  if (const auto* fr = std::get_if<FixedRankPoint>(&x)) {
    const Matrix GB = egrad * fr->A.transpose();
    const Matrix GA = fr->B.transpose() * egrad;
    Matrix ZB, ZA;
    const bool joint_frob = norm.family == NormFamily::Frobenius ||
                            (norm.family == NormFamily::Schatten && norm.p == 2.0);
    if (joint_frob) {
      const double c = std::sqrt(GB.squaredNorm() + GA.squaredNorm());
      if (c == 0.0) return x;
      ZB = (tau / c) * GB;
      ZA = (tau / c) * GA;
    } else {
      ZB = (GB.norm() == 0.0) ? Matrix(Matrix::Zero(GB.rows(), GB.cols()))
                              : matrix_lmo(GB, norm, tau).Z;
      ZA = (GA.norm() == 0.0) ? Matrix(Matrix::Zero(GA.rows(), GA.cols()))
                              : matrix_lmo(GA, norm, tau).Z;
    }
    return FixedRankPoint{fr->B - eta * ZB, fr->A - eta * ZA};
  }
  if (const auto* sp = std::get_if<SpdPoint>(&x)) {
    const Matrix G = sym_part(egrad);
    if (G.norm() == 0.0) return x;
    const Matrix Z = sym_part(matrix_lmo(G, norm, tau).Z);
    SpdPoint next{sym_part(sp->X - eta * Z)};
    SymEig eig = sym_eig(next.X);
    const double floor =
        tolerances::spd_floor_factor * next.X.trace() / static_cast<double>(next.X.rows());
    if (!(eig.lambda(eig.lambda.size() - 1) > floor)) {
      throw NotPositiveDefinite("euclid_lmo_step: iterate left the SPD cone");
    }
    return next;
  }
  if (const auto* st = std::get_if<StiefelPoint>(&x)) {
    if (egrad.norm() == 0.0) return x;
    const Matrix Z = matrix_lmo(egrad, norm, tau).Z;
    return StiefelPoint{thin_qr(st->X - eta * Z).Q};
  }
  const auto& g = std::get<GrassmannPoint>(x);
  if (egrad.norm() == 0.0) return x;
  const Matrix Z = matrix_lmo(egrad, norm, tau).Z;
  return GrassmannPoint{thin_qr(g.X - eta * Z).Q};
}

FixedRankTangent scaledgd_direction(const FixedRankPoint& x, const Matrix& egrad_X) {
  const Matrix grad_B = egrad_X * x.A.transpose();
  const Matrix grad_A = x.B.transpose() * egrad_X;
  Eigen::LLT<Matrix> llt_a(x.A * x.A.transpose());
  Eigen::LLT<Matrix> llt_b(x.B.transpose() * x.B);
  if (llt_a.info() != Eigen::Success || llt_b.info() != Eigen::Success) {
    throw RankDeficient("scaledgd_direction: Gram matrix not positive definite");
  }
  return FixedRankTangent{llt_a.solve(grad_B.transpose()).transpose(), llt_b.solve(grad_A)};
}

double scaledgd_equivalence_check(const FixedRankPoint& x, const Matrix& egrad_X, double tau) {
  if (egrad_X.norm() == 0.0) return 1.0;
  ManifoldPoint xp = x;
  LmoResult frob = lmo_direction(xp, egrad_X, NormSpec::frobenius(), tau);
  const auto& fx = std::get<FixedRankTangent>(frob.xi_star);
  FixedRankTangent sgd = scaledgd_direction(x, egrad_X);
  auto cosine = [](const Matrix& a, const Matrix& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 1.0;
    return a.cwiseProduct(b).sum() / (na * nb);
  };
  return std::min(cosine(fx.Bdot, sgd.Bdot), cosine(fx.Adot, sgd.Adot));
}

}  // namespace imuon
