#include "imuon/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>

namespace imuon {

SvdFactors svd(const Matrix& M) {
  require_finite(M, "svd");
  if (M.rows() == 0 || M.cols() == 0) throw InvalidInput("svd: empty matrix");
  Eigen::BDCSVD<Matrix> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdFactors{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix polar_exact(const Matrix& M) {
  require_finite(M, "polar_exact");
  SvdFactors f = svd(M);
  const double cutoff = tolerances::eig_zero_factor * f.sigma(0);
  Vector ones = Vector::Zero(f.sigma.size());
  for (Eigen::Index i = 0; i < f.sigma.size(); ++i) {
    ones(i) = (f.sigma(i) > cutoff) ? 1.0 : 0.0;
  }
  return f.U * ones.asDiagonal() * f.V.transpose();
}

Matrix polar_newton_schulz(const Matrix& M, int max_iters, double tol) {
  require_finite(M, "polar_newton_schulz");
  if (M.rows() < M.cols()) {
    return polar_newton_schulz(M.transpose(), max_iters, tol).transpose();
  }
  const double fro = M.norm();
  if (fro == 0.0) throw InvalidInput("polar_newton_schulz: zero matrix");
  Matrix X = M / fro;
  const Matrix I = Matrix::Identity(M.cols(), M.cols());
  double residual = (X.transpose() * X - I).norm();
  for (int k = 0; k < max_iters && residual > tol; ++k) {
    const Matrix G = X.transpose() * X;
    X = 1.5 * X - 0.5 * X * G;
    residual = (X.transpose() * X - I).norm();
  }
  if (residual > tol) {
    throw ConvergenceFailure("polar_newton_schulz: residual " + std::to_string(residual) +
                                 " after " + std::to_string(max_iters) + " iterations",
                             residual);
  }
  return X;
}

SymEig sym_eig(const Matrix& S) {
  require_finite(S, "sym_eig");
  if (S.rows() != S.cols()) throw InvalidInput("sym_eig: not square");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym_part(S));
  if (es.info() != Eigen::Success) throw ConvergenceFailure("sym_eig failed", 0.0);
  // Eigen sorts increasing; flip to nonincreasing.
  const Eigen::Index n = S.rows();
  Matrix Q(n, n);
  Vector lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Q.col(i) = es.eigenvectors().col(n - 1 - i);
    lambda(i) = es.eigenvalues()(n - 1 - i);
  }
  return SymEig{Q, lambda};
}

Matrix matrix_sign_sym(const Matrix& S) {
  SymEig eig = sym_eig(S);
  const double zero_tol = tolerances::eig_zero_factor * eig.lambda.cwiseAbs().maxCoeff();
  Vector s(eig.lambda.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (std::abs(eig.lambda(i)) <= zero_tol) {
      s(i) = 0.0;
    } else {
      s(i) = (eig.lambda(i) > 0.0) ? 1.0 : -1.0;
    }
  }
  return eig.Q * s.asDiagonal() * eig.Q.transpose();
}

SpdRoots spd_sqrt_invsqrt(const Matrix& X) {
  SymEig eig = sym_eig(X);
  const Eigen::Index n = X.rows();
  const double floor = tolerances::spd_floor_factor * X.trace() / static_cast<double>(n);
  const double lambda_min = eig.lambda(n - 1);
  if (!(lambda_min > floor)) {
    throw NotPositiveDefinite("spd_sqrt_invsqrt: lambda_min = " + std::to_string(lambda_min));
  }
  Vector sqrt_l = eig.lambda.cwiseSqrt();
  Vector inv_sqrt_l = sqrt_l.cwiseInverse();
  return SpdRoots{eig.Q * sqrt_l.asDiagonal() * eig.Q.transpose(),
                  eig.Q * inv_sqrt_l.asDiagonal() * eig.Q.transpose()};
}

ThinQr thin_qr(const Matrix& M) {
  require_finite(M, "thin_qr");
  const Eigen::Index m = M.rows(), r = M.cols();
  if (m < r) throw InvalidInput("thin_qr: more columns than rows");
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ() * Matrix::Identity(m, r);
  Matrix R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const double rank_tol = tolerances::qr_rank_factor * M.norm();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (std::abs(R(j, j)) <= rank_tol) {
      throw RankDeficient("thin_qr: |R(" + std::to_string(j) + "," + std::to_string(j) +
                          ")| below rank tolerance");
    }
    if (R(j, j) < 0.0) {
      R.row(j) = -R.row(j);
      Q.col(j) = -Q.col(j);
    }
  }
  return ThinQr{Q, R};
}

Matrix spd_exp(const Matrix& S) {
  SymEig eig = sym_eig(S);
  Vector e = eig.lambda.array().exp();
  return eig.Q * e.asDiagonal() * eig.Q.transpose();
}

double spectral_norm_estimate(const Matrix& M, int power_iters) {
  require_finite(M, "spectral_norm_estimate");
  if (power_iters < 1) throw InvalidInput("spectral_norm_estimate: power_iters < 1");
  Vector v = Vector::Ones(M.cols());
  v.normalize();
  double est = 0.0;
  for (int k = 0; k < power_iters; ++k) {
    Vector w = M * v;
    est = w.norm();
    if (est == 0.0) return 0.0;
    v = M.transpose() * w;
    const double nv = v.norm();
    if (nv == 0.0) return est;
    v /= nv;
  }
  return (M * v).norm();
}

}  // namespace imuon
