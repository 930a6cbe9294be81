#include "imuon/manifolds.hpp"

#include "imuon/matcore.hpp"

#include <cmath>

namespace imuon {

namespace {

// Frobenius (and schatten p=2) uses the joint Riemannian norm: one block,
// normalized jointly, C_phi = 1.
bool is_joint_frobenius(const NormSpec& norm) {
  return norm.family == NormFamily::Frobenius ||
         (norm.family == NormFamily::Schatten && norm.p == 2.0);
}

double block_dual_from_value(const NormSpec& norm, double lmo_value, double tau) {
  if (norm.family == NormFamily::SpecNuc) return lmo_value;  // no standalone dual
  return lmo_value / tau;
}

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidInput(std::string(what) + ": shape mismatch");
  }
}

double factor_cond_ratio(const Matrix& M) {
  SvdFactors f = svd(M);
  if (f.sigma(0) <= 0.0) return 0.0;
  return f.sigma(f.sigma.size() - 1) / f.sigma(0);
}

}  // namespace

ManifoldKind kind_of(const ManifoldPoint& x) {
  return std::visit(
      [](const auto& p) -> ManifoldKind {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FixedRankPoint>) return ManifoldKind::FixedRank;
        if constexpr (std::is_same_v<T, SpdPoint>) return ManifoldKind::Spd;
        if constexpr (std::is_same_v<T, StiefelPoint>) return ManifoldKind::Stiefel;
        return ManifoldKind::Grassmann;
      },
      x);
}

ManifoldDims dims_of(const ManifoldPoint& x) {
  return std::visit(
      [](const auto& p) -> ManifoldDims {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FixedRankPoint>) {
          return ManifoldDims{static_cast<int>(p.B.rows()), static_cast<int>(p.A.cols()),
                              static_cast<int>(p.B.cols())};
        } else if constexpr (std::is_same_v<T, SpdPoint>) {
          return ManifoldDims{static_cast<int>(p.X.rows()), static_cast<int>(p.X.rows()), 0};
        } else {
          return ManifoldDims{static_cast<int>(p.X.rows()), 0, static_cast<int>(p.X.cols())};
        }
      },
      x);
}

void validate_point(const ManifoldPoint& x) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FixedRankPoint>) {
          require_finite(p.B, "FixedRankPoint.B");
          require_finite(p.A, "FixedRankPoint.A");
          if (p.B.cols() != p.A.rows()) throw InvalidInput("factor ranks disagree");
          if (factor_cond_ratio(p.B) <= 1e-10 || factor_cond_ratio(p.A.transpose()) <= 1e-10) {
            throw RankDeficient("fixed-rank factors near rank deficiency");
          }
        } else if constexpr (std::is_same_v<T, SpdPoint>) {
          require_finite(p.X, "SpdPoint.X");
          if ((p.X - p.X.transpose()).norm() > 1e-10 * std::max(1.0, p.X.norm())) {
            throw InvalidInput("SpdPoint not symmetric");
          }
          spd_sqrt_invsqrt(p.X);  // throws NotPositiveDefinite below the floor
        } else {
          require_finite(p.X, "point");
          const Eigen::Index r = p.X.cols();
          const double res = (p.X.transpose() * p.X - Matrix::Identity(r, r)).norm();
          if (res > 1e-9) throw InvalidInput("frame not orthonormal");
        }
      },
      x);
}

double tangent_residual(const ManifoldPoint& x, const TangentVector& xi) {
  const auto* fr = std::get_if<FixedRankPoint>(&x);
  if (fr) {
    const auto& t = std::get<FixedRankTangent>(xi);
    check_shape(t.Bdot, fr->B.rows(), fr->B.cols(), "FixedRankTangent.Bdot");
    check_shape(t.Adot, fr->A.rows(), fr->A.cols(), "FixedRankTangent.Adot");
    return 0.0;  // tangent space is the full product space
  }
  if (const auto* sp = std::get_if<SpdPoint>(&x)) {
    const auto& t = std::get<SpdTangent>(xi);
    check_shape(t.Xi, sp->X.rows(), sp->X.cols(), "SpdTangent.Xi");
    return (t.Xi - t.Xi.transpose()).norm() / (1.0 + t.Xi.norm());
  }
  if (const auto* st = std::get_if<StiefelPoint>(&x)) {
    const auto& t = std::get<StiefelTangent>(xi);
    check_shape(t.Xi, st->X.rows(), st->X.cols(), "StiefelTangent.Xi");
    return (st->X.transpose() * t.Xi + t.Xi.transpose() * st->X).norm() / (1.0 + t.Xi.norm());
  }
  const auto& g = std::get<GrassmannPoint>(x);
  const auto& t = std::get<GrassmannTangent>(xi);
  check_shape(t.Xi, g.X.rows(), g.X.cols(), "GrassmannTangent.Xi");
  return (g.X.transpose() * t.Xi).norm() / (1.0 + t.Xi.norm());
}

TangentVector zero_tangent(const ManifoldPoint& x) {
  return std::visit(
      [](const auto& p) -> TangentVector {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FixedRankPoint>) {
          return FixedRankTangent{Matrix::Zero(p.B.rows(), p.B.cols()),
                                  Matrix::Zero(p.A.rows(), p.A.cols())};
        } else if constexpr (std::is_same_v<T, SpdPoint>) {
          return SpdTangent{Matrix::Zero(p.X.rows(), p.X.cols())};
        } else if constexpr (std::is_same_v<T, StiefelPoint>) {
          return StiefelTangent{Matrix::Zero(p.X.rows(), p.X.cols())};
        } else {
          return GrassmannTangent{Matrix::Zero(p.X.rows(), p.X.cols())};
        }
      },
      x);
}

TangentVector scale_tangent(const TangentVector& xi, double alpha) {
  return std::visit(
      [alpha](const auto& t) -> TangentVector {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, FixedRankTangent>) {
          return FixedRankTangent{alpha * t.Bdot, alpha * t.Adot};
        } else {
          return T{alpha * t.Xi};
        }
      },
      xi);
}

TangentVector add_tangent(const TangentVector& a, const TangentVector& b) {
  if (const auto* fa = std::get_if<FixedRankTangent>(&a)) {
    const auto& fb = std::get<FixedRankTangent>(b);
    return FixedRankTangent{fa->Bdot + fb.Bdot, fa->Adot + fb.Adot};
  }
  if (const auto* sa = std::get_if<SpdTangent>(&a)) {
    return SpdTangent{sa->Xi + std::get<SpdTangent>(b).Xi};
  }
  if (const auto* ta = std::get_if<StiefelTangent>(&a)) {
    return StiefelTangent{ta->Xi + std::get<StiefelTangent>(b).Xi};
  }
  return GrassmannTangent{std::get<GrassmannTangent>(a).Xi + std::get<GrassmannTangent>(b).Xi};
}

double metric_inner(const ManifoldPoint& x, const TangentVector& xi, const TangentVector& zeta) {
  if (const auto* fr = std::get_if<FixedRankPoint>(&x)) {
    const auto& t1 = std::get<FixedRankTangent>(xi);
    const auto& t2 = std::get<FixedRankTangent>(zeta);
    check_shape(t1.Bdot, fr->B.rows(), fr->B.cols(), "metric_inner Bdot");
    check_shape(t2.Adot, fr->A.rows(), fr->A.cols(), "metric_inner Adot");
    const Matrix AAt = fr->A * fr->A.transpose();
    const Matrix BtB = fr->B.transpose() * fr->B;
    const double term_b = (t1.Bdot.cwiseProduct(t2.Bdot * AAt)).sum();
    const double term_a = ((BtB * t1.Adot).cwiseProduct(t2.Adot)).sum();
    return term_b + term_a;
  }
  if (const auto* sp = std::get_if<SpdPoint>(&x)) {
    const auto& t1 = std::get<SpdTangent>(xi);
    const auto& t2 = std::get<SpdTangent>(zeta);
    check_shape(t1.Xi, sp->X.rows(), sp->X.cols(), "metric_inner Xi");
    check_shape(t2.Xi, sp->X.rows(), sp->X.cols(), "metric_inner Xi");
    Eigen::LLT<Matrix> llt(sp->X);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("metric_inner: X not SPD");
    const Matrix P = llt.solve(t1.Xi);
    const Matrix Q = llt.solve(t2.Xi);
    return (P.transpose().cwiseProduct(Q)).sum();  // tr(X^{-1} xi X^{-1} zeta)
  }
  if (const auto* st = std::get_if<StiefelPoint>(&x)) {
    const auto& t1 = std::get<StiefelTangent>(xi);
    const auto& t2 = std::get<StiefelTangent>(zeta);
    check_shape(t1.Xi, st->X.rows(), st->X.cols(), "metric_inner Xi");
    return (t1.Xi.cwiseProduct(t2.Xi)).sum();
  }
  const auto& g = std::get<GrassmannPoint>(x);
  const auto& t1 = std::get<GrassmannTangent>(xi);
  const auto& t2 = std::get<GrassmannTangent>(zeta);
  check_shape(t1.Xi, g.X.rows(), g.X.cols(), "metric_inner Xi");
  return (t1.Xi.cwiseProduct(t2.Xi)).sum();
}

TangentVector riemannian_grad(const ManifoldPoint& x, const Matrix& egrad) {
  require_finite(egrad, "riemannian_grad egrad");
  if (const auto* fr = std::get_if<FixedRankPoint>(&x)) {
    check_shape(egrad, fr->B.rows(), fr->A.cols(), "riemannian_grad egrad");
    const Matrix grad_B = egrad * fr->A.transpose();
    const Matrix grad_A = fr->B.transpose() * egrad;
    const Matrix AAt = fr->A * fr->A.transpose();
    const Matrix BtB = fr->B.transpose() * fr->B;
    Eigen::LLT<Matrix> llt_a(AAt), llt_b(BtB);
    if (llt_a.info() != Eigen::Success || llt_b.info() != Eigen::Success) {
      throw RankDeficient("riemannian_grad: Gram matrix not positive definite");
    }
    // grad_B (AA^T)^{-1} and (B^T B)^{-1} grad_A
    return FixedRankTangent{llt_a.solve(grad_B.transpose()).transpose(), llt_b.solve(grad_A)};
  }
  if (const auto* sp = std::get_if<SpdPoint>(&x)) {
    const Matrix G = sym_part(egrad);
    return SpdTangent{sym_part(sp->X * G * sp->X)};
  }
  if (const auto* st = std::get_if<StiefelPoint>(&x)) {
    const Matrix P = st->X.transpose() * egrad;
    return StiefelTangent{st->X * skew_part(P) + (egrad - st->X * P)};
  }
  const auto& g = std::get<GrassmannPoint>(x);
  return GrassmannTangent{egrad - g.X * (g.X.transpose() * egrad)};
}

ScaledGradient scale_gradient(const ManifoldPoint& x, const Matrix& egrad) {
  require_finite(egrad, "scale_gradient egrad");
  if (const auto* fr = std::get_if<FixedRankPoint>(&x)) {
    check_shape(egrad, fr->B.rows(), fr->A.cols(), "scale_gradient egrad");
    ThinQr qa = thin_qr(fr->A.transpose());
    ThinQr qb = thin_qr(fr->B);
    return FixedRankScaled{egrad * qa.Q, qb.Q.transpose() * egrad, qa.R, qb.R};
  }
  if (const auto* sp = std::get_if<SpdPoint>(&x)) {
    SpdRoots roots = spd_sqrt_invsqrt(sp->X);
    const Matrix H = sym_part(roots.half * sym_part(egrad) * roots.half);
    return SpdScaled{H, roots.half, roots.inv_half};
  }
  if (const auto* st = std::get_if<StiefelPoint>(&x)) {
    const Matrix P = st->X.transpose() * egrad;
    return StiefelScaled{skew_part(P), egrad - st->X * P};
  }
  const auto& g = std::get<GrassmannPoint>(x);
  return GrassmannScaled{egrad - g.X * (g.X.transpose() * egrad)};
}

std::vector<Vector> scaled_block_sigmas(const ScaledGradient& sg, const NormSpec& norm) {
  auto sigmas = [](const Matrix& M) { return svd(M).sigma; };
  auto joint = [](const Vector& a, const Vector& b) {
    Vector all(a.size() + b.size());
    all << a, b;
    std::sort(all.data(), all.data() + all.size(), std::greater<double>());
    return all;
  };
  if (const auto* f = std::get_if<FixedRankScaled>(&sg)) {
    if (is_joint_frobenius(norm)) return {joint(sigmas(f->HB), sigmas(f->HA))};
    return {sigmas(f->HB), sigmas(f->HA)};
  }
  if (const auto* s = std::get_if<SpdScaled>(&sg)) return {sigmas(s->H)};
  if (const auto* st = std::get_if<StiefelScaled>(&sg)) {
    if (is_joint_frobenius(norm)) return {joint(sigmas(st->S), sigmas(st->Nhat))};
    return {sigmas(st->S), sigmas(st->Nhat)};
  }
  return {sigmas(std::get<GrassmannScaled>(sg).Hhat)};
}

namespace {

LmoResult finish(const ManifoldPoint& x, const Matrix& egrad, TangentVector xi, double h_dual) {
  TangentVector grad = riemannian_grad(x, egrad);
  const double dual_value = metric_inner(x, xi, grad);
  const double riem = metric_inner(x, xi, xi);
  return LmoResult{std::move(xi), dual_value, riem, h_dual};
}

LmoResult lmo_zero(const ManifoldPoint& x) {
  return LmoResult{zero_tangent(x), 0.0, 0.0, 0.0};
}

}  // namespace

LmoResult lmo_direction(const ManifoldPoint& x, const Matrix& egrad, const NormSpec& norm,
                        double tau) {
  norm.validate();
  require_finite(egrad, "lmo_direction egrad");
  const ManifoldKind kind = kind_of(x);
  if (norm.family == NormFamily::SpecNuc &&
      (kind == ManifoldKind::FixedRank || kind == ManifoldKind::Stiefel)) {
    throw InvalidInput("specnuc is disabled on product manifolds (fixed-rank, Stiefel)");
  }
  if (egrad.norm() == 0.0) return lmo_zero(x);

  if (std::holds_alternative<FixedRankPoint>(x)) {
    ScaledGradient sg = scale_gradient(x, egrad);
    const auto& s = std::get<FixedRankScaled>(sg);
    Matrix ZB, ZA;
    double h_dual = 0.0;
    if (is_joint_frobenius(norm)) {
      const double c = std::sqrt(s.HB.squaredNorm() + s.HA.squaredNorm());
      if (c == 0.0) return lmo_zero(x);
      ZB = (tau / c) * s.HB;
      ZA = (tau / c) * s.HA;
      h_dual = c;
    } else {
      MatrixLmoResult rb = matrix_lmo(s.HB, norm, tau);
      MatrixLmoResult ra = matrix_lmo(s.HA, norm, tau);
      ZB = rb.Z;
      ZA = ra.Z;
      h_dual = std::max(block_dual_from_value(norm, rb.value, tau),
                        block_dual_from_value(norm, ra.value, tau));
    }
    // Bdot = ZB R_A^{-T}, Adot = R_B^{-1} ZA
    Matrix Bdot = s.RA.triangularView<Eigen::Upper>().solve(ZB.transpose()).transpose();
    Matrix Adot = s.RB.triangularView<Eigen::Upper>().solve(ZA);
    return finish(x, egrad, FixedRankTangent{std::move(Bdot), std::move(Adot)}, h_dual);
  }

  if (std::holds_alternative<SpdPoint>(x)) {
    ScaledGradient sg = scale_gradient(x, egrad);
    const auto& s = std::get<SpdScaled>(sg);
    MatrixLmoResult r = matrix_lmo(s.H, norm, tau);
    const Matrix Z = sym_part(r.Z);
    Matrix xi = sym_part(s.Xhalf * Z * s.Xhalf);
    return finish(x, egrad, SpdTangent{std::move(xi)},
                  block_dual_from_value(norm, r.value, tau));
  }

  if (const auto* st = std::get_if<StiefelPoint>(&x)) {
    ScaledGradient sg = scale_gradient(x, egrad);
    const auto& s = std::get<StiefelScaled>(sg);
    if (is_joint_frobenius(norm)) {
      const double c = std::sqrt(s.S.squaredNorm() + s.Nhat.squaredNorm());
      if (c == 0.0) return lmo_zero(x);
      Matrix xi = (tau / c) * (st->X * s.S + s.Nhat);
      return finish(x, egrad, StiefelTangent{std::move(xi)}, c);
    }
    Matrix A_skew = Matrix::Zero(s.S.rows(), s.S.cols());
    double v_skew = 0.0;
    if (s.S.norm() > 0.0) {
      MatrixLmoResult rs = matrix_lmo(s.S, norm, tau);
      A_skew = skew_part(rs.Z);  // objective-preserving skew projection
      v_skew = rs.value;
    }
    Matrix ZN = Matrix::Zero(s.Nhat.rows(), s.Nhat.cols());
    double v_norm = 0.0;
    if (s.Nhat.norm() > 0.0) {
      MatrixLmoResult rn = matrix_lmo(s.Nhat, norm, tau);
      ZN = rn.Z;
      v_norm = rn.value;
    }
    Matrix xi = st->X * A_skew + ZN;
    const double h_dual = std::max(block_dual_from_value(norm, v_skew, tau),
                                   block_dual_from_value(norm, v_norm, tau));
    return finish(x, egrad, StiefelTangent{std::move(xi)}, h_dual);
  }

  ScaledGradient sg = scale_gradient(x, egrad);
  const auto& s = std::get<GrassmannScaled>(sg);
  if (s.Hhat.norm() == 0.0) return lmo_zero(x);
  MatrixLmoResult r = matrix_lmo(s.Hhat, norm, tau);
  return finish(x, egrad, GrassmannTangent{r.Z}, block_dual_from_value(norm, r.value, tau));
}

ManifoldPoint retract(const ManifoldPoint& x, const TangentVector& xi, double eta) {
  if (const auto* fr = std::get_if<FixedRankPoint>(&x)) {
    const auto& t = std::get<FixedRankTangent>(xi);
    FixedRankPoint next{fr->B + eta * t.Bdot, fr->A + eta * t.Adot};
    if (factor_cond_ratio(next.B) <= 1e-10 || factor_cond_ratio(next.A.transpose()) <= 1e-10) {
      throw RankDeficient("retract: fixed-rank step produced near rank-deficient factors");
    }
    return next;
  }
  if (const auto* sp = std::get_if<SpdPoint>(&x)) {
    const auto& t = std::get<SpdTangent>(xi);
    if (t.Xi.norm() == 0.0 || eta == 0.0) return *sp;
    SpdRoots roots = spd_sqrt_invsqrt(sp->X);
    const Matrix inner = sym_part(roots.inv_half * sym_part(t.Xi) * roots.inv_half);
    const Matrix E = spd_exp(eta * inner);
    return SpdPoint{sym_part(roots.half * E * roots.half)};
  }
  if (const auto* st = std::get_if<StiefelPoint>(&x)) {
    const auto& t = std::get<StiefelTangent>(xi);
    return StiefelPoint{thin_qr(st->X + eta * t.Xi).Q};
  }
  const auto& g = std::get<GrassmannPoint>(x);
  const auto& t = std::get<GrassmannTangent>(xi);
  return GrassmannPoint{thin_qr(g.X + eta * t.Xi).Q};
}

FixedRankPoint gauge_transform(const FixedRankPoint& x, const Matrix& N) {
  require_finite(N, "gauge_transform N");
  if (N.rows() != N.cols() || N.rows() != x.B.cols()) {
    throw InvalidInput("gauge_transform: N must be r x r");
  }
  SvdFactors f = svd(N);
  const double smin = f.sigma(f.sigma.size() - 1);
  if (smin <= 0.0 || f.sigma(0) / smin > 1e6) {
    throw InvalidInput("gauge_transform: N singular or cond > 1e6");
  }
  Matrix Bn = N.transpose().partialPivLu().solve(x.B.transpose()).transpose();
  return FixedRankPoint{std::move(Bn), N * x.A};
}

Matrix ambient_update(const FixedRankPoint& x, const FixedRankTangent& xi) {
  check_shape(xi.Bdot, x.B.rows(), x.B.cols(), "ambient_update Bdot");
  check_shape(xi.Adot, x.A.rows(), x.A.cols(), "ambient_update Adot");
  return xi.Bdot * x.A + x.B * xi.Adot;
}

LmoResult fixed_rank_lmo_gram(const FixedRankPoint& x, const Matrix& egrad, const NormSpec& norm,
                              double tau) {
  norm.validate();
  if (norm.family == NormFamily::SpecNuc) {
    throw InvalidInput("specnuc is disabled on product manifolds (fixed-rank, Stiefel)");
  }
  ManifoldPoint xp = x;
  if (egrad.norm() == 0.0) return lmo_zero(xp);
  SpdRoots ga = spd_sqrt_invsqrt(x.A * x.A.transpose());
  SpdRoots gb = spd_sqrt_invsqrt(x.B.transpose() * x.B);
  const Matrix HB = egrad * x.A.transpose() * ga.inv_half;
  const Matrix HA = gb.inv_half * x.B.transpose() * egrad;
  Matrix ZB, ZA;
  double h_dual = 0.0;
  if (is_joint_frobenius(norm)) {
    const double c = std::sqrt(HB.squaredNorm() + HA.squaredNorm());
    if (c == 0.0) return lmo_zero(xp);
    ZB = (tau / c) * HB;
    ZA = (tau / c) * HA;
    h_dual = c;
  } else {
    MatrixLmoResult rb = matrix_lmo(HB, norm, tau);
    MatrixLmoResult ra = matrix_lmo(HA, norm, tau);
    ZB = rb.Z;
    ZA = ra.Z;
    h_dual = std::max(block_dual_from_value(norm, rb.value, tau),
                      block_dual_from_value(norm, ra.value, tau));
  }
  return finish(xp, egrad, FixedRankTangent{ZB * ga.inv_half, gb.inv_half * ZA}, h_dual);
}

}  // namespace imuon
