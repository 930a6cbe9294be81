#include "imuon/optimizer.hpp"

#include <chrono>
#include <cmath>

namespace imuon {

Matrix Objective::ambient_coords(const ManifoldPoint& x) {
  if (const auto* fr = std::get_if<FixedRankPoint>(&x)) return fr->B * fr->A;
  if (const auto* sp = std::get_if<SpdPoint>(&x)) return sp->X;
  if (const auto* st = std::get_if<StiefelPoint>(&x)) return st->X;
  return std::get<GrassmannPoint>(x).X;
}

double Schedule::step(int t, double tau, double c_phi) const {
  switch (kind) {
    case Kind::Constant:
      return eta;
    case Kind::TheoremConstant: {
      const double c = std::sqrt(2.0 * delta0_est / (L_est * c_phi));
      return c / (tau * std::sqrt(static_cast<double>(horizon)));
    }
    case Kind::Decaying:
      return eta0 / std::sqrt(static_cast<double>(t) + 1.0);
  }
  return eta;
}

void OptimizerConfig::validate() const {
  norm.validate();
  if (!(tau > 0.0)) throw InvalidInput("OptimizerConfig: tau must be positive");
  if (schedule.kind == Schedule::Kind::Constant && !(schedule.eta > 0.0)) {
    throw InvalidInput("OptimizerConfig: eta must be positive");
  }
  if (schedule.kind == Schedule::Kind::Decaying && !(schedule.eta0 > 0.0)) {
    throw InvalidInput("OptimizerConfig: eta0 must be positive");
  }
  if (schedule.kind == Schedule::Kind::TheoremConstant &&
      (!(schedule.L_est > 0.0) || !(schedule.delta0_est > 0.0) || schedule.horizon < 1)) {
    throw InvalidInput("OptimizerConfig: theorem_constant needs positive L, delta0, T");
  }
  if (!(momentum_beta >= 0.0 && momentum_beta < 1.0)) {
    throw InvalidInput("OptimizerConfig: momentum_beta must lie in [0, 1)");
  }
  if (max_iters < 0) throw InvalidInput("OptimizerConfig: max_iters < 0");
  if (record_every < 1) throw InvalidInput("OptimizerConfig: record_every < 1");
}

FactorGrads momentum_combine(MomentumState& state, const FactorGrads& grads, double beta) {
  if (state.M_B.size() == 0) state.M_B = Matrix::Zero(grads.GB.rows(), grads.GB.cols());
  if (state.M_A.size() == 0) state.M_A = Matrix::Zero(grads.GA.rows(), grads.GA.cols());
  state.M_B = beta * state.M_B + grads.GB;
  state.M_A = beta * state.M_A + grads.GA;
  return FactorGrads{grads.GB + beta * state.M_B, grads.GA + beta * state.M_A};
}

Matrix momentum_combine(MomentumState& state, const Matrix& grad, double beta) {
  if (state.M.size() == 0) state.M = Matrix::Zero(grad.rows(), grad.cols());
  state.M = beta * state.M + grad;
  return grad + beta * state.M;
}

Matrix momentum_effective_gradient(MomentumState& state, const ManifoldPoint& x,
                                   const Matrix& egrad, double beta) {
  if (const auto* fr = std::get_if<FixedRankPoint>(&x)) {
    FactorGrads g{egrad * fr->A.transpose(), fr->B.transpose() * egrad};
    FactorGrads eff = momentum_combine(state, g, beta);
    return eff.GB * fr->A + fr->B * eff.GA;
  }
  return momentum_combine(state, egrad, beta);
}

double scaled_dual_max(const ManifoldPoint& x, const Matrix& egrad, const NormSpec& norm) {
  ScaledGradient sg = scale_gradient(x, egrad);
  double worst = 0.0;
  for (const Vector& sigma : scaled_block_sigmas(sg, norm)) {
    if (sigma.size() == 0 || sigma(0) <= 0.0) continue;
    const double d = (norm.family == NormFamily::SpecNuc) ? vector_lmo(sigma, norm, 1.0).value
                                                          : dual_norm(sigma, norm);
    worst = std::max(worst, d);
  }
  return worst;
}

namespace {

double c_phi_for(const ManifoldPoint& x, const OptimizerConfig& cfg) {
  if (cfg.schedule.kind != Schedule::Kind::TheoremConstant) return 1.0;  // unused
  auto c = c_phi_analytic(cfg.norm, kind_of(x), dims_of(x));
  if (!c) throw InvalidInput("theorem_constant schedule needs an analytic C_phi");
  return *c;
}

RunResult run_impl(const Objective& problem, const GradientSampler* sampler,
                   const ManifoldPoint& x0, const OptimizerConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  std::mt19937_64 rng(cfg.seed);
  MomentumState momentum;
  ManifoldPoint x = x0;
  const double c_phi = c_phi_for(x0, cfg);
  std::vector<TrajectoryRecord> traj;

  auto check_finite_f = [&](double f, int t) {
    if (!std::isfinite(f)) {
      throw DivergedError("objective became non-finite at t=" + std::to_string(t), traj);
    }
  };

  for (int t = 0; t < cfg.max_iters; ++t) {
    const double f = problem.value(x);
    check_finite_f(f, t);
    const Matrix grad = (sampler != nullptr) ? (*sampler)(x, rng) : problem.euclidean_grad(x);
    const Matrix effective =
        (cfg.momentum_beta > 0.0)
            ? momentum_effective_gradient(momentum, x, grad, cfg.momentum_beta)
            : grad;
    LmoResult lmo = lmo_direction(x, effective, cfg.norm, cfg.tau);
    const double eta = cfg.schedule.step(t, cfg.tau, c_phi);
    if (t % cfg.record_every == 0) {
      // The recorded dual monitor is always the full-batch phi°(H_t).
      const Matrix full_grad = (sampler != nullptr) ? problem.euclidean_grad(x) : grad;
      traj.push_back(TrajectoryRecord{t, f, lmo.dual_value,
                                      scaled_dual_max(x, full_grad, cfg.norm),
                                      lmo.riem_norm_sq, eta, elapsed()});
    }
    x = retract(x, scale_tangent(lmo.xi_star, -1.0), eta);
  }

  const double f_final = problem.value(x);
  check_finite_f(f_final, cfg.max_iters);
  const Matrix g_final = problem.euclidean_grad(x);
  LmoResult lmo_final = lmo_direction(x, g_final, cfg.norm, cfg.tau);
  traj.push_back(TrajectoryRecord{cfg.max_iters, f_final, lmo_final.dual_value,
                                  scaled_dual_max(x, g_final, cfg.norm),
                                  lmo_final.riem_norm_sq,
                                  cfg.schedule.step(cfg.max_iters, cfg.tau, c_phi), elapsed()});
  return RunResult{std::move(traj), std::move(x)};
}

}  // namespace

std::pair<ManifoldPoint, LmoResult> imuon_step(const ManifoldPoint& x, const Matrix& egrad,
                                               const OptimizerConfig& cfg, int t) {
  cfg.validate();
  LmoResult lmo = lmo_direction(x, egrad, cfg.norm, cfg.tau);
  const double eta = cfg.schedule.step(t, cfg.tau, c_phi_for(x, cfg));
  ManifoldPoint next = retract(x, scale_tangent(lmo.xi_star, -1.0), eta);
  return {std::move(next), std::move(lmo)};
}

RunResult run_deterministic(const Objective& problem, const ManifoldPoint& x0,
                            const OptimizerConfig& cfg) {
  return run_impl(problem, nullptr, x0, cfg);
}

RunResult run_stochastic(const Objective& problem, const GradientSampler& sampler,
                         const ManifoldPoint& x0, const OptimizerConfig& cfg) {
  if (cfg.schedule.kind != Schedule::Kind::Decaying) {
    throw InvalidInput("run_stochastic requires the decaying schedule");
  }
  return run_impl(problem, &sampler, x0, cfg);
}

}  // namespace imuon
