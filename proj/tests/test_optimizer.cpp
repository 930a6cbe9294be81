#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "imuon/optimizer.hpp"
#include "imuon/problems.hpp"
#include "test_util.hpp"

#include <random>

using namespace imuon;
using namespace imuon::testing;

namespace {

// Quadratic pull toward a fixed ambient target; smooth on every manifold.
class QuadraticPull : public Objective {
 public:
  explicit QuadraticPull(Matrix target) : target_(std::move(target)) {}
  double value_ambient(const Matrix& X) const override {
    return 0.5 * (X - target_).squaredNorm();
  }
  Matrix egrad_ambient(const Matrix& X) const override { return X - target_; }

 private:
  Matrix target_;
};

// Unbounded below with exploding curvature: f -> -inf and overflows to a
// non-finite value once the trace grows.
class ExplodingTrace : public Objective {
 public:
  double value_ambient(const Matrix& X) const override { return -std::exp(X.trace()); }
  Matrix egrad_ambient(const Matrix& X) const override {
    return -std::exp(X.trace()) * Matrix::Identity(X.rows(), X.cols());
  }
};

bool same_trajectory(const std::vector<TrajectoryRecord>& a,
                     const std::vector<TrajectoryRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].t != b[i].t || a[i].f_value != b[i].f_value ||
        a[i].dual_value != b[i].dual_value || a[i].H_dual != b[i].H_dual ||
        a[i].riem_norm_sq != b[i].riem_norm_sq || a[i].step_eta != b[i].step_eta) {
      return false;  // all fields bitwise except wall_time
    }
  }
  return true;
}

}  // namespace

TEST_CASE("schedule step sizes") {
  CHECK(Schedule::constant(0.25).step(7, 1.0, 4.0) == 0.25);
  Schedule thm = Schedule::theorem_constant(2.0, 8.0, 100);
  // c = sqrt(2 * 8 / (2 * 4)) = sqrt(2); eta = c / (tau sqrt(T))
  CHECK(thm.step(0, 1.0, 4.0) == doctest::Approx(std::sqrt(2.0) / 10.0));
  Schedule dec = Schedule::decaying(2.0);
  CHECK(dec.step(0, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(dec.step(3, 1.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("config validation") {
  OptimizerConfig cfg;
  cfg.schedule = Schedule::constant(0.0);
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg.schedule = Schedule::constant(0.1);
  cfg.momentum_beta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg.momentum_beta = 0.5;
  cfg.record_every = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("imuon_step leaves the point fixed on a zero gradient") {
  std::mt19937_64 rng(3);
  SpdPoint x = random_spd_point(4, rng);
  OptimizerConfig cfg;
  cfg.schedule = Schedule::constant(0.5);
  auto [next, lmo] = imuon_step(x, Matrix::Zero(4, 4), cfg, 0);
  CHECK((std::get<SpdPoint>(next).X - x.X).norm() == 0.0);
  CHECK(lmo.dual_value == 0.0);
}

TEST_CASE("imuon_step SPD hand example") {
  SpdPoint x{Matrix::Identity(2, 2)};
  Matrix g(2, 2);
  g << 1, 0, 0, -1;
  OptimizerConfig cfg;
  cfg.norm = NormSpec::spectral();
  cfg.schedule = Schedule::constant(0.5);
  auto [next, lmo] = imuon_step(x, g, cfg, 0);
  Matrix want(2, 2);
  want << std::exp(-0.5), 0, 0, std::exp(0.5);
  CHECK(rel_err(std::get<SpdPoint>(next).X, want) < 1e-10);
}

TEST_CASE("one step on a Grassmann quadratic decreases the objective") {
  std::mt19937_64 rng(5);
  GrassmannPoint x = random_grassmann(8, 3, rng);
  QuadraticPull problem(randn(8, 3, rng));
  ManifoldPoint xp = x;
  std::vector<ManifoldPoint> anchors = {xp};
  const double L = estimate_retraction_L(problem, anchors, NormSpec::spectral(), 1.0, 0.5,
                                         200, rng);
  OptimizerConfig cfg;
  cfg.norm = NormSpec::spectral();
  cfg.schedule = Schedule::constant(std::min(0.5, 1.0 / L));
  const double f0 = problem.value(xp);
  auto [next, lmo] = imuon_step(xp, problem.euclidean_grad(xp), cfg, 0);
  CHECK(problem.value(next) < f0);
}

TEST_CASE("run_deterministic with zero iterations returns a single record") {
  std::mt19937_64 rng(7);
  SpdPoint x0 = random_spd_point(3, rng);
  QuadraticPull problem(random_sym(3, rng));
  OptimizerConfig cfg;
  cfg.max_iters = 0;
  cfg.schedule = Schedule::constant(0.1);
  RunResult res = run_deterministic(problem, x0, cfg);
  CHECK(res.trajectory.size() == 1);
  CHECK(res.trajectory[0].t == 0);
  CHECK((std::get<SpdPoint>(res.final_point).X - x0.X).norm() == 0.0);
}

TEST_CASE("RGD with the theorem_constant schedule is monotone on a convex SPD toy") {
  // Start far from the target so the stationarity floor is never reached
  // inside the horizon.
  Matrix target = 2.0 * Matrix::Identity(4, 4);
  QuadraticPull problem(target);
  SpdPoint x0{20.0 * Matrix::Identity(4, 4)};
  ManifoldPoint x0p = x0;

  std::mt19937_64 rng(11);
  std::vector<ManifoldPoint> anchors = {x0p};
  // cover the approach path with a coarse pilot
  {
    OptimizerConfig pilot;
    pilot.norm = NormSpec::frobenius();
    pilot.schedule = Schedule::constant(0.3);
    pilot.max_iters = 30;
    RunResult res = run_deterministic(problem, x0p, pilot);
    anchors.push_back(res.final_point);
  }
  const double L =
      estimate_retraction_L(problem, anchors, NormSpec::frobenius(), 1.0, 1.0, 400, rng);
  OptimizerConfig cfg;
  cfg.norm = NormSpec::frobenius();
  cfg.max_iters = 50;
  cfg.schedule = Schedule::theorem_constant(L, problem.value(x0p), cfg.max_iters);
  RunResult res = run_deterministic(problem, x0p, cfg);
  for (size_t i = 1; i < res.trajectory.size(); ++i) {
    CHECK(res.trajectory[i].f_value <= res.trajectory[i - 1].f_value + 1e-12);
  }
}

TEST_CASE("deterministic rate envelope on an SPD quadratic") {
  Matrix target = Matrix::Identity(5, 5);
  QuadraticPull problem(target);
  SpdPoint x0{5.0 * Matrix::Identity(5, 5) + Matrix::Identity(5, 5) * 0.0};
  ManifoldPoint x0p = x0;
  std::mt19937_64 rng(13);

  for (const auto& norm : {NormSpec::spectral(), NormSpec::frobenius()}) {
    const double c_phi = *c_phi_analytic(norm, ManifoldKind::Spd, ManifoldDims{5, 5, 0});
    // pre-pass: pilot run + smoothness estimate along it
    OptimizerConfig pilot;
    pilot.norm = norm;
    pilot.schedule = Schedule::constant(0.05);
    pilot.max_iters = 60;
    RunResult pilot_res = run_deterministic(problem, x0p, pilot);
    std::vector<ManifoldPoint> anchors = {x0p, pilot_res.final_point};
    const double L = estimate_retraction_L(problem, anchors, norm, 1.0, 0.3, 400, rng);
    const double delta0 = problem.value(x0p);  // f >= 0 so f* >= 0

    for (int T : {100, 1000, 10000}) {
      OptimizerConfig cfg;
      cfg.norm = norm;
      cfg.max_iters = T;
      cfg.schedule = Schedule::theorem_constant(L, delta0, T);
      RunResult res = run_deterministic(problem, x0p, cfg);
      double min_dual = std::numeric_limits<double>::infinity();
      for (const auto& rec : res.trajectory) min_dual = std::min(min_dual, rec.H_dual);
      CHECK(min_dual <= 1.1 * std::sqrt(2.0 * L * c_phi * delta0 / T));
    }
  }
}

TEST_CASE("determinism and momentum degeneracy") {
  std::mt19937_64 rng(17);
  FixedRankPoint x0 = random_fixed_rank(8, 6, 2, rng);
  QuadraticPull problem(randn(8, 6, rng));
  OptimizerConfig cfg;
  cfg.norm = NormSpec::spectral();
  cfg.schedule = Schedule::decaying(0.1);
  cfg.max_iters = 25;
  cfg.seed = 42;

  RunResult a = run_deterministic(problem, x0, cfg);
  RunResult b = run_deterministic(problem, x0, cfg);
  CHECK(same_trajectory(a.trajectory, b.trajectory));

  OptimizerConfig with_zero_beta = cfg;
  with_zero_beta.momentum_beta = 0.0;
  RunResult c = run_deterministic(problem, x0, with_zero_beta);
  CHECK(same_trajectory(a.trajectory, c.trajectory));

  OptimizerConfig with_beta = cfg;
  with_beta.momentum_beta = 0.9;
  RunResult d = run_deterministic(problem, x0, with_beta);
  CHECK(!same_trajectory(a.trajectory, d.trajectory));
}

TEST_CASE("momentum_combine recursions") {
  MomentumState state;
  Matrix g = Matrix::Ones(2, 2);

  Matrix eff = momentum_combine(state, g, 0.0);
  CHECK((eff - g).norm() == 0.0);
  CHECK(state.M.cwiseAbs().maxCoeff() == 1.0);  // M accumulated g once

  // constant gradient: M_t = G (1 - beta^t) / (1 - beta)
  MomentumState s2;
  const double beta = 0.5;
  Matrix m_expected = Matrix::Zero(2, 2);
  for (int t = 1; t <= 6; ++t) {
    momentum_combine(s2, g, beta);
    m_expected = beta * m_expected + g;
  }
  CHECK((s2.M - m_expected).norm() < 1e-14);
  CHECK(s2.M(0, 0) == doctest::Approx((1.0 - std::pow(beta, 6)) / (1.0 - beta)));

  // fixed-rank assembly at identity factors: Mhat = Gt_B + Gt_A
  MomentumState s3;
  FixedRankPoint eye{Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  Matrix grad = Matrix::Identity(2, 2);
  Matrix mhat = momentum_effective_gradient(s3, ManifoldPoint{eye}, grad, 0.25);
  FactorGrads expected = {grad, grad};
  MomentumState ref;
  FactorGrads eff2 = momentum_combine(ref, expected, 0.25);
  CHECK((mhat - (eff2.GB + eff2.GA)).norm() < 1e-14);
}

TEST_CASE("stochastic run with a full-batch sampler reproduces the deterministic run") {
  std::mt19937_64 rng(19);
  SpdPoint x0 = random_spd_point(4, rng);
  QuadraticPull problem(random_sym(4, rng));
  OptimizerConfig cfg;
  cfg.norm = NormSpec::frobenius();
  cfg.schedule = Schedule::decaying(0.2);
  cfg.max_iters = 30;
  cfg.seed = 7;

  GradientSampler full_batch = [&problem](const ManifoldPoint& x, std::mt19937_64&) {
    return problem.euclidean_grad(x);
  };
  RunResult det = run_deterministic(problem, x0, cfg);
  RunResult sto = run_stochastic(problem, full_batch, x0, cfg);
  CHECK(same_trajectory(det.trajectory, sto.trajectory));

  OptimizerConfig bad = cfg;
  bad.schedule = Schedule::constant(0.1);
  CHECK_THROWS_AS(run_stochastic(problem, full_batch, x0, bad), InvalidInput);
}

TEST_CASE("stochastic noise floor obeys the envelope with the additive term") {
  // Additive symmetric gradient noise with a measurable dual-norm level.
  std::mt19937_64 rng(23);
  Matrix target = Matrix::Identity(4, 4);
  QuadraticPull problem(target);
  SpdPoint x0{4.0 * Matrix::Identity(4, 4)};
  ManifoldPoint x0p = x0;
  const NormSpec norm = NormSpec::frobenius();
  const double noise_scale = 0.02;

  GradientSampler noisy = [&](const ManifoldPoint& x, std::mt19937_64& g) {
    std::normal_distribution<double> dist(0.0, noise_scale);
    Matrix eps(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) eps(i, j) = dist(g);
    return problem.euclidean_grad(x) + sym_part(eps);
  };

  // estimate sigma_phi = sqrt(E phi°(Htilde - H)^2) along a pilot trajectory
  OptimizerConfig pilot;
  pilot.norm = norm;
  pilot.schedule = Schedule::decaying(0.1);
  pilot.max_iters = 50;
  pilot.seed = 1;
  RunResult pilot_res = run_stochastic(problem, noisy, x0p, pilot);
  std::mt19937_64 noise_rng(99);
  double sigma_sq = 0.0;
  const int draws = 200;
  for (int i = 0; i < draws; ++i) {
    const Matrix h_noise = noisy(pilot_res.final_point, noise_rng) -
                           problem.euclidean_grad(pilot_res.final_point);
    ScaledGradient sg = scale_gradient(pilot_res.final_point, h_noise);
    double dual = 0.0;
    for (const Vector& s : scaled_block_sigmas(sg, norm)) dual += dual_norm(s, norm);
    sigma_sq += dual * dual;
  }
  const double sigma_phi = std::sqrt(sigma_sq / draws);

  std::vector<ManifoldPoint> anchors = {x0p, pilot_res.final_point};
  const double L = estimate_retraction_L(problem, anchors, norm, 1.0, 0.2, 300, rng);
  const double delta0 = problem.value(x0p);
  const int T = 400;
  OptimizerConfig cfg;
  cfg.norm = norm;
  cfg.schedule = Schedule::decaying(std::sqrt(2.0 * delta0 / L));
  cfg.max_iters = T;
  cfg.seed = 5;
  RunResult res = run_stochastic(problem, noisy, x0p, cfg);
  double min_dual = std::numeric_limits<double>::infinity();
  for (const auto& rec : res.trajectory) min_dual = std::min(min_dual, rec.H_dual);
  const double envelope =
      std::sqrt(2.0 * L * 1.0 * delta0 * (1.0 + std::log(T)) / T) + 2.0 * sigma_phi;
  CHECK(min_dual <= 1.1 * envelope);
}

TEST_CASE("divergence raises DivergedError carrying the partial trajectory") {
  ExplodingTrace problem;
  SpdPoint x0{Matrix::Identity(3, 3)};
  OptimizerConfig cfg;
  cfg.norm = NormSpec::spectral();
  cfg.schedule = Schedule::constant(50.0);  // reckless step
  cfg.max_iters = 200;
  try {
    run_deterministic(problem, x0, cfg);
    FAIL("expected DivergedError");
  } catch (const DivergedError& e) {
    CHECK(!e.trajectory.empty());
    for (const auto& rec : e.trajectory) CHECK(std::isfinite(rec.f_value));
  }
}
