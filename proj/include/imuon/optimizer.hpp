#pragma once

#include "imuon/manifolds.hpp"

#include <functional>
#include <random>
#include <vector>

namespace imuon {

struct Schedule {
  enum class Kind { Constant, TheoremConstant, Decaying };
  Kind kind = Kind::Constant;
  double eta = 0.1;                      // constant
  double L_est = 1.0;                    // theorem_constant
  double delta0_est = 1.0;               // theorem_constant
  int horizon = 100;                     // T in eta = c / (tau sqrt(T))
  double eta0 = 1.0;                     // decaying: eta_t = eta0 / sqrt(t + 1)

  static Schedule constant(double eta) {
    Schedule s;
    s.kind = Kind::Constant;
    s.eta = eta;
    return s;
  }
  // eta = c / (tau sqrt(T)) with c = sqrt(2 delta0 / (L C_phi)).
  static Schedule theorem_constant(double L_est, double delta0_est, int T) {
    Schedule s;
    s.kind = Kind::TheoremConstant;
    s.L_est = L_est;
    s.delta0_est = delta0_est;
    s.horizon = T;
    return s;
  }
  static Schedule decaying(double eta0) {
    Schedule s;
    s.kind = Kind::Decaying;
    s.eta0 = eta0;
    return s;
  }

  double step(int t, double tau, double c_phi) const;
};

struct OptimizerConfig {
  NormSpec norm;
  double tau = 1.0;
  Schedule schedule;
  double momentum_beta = 0.0;
  int max_iters = 100;
  std::uint64_t seed = 0;
  int record_every = 1;

  void validate() const;
};

struct TrajectoryRecord {
  int t = 0;
  double f_value = 0.0;
  double dual_value = 0.0;
  double H_dual = 0.0;
  double riem_norm_sq = 0.0;
  double step_eta = 0.0;
  double wall_time = 0.0;  // seconds since run start; excluded from reproducibility
};

struct RunResult {
  std::vector<TrajectoryRecord> trajectory;
  ManifoldPoint final_point;
};

// Raised at the first non-finite objective value; carries the trajectory
// recorded so far so divergence stays data, not a crash.
struct DivergedError : std::runtime_error {
  std::vector<TrajectoryRecord> trajectory;
  DivergedError(const std::string& what, std::vector<TrajectoryRecord> traj)
      : std::runtime_error(what), trajectory(std::move(traj)) {}
};

// Problems implement value/gradient in ambient coordinates (the m x n
// product for fixed-rank, the matrix itself elsewhere), which is also the
// surface the finite-difference oracle drives.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value_ambient(const Matrix& X) const = 0;
  virtual Matrix egrad_ambient(const Matrix& X) const = 0;

  double value(const ManifoldPoint& x) const { return value_ambient(ambient_coords(x)); }
  Matrix euclidean_grad(const ManifoldPoint& x) const {
    return egrad_ambient(ambient_coords(x));
  }

  static Matrix ambient_coords(const ManifoldPoint& x);
};

struct MomentumState {
  Matrix M_B, M_A;  // fixed-rank factor buffers
  Matrix M;         // single-block buffer
};

struct FactorGrads {
  Matrix GB, GA;
};

// M <- beta M + G in place; returns G + beta M.
FactorGrads momentum_combine(MomentumState& state, const FactorGrads& grads, double beta);
Matrix momentum_combine(MomentumState& state, const Matrix& grad, double beta);

// Effective ambient gradient for the LMO under Nesterov-style momentum.
// Fixed-rank keeps factor buffers and reassembles Mhat = Gt_B A + B Gt_A;
// other manifolds smooth the ambient gradient directly (experimental).
Matrix momentum_effective_gradient(MomentumState& state, const ManifoldPoint& x,
                                   const Matrix& egrad, double beta);

// phi°(H) at x for the given gradient: max over scaled blocks of the block
// dual (the stationarity monitor of the trajectory records).
double scaled_dual_max(const ManifoldPoint& x, const Matrix& egrad, const NormSpec& norm);

// One Algorithm-1 step: solve the intrinsic LMO and retract along -xi*.
std::pair<ManifoldPoint, LmoResult> imuon_step(const ManifoldPoint& x, const Matrix& egrad,
                                               const OptimizerConfig& cfg, int t);

RunResult run_deterministic(const Objective& problem, const ManifoldPoint& x0,
                            const OptimizerConfig& cfg);

using GradientSampler = std::function<Matrix(const ManifoldPoint&, std::mt19937_64&)>;

// Stochastic variant: steps on sampled gradients (decaying schedule
// required); records the full-batch dual monitor at record points.
RunResult run_stochastic(const Objective& problem, const GradientSampler& sampler,
                         const ManifoldPoint& x0, const OptimizerConfig& cfg);

}  // namespace imuon
