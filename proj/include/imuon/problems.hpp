#pragma once

#include "imuon/optimizer.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace imuon {

// ---------------------------------------------------------------------------
// Fixed-rank matrix completion on synthetic low-rank targets.

struct CompletionInstance {
  int m = 0, n = 0, r = 0;
  double s = 0.0;      // oversampling ratio, |omega| = s r (m + n)
  double kappa = 1.0;  // sigma_1 / sigma_r of the target, log-spaced spectrum
  double rho = 0.0;    // noise scale relative to rms of the clean observed entries
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> omega;  // observed (i, j), sorted
  Vector y;                                // observed values, aligned with omega
  Matrix Xstar;                            // ground truth, kept for error reporting
};

CompletionInstance gen_completion(int m, int n, int r, double s, double kappa, double rho,
                                  std::uint64_t seed);

class CompletionObjective : public Objective {
 public:
  explicit CompletionObjective(CompletionInstance inst) : inst_(std::move(inst)) {}

  // f(X) = ||P_omega(X - Y)||_F^2 / (2 |omega|)
  double value_ambient(const Matrix& X) const override;
  Matrix egrad_ambient(const Matrix& X) const override;

  double relative_error(const FixedRankPoint& x) const;
  // Balanced factors from the rank-r SVD of the zero-filled observations,
  // rescaled by (m n / |omega|) to undo the sampling attenuation.
  FixedRankPoint spectral_init() const;

  const CompletionInstance& instance() const { return inst_; }

 private:
  CompletionInstance inst_;
};

// ---------------------------------------------------------------------------
// SPD prototype classification with synthetic covariance-like features.
// The K prototypes are optimized jointly as one block-diagonal SPD point of
// size K * n_dim; every LMO/retraction step preserves the block structure.

struct SpdSample {
  Matrix C;
  int label = 0;
};

struct SpdProtoInstance {
  int n_dim = 0, K = 0;
  double beta = 8.0;        // logit scale
  double lambda_reg = 1e-3; // anchor weight
  double sigma_w = 0.3;     // within-class spread of the generator
  std::uint64_t seed = 0;
  std::vector<SpdSample> train, test;
  std::vector<Matrix> anchors;  // log-Euclidean class means, also the init
};

SpdProtoInstance gen_spd_proto(int n_dim, int K, int per_class_train, int per_class_test,
                               double sigma_w, double beta, double lambda_reg,
                               std::uint64_t seed);

// d_AI(C, X)^2 = ||log(X^{-1/2} C X^{-1/2})||_F^2 and its Euclidean gradient
// in X, assembled through the divided-difference kernel of the matrix log.
double spd_ai_dist_sq(const Matrix& C, const Matrix& X);
Matrix spd_ai_dist_sq_grad(const Matrix& C, const Matrix& X);
Matrix spd_log(const Matrix& X);

class SpdProtoObjective : public Objective {
 public:
  explicit SpdProtoObjective(SpdProtoInstance inst);

  double value_ambient(const Matrix& X) const override;  // X block-diagonal, (K n) x (K n)
  Matrix egrad_ambient(const Matrix& X) const override;

  SpdPoint init() const;  // block-diagonal anchors
  double accuracy(const SpdPoint& x, const std::vector<SpdSample>& samples) const;

  const SpdProtoInstance& instance() const { return inst_; }
  Matrix block(const Matrix& X, int c) const;

 private:
  SpdProtoInstance inst_;
  std::vector<Matrix> c_inv_half_;  // per-sample C_i^{-1/2}, precomputed
};

// ---------------------------------------------------------------------------
// Grassmann Frechet prototypes: one subspace prototype per class, optimized
// class-by-class against the squared principal-angle distance.

struct GrassmannSample {
  Matrix S;  // m x k orthonormal
  int label = 0;
};

struct GrassmannFrechetInstance {
  int m = 0, k = 0, K = 0;
  double spread = 0.3;
  std::uint64_t seed = 0;
  std::vector<GrassmannSample> train, test;
};

GrassmannFrechetInstance gen_grassmann_frechet(int m, int k, int K, int per_class_train,
                                               int per_class_test, double spread,
                                               std::uint64_t seed);

// Squared geodesic distance: sum of squared principal angles, with singular
// values clamped to [0, 1 - 1e-10] before arccos.
double grassmann_dist_sq(const Matrix& X, const Matrix& S);

class GrassmannFrechetObjective : public Objective {
 public:
  GrassmannFrechetObjective(const GrassmannFrechetInstance& inst, int class_id);

  double value_ambient(const Matrix& X) const override;
  Matrix egrad_ambient(const Matrix& X) const override;

  GrassmannPoint init() const;  // first training frame of the class

 private:
  std::vector<Matrix> members_;
};

// Nearest-prototype accuracy under the principal-angle distance.
double grassmann_prototype_accuracy(const std::vector<GrassmannPoint>& prototypes,
                                    const std::vector<GrassmannSample>& samples);

// ---------------------------------------------------------------------------
// Stiefel sub-center prototypes: q unit prototypes per class as columns of
// one frame X in St(m, C q), trained with an additive-margin softmax.

struct StiefelFeature {
  Vector h;  // unit feature
  int label = 0;
};

struct StiefelProtoInstance {
  int m = 0, C = 0, q = 0;
  double margin = 0.5;
  double gamma = 64.0;
  double spread = 0.3;
  std::uint64_t seed = 0;
  std::vector<StiefelFeature> train, test;
  Matrix centers;  // m x (C q) generator directions, qf'd for the init
};

StiefelProtoInstance gen_stiefel_proto(int m, int C, int q, int per_class_train,
                                       int per_class_test, double margin, double gamma,
                                       double spread, std::uint64_t seed);

class StiefelProtoObjective : public Objective {
 public:
  explicit StiefelProtoObjective(StiefelProtoInstance inst) : inst_(std::move(inst)) {}

  double value_ambient(const Matrix& X) const override;
  Matrix egrad_ambient(const Matrix& X) const override;

  StiefelPoint init() const;
  double accuracy(const StiefelPoint& x, const std::vector<StiefelFeature>& samples) const;

  const StiefelProtoInstance& instance() const { return inst_; }

 private:
  StiefelProtoInstance inst_;
};

}  // namespace imuon
