#include "imuon/problems.hpp"

#include "imuon/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace imuon {

namespace {

Matrix randn_mat(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

Matrix random_frame(int rows, int cols, std::mt19937_64& rng) {
  return thin_qr(randn_mat(rows, cols, rng)).Q;
}

Matrix random_sym_mat(int n, std::mt19937_64& rng) {
  Matrix g = randn_mat(n, n, rng);
  return 0.5 * (g + g.transpose());
}

Vector softmax_probs(const Vector& logits) {
  const double shift = logits.maxCoeff();
  Vector p = (logits.array() - shift).exp();
  return p / p.sum();
}

double cross_entropy(const Vector& logits, int label) {
  const double shift = logits.maxCoeff();
  const double lse = shift + std::log((logits.array() - shift).exp().sum());
  return lse - logits(label);
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix completion

CompletionInstance gen_completion(int m, int n, int r, double s, double kappa, double rho,
                                  std::uint64_t seed) {
  if (m < 1 || n < 1 || r < 1 || r > std::min(m, n)) {
    throw InvalidInput("gen_completion: bad dimensions");
  }
  if (!(s > 0.0) || !(kappa >= 1.0) || rho < 0.0) {
    throw InvalidInput("gen_completion: bad parameters");
  }
  const long long count = static_cast<long long>(std::llround(s * r * (m + n)));
  if (count > static_cast<long long>(m) * n) {
    throw InvalidInput("gen_completion: oversampling exceeds the number of entries");
  }

  std::mt19937_64 rng(seed);
  Matrix U = random_frame(m, r, rng);
  Matrix V = random_frame(n, r, rng);
  Vector sigma(r);
  for (int i = 0; i < r; ++i) {
    const double t = (r == 1) ? 0.0 : static_cast<double>(i) / (r - 1);
    sigma(i) = std::pow(kappa, -t);  // log-spaced from sigma_1 down to sigma_1/kappa
  }
  // Calibrate sigma_1 so the target entries have unit rms.
  sigma *= std::sqrt(static_cast<double>(m) * n) / sigma.norm();
  Matrix Xstar = U * sigma.asDiagonal() * V.transpose();

  // Uniform without replacement via a partial shuffle of the flat index set.
  std::vector<int> flat(static_cast<size_t>(m) * n);
  std::iota(flat.begin(), flat.end(), 0);
  std::vector<std::pair<int, int>> omega(count);
  for (long long i = 0; i < count; ++i) {
    std::uniform_int_distribution<long long> pick(i, static_cast<long long>(flat.size()) - 1);
    std::swap(flat[i], flat[pick(rng)]);
    omega[i] = {flat[i] / n, flat[i] % n};
  }
  std::sort(omega.begin(), omega.end());

  Vector y(count);
  double rms = 0.0;
  for (long long i = 0; i < count; ++i) {
    y(i) = Xstar(omega[i].first, omega[i].second);
    rms += y(i) * y(i);
  }
  rms = std::sqrt(rms / static_cast<double>(count));
  if (rho > 0.0) {
    std::normal_distribution<double> noise(0.0, rho * rms);
    for (long long i = 0; i < count; ++i) y(i) += noise(rng);
  }

  CompletionInstance inst;
  inst.m = m;
  inst.n = n;
  inst.r = r;
  inst.s = s;
  inst.kappa = kappa;
  inst.rho = rho;
  inst.seed = seed;
  inst.omega = std::move(omega);
  inst.y = std::move(y);
  inst.Xstar = std::move(Xstar);
  return inst;
}

double CompletionObjective::value_ambient(const Matrix& X) const {
  double acc = 0.0;
  for (size_t i = 0; i < inst_.omega.size(); ++i) {
    const double d = X(inst_.omega[i].first, inst_.omega[i].second) - inst_.y(i);
    acc += d * d;
  }
  return 0.5 * acc / static_cast<double>(inst_.omega.size());
}

Matrix CompletionObjective::egrad_ambient(const Matrix& X) const {
  Matrix g = Matrix::Zero(inst_.m, inst_.n);
  const double scale = 1.0 / static_cast<double>(inst_.omega.size());
  for (size_t i = 0; i < inst_.omega.size(); ++i) {
    const auto [row, col] = inst_.omega[i];
    g(row, col) = (X(row, col) - inst_.y(i)) * scale;
  }
  return g;
}

double CompletionObjective::relative_error(const FixedRankPoint& x) const {
  return (x.B * x.A - inst_.Xstar).norm() / inst_.Xstar.norm();
}

FixedRankPoint CompletionObjective::spectral_init() const {
  Matrix filled = Matrix::Zero(inst_.m, inst_.n);
  for (size_t i = 0; i < inst_.omega.size(); ++i) {
    filled(inst_.omega[i].first, inst_.omega[i].second) = inst_.y(i);
  }
  filled *= static_cast<double>(inst_.m) * inst_.n / static_cast<double>(inst_.omega.size());
  SvdFactors f = svd(filled);
  Vector root = f.sigma.head(inst_.r).cwiseMax(1e-12).cwiseSqrt();
  return FixedRankPoint{f.U.leftCols(inst_.r) * root.asDiagonal(),
                        root.asDiagonal() * f.V.leftCols(inst_.r).transpose()};
}

// ---------------------------------------------------------------------------
// SPD prototypes

Matrix spd_log(const Matrix& X) {
  SymEig eig = sym_eig(X);
  if (eig.lambda(eig.lambda.size() - 1) <= 0.0) {
    throw NotPositiveDefinite("spd_log: nonpositive eigenvalue");
  }
  Vector logs = eig.lambda.array().log();
  return eig.Q * logs.asDiagonal() * eig.Q.transpose();
}

namespace {

// Adjoint of the Frechet derivative of log at SPD W applied to E, through the
// divided-difference kernel K_ij = (log li - log lj) / (li - lj), K_ii = 1/li.
Matrix log_frechet_adjoint(const SymEig& eig, const Matrix& E) {
  const Eigen::Index n = eig.lambda.size();
  Matrix Et = eig.Q.transpose() * E * eig.Q;
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double li = eig.lambda(i), lj = eig.lambda(j);
      if (std::abs(li - lj) <= 1e-12 * std::max(li, lj)) {
        K(i, j) = 1.0 / (0.5 * (li + lj));
      } else {
        K(i, j) = (std::log(li) - std::log(lj)) / (li - lj);
      }
    }
  }
  return eig.Q * K.cwiseProduct(Et) * eig.Q.transpose();
}

}  // namespace

double spd_ai_dist_sq(const Matrix& C, const Matrix& X) {
  SpdRoots rx = spd_sqrt_invsqrt(X);
  SymEig eig = sym_eig(rx.inv_half * C * rx.inv_half);
  if (eig.lambda(eig.lambda.size() - 1) <= 0.0) {
    throw NotPositiveDefinite("spd_ai_dist_sq: arguments not jointly positive");
  }
  return eig.lambda.array().log().square().sum();
}

Matrix spd_ai_dist_sq_grad(const Matrix& C, const Matrix& X) {
  // Differentiate through W = C^{-1/2} X C^{-1/2}, which is linear in X:
  // grad = C^{-1/2} (d ||log W||^2 / dW) C^{-1/2}.
  SpdRoots rc = spd_sqrt_invsqrt(C);
  const Matrix W = sym_part(rc.inv_half * X * rc.inv_half);
  SymEig eig = sym_eig(W);
  if (eig.lambda(eig.lambda.size() - 1) <= 0.0) {
    throw NotPositiveDefinite("spd_ai_dist_sq_grad: arguments not jointly positive");
  }
  Vector logs = eig.lambda.array().log();
  const Matrix logW = eig.Q * logs.asDiagonal() * eig.Q.transpose();
  const Matrix dW = 2.0 * log_frechet_adjoint(eig, logW);
  return sym_part(rc.inv_half * dW * rc.inv_half);
}

SpdProtoInstance gen_spd_proto(int n_dim, int K, int per_class_train, int per_class_test,
                               double sigma_w, double beta, double lambda_reg,
                               std::uint64_t seed) {
  if (n_dim < 1 || K < 1 || per_class_train < 1 || per_class_test < 0) {
    throw InvalidInput("gen_spd_proto: bad sizes");
  }
  std::mt19937_64 rng(seed);
  SpdProtoInstance inst;
  inst.n_dim = n_dim;
  inst.K = K;
  inst.beta = beta;
  inst.lambda_reg = lambda_reg;
  inst.sigma_w = sigma_w;
  inst.seed = seed;

  for (int c = 0; c < K; ++c) {
    Matrix G = randn_mat(n_dim, n_dim, rng);
    Matrix center = G * G.transpose() + Matrix::Identity(n_dim, n_dim);
    SpdRoots root = spd_sqrt_invsqrt(center);
    auto draw = [&](std::vector<SpdSample>& out, int count) {
      for (int i = 0; i < count; ++i) {
        Matrix w = sigma_w * random_sym_mat(n_dim, rng);
        out.push_back(SpdSample{sym_part(root.half * spd_exp(w) * root.half), c});
      }
    };
    draw(inst.train, per_class_train);
    draw(inst.test, per_class_test);
  }

  // Log-Euclidean class means double as anchors and initialization.
  for (int c = 0; c < K; ++c) {
    Matrix mean_log = Matrix::Zero(n_dim, n_dim);
    int count = 0;
    for (const auto& s : inst.train) {
      if (s.label != c) continue;
      mean_log += spd_log(s.C);
      ++count;
    }
    inst.anchors.push_back(spd_exp(mean_log / static_cast<double>(count)));
  }
  return inst;
}

SpdProtoObjective::SpdProtoObjective(SpdProtoInstance inst) : inst_(std::move(inst)) {
  for (const auto& s : inst_.train) {
    c_inv_half_.push_back(spd_sqrt_invsqrt(s.C).inv_half);
  }
}

Matrix SpdProtoObjective::block(const Matrix& X, int c) const {
  const int n = inst_.n_dim;
  return X.block(c * n, c * n, n, n);
}

double SpdProtoObjective::value_ambient(const Matrix& X) const {
  const int n = inst_.n_dim, K = inst_.K;
  if (X.rows() != K * n || X.cols() != K * n) {
    throw InvalidInput("SpdProtoObjective: expected a (K n) x (K n) point");
  }
  double ce = 0.0;
  for (const auto& s : inst_.train) {
    Vector logits(K);
    for (int c = 0; c < K; ++c) {
      logits(c) = -inst_.beta * spd_ai_dist_sq(s.C, block(X, c));
    }
    ce += cross_entropy(logits, s.label);
  }
  ce /= static_cast<double>(inst_.train.size());
  double anchor = 0.0;
  for (int c = 0; c < K; ++c) {
    anchor += spd_ai_dist_sq(block(X, c), inst_.anchors[c]);
  }
  return ce + inst_.lambda_reg * anchor;
}

Matrix SpdProtoObjective::egrad_ambient(const Matrix& X) const {
  const int n = inst_.n_dim, K = inst_.K;
  const int N = static_cast<int>(inst_.train.size());
  std::vector<Matrix> grads(K, Matrix::Zero(n, n));

  for (int i = 0; i < N; ++i) {
    const auto& s = inst_.train[i];
    Vector logits(K);
    std::vector<Matrix> dists_grad(K);
    for (int c = 0; c < K; ++c) {
      const Matrix Xc = block(X, c);
      logits(c) = -inst_.beta * spd_ai_dist_sq(s.C, Xc);
      dists_grad[c] = spd_ai_dist_sq_grad(s.C, Xc);
    }
    Vector p = softmax_probs(logits);
    for (int c = 0; c < K; ++c) {
      const double coeff = (p(c) - (c == s.label ? 1.0 : 0.0)) * (-inst_.beta) / N;
      grads[c] += coeff * dists_grad[c];
    }
  }
  for (int c = 0; c < K; ++c) {
    grads[c] += inst_.lambda_reg * spd_ai_dist_sq_grad(inst_.anchors[c], block(X, c));
  }

  Matrix g = Matrix::Zero(K * n, K * n);
  for (int c = 0; c < K; ++c) g.block(c * n, c * n, n, n) = sym_part(grads[c]);
  return g;
}

SpdPoint SpdProtoObjective::init() const {
  const int n = inst_.n_dim, K = inst_.K;
  Matrix X = Matrix::Zero(K * n, K * n);
  for (int c = 0; c < K; ++c) X.block(c * n, c * n, n, n) = inst_.anchors[c];
  return SpdPoint{X};
}

double SpdProtoObjective::accuracy(const SpdPoint& x,
                                   const std::vector<SpdSample>& samples) const {
  if (samples.empty()) return 0.0;
  int hits = 0;
  for (const auto& s : samples) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < inst_.K; ++c) {
      const double d = spd_ai_dist_sq(s.C, block(x.X, c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    hits += (best == s.label) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Grassmann Frechet prototypes

GrassmannFrechetInstance gen_grassmann_frechet(int m, int k, int K, int per_class_train,
                                               int per_class_test, double spread,
                                               std::uint64_t seed) {
  if (m < 1 || k < 1 || k > m || K < 1) throw InvalidInput("gen_grassmann_frechet: bad sizes");
  std::mt19937_64 rng(seed);
  GrassmannFrechetInstance inst;
  inst.m = m;
  inst.k = k;
  inst.K = K;
  inst.spread = spread;
  inst.seed = seed;
  for (int c = 0; c < K; ++c) {
    Matrix center = random_frame(m, k, rng);
    auto draw = [&](std::vector<GrassmannSample>& out, int count) {
      for (int i = 0; i < count; ++i) {
        out.push_back(GrassmannSample{thin_qr(center + spread * randn_mat(m, k, rng)).Q, c});
      }
    };
    draw(inst.train, per_class_train);
    draw(inst.test, per_class_test);
  }
  return inst;
}

namespace {

constexpr double kAngleClamp = 1.0 - 1e-10;

}  // namespace

double grassmann_dist_sq(const Matrix& X, const Matrix& S) {
  SvdFactors f = svd(X.transpose() * S);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f.sigma.size(); ++i) {
    const double theta = std::acos(std::min(f.sigma(i), kAngleClamp));
    acc += theta * theta;
  }
  return acc;
}

GrassmannFrechetObjective::GrassmannFrechetObjective(const GrassmannFrechetInstance& inst,
                                                     int class_id) {
  for (const auto& s : inst.train) {
    if (s.label == class_id) members_.push_back(s.S);
  }
  if (members_.empty()) throw InvalidInput("GrassmannFrechetObjective: empty class");
}

double GrassmannFrechetObjective::value_ambient(const Matrix& X) const {
  double acc = 0.0;
  for (const Matrix& S : members_) acc += grassmann_dist_sq(X, S);
  return acc / static_cast<double>(members_.size());
}

Matrix GrassmannFrechetObjective::egrad_ambient(const Matrix& X) const {
  Matrix g = Matrix::Zero(X.rows(), X.cols());
  for (const Matrix& S : members_) {
    SvdFactors f = svd(X.transpose() * S);
    for (Eigen::Index j = 0; j < f.sigma.size(); ++j) {
      if (f.sigma(j) >= kAngleClamp) continue;  // theta = 0 contributes nothing
      const double theta = std::acos(f.sigma(j));
      const double coeff = -2.0 * theta / std::sqrt(1.0 - f.sigma(j) * f.sigma(j));
      g += coeff * (S * f.V.col(j)) * f.U.col(j).transpose();
    }
  }
  return g / static_cast<double>(members_.size());
}

GrassmannPoint GrassmannFrechetObjective::init() const { return GrassmannPoint{members_[0]}; }

double grassmann_prototype_accuracy(const std::vector<GrassmannPoint>& prototypes,
                                    const std::vector<GrassmannSample>& samples) {
  if (samples.empty()) return 0.0;
  int hits = 0;
  for (const auto& s : samples) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < prototypes.size(); ++c) {
      const double d = grassmann_dist_sq(prototypes[c].X, s.S);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    hits += (best == s.label) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Stiefel sub-center prototypes

StiefelProtoInstance gen_stiefel_proto(int m, int C, int q, int per_class_train,
                                       int per_class_test, double margin, double gamma,
                                       double spread, std::uint64_t seed) {
  if (m < 1 || C < 1 || q < 1 || C * q > m) throw InvalidInput("gen_stiefel_proto: bad sizes");
  std::mt19937_64 rng(seed);
  StiefelProtoInstance inst;
  inst.m = m;
  inst.C = C;
  inst.q = q;
  inst.margin = margin;
  inst.gamma = gamma;
  inst.spread = spread;
  inst.seed = seed;

  inst.centers = Matrix(m, C * q);
  for (int j = 0; j < C * q; ++j) {
    Vector v = randn_mat(m, 1, rng).col(0);
    inst.centers.col(j) = v / v.norm();
  }
  std::uniform_int_distribution<int> sub(0, q - 1);
  auto draw = [&](std::vector<StiefelFeature>& out, int count) {
    for (int c = 0; c < C; ++c) {
      for (int i = 0; i < count; ++i) {
        Vector v = inst.centers.col(c * q + sub(rng)) +
                   spread * randn_mat(m, 1, rng).col(0);
        out.push_back(StiefelFeature{v / v.norm(), c});
      }
    }
  };
  draw(inst.train, per_class_train);
  draw(inst.test, per_class_test);
  return inst;
}

namespace {

// Best sub-center score and its column index; ties break to the lowest index.
std::pair<double, int> subcenter_score(const Vector& h, const Matrix& X, int c, int q) {
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int j = 0; j < q; ++j) {
    const double s = h.dot(X.col(c * q + j));
    if (s > best) {
      best = s;
      arg = c * q + j;
    }
  }
  return {best, arg};
}

}  // namespace

double StiefelProtoObjective::value_ambient(const Matrix& X) const {
  const int C = inst_.C;
  double acc = 0.0;
  for (const auto& f : inst_.train) {
    Vector logits(C);
    for (int c = 0; c < C; ++c) {
      logits(c) = subcenter_score(f.h, X, c, inst_.q).first;
    }
    logits(f.label) -= inst_.margin;
    acc += cross_entropy(inst_.gamma * logits, f.label);
  }
  return acc / static_cast<double>(inst_.train.size());
}

Matrix StiefelProtoObjective::egrad_ambient(const Matrix& X) const {
  const int C = inst_.C;
  const int N = static_cast<int>(inst_.train.size());
  Matrix g = Matrix::Zero(X.rows(), X.cols());
  for (const auto& f : inst_.train) {
    Vector logits(C);
    std::vector<int> argmax(C);
    for (int c = 0; c < C; ++c) {
      auto [s, arg] = subcenter_score(f.h, X, c, inst_.q);
      logits(c) = s;
      argmax[c] = arg;
    }
    logits(f.label) -= inst_.margin;
    Vector p = softmax_probs(inst_.gamma * logits);
    for (int c = 0; c < C; ++c) {
      const double coeff = inst_.gamma * (p(c) - (c == f.label ? 1.0 : 0.0)) / N;
      g.col(argmax[c]) += coeff * f.h;
    }
  }
  return g;
}

StiefelPoint StiefelProtoObjective::init() const { return StiefelPoint{thin_qr(inst_.centers).Q}; }

double StiefelProtoObjective::accuracy(const StiefelPoint& x,
                                       const std::vector<StiefelFeature>& samples) const {
  if (samples.empty()) return 0.0;
  int hits = 0;
  for (const auto& f : samples) {
    int best_c = 0;
    double best_s = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < inst_.C; ++c) {
      const double s = subcenter_score(f.h, x.X, c, inst_.q).first;
      if (s > best_s) {
        best_s = s;
        best_c = c;
      }
    }
    hits += (best_c == f.label) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

}  // namespace imuon
