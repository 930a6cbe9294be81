#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace imuon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy shared by all modules.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RankDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceFailure : std::runtime_error {
  double residual;
  ConvergenceFailure(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
};

enum class ManifoldKind { FixedRank, Spd, Stiefel, Grassmann };

std::string to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(const std::string& s);

// Shape descriptor used for analytic constants. For FixedRank all of
// (m, n, r) are meaningful; Spd uses n only; Stiefel/Grassmann use (m, r).
struct ManifoldDims {
  int m = 0;
  int n = 0;
  int r = 0;
};

// Module tolerance constants. Overridable once at startup (CLI config);
// not synchronized, so set them before spawning workers.
namespace tolerances {
inline double eig_zero_factor = 1e-12;   // |lambda| <= factor*max|lambda| -> 0
inline double spd_floor_factor = 1e-12;  // lambda_min <= factor*trace/n -> reject
inline double qr_rank_factor = 1e-12;    // |R_ii| <= factor*||M||_F -> rank deficient
inline int newton_schulz_max_iters = 15;
inline double newton_schulz_tol = 1e-8;
}  // namespace tolerances

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entries");
  }
}

inline void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entries");
  }
}

}  // namespace imuon
