#include "imuon/norms.hpp"

#include "imuon/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace imuon {

namespace {

constexpr double kSchattenMaxP = 64.0;

void require_sorted_nonneg(const Vector& sigma) {
  require_finite(sigma, "vector_lmo sigma");
  if (sigma.size() == 0) throw InvalidInput("sigma is empty");
  const double head = sigma(0);
  const double slack = 1e-12 * std::max(1.0, std::abs(head));
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) < -slack) throw InvalidInput("sigma has negative entries");
    if (i > 0 && sigma(i) > sigma(i - 1) + slack) {
      throw InvalidInput("sigma is not sorted nonincreasing");
    }
  }
}

// Routes coincident parameterizations onto one code path so the outputs are
// bit-identical: kyfan(1) and schatten(1) are nuclear, kyfan(>=dim) is
// spectral, schatten(2) is frobenius.
NormFamily effective_family(const NormSpec& norm, Eigen::Index dim) {
  switch (norm.family) {
    case NormFamily::KyFan:
      if (norm.k <= 1) return NormFamily::Nuclear;
      if (norm.k >= dim) return NormFamily::Spectral;
      return NormFamily::KyFan;
    case NormFamily::Schatten:
      if (norm.p == 1.0) return NormFamily::Nuclear;
      if (norm.p == 2.0) return NormFamily::Frobenius;
      return NormFamily::Schatten;
    default:
      return norm.family;
  }
}

VectorLmoResult lmo_spectral(const Vector& sigma, double tau) {
  Vector z = Vector::Constant(sigma.size(), tau);
  return VectorLmoResult{z, tau * sigma.sum()};
}

VectorLmoResult lmo_frobenius(const Vector& sigma, double tau) {
  const double n2 = sigma.norm();
  if (n2 == 0.0) return VectorLmoResult{Vector::Zero(sigma.size()), 0.0};
  return VectorLmoResult{(tau / n2) * sigma, tau * n2};
}

VectorLmoResult lmo_nuclear(const Vector& sigma, double tau) {
  Vector z = Vector::Zero(sigma.size());
  if (sigma(0) == 0.0) return VectorLmoResult{z, 0.0};
  z(0) = tau;
  return VectorLmoResult{z, tau * sigma(0)};
}

VectorLmoResult lmo_kyfan(const Vector& sigma, int k, double tau) {
  Vector z = Vector::Zero(sigma.size());
  double value = 0.0;
  const Eigen::Index count = std::min<Eigen::Index>(k, sigma.size());
  for (Eigen::Index i = 0; i < count; ++i) {
    z(i) = tau;
    value += tau * sigma(i);
  }
  return VectorLmoResult{z, value};
}

VectorLmoResult lmo_schatten(const Vector& sigma, double p, double tau) {
  const double sig1 = sigma(0);
  if (sig1 == 0.0) return VectorLmoResult{Vector::Zero(sigma.size()), 0.0};
  const double q = p / (p - 1.0);
  // Work on sigma / sigma_1 to keep powers in range for large q.
  Vector shat = sigma / sig1;
  Vector w = shat.array().pow(q - 1.0);
  const double wp = std::pow(w.array().pow(p).sum(), 1.0 / p);
  Vector z = (tau / wp) * w;
  const double value = tau * sig1 * std::pow(shat.array().pow(q).sum(), 1.0 / q);
  return VectorLmoResult{z, value};
}

// Greedy allocation over the intersection {z_i <= ts, sum z <= tn}.
VectorLmoResult lmo_specnuc(const Vector& sigma, double ts, double tn) {
  Vector z = Vector::Zero(sigma.size());
  double budget = tn;
  double value = 0.0;
  for (Eigen::Index i = 0; i < sigma.size() && budget > 0.0; ++i) {
    const double zi = std::min(ts, budget);
    z(i) = zi;
    value += zi * sigma(i);
    budget -= zi;
  }
  return VectorLmoResult{z, value};
}

}  // namespace

void NormSpec::validate() const {
  switch (family) {
    case NormFamily::KyFan:
      if (k < 1) throw InvalidInput("kyfan: k must be >= 1");
      break;
    case NormFamily::Schatten:
      if (!(p >= 1.0 && p <= kSchattenMaxP)) {
        throw InvalidInput("schatten: p must lie in [1, 64]; use spectral for p = inf");
      }
      break;
    case NormFamily::SpecNuc:
      if (!(tau_spec > 0.0) || !(tau_nuc > 0.0)) {
        throw InvalidInput("specnuc: budgets must be positive");
      }
      break;
    default:
      break;
  }
}

std::string NormSpec::to_string() const {
  std::ostringstream out;
  switch (family) {
    case NormFamily::Spectral: return "spectral";
    case NormFamily::Frobenius: return "frobenius";
    case NormFamily::Nuclear: return "nuclear";
    case NormFamily::KyFan:
      out << "kyfan:k=" << k;
      return out.str();
    case NormFamily::Schatten:
      out << "schatten:p=" << p;
      return out.str();
    case NormFamily::SpecNuc:
      out << "specnuc:ts=" << tau_spec << ",tn=" << tau_nuc;
      return out.str();
  }
  return "spectral";
}

NormSpec NormSpec::parse(const std::string& text) {
  auto parse_params = [](const std::string& body) {
    std::vector<std::pair<std::string, double>> kv;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw InvalidInput("norm parameter without '=': " + item);
      kv.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
    }
    return kv;
  };

  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  NormSpec spec;
  if (name == "spectral") {
    spec = spectral();
  } else if (name == "frobenius") {
    spec = frobenius();
  } else if (name == "nuclear") {
    spec = nuclear();
  } else if (name == "kyfan") {
    spec.family = NormFamily::KyFan;
    spec.k = 0;
  } else if (name == "schatten") {
    spec.family = NormFamily::Schatten;
    spec.p = 0.0;
  } else if (name == "specnuc") {
    spec.family = NormFamily::SpecNuc;
  } else {
    throw InvalidInput("unknown norm family: " + name);
  }
  if (colon != std::string::npos) {
    for (const auto& [key, val] : parse_params(text.substr(colon + 1))) {
      if (key == "k") {
        spec.k = static_cast<int>(val);
      } else if (key == "p") {
        spec.p = val;
      } else if (key == "ts") {
        spec.tau_spec = val;
      } else if (key == "tn") {
        spec.tau_nuc = val;
      } else {
        throw InvalidInput("unknown norm parameter: " + key);
      }
    }
  }
  spec.validate();
  return spec;
}

VectorLmoResult vector_lmo(const Vector& sigma, const NormSpec& norm, double tau) {
  norm.validate();
  require_sorted_nonneg(sigma);
  if (norm.family != NormFamily::SpecNuc && !(tau > 0.0)) {
    throw InvalidInput("vector_lmo: tau must be positive");
  }
  if (sigma(0) <= 0.0) {
    return VectorLmoResult{Vector::Zero(sigma.size()), 0.0};  // zero gradient
  }
  switch (effective_family(norm, sigma.size())) {
    case NormFamily::Spectral: return lmo_spectral(sigma, tau);
    case NormFamily::Frobenius: return lmo_frobenius(sigma, tau);
    case NormFamily::Nuclear: return lmo_nuclear(sigma, tau);
    case NormFamily::KyFan: return lmo_kyfan(sigma, norm.k, tau);
    case NormFamily::Schatten: return lmo_schatten(sigma, norm.p, tau);
    case NormFamily::SpecNuc: return lmo_specnuc(sigma, norm.tau_spec, norm.tau_nuc);
  }
  throw InvalidInput("vector_lmo: unreachable");
}

double dual_norm(const Vector& sigma, const NormSpec& norm) {
  norm.validate();
  require_sorted_nonneg(sigma);
  switch (effective_family(norm, sigma.size())) {
    case NormFamily::Spectral:
      return sigma.sum();
    case NormFamily::Frobenius:
      return sigma.norm();
    case NormFamily::Nuclear:
      return sigma(0);
    case NormFamily::KyFan:
      return sigma.head(std::min<Eigen::Index>(norm.k, sigma.size())).sum();
    case NormFamily::Schatten: {
      if (sigma(0) == 0.0) return 0.0;
      const double q = norm.p / (norm.p - 1.0);
      Vector shat = sigma / sigma(0);
      return sigma(0) * std::pow(shat.array().pow(q).sum(), 1.0 / q);
    }
    case NormFamily::SpecNuc:
      throw InvalidInput("specnuc exposes no standalone dual norm");
  }
  throw InvalidInput("dual_norm: unreachable");
}

double norm_gauge(const Vector& z, const NormSpec& norm) {
  norm.validate();
  require_finite(z, "norm_gauge");
  const double linf = z.size() ? z.cwiseAbs().maxCoeff() : 0.0;
  const double l1 = z.cwiseAbs().sum();
  switch (effective_family(norm, z.size())) {
    case NormFamily::Spectral:
      return linf;
    case NormFamily::Frobenius:
      return z.norm();
    case NormFamily::Nuclear:
      return l1;
    case NormFamily::KyFan:
      return std::max(linf, l1 / static_cast<double>(norm.k));
    case NormFamily::Schatten:
      return linf == 0.0 ? 0.0
                         : linf * std::pow((z / linf).array().abs().pow(norm.p).sum(),
                                           1.0 / norm.p);
    case NormFamily::SpecNuc:
      return std::max(linf / norm.tau_spec, l1 / norm.tau_nuc);
  }
  throw InvalidInput("norm_gauge: unreachable");
}

MatrixLmoResult matrix_lmo(const Matrix& H, const NormSpec& norm, double tau) {
  SvdFactors f = svd(H);
  VectorLmoResult vec = vector_lmo(f.sigma, norm, tau);
  const double cutoff = tolerances::eig_zero_factor * f.sigma(0);
  Vector z = vec.z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (f.sigma(i) <= cutoff) z(i) = 0.0;
  }
  return MatrixLmoResult{f.U * z.asDiagonal() * f.V.transpose(), vec.value};
}

namespace {

// Per-block constants for the decoupled families. A block is either a full
// matrix space with d singular values, the symmetric space Sym(n) (d free
// eigenvalue magnitudes), or Skew(r) whose singular values move in equal
// pairs.
double block_c_full(const NormSpec& norm, int d) {
  switch (effective_family(norm, d)) {
    case NormFamily::Spectral: return static_cast<double>(d);
    case NormFamily::Frobenius: return 1.0;
    case NormFamily::Nuclear: return 1.0;
    case NormFamily::KyFan: return static_cast<double>(std::min(norm.k, d));
    case NormFamily::Schatten:
      return (norm.p <= 2.0) ? 1.0 : std::pow(static_cast<double>(d), 1.0 - 2.0 / norm.p);
    default: return 0.0;
  }
}

double block_c_skew(const NormSpec& norm, int r) {
  const int pairs = r / 2;
  const int d = 2 * pairs;  // paired singular values; odd r pins one at zero
  if (pairs == 0) return 0.0;
  switch (effective_family(norm, r)) {
    case NormFamily::Spectral: return static_cast<double>(d);
    case NormFamily::Frobenius: return 1.0;
    case NormFamily::Nuclear: return 1.0;  // per-block O(1) accounting
    case NormFamily::KyFan: {
      const int keff = std::min(norm.k, d);
      return static_cast<double>(2 * (keff / 2)) + ((keff % 2) ? 0.5 : 0.0);
    }
    case NormFamily::Schatten:
      return (norm.p <= 2.0) ? std::pow(2.0, 1.0 - 2.0 / norm.p)
                             : std::pow(static_cast<double>(d), 1.0 - 2.0 / norm.p);
    default: return 0.0;
  }
}

}  // namespace

std::optional<double> c_phi_analytic(const NormSpec& norm, ManifoldKind kind,
                                     const ManifoldDims& dims) {
  norm.validate();
  if (norm.family == NormFamily::SpecNuc) return std::nullopt;
  const bool frob = (norm.family == NormFamily::Frobenius) ||
                    (norm.family == NormFamily::Schatten && norm.p == 2.0);
  if (frob) return 1.0;  // joint Riemannian norm on every manifold

  switch (kind) {
    case ManifoldKind::FixedRank: {
      const int r = dims.r;
      // Pinned O(1) value for nuclear (one per decoupled block).
      if (norm.family == NormFamily::Nuclear ||
          (norm.family == NormFamily::Schatten && norm.p == 1.0) ||
          (norm.family == NormFamily::KyFan && norm.k == 1)) {
        return 2.0;
      }
      return 2.0 * block_c_full(norm, r);
    }
    case ManifoldKind::Spd:
      return block_c_full(norm, dims.n);
    case ManifoldKind::Stiefel: {
      const int r = dims.r;
      const int nd = std::min(dims.m - r, r);
      if (norm.family == NormFamily::Nuclear ||
          (norm.family == NormFamily::Schatten && norm.p == 1.0) ||
          (norm.family == NormFamily::KyFan && norm.k == 1)) {
        return 2.0;
      }
      return block_c_skew(norm, r) + block_c_full(norm, nd);
    }
    case ManifoldKind::Grassmann:
      return block_c_full(norm, std::min(dims.m - dims.r, dims.r));
  }
  return std::nullopt;
}

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::FixedRank: return "fixedrank";
    case ManifoldKind::Spd: return "spd";
    case ManifoldKind::Stiefel: return "stiefel";
    case ManifoldKind::Grassmann: return "grassmann";
  }
  return "fixedrank";
}

ManifoldKind manifold_kind_from_string(const std::string& s) {
  if (s == "fixedrank" || s == "fixed-rank") return ManifoldKind::FixedRank;
  if (s == "spd") return ManifoldKind::Spd;
  if (s == "stiefel") return ManifoldKind::Stiefel;
  if (s == "grassmann") return ManifoldKind::Grassmann;
  throw InvalidInput("unknown manifold: " + s);
}

}  // namespace imuon
