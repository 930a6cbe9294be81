// Command-line driver: verification suites and desk-scale experiments with
// CSV/JSONL artifacts. See README.md for the column and format reference.

#include "CLI11.hpp"

#include "imuon/baselines.hpp"
#include "imuon/io.hpp"
#include "imuon/matcore.hpp"
#include "imuon/oracle.hpp"
#include "imuon/problems.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

using namespace imuon;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

// ---------------------------------------------------------------------------
// Method dispatch

enum class MethodFamily { Intrinsic, Euclid, FactorMuon, Spectron, ScaledGd };

struct Method {
  std::string tag;
  MethodFamily family = MethodFamily::Intrinsic;
  NormSpec norm;
};

Method resolve_method(const std::string& tag) {
  if (tag == "rgd") return {tag, MethodFamily::Intrinsic, NormSpec::frobenius()};
  if (tag == "imuon") return {tag, MethodFamily::Intrinsic, NormSpec::spectral()};
  if (tag == "imuon-nu") return {tag, MethodFamily::Intrinsic, NormSpec::nuclear()};
  if (tag == "egd") return {tag, MethodFamily::Euclid, NormSpec::frobenius()};
  if (tag == "numuon") return {tag, MethodFamily::Euclid, NormSpec::nuclear()};
  if (tag == "muon" || tag == "fw-muon") {
    return {tag, MethodFamily::FactorMuon, NormSpec::spectral()};
  }
  if (tag == "spectron") return {tag, MethodFamily::Spectron, NormSpec::spectral()};
  if (tag == "scaledgd") return {tag, MethodFamily::ScaledGd, NormSpec::frobenius()};
  if (tag.rfind("intrinsic:", 0) == 0) {
    return {tag, MethodFamily::Intrinsic, NormSpec::parse(tag.substr(10))};
  }
  if (tag.rfind("euclid:", 0) == 0) {
    return {tag, MethodFamily::Euclid, NormSpec::parse(tag.substr(7))};
  }
  throw InvalidInput("unknown method tag: " + tag);
}

// One optimizer step of the requested method; returns the next point.
ManifoldPoint method_step(const Method& method, const ManifoldPoint& x, const Matrix& egrad,
                          double tau, double eta, LmoResult* lmo_out) {
  switch (method.family) {
    case MethodFamily::Intrinsic: {
      LmoResult lmo = lmo_direction(x, egrad, method.norm, tau);
      ManifoldPoint next = retract(x, scale_tangent(lmo.xi_star, -1.0), eta);
      if (lmo_out) *lmo_out = std::move(lmo);
      return next;
    }
    case MethodFamily::Euclid:
      return euclid_lmo_step(x, egrad, method.norm, tau, eta);
    case MethodFamily::FactorMuon:
      if (std::holds_alternative<FixedRankPoint>(x)) {
        return factorwise_muon_step(std::get<FixedRankPoint>(x), egrad, tau, eta);
      }
      return euclid_lmo_step(x, egrad, NormSpec::spectral(), tau, eta);
    case MethodFamily::Spectron: {
      const auto& fr = std::get<FixedRankPoint>(x);
      return spectron_step(fr, egrad * fr.A.transpose(), fr.B.transpose() * egrad, eta);
    }
    case MethodFamily::ScaledGd: {
      const auto& fr = std::get<FixedRankPoint>(x);
      FixedRankTangent dir = scaledgd_direction(fr, egrad);
      return FixedRankPoint{fr.B - eta * dir.Bdot, fr.A - eta * dir.Adot};
    }
  }
  throw InvalidInput("unreachable");
}

// ---------------------------------------------------------------------------
// Cell runner shared by the experiment subcommands

struct CellOutcome {
  std::vector<TrajectoryRecord> trajectory;
  ManifoldPoint final_point;
  std::string status = "ok";
  int iters_run = 0;
  double final_f = std::numeric_limits<double>::quiet_NaN();
  double min_h_dual = std::numeric_limits<double>::quiet_NaN();
};

struct CellParams {
  Method method;
  double tau = 1.0;
  double lr = 1.0;
  bool decaying = true;  // eta_t = lr / sqrt(t + 1), else constant lr
  int iters = 100;
  int record_every = 1;
};

CellOutcome run_cell(const Objective& problem, const ManifoldPoint& x0, const CellParams& p,
                     const std::function<void(int, const ManifoldPoint&)>& per_iter = {}) {
  CellOutcome out{{}, x0, "ok", 0, std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN()};
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };
  ManifoldPoint x = x0;
  double min_h = std::numeric_limits<double>::infinity();
  try {
    for (int t = 0; t < p.iters; ++t) {
      const double f = problem.value(x);
      if (!std::isfinite(f)) {
        out.status = "diverged";
        break;
      }
      const Matrix egrad = problem.euclidean_grad(x);
      const double eta = p.decaying ? p.lr / std::sqrt(t + 1.0) : p.lr;
      LmoResult lmo{zero_tangent(x), 0.0, 0.0, 0.0};
      const bool record = (t % p.record_every == 0);
      double h_dual = 0.0;
      if (record) {
        h_dual = scaled_dual_max(x, egrad, p.method.norm);
        min_h = std::min(min_h, h_dual);
      }
      x = method_step(p.method, x, egrad, p.tau, eta, &lmo);
      if (record) {
        out.trajectory.push_back(
            TrajectoryRecord{t, f, lmo.dual_value, h_dual, lmo.riem_norm_sq, eta, elapsed()});
      }
      out.iters_run = t + 1;
      if (per_iter) per_iter(t + 1, x);
    }
  } catch (const NotPositiveDefinite&) {
    out.status = "left_cone";
  } catch (const RankDeficient&) {
    out.status = "rank_deficient";
  }
  const double f_final = problem.value(x);
  if (!std::isfinite(f_final) && out.status == "ok") out.status = "diverged";
  if (std::isfinite(f_final)) {
    const Matrix g_final = problem.euclidean_grad(x);
    const double h_final = scaled_dual_max(x, g_final, p.method.norm);
    min_h = std::min(min_h, h_final);
    out.trajectory.push_back(TrajectoryRecord{
        out.iters_run, f_final, 0.0, h_final, 0.0,
        p.decaying ? p.lr / std::sqrt(out.iters_run + 1.0) : p.lr, elapsed()});
  }
  out.final_point = x;
  out.final_f = f_final;
  out.min_h_dual = std::isfinite(min_h) ? min_h : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// ---------------------------------------------------------------------------
// Summary CSV

struct SummaryRow {
  std::string experiment, method, norm, dims, status;
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();
  double lr = 0.0;
  std::uint64_t seed = 0;
  int iters = 0;
  double final_f = std::numeric_limits<double>::quiet_NaN();
  double final_error = std::numeric_limits<double>::quiet_NaN();
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
  double min_h_dual = std::numeric_limits<double>::quiet_NaN();
  int iters_to_1e2 = -1;
  int iters_to_1e3 = -1;
  double wall_time_s = 0.0;
};

const char* kSummaryHeader =
    "experiment,method,norm,dims,kappa,rho,lr,seed,status,iters,final_f,final_error,"
    "test_accuracy,min_H_dual,iters_to_1e2,iters_to_1e3,wall_time_s";

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string to_csv(const SummaryRow& r) {
  std::ostringstream out;
  out << r.experiment << "," << r.method << "," << r.norm << "," << r.dims << ","
      << csv_num(r.kappa) << "," << csv_num(r.rho) << "," << csv_num(r.lr) << "," << r.seed
      << "," << r.status << "," << r.iters << "," << csv_num(r.final_f) << ","
      << csv_num(r.final_error) << "," << csv_num(r.test_accuracy) << ","
      << csv_num(r.min_h_dual) << "," << r.iters_to_1e2 << "," << r.iters_to_1e3 << ","
      << csv_num(r.wall_time_s);
  return out.str();
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ':' || c == ',' || c == '=' || c == '/') c = '-';
  }
  return s;
}

// Deterministic per-cell output directory name.
std::string cell_name(const SummaryRow& r) {
  std::ostringstream out;
  out << sanitize(r.method);
  if (!std::isnan(r.kappa)) out << "_k" << r.kappa;
  if (!std::isnan(r.rho)) out << "_rho" << r.rho;
  out << "_lr" << r.lr << "_seed" << r.seed;
  return out.str();
}

void run_pool(int workers, int cells, const std::function<void(int)>& work) {
  if (workers <= 1) {
    for (int i = 0; i < cells; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < cells; i = next.fetch_add(1)) work(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> seeds = {"0", "1", "2"};
  int workers = 1;
  int record_every = 10;
  double tau = 1.0;
};

ConfigMap resolved_config(const CommonOpts& common, const std::string& experiment,
                          const std::vector<std::pair<std::string, std::string>>& extra) {
  ConfigMap cfg;
  if (!common.config_path.empty()) cfg = load_config(common.config_path);
  cfg.set("experiment", experiment);
  cfg.set("out", common.out_dir);
  cfg.set("workers", std::to_string(common.workers));
  cfg.set("record_every", std::to_string(common.record_every));
  cfg.set("tau", csv_num(common.tau));
  std::string seed_list;
  for (const auto& s : common.seeds) seed_list += (seed_list.empty() ? "" : ",") + s;
  cfg.set("seeds", seed_list);
  for (const auto& [k, v] : extra) cfg.set(k, v);
  return cfg;
}

void write_outputs(const std::filesystem::path& out_dir, const ConfigMap& cfg,
                   const std::vector<SummaryRow>& rows,
                   const std::vector<std::vector<TrajectoryRecord>>& trajectories) {
  std::filesystem::create_directories(out_dir / "cells");
  {
    std::ofstream out(out_dir / "config.resolved");
    out << cfg.to_text();
  }
  std::ofstream csv(out_dir / "summary.csv");
  csv << kSummaryHeader << "\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    csv << to_csv(rows[i]) << "\n";
    const auto dir = out_dir / "cells" / cell_name(rows[i]);
    std::filesystem::create_directories(dir);
    ConfigMap cell_cfg = cfg;
    cell_cfg.set("cell.method", rows[i].method);
    cell_cfg.set("cell.lr", csv_num(rows[i].lr));
    cell_cfg.set("cell.seed", std::to_string(rows[i].seed));
    if (!std::isnan(rows[i].kappa)) cell_cfg.set("cell.kappa", csv_num(rows[i].kappa));
    if (!std::isnan(rows[i].rho)) cell_cfg.set("cell.rho", csv_num(rows[i].rho));
    write_trajectory_jsonl(dir / "trajectory.jsonl", trajectories[i], cell_cfg,
                           rows[i].status);
  }
}

// Best lr per method by mean final_error (falling back to final_f).
void write_best_lr(const std::filesystem::path& out_dir, const std::vector<SummaryRow>& rows) {
  std::map<std::string, std::map<double, std::pair<double, int>>> agg;
  for (const auto& r : rows) {
    const double metric = std::isnan(r.final_error) ? r.final_f : r.final_error;
    if (std::isnan(metric)) continue;
    auto& cell = agg[r.method][r.lr];
    cell.first += metric;
    cell.second += 1;
  }
  std::ofstream out(out_dir / "best_lr.csv");
  out << "method,best_lr,mean_metric\n";
  for (const auto& [method, by_lr] : agg) {
    double best_lr = 0.0, best_metric = std::numeric_limits<double>::infinity();
    for (const auto& [lr, sum_n] : by_lr) {
      const double mean = sum_n.first / sum_n.second;
      if (mean < best_metric) {
        best_metric = mean;
        best_lr = lr;
      }
    }
    out << method << "," << csv_num(best_lr) << "," << csv_num(best_metric) << "\n";
  }
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const CommonOpts& common, const std::string& manifold_filter,
               const std::string& norm_filter, int trials, int oracle_trials,
               std::uint64_t seed, double tolerance_override) {
  std::vector<std::pair<ManifoldKind, ManifoldDims>> cells = {
      {ManifoldKind::FixedRank, {12, 10, 4}},
      {ManifoldKind::Spd, {8, 8, 0}},
      {ManifoldKind::Stiefel, {10, 0, 3}},
      {ManifoldKind::Grassmann, {10, 0, 3}},
  };
  std::vector<NormSpec> norms = {NormSpec::spectral(), NormSpec::frobenius(),
                                 NormSpec::nuclear(), NormSpec::kyfan(2),
                                 NormSpec::schatten(4.0)};
  if (!manifold_filter.empty()) {
    const ManifoldKind want = manifold_kind_from_string(manifold_filter);
    std::erase_if(cells, [&](const auto& c) { return c.first != want; });
  }
  if (!norm_filter.empty()) {
    const NormSpec want = NormSpec::parse(norm_filter);
    std::erase_if(norms, [&](const NormSpec& n) { return n.to_string() != want.to_string(); });
  }

  std::vector<CheckReport> checks;
  for (const auto& [kind, dims] : cells) {
    for (const auto& norm : norms) {
      auto suite = invariance_suite(kind, dims, norm, 1.0, trials, seed);
      checks.insert(checks.end(), suite.begin(), suite.end());
    }
    for (const auto& norm :
         {NormSpec::spectral(), NormSpec::frobenius(), NormSpec::nuclear()}) {
      if (!norm_filter.empty() &&
          norm.to_string() != NormSpec::parse(norm_filter).to_string()) {
        continue;
      }
      checks.push_back(
          oracle_agreement_check(kind, dims, norm, 1.0, oracle_trials, seed, 1e-6));
    }
  }
  if (tolerance_override > 0.0) {
    for (auto& c : checks) {
      c.tolerance = tolerance_override;
      c.pass = c.worst_residual <= c.tolerance;
    }
  }

  std::filesystem::create_directories(common.out_dir);
  write_verify_report(std::filesystem::path(common.out_dir) / "verify_report.json", checks);
  int failed = 0;
  for (const auto& c : checks) {
    if (!c.pass) {
      ++failed;
      std::cout << "FAIL " << c.name << " worst " << c.worst_residual << " tol "
                << c.tolerance << "\n";
    }
  }
  std::cout << "verify: " << (checks.size() - failed) << "/" << checks.size()
            << " checks passed; report at " << common.out_dir << "/verify_report.json\n";
  return failed == 0 ? kExitOk : kExitCheckFailure;
}

// ---------------------------------------------------------------------------
// complete

int cmd_complete(const CommonOpts& common, int m, int n, int r, double s,
                 const std::vector<double>& kappas, const std::vector<double>& rhos,
                 const std::vector<std::string>& methods, const std::vector<double>& lrs,
                 int iters, double alpha, bool save_instances) {
  struct Cell {
    double kappa, rho, lr;
    std::uint64_t seed;
    Method method;
  };
  std::vector<Cell> cells;
  for (double kappa : kappas) {
    for (double rho : rhos) {
      for (const auto& tag : methods) {
        for (double lr : lrs) {
          for (const auto& seed_text : common.seeds) {
            cells.push_back(Cell{kappa, rho, lr,
                                 static_cast<std::uint64_t>(std::stoull(seed_text)),
                                 resolve_method(tag)});
          }
        }
      }
    }
  }
  std::vector<SummaryRow> rows(cells.size());
  std::vector<std::vector<TrajectoryRecord>> trajectories(cells.size());

  run_pool(common.workers, static_cast<int>(cells.size()), [&](int idx) {
    const Cell& cell = cells[idx];
    CompletionObjective obj(gen_completion(m, n, r, s, cell.kappa, cell.rho, cell.seed));
    FixedRankPoint x0 = obj.spectral_init();
    if (alpha != 1.0) {
      x0.B *= alpha;
      x0.A /= alpha;
    }
    int hit_1e2 = -1, hit_1e3 = -1;
    auto track = [&](int t, const ManifoldPoint& x) {
      const double err = obj.relative_error(std::get<FixedRankPoint>(x));
      if (hit_1e2 < 0 && err <= 1e-2) hit_1e2 = t;
      if (hit_1e3 < 0 && err <= 1e-3) hit_1e3 = t;
    };
    CellParams params{cell.method, common.tau, cell.lr, true, iters, common.record_every};
    CellOutcome out = run_cell(obj, ManifoldPoint{x0}, params, track);

    SummaryRow row;
    row.experiment = "complete";
    row.method = cell.method.tag;
    row.norm = cell.method.norm.to_string();
    row.dims = std::to_string(m) + "x" + std::to_string(n) + "r" + std::to_string(r);
    row.kappa = cell.kappa;
    row.rho = cell.rho;
    row.lr = cell.lr;
    row.seed = cell.seed;
    row.status = out.status;
    row.iters = out.iters_run;
    row.final_f = out.final_f;
    row.final_error = obj.relative_error(std::get<FixedRankPoint>(out.final_point));
    row.min_h_dual = out.min_h_dual;
    row.iters_to_1e2 = hit_1e2;
    row.iters_to_1e3 = hit_1e3;
    row.wall_time_s = out.trajectory.empty() ? 0.0 : out.trajectory.back().wall_time;
    rows[idx] = row;
    trajectories[idx] = std::move(out.trajectory);
  });

  ConfigMap cfg = resolved_config(common, "complete",
                                  {{"complete.m", std::to_string(m)},
                                   {"complete.n", std::to_string(n)},
                                   {"complete.r", std::to_string(r)},
                                   {"complete.s", csv_num(s)},
                                   {"complete.iters", std::to_string(iters)},
                                   {"complete.alpha", csv_num(alpha)}});
  write_outputs(common.out_dir, cfg, rows, trajectories);
  write_best_lr(common.out_dir, rows);
  if (save_instances) {
    for (double kappa : kappas) {
      for (double rho : rhos) {
        for (const auto& seed_text : common.seeds) {
          const auto seed = static_cast<std::uint64_t>(std::stoull(seed_text));
          std::ostringstream name;
          name << "instance_k" << kappa << "_rho" << rho << "_seed" << seed;
          save_completion_instance(std::filesystem::path(common.out_dir) / name.str(),
                                   gen_completion(m, n, r, s, kappa, rho, seed));
        }
      }
    }
  }
  std::cout << "complete: " << rows.size() << " cells -> " << common.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// spd / grassmann / stiefel classification experiments

int cmd_spd(const CommonOpts& common, int n, int K, int per_train, int per_test,
            double sigma_w, double beta, double lambda,
            const std::vector<std::string>& methods, const std::vector<double>& lrs,
            int iters, bool constant_lr) {
  struct Cell {
    double lr;
    std::uint64_t seed;
    Method method;
  };
  std::vector<Cell> cells;
  for (const auto& tag : methods) {
    for (double lr : lrs) {
      for (const auto& seed_text : common.seeds) {
        cells.push_back(Cell{lr, static_cast<std::uint64_t>(std::stoull(seed_text)),
                             resolve_method(tag)});
      }
    }
  }
  std::vector<SummaryRow> rows(cells.size());
  std::vector<std::vector<TrajectoryRecord>> trajectories(cells.size());

  run_pool(common.workers, static_cast<int>(cells.size()), [&](int idx) {
    const Cell& cell = cells[idx];
    SpdProtoObjective obj(
        gen_spd_proto(n, K, per_train, per_test, sigma_w, beta, lambda, cell.seed));
    CellParams params{cell.method, common.tau, cell.lr, !constant_lr, iters,
                      common.record_every};
    CellOutcome out = run_cell(obj, ManifoldPoint{obj.init()}, params);

    SummaryRow row;
    row.experiment = "spd";
    row.method = cell.method.tag;
    row.norm = cell.method.norm.to_string();
    row.dims = "n" + std::to_string(n) + "K" + std::to_string(K);
    row.lr = cell.lr;
    row.seed = cell.seed;
    row.status = out.status;
    row.iters = out.iters_run;
    row.final_f = out.final_f;
    if (std::holds_alternative<SpdPoint>(out.final_point)) {
      row.test_accuracy =
          obj.accuracy(std::get<SpdPoint>(out.final_point), obj.instance().test);
    }
    row.min_h_dual = out.min_h_dual;
    row.wall_time_s = out.trajectory.empty() ? 0.0 : out.trajectory.back().wall_time;
    rows[idx] = row;
    trajectories[idx] = std::move(out.trajectory);
  });

  ConfigMap cfg = resolved_config(common, "spd",
                                  {{"spd.n", std::to_string(n)},
                                   {"spd.K", std::to_string(K)},
                                   {"spd.per_class_train", std::to_string(per_train)},
                                   {"spd.per_class_test", std::to_string(per_test)},
                                   {"spd.iters", std::to_string(iters)}});
  write_outputs(common.out_dir, cfg, rows, trajectories);
  write_best_lr(common.out_dir, rows);
  std::cout << "spd: " << rows.size() << " cells -> " << common.out_dir << "\n";
  return kExitOk;
}

int cmd_grassmann(const CommonOpts& common, int m, int k, int K, int per_train, int per_test,
                  double spread, const std::vector<std::string>& methods,
                  const std::vector<double>& lrs, int iters) {
  struct Cell {
    double lr;
    std::uint64_t seed;
    Method method;
  };
  std::vector<Cell> cells;
  for (const auto& tag : methods) {
    for (double lr : lrs) {
      for (const auto& seed_text : common.seeds) {
        cells.push_back(Cell{lr, static_cast<std::uint64_t>(std::stoull(seed_text)),
                             resolve_method(tag)});
      }
    }
  }
  std::vector<SummaryRow> rows(cells.size());
  std::vector<std::vector<TrajectoryRecord>> trajectories(cells.size());

  run_pool(common.workers, static_cast<int>(cells.size()), [&](int idx) {
    const Cell& cell = cells[idx];
    GrassmannFrechetInstance inst =
        gen_grassmann_frechet(m, k, K, per_train, per_test, spread, cell.seed);
    CellParams params{cell.method, common.tau, cell.lr, true, iters, common.record_every};

    std::vector<GrassmannPoint> prototypes;
    std::vector<TrajectoryRecord> merged;
    std::string status = "ok";
    double f_sum = 0.0;
    for (int c = 0; c < K; ++c) {
      GrassmannFrechetObjective obj(inst, c);
      CellOutcome out = run_cell(obj, ManifoldPoint{obj.init()}, params);
      if (out.status != "ok") status = out.status;
      f_sum += out.final_f;
      prototypes.push_back(std::get<GrassmannPoint>(out.final_point));
      if (c == 0) merged = std::move(out.trajectory);  // class-0 trajectory as the sample
    }

    SummaryRow row;
    row.experiment = "grassmann";
    row.method = cell.method.tag;
    row.norm = cell.method.norm.to_string();
    row.dims = "m" + std::to_string(m) + "k" + std::to_string(k) + "K" + std::to_string(K);
    row.lr = cell.lr;
    row.seed = cell.seed;
    row.status = status;
    row.iters = iters;
    row.final_f = f_sum / K;
    row.test_accuracy = grassmann_prototype_accuracy(prototypes, inst.test);
    row.wall_time_s = merged.empty() ? 0.0 : merged.back().wall_time;
    rows[idx] = row;
    trajectories[idx] = std::move(merged);
  });

  ConfigMap cfg = resolved_config(common, "grassmann",
                                  {{"grassmann.m", std::to_string(m)},
                                   {"grassmann.k", std::to_string(k)},
                                   {"grassmann.K", std::to_string(K)},
                                   {"grassmann.iters", std::to_string(iters)}});
  write_outputs(common.out_dir, cfg, rows, trajectories);
  write_best_lr(common.out_dir, rows);
  std::cout << "grassmann: " << rows.size() << " cells -> " << common.out_dir << "\n";
  return kExitOk;
}

int cmd_stiefel(const CommonOpts& common, int m, int C, int q, int per_train, int per_test,
                double margin, double gamma, double spread,
                const std::vector<std::string>& methods, const std::vector<double>& lrs,
                int iters) {
  struct Cell {
    double lr;
    std::uint64_t seed;
    Method method;
  };
  std::vector<Cell> cells;
  for (const auto& tag : methods) {
    for (double lr : lrs) {
      for (const auto& seed_text : common.seeds) {
        cells.push_back(Cell{lr, static_cast<std::uint64_t>(std::stoull(seed_text)),
                             resolve_method(tag)});
      }
    }
  }
  std::vector<SummaryRow> rows(cells.size());
  std::vector<std::vector<TrajectoryRecord>> trajectories(cells.size());

  run_pool(common.workers, static_cast<int>(cells.size()), [&](int idx) {
    const Cell& cell = cells[idx];
    StiefelProtoObjective obj(
        gen_stiefel_proto(m, C, q, per_train, per_test, margin, gamma, spread, cell.seed));
    CellParams params{cell.method, common.tau, cell.lr, true, iters, common.record_every};
    CellOutcome out = run_cell(obj, ManifoldPoint{obj.init()}, params);

    SummaryRow row;
    row.experiment = "stiefel";
    row.method = cell.method.tag;
    row.norm = cell.method.norm.to_string();
    row.dims = "m" + std::to_string(m) + "C" + std::to_string(C) + "q" + std::to_string(q);
    row.lr = cell.lr;
    row.seed = cell.seed;
    row.status = out.status;
    row.iters = out.iters_run;
    row.final_f = out.final_f;
    if (std::holds_alternative<StiefelPoint>(out.final_point)) {
      row.test_accuracy =
          obj.accuracy(std::get<StiefelPoint>(out.final_point), obj.instance().test);
    }
    row.min_h_dual = out.min_h_dual;
    row.wall_time_s = out.trajectory.empty() ? 0.0 : out.trajectory.back().wall_time;
    rows[idx] = row;
    trajectories[idx] = std::move(out.trajectory);
  });

  ConfigMap cfg = resolved_config(common, "stiefel",
                                  {{"stiefel.m", std::to_string(m)},
                                   {"stiefel.C", std::to_string(C)},
                                   {"stiefel.q", std::to_string(q)},
                                   {"stiefel.iters", std::to_string(iters)}});
  write_outputs(common.out_dir, cfg, rows, trajectories);
  write_best_lr(common.out_dir, rows);
  std::cout << "stiefel: " << rows.size() << " cells -> " << common.out_dir << "\n";
  return kExitOk;
}

std::vector<double> parse_doubles(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(std::stod(s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intrinsic norm-constrained LMO optimizers on matrix manifolds"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string config_path, seeds_csv, lr_csv, methods_csv, single_method, norm_filter,
      manifold_filter;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--seeds", seeds_csv, "comma-separated seed list");
    sub->add_option("--workers", common.workers, "worker threads for the run matrix");
    sub->add_option("--record-every", common.record_every, "trajectory record stride");
    sub->add_option("--tau", common.tau, "LMO radius");
    sub->add_option("--method", single_method, "run exactly one method tag");
  };

  auto* verify = app.add_subcommand("verify", "run invariance and oracle checks");
  add_common(verify);
  int v_trials = 15, v_oracle_trials = 5;
  std::uint64_t v_seed = 20240001;
  double v_tol_override = 0.0;
  verify->add_option("--manifold", manifold_filter, "restrict to one manifold");
  verify->add_option("--norm", norm_filter, "restrict to one norm spec");
  verify->add_option("--trials", v_trials, "random instances per check");
  verify->add_option("--oracle-trials", v_oracle_trials, "instances per oracle cell");
  verify->add_option("--seed", v_seed, "rng seed");
  verify->add_option("--tolerance-override", v_tol_override,
                     "override every check tolerance (diagnostics)");

  auto* complete = app.add_subcommand("complete", "synthetic fixed-rank matrix completion");
  add_common(complete);
  int c_m = 60, c_n = 60, c_r = 3, c_iters = 300;
  double c_s = 10.0, c_alpha = 1.0;
  std::string c_kappa_csv, c_rho_csv;
  bool c_save_instances = false;
  complete->add_option("--m", c_m);
  complete->add_option("--n", c_n);
  complete->add_option("--r", c_r);
  complete->add_option("--s", c_s, "oversampling ratio");
  complete->add_option("--kappa", c_kappa_csv, "condition numbers, comma list");
  complete->add_option("--rho", c_rho_csv, "noise scales, comma list");
  complete->add_option("--iters", c_iters);
  complete->add_option("--alpha", c_alpha, "factor imbalance of the initialization");
  complete->add_option("--methods", methods_csv, "method tags, comma list");
  complete->add_option("--lr", lr_csv, "learning-rate grid, comma list");
  complete->add_flag("--save-instances", c_save_instances, "serialize instances");

  auto* spd = app.add_subcommand("spd", "SPD prototype classification (synthetic)");
  add_common(spd);
  int s_n = 8, s_K = 3, s_train = 20, s_test = 20, s_iters = 150;
  double s_sigma_w = 0.3, s_beta = 8.0, s_lambda = 1e-3;
  bool s_constant_lr = false;
  spd->add_option("--n", s_n, "SPD size per prototype");
  spd->add_option("--K", s_K, "class count");
  spd->add_option("--per-class-train", s_train);
  spd->add_option("--per-class-test", s_test);
  spd->add_option("--sigma-w", s_sigma_w, "within-class spread");
  spd->add_option("--beta", s_beta, "logit scale");
  spd->add_option("--lambda", s_lambda, "anchor weight");
  spd->add_option("--iters", s_iters);
  spd->add_flag("--constant-lr", s_constant_lr);
  spd->add_option("--methods", methods_csv);
  spd->add_option("--lr", lr_csv);

  auto* grassmann = app.add_subcommand("grassmann", "Grassmann Frechet prototypes");
  add_common(grassmann);
  int g_m = 16, g_k = 3, g_K = 4, g_train = 10, g_test = 10, g_iters = 100;
  double g_spread = 0.3;
  grassmann->add_option("--m", g_m);
  grassmann->add_option("--k", g_k, "subspace dimension");
  grassmann->add_option("--K", g_K, "class count");
  grassmann->add_option("--per-class-train", g_train);
  grassmann->add_option("--per-class-test", g_test);
  grassmann->add_option("--spread", g_spread);
  grassmann->add_option("--iters", g_iters);
  grassmann->add_option("--methods", methods_csv);
  grassmann->add_option("--lr", lr_csv);

  auto* stiefel = app.add_subcommand("stiefel", "Stiefel sub-center prototypes");
  add_common(stiefel);
  int t_m = 32, t_C = 4, t_q = 2, t_train = 20, t_test = 20, t_iters = 150;
  double t_margin = 0.5, t_gamma = 64.0, t_spread = 0.3;
  stiefel->add_option("--m", t_m, "feature dimension");
  stiefel->add_option("--C", t_C, "class count");
  stiefel->add_option("--q", t_q, "sub-centers per class");
  stiefel->add_option("--per-class-train", t_train);
  stiefel->add_option("--per-class-test", t_test);
  stiefel->add_option("--margin", t_margin);
  stiefel->add_option("--gamma", t_gamma);
  stiefel->add_option("--spread", t_spread);
  stiefel->add_option("--iters", t_iters);
  stiefel->add_option("--methods", methods_csv);
  stiefel->add_option("--lr", lr_csv);

  auto* sweep = app.add_subcommand("sweep", "lr-grid sweep over the completion run matrix");
  add_common(sweep);
  sweep->add_option("--m", c_m);
  sweep->add_option("--n", c_n);
  sweep->add_option("--r", c_r);
  sweep->add_option("--s", c_s);
  sweep->add_option("--kappa", c_kappa_csv);
  sweep->add_option("--rho", c_rho_csv);
  sweep->add_option("--iters", c_iters);
  sweep->add_option("--alpha", c_alpha);
  sweep->add_option("--methods", methods_csv);
  sweep->add_option("--lr", lr_csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    ConfigMap file_cfg;
    if (!config_path.empty()) {
      common.config_path = config_path;
      file_cfg = load_config(config_path);
    }
    auto list_or = [&](const std::string& flag_value, const std::string& cfg_key,
                       const std::string& fallback) {
      if (!flag_value.empty()) return flag_value;
      return file_cfg.get(cfg_key, fallback);
    };
    auto split_strings = [&](const std::string& csv) {
      std::vector<std::string> items;
      std::stringstream ss(csv);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) items.push_back(item);
      }
      return items;
    };
    auto split_doubles = [&](const std::string& csv) {
      return parse_doubles(split_strings(csv));
    };

    if (!seeds_csv.empty() || file_cfg.has("seeds")) {
      common.seeds = split_strings(list_or(seeds_csv, "seeds", "0,1,2"));
    }
    if (common.seeds.empty()) throw InvalidInput("seeds list is empty");
    if (!single_method.empty()) methods_csv = single_method;

    // File keys apply wherever the matching flag was not given.
    CLI::App* active = app.get_subcommands().front();
    auto fill_int = [&](const char* flag, const std::string& key, int& var) {
      if (active->count(flag) == 0 && file_cfg.has(key)) var = file_cfg.get_int(key, var);
    };
    auto fill_double = [&](const char* flag, const std::string& key, double& var) {
      if (active->count(flag) == 0 && file_cfg.has(key)) var = file_cfg.get_double(key, var);
    };
    auto fill_string = [&](const char* flag, const std::string& key, std::string& var) {
      if (active->count(flag) == 0 && file_cfg.has(key)) var = file_cfg.get(key, var);
    };
    fill_string("--out", "out", common.out_dir);
    fill_int("--workers", "workers", common.workers);
    fill_int("--record-every", "record_every", common.record_every);
    fill_double("--tau", "tau", common.tau);
    if (complete->parsed() || sweep->parsed()) {
      fill_int("--m", "complete.m", c_m);
      fill_int("--n", "complete.n", c_n);
      fill_int("--r", "complete.r", c_r);
      fill_double("--s", "complete.s", c_s);
      fill_int("--iters", "complete.iters", c_iters);
      fill_double("--alpha", "complete.alpha", c_alpha);
    } else if (spd->parsed()) {
      fill_int("--n", "spd.n", s_n);
      fill_int("--K", "spd.K", s_K);
      fill_int("--per-class-train", "spd.per_class_train", s_train);
      fill_int("--per-class-test", "spd.per_class_test", s_test);
      fill_double("--sigma-w", "spd.sigma_w", s_sigma_w);
      fill_double("--beta", "spd.beta", s_beta);
      fill_double("--lambda", "spd.lambda", s_lambda);
      fill_int("--iters", "spd.iters", s_iters);
    } else if (grassmann->parsed()) {
      fill_int("--m", "grassmann.m", g_m);
      fill_int("--k", "grassmann.k", g_k);
      fill_int("--K", "grassmann.K", g_K);
      fill_int("--per-class-train", "grassmann.per_class_train", g_train);
      fill_int("--per-class-test", "grassmann.per_class_test", g_test);
      fill_double("--spread", "grassmann.spread", g_spread);
      fill_int("--iters", "grassmann.iters", g_iters);
    } else if (stiefel->parsed()) {
      fill_int("--m", "stiefel.m", t_m);
      fill_int("--C", "stiefel.C", t_C);
      fill_int("--q", "stiefel.q", t_q);
      fill_int("--per-class-train", "stiefel.per_class_train", t_train);
      fill_int("--per-class-test", "stiefel.per_class_test", t_test);
      fill_double("--margin", "stiefel.margin", t_margin);
      fill_double("--gamma", "stiefel.gamma", t_gamma);
      fill_double("--spread", "stiefel.spread", t_spread);
      fill_int("--iters", "stiefel.iters", t_iters);
    } else if (verify->parsed()) {
      fill_int("--trials", "verify.trials", v_trials);
      fill_int("--oracle-trials", "verify.oracle_trials", v_oracle_trials);
      fill_double("--tolerance-override", "verify.tolerance_override", v_tol_override);
      fill_string("--manifold", "verify.manifold", manifold_filter);
      fill_string("--norm", "verify.norm", norm_filter);
    }

    if (verify->parsed()) {
      return cmd_verify(common, manifold_filter, norm_filter, v_trials, v_oracle_trials,
                        v_seed, v_tol_override);
    }
    if (complete->parsed() || sweep->parsed()) {
      const auto methods =
          split_strings(list_or(methods_csv, "complete.methods", "rgd,imuon"));
      const auto lrs = split_doubles(list_or(lr_csv, "complete.lr", "0.3,1,3,10"));
      const auto kappas = split_doubles(list_or(c_kappa_csv, "complete.kappa", "10"));
      const auto rhos = split_doubles(list_or(c_rho_csv, "complete.rho", "0"));
      return cmd_complete(common, c_m, c_n, c_r, c_s, kappas, rhos, methods, lrs, c_iters,
                          c_alpha, c_save_instances);
    }
    if (spd->parsed()) {
      const auto methods = split_strings(list_or(methods_csv, "spd.methods", "rgd,imuon,egd"));
      const auto lrs = split_doubles(list_or(lr_csv, "spd.lr", "0.03,0.1,0.3"));
      return cmd_spd(common, s_n, s_K, s_train, s_test, s_sigma_w, s_beta, s_lambda, methods,
                     lrs, s_iters, s_constant_lr);
    }
    if (grassmann->parsed()) {
      const auto methods =
          split_strings(list_or(methods_csv, "grassmann.methods", "rgd,imuon,imuon-nu"));
      const auto lrs = split_doubles(list_or(lr_csv, "grassmann.lr", "0.1,0.3"));
      return cmd_grassmann(common, g_m, g_k, g_K, g_train, g_test, g_spread, methods, lrs,
                           g_iters);
    }
    if (stiefel->parsed()) {
      const auto methods =
          split_strings(list_or(methods_csv, "stiefel.methods", "rgd,imuon"));
      const auto lrs = split_doubles(list_or(lr_csv, "stiefel.lr", "0.03,0.1"));
      return cmd_stiefel(common, t_m, t_C, t_q, t_train, t_test, t_margin, t_gamma, t_spread,
                         methods, lrs, t_iters);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  return kExitUsage;
}
