#include "imuon/io.hpp"

#include "json.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#ifndef IMUON_BUILD_ID
#define IMUON_BUILD_ID "unknown"
#endif

namespace imuon {

using nlohmann::json;

std::string build_id() { return IMUON_BUILD_ID; }

std::string matrix_to_text(const Matrix& m) {
  std::ostringstream out;
  out << m.rows() << " " << m.cols() << "\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << " ";
      out << m(i, j);
    }
    out << "\n";
  }
  return out.str();
}

Matrix matrix_from_text(std::istream& in) {
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw InvalidInput("matrix text: bad header");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) throw InvalidInput("matrix text: truncated data");
    }
  }
  return m;
}

void save_matrix_text(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open for writing: " + path.string());
  out << matrix_to_text(m);
}

Matrix load_matrix_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open for reading: " + path.string());
  return matrix_from_text(in);
}

std::string point_to_text(const ManifoldPoint& x) {
  std::ostringstream out;
  out << std::setprecision(17);
  auto body = [&out](const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out << " ";
        out << m(i, j);
      }
      out << "\n";
    }
  };
  if (const auto* fr = std::get_if<FixedRankPoint>(&x)) {
    out << "fixedrank " << fr->B.rows() << " " << fr->A.cols() << " " << fr->B.cols() << "\n";
    body(fr->B);
    body(fr->A);
  } else if (const auto* sp = std::get_if<SpdPoint>(&x)) {
    out << "spd " << sp->X.rows() << " " << sp->X.cols() << "\n";
    body(sp->X);
  } else if (const auto* st = std::get_if<StiefelPoint>(&x)) {
    out << "stiefel " << st->X.rows() << " " << st->X.cols() << "\n";
    body(st->X);
  } else {
    const auto& g = std::get<GrassmannPoint>(x);
    out << "grassmann " << g.X.rows() << " " << g.X.cols() << "\n";
    body(g.X);
  }
  return out.str();
}

ManifoldPoint point_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  if (!(in >> kind)) throw InvalidInput("point text: missing kind");
  auto read_block = [&in](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!(in >> m(i, j))) throw InvalidInput("point text: truncated data");
      }
    }
    return m;
  };
  if (kind == "fixedrank") {
    Eigen::Index m = 0, n = 0, r = 0;
    if (!(in >> m >> n >> r)) throw InvalidInput("point text: bad fixedrank header");
    Matrix B = read_block(m, r);
    Matrix A = read_block(r, n);
    return FixedRankPoint{std::move(B), std::move(A)};
  }
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw InvalidInput("point text: bad header");
  Matrix X = read_block(rows, cols);
  if (kind == "spd") return SpdPoint{std::move(X)};
  if (kind == "stiefel") return StiefelPoint{std::move(X)};
  if (kind == "grassmann") return GrassmannPoint{std::move(X)};
  throw InvalidInput("point text: unknown kind " + kind);
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string ConfigMap::get(const std::string& key, const std::string& fallback) const {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stoi(it->second);
}

std::vector<std::string> ConfigMap::get_list(const std::string& key,
                                             const std::string& fallback) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key, fallback));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string ConfigMap::to_text() const {
  std::ostringstream out;
  for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
  return out.str();
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config: " + path.string());
  ConfigMap cfg;
  std::string line, table;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      table = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!table.empty()) key = table + "." + key;
    cfg.kv[key] = value;
  }
  return cfg;
}

void write_trajectory_jsonl(const std::filesystem::path& path,
                            const std::vector<TrajectoryRecord>& records,
                            const ConfigMap& resolved_config, const std::string& status) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open for writing: " + path.string());
  json header;
  header["type"] = "header";
  header["build"] = build_id();
  header["status"] = status;
  json cfg = json::object();
  for (const auto& [key, value] : resolved_config.kv) cfg[key] = value;
  header["config"] = cfg;
  out << header.dump() << "\n";
  for (const auto& r : records) {
    json row;
    row["t"] = r.t;
    row["f_value"] = r.f_value;
    row["dual_value"] = r.dual_value;
    row["H_dual"] = r.H_dual;
    row["riem_norm_sq"] = r.riem_norm_sq;
    row["step_eta"] = r.step_eta;
    row["wall_time"] = r.wall_time;
    out << row.dump() << "\n";
  }
}

void write_verify_report(const std::filesystem::path& path,
                         const std::vector<CheckReport>& checks) {
  json report;
  report["build"] = build_id();
  int passed = 0;
  json items = json::array();
  for (const auto& c : checks) {
    json item;
    item["name"] = c.name;
    item["worst_residual"] = c.worst_residual;
    item["tolerance"] = c.tolerance;
    item["pass"] = c.pass;
    items.push_back(item);
    passed += c.pass ? 1 : 0;
  }
  report["checks"] = items;
  report["passed"] = passed;
  report["failed"] = static_cast<int>(checks.size()) - passed;
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open for writing: " + path.string());
  out << report.dump(2) << "\n";
}

void save_completion_instance(const std::filesystem::path& dir,
                              const CompletionInstance& inst) {
  std::filesystem::create_directories(dir);
  json meta;
  meta["m"] = inst.m;
  meta["n"] = inst.n;
  meta["r"] = inst.r;
  meta["s"] = inst.s;
  meta["kappa"] = inst.kappa;
  meta["rho"] = inst.rho;
  meta["seed"] = inst.seed;
  meta["sigma_spacing"] = "log";
  {
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "omega.csv");
    for (const auto& [i, j] : inst.omega) out << i << "," << j << "\n";
  }
  save_matrix_text(dir / "y.txt", inst.y);
  save_matrix_text(dir / "xstar.txt", inst.Xstar);
}

namespace {

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  for (int label : labels) out << label << "\n";
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) labels.push_back(std::stoi(line));
  }
  return labels;
}

// Samples stack vertically into one matrix file; the row count per sample
// comes from the meta entry.
Matrix stack_rows(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) return Matrix(0, 0);
  Matrix all(blocks.size() * blocks[0].rows(), blocks[0].cols());
  for (size_t i = 0; i < blocks.size(); ++i) {
    all.middleRows(i * blocks[0].rows(), blocks[0].rows()) = blocks[i];
  }
  return all;
}

}  // namespace

CompletionInstance load_completion_instance(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw InvalidInput("cannot open " + (dir / "meta.json").string());
  json meta = json::parse(meta_in);
  CompletionInstance inst;
  inst.m = meta.at("m").get<int>();
  inst.n = meta.at("n").get<int>();
  inst.r = meta.at("r").get<int>();
  inst.s = meta.at("s").get<double>();
  inst.kappa = meta.at("kappa").get<double>();
  inst.rho = meta.at("rho").get<double>();
  inst.seed = meta.at("seed").get<std::uint64_t>();

  std::ifstream om(dir / "omega.csv");
  if (!om) throw InvalidInput("cannot open " + (dir / "omega.csv").string());
  std::string line;
  while (std::getline(om, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidInput("omega.csv: bad line " + line);
    inst.omega.emplace_back(std::stoi(line.substr(0, comma)),
                            std::stoi(line.substr(comma + 1)));
  }
  Matrix y = load_matrix_text(dir / "y.txt");
  inst.y = y.col(0);
  inst.Xstar = load_matrix_text(dir / "xstar.txt");
  if (static_cast<Eigen::Index>(inst.omega.size()) != inst.y.size()) {
    throw InvalidInput("completion instance: omega/y size mismatch");
  }
  return inst;
}

void save_spd_proto_instance(const std::filesystem::path& dir, const SpdProtoInstance& inst) {
  std::filesystem::create_directories(dir);
  json meta;
  meta["n_dim"] = inst.n_dim;
  meta["K"] = inst.K;
  meta["beta"] = inst.beta;
  meta["lambda_reg"] = inst.lambda_reg;
  meta["sigma_w"] = inst.sigma_w;
  meta["seed"] = inst.seed;
  meta["train_count"] = inst.train.size();
  meta["test_count"] = inst.test.size();
  {
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
  auto dump_split = [&](const std::vector<SpdSample>& samples, const std::string& tag) {
    std::vector<Matrix> mats;
    std::vector<int> labels;
    for (const auto& s : samples) {
      mats.push_back(s.C);
      labels.push_back(s.label);
    }
    save_matrix_text(dir / (tag + "_C.txt"), stack_rows(mats));
    write_labels(dir / (tag + "_labels.csv"), labels);
  };
  dump_split(inst.train, "train");
  dump_split(inst.test, "test");
  save_matrix_text(dir / "anchors.txt", stack_rows(inst.anchors));
}

SpdProtoInstance load_spd_proto_instance(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw InvalidInput("cannot open " + (dir / "meta.json").string());
  json meta = json::parse(meta_in);
  SpdProtoInstance inst;
  inst.n_dim = meta.at("n_dim").get<int>();
  inst.K = meta.at("K").get<int>();
  inst.beta = meta.at("beta").get<double>();
  inst.lambda_reg = meta.at("lambda_reg").get<double>();
  inst.sigma_w = meta.at("sigma_w").get<double>();
  inst.seed = meta.at("seed").get<std::uint64_t>();
  auto read_split = [&](const std::string& tag) {
    Matrix all = load_matrix_text(dir / (tag + "_C.txt"));
    std::vector<int> labels = read_labels(dir / (tag + "_labels.csv"));
    std::vector<SpdSample> out;
    for (size_t i = 0; i < labels.size(); ++i) {
      out.push_back(SpdSample{all.middleRows(i * inst.n_dim, inst.n_dim), labels[i]});
    }
    return out;
  };
  inst.train = read_split("train");
  inst.test = read_split("test");
  Matrix anchors = load_matrix_text(dir / "anchors.txt");
  for (int c = 0; c < inst.K; ++c) {
    inst.anchors.push_back(anchors.middleRows(c * inst.n_dim, inst.n_dim));
  }
  return inst;
}

void save_grassmann_instance(const std::filesystem::path& dir,
                             const GrassmannFrechetInstance& inst) {
  std::filesystem::create_directories(dir);
  json meta;
  meta["m"] = inst.m;
  meta["k"] = inst.k;
  meta["K"] = inst.K;
  meta["spread"] = inst.spread;
  meta["seed"] = inst.seed;
  meta["train_count"] = inst.train.size();
  meta["test_count"] = inst.test.size();
  {
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
  auto dump_split = [&](const std::vector<GrassmannSample>& samples, const std::string& tag) {
    std::vector<Matrix> mats;
    std::vector<int> labels;
    for (const auto& s : samples) {
      mats.push_back(s.S);
      labels.push_back(s.label);
    }
    save_matrix_text(dir / (tag + "_S.txt"), stack_rows(mats));
    write_labels(dir / (tag + "_labels.csv"), labels);
  };
  dump_split(inst.train, "train");
  dump_split(inst.test, "test");
}

GrassmannFrechetInstance load_grassmann_instance(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw InvalidInput("cannot open " + (dir / "meta.json").string());
  json meta = json::parse(meta_in);
  GrassmannFrechetInstance inst;
  inst.m = meta.at("m").get<int>();
  inst.k = meta.at("k").get<int>();
  inst.K = meta.at("K").get<int>();
  inst.spread = meta.at("spread").get<double>();
  inst.seed = meta.at("seed").get<std::uint64_t>();
  auto read_split = [&](const std::string& tag) {
    Matrix all = load_matrix_text(dir / (tag + "_S.txt"));
    std::vector<int> labels = read_labels(dir / (tag + "_labels.csv"));
    std::vector<GrassmannSample> out;
    for (size_t i = 0; i < labels.size(); ++i) {
      out.push_back(GrassmannSample{all.middleRows(i * inst.m, inst.m), labels[i]});
    }
    return out;
  };
  inst.train = read_split("train");
  inst.test = read_split("test");
  return inst;
}

void save_stiefel_proto_instance(const std::filesystem::path& dir,
                                 const StiefelProtoInstance& inst) {
  std::filesystem::create_directories(dir);
  json meta;
  meta["m"] = inst.m;
  meta["C"] = inst.C;
  meta["q"] = inst.q;
  meta["margin"] = inst.margin;
  meta["gamma"] = inst.gamma;
  meta["spread"] = inst.spread;
  meta["seed"] = inst.seed;
  meta["train_count"] = inst.train.size();
  meta["test_count"] = inst.test.size();
  {
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
  auto dump_split = [&](const std::vector<StiefelFeature>& samples, const std::string& tag) {
    Matrix all(samples.size(), inst.m);
    std::vector<int> labels;
    for (size_t i = 0; i < samples.size(); ++i) {
      all.row(i) = samples[i].h.transpose();
      labels.push_back(samples[i].label);
    }
    save_matrix_text(dir / (tag + "_h.txt"), all);
    write_labels(dir / (tag + "_labels.csv"), labels);
  };
  dump_split(inst.train, "train");
  dump_split(inst.test, "test");
  save_matrix_text(dir / "centers.txt", inst.centers);
}

StiefelProtoInstance load_stiefel_proto_instance(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw InvalidInput("cannot open " + (dir / "meta.json").string());
  json meta = json::parse(meta_in);
  StiefelProtoInstance inst;
  inst.m = meta.at("m").get<int>();
  inst.C = meta.at("C").get<int>();
  inst.q = meta.at("q").get<int>();
  inst.margin = meta.at("margin").get<double>();
  inst.gamma = meta.at("gamma").get<double>();
  inst.spread = meta.at("spread").get<double>();
  inst.seed = meta.at("seed").get<std::uint64_t>();
  auto read_split = [&](const std::string& tag) {
    Matrix all = load_matrix_text(dir / (tag + "_h.txt"));
    std::vector<int> labels = read_labels(dir / (tag + "_labels.csv"));
    std::vector<StiefelFeature> out;
    for (size_t i = 0; i < labels.size(); ++i) {
      out.push_back(StiefelFeature{all.row(i).transpose(), labels[i]});
    }
    return out;
  };
  inst.train = read_split("train");
  inst.test = read_split("test");
  inst.centers = load_matrix_text(dir / "centers.txt");
  return inst;
}

}  // namespace imuon
