#pragma once

#include "imuon/manifolds.hpp"
#include "imuon/optimizer.hpp"
#include "imuon/oracle.hpp"
#include "imuon/problems.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace imuon {

std::string build_id();

// Matrix text format: first line "rows cols", then whitespace-separated rows
// with 17 significant digits.
std::string matrix_to_text(const Matrix& m);
Matrix matrix_from_text(std::istream& in);
void save_matrix_text(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix_text(const std::filesystem::path& path);

// Flat TOML-style config: "[table]" headers, "key = value" lines, '#'
// comments. Keys flatten to "table.key"; CLI flags override file keys.
struct ConfigMap {
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { kv[key] = value; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::string& fallback) const;
  std::string to_text() const;  // sorted key = value dump (resolved config)
};
ConfigMap load_config(const std::filesystem::path& path);

// Run artifacts. The JSONL starts with a header object carrying the resolved
// config and the build id, then one object per trajectory record.
void write_trajectory_jsonl(const std::filesystem::path& path,
                            const std::vector<TrajectoryRecord>& records,
                            const ConfigMap& resolved_config, const std::string& status);

void write_verify_report(const std::filesystem::path& path,
                         const std::vector<CheckReport>& checks);

// Problem instances serialize to a directory: meta.json with dims, seeds and
// parameters, plus matrix text files (samples stacked vertically with a
// labels.csv). Completion stores its index set as a two-column integer
// omega.csv.
void save_completion_instance(const std::filesystem::path& dir,
                              const CompletionInstance& inst);
CompletionInstance load_completion_instance(const std::filesystem::path& dir);

void save_spd_proto_instance(const std::filesystem::path& dir, const SpdProtoInstance& inst);
SpdProtoInstance load_spd_proto_instance(const std::filesystem::path& dir);

void save_grassmann_instance(const std::filesystem::path& dir,
                             const GrassmannFrechetInstance& inst);
GrassmannFrechetInstance load_grassmann_instance(const std::filesystem::path& dir);

void save_stiefel_proto_instance(const std::filesystem::path& dir,
                                 const StiefelProtoInstance& inst);
StiefelProtoInstance load_stiefel_proto_instance(const std::filesystem::path& dir);

}  // namespace imuon
