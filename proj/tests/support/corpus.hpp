#pragma once

// Synthetic projects run through the pipeline, and readers for the files the
// pipeline leaves behind.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stmc/csv.hpp"
#include "stmc/measures.hpp"
#include "stmc/metrics.hpp"
#include "stmc/pipeline.hpp"
#include "stmc/stats.hpp"
#include "stmc/synth.hpp"

namespace stmc::testkit {

namespace fs = std::filesystem;

inline fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("stmc_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Writes the corpus into `dir` and loads the configuration written with it.
inline pipeline::AnalysisConfig synth_project(const synth::SyntheticSpec& spec,
                                              const fs::path& dir) {
  synth::write_corpus(synth::synth_generate(spec), dir);
  return pipeline::load_config(dir / "stmc.conf");
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Relative path -> contents of every regular file below `root`.
inline std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file())
      out[fs::relative(e.path(), root).generic_string()] = read_text(e.path());
  return out;
}

inline std::size_t window_count(const fs::path& db) {
  return csv::read_file(db / "windows" / "windows.csv").size() - 1;
}

inline std::vector<metrics::ArtifactMetrics> window_metrics(const fs::path& db,
                                                            std::size_t w) {
  std::ifstream in(db / "windows" / std::to_string(w) / "metrics.csv");
  return metrics::read_metrics_csv(in);
}

inline std::vector<measures::MeasureRecord> network_measures(
    const fs::path& db, const std::string& network) {
  std::ifstream in(db / "networks" / network / "measures.csv");
  return measures::read_measures_csv(in);
}

inline std::vector<stats::EnetRow> enet_rows(const fs::path& db,
                                             const std::string& set) {
  std::ifstream in(db / "results" / set / "enet.csv");
  return stats::read_enet_csv(in);
}

/// Relative influence of `column` per window, in window order.
inline std::vector<double> influence_of(const std::vector<stats::EnetRow>& rows,
                                        const std::string& column) {
  std::map<std::size_t, double> by_window;
  for (const auto& r : rows)
    if (r.column == column) by_window[r.window_index] = r.relative_influence;
  std::vector<double> out;
  for (const auto& [w, v] : by_window) out.push_back(v);
  return out;
}

}  // namespace stmc::testkit
