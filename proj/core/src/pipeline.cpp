#include "stmc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include "stmc/csv.hpp"
#include "stmc/measures.hpp"
#include "stmc/metrics.hpp"
#include "stmc/motifs.hpp"
#include "stmc/nullmodel.hpp"
#include "stmc/parallel.hpp"
#include "stmc/report.hpp"
#include "stmc/semantic.hpp"
#include "stmc/stats.hpp"

#ifndef STMC_VERSION
#define STMC_VERSION "0.0.0"
#endif

namespace stmc::pipeline {

namespace fs = std::filesystem;

std::string_view version() { return STMC_VERSION; }

namespace {
constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::ingest, "ingest"},       {Stage::build, "build"},
    {Stage::motifs, "motifs"},       {Stage::nullmodel, "nullmodel"},
    {Stage::measures, "measures"},   {Stage::regress, "regress"},
    {Stage::report, "report"}};
}  // namespace

std::string_view to_string(Stage s) {
  for (auto [stage, name] : kStageNames)
    if (stage == s) return name;
  return "?";
}

Stage parse_stage(std::string_view token) {
  for (auto [stage, name] : kStageNames)
    if (name == token) return stage;
  throw ConfigError("unknown stage '" + std::string(token) + "'");
}

namespace {

std::string quote(std::string_view v) {
  bool plain = !v.empty() && v.find_first_of(" \t\"=\n") == std::string_view::npos;
  if (plain) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

class Logger {
 public:
  explicit Logger(std::ostream* out) : out_(out) {}

  void event(std::string_view stage,
             std::initializer_list<std::pair<std::string_view, std::string>>
                 fields) {
    if (!out_) return;
    std::string line = "stage=" + std::string(stage);
    for (const auto& [k, v] : fields) line += " " + std::string(k) + "=" + quote(v);
    std::lock_guard lock(mutex_);
    *out_ << line << '\n' << std::flush;
  }

  void warnings(std::string_view stage, const Report& report) {
    if (!out_) return;
    std::lock_guard lock(mutex_);
    for (const auto& w : report.warnings)
      *out_ << "stage=" << stage << " level=warn source=" << quote(w.source)
            << " line=" << w.line << " message=" << quote(w.message) << '\n';
    *out_ << std::flush;
  }

 private:
  std::ostream* out_;
  std::mutex mutex_;
};

// Database layout.
fs::path raw_dir(const fs::path& db) { return db / "raw"; }
fs::path windows_dir(const fs::path& db) { return db / "windows"; }
fs::path network_dir(const fs::path& db, const std::string& name) {
  return db / "networks" / name;
}
fs::path graph_dir(const fs::path& db, const std::string& name, std::size_t w) {
  return network_dir(db, name) / "windows" / std::to_string(w);
}
fs::path results_dir(const fs::path& db) { return db / "results"; }

std::string network_name(DepMechanism d, Channel c) {
  return GridCell{d, c, stats::Regressand::bug_density}.network_name();
}

void require(const fs::path& p, std::string_view stage) {
  if (!fs::exists(p))
    throw DataError("missing " + p.string() + "; run the " +
                    std::string(stage) + " stage first");
}

std::ifstream open_input(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

template <class Fn>
void write_file(const fs::path& p, Fn&& fn) {
  std::ostringstream out;
  fn(out);
  csv::write_text_file(p, out.str());
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError(std::string("bad ") + what + " '" + s + "'");
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError("bad number '" + s + "'");
}

Corpus load_from(const fs::path& commits, const fs::path& mbox,
                 const fs::path& issues, const fs::path& dsm, bool strict,
                 const std::string& key_pattern) {
  Corpus c;
  {
    auto in = open_input(commits);
    auto parsed = ingest::parse_commit_log(in, {strict, commits.string()});
    c.commits = std::move(parsed.records);
    c.report.append(parsed.report);
  }
  if (!mbox.empty()) {
    auto in = open_input(mbox);
    auto parsed = ingest::parse_mbox(in, {strict, mbox.string()});
    c.messages = std::move(parsed.records);
    c.report.append(parsed.report);
  }
  if (!issues.empty()) {
    auto in = open_input(issues);
    auto parsed = ingest::parse_issue_dump(in, {strict, issues.string()});
    c.issues = std::move(parsed.records);
    c.report.append(parsed.report);
  }
  if (!dsm.empty()) {
    auto in = open_input(dsm);
    c.dsm = network::import_dsm(in);
  }
  std::stable_sort(c.commits.begin(), c.commits.end(),
                   [](const auto& a, const auto& b) {
                     return a.authored_at < b.authored_at;
                   });
  c.identities = resolve_identities(
      observed_persons(c.commits, c.messages, c.issues));
  auto links = ingest::link_commits_to_issues(c.commits, c.issues, key_pattern);
  c.links = std::move(links.links);
  if (links.unmatched > 0)
    c.report.warn("links", 0,
                  std::to_string(links.unmatched) +
                      " commit mentions name no known issue");
  return c;
}

Corpus load_raw(const fs::path& db, const AnalysisConfig& config) {
  const auto raw = raw_dir(db);
  require(raw / "commits.log", "ingest");
  auto optional_file = [&](const char* name) {
    return fs::exists(raw / name) ? raw / name : fs::path();
  };
  return load_from(raw / "commits.log", optional_file("mail.mbox"),
                   optional_file("issues.json"), optional_file("dsm.csv"),
                   false, config.issue_key_pattern);
}

void write_manifest(const AnalysisConfig& config) {
  std::ostringstream o;
  o << "tool = stmc\nversion = " << version()
    << "\nconfig_hash = " << fnv1a_hex(config.canonical_text())
    << "\nmaster_seed = " << config.master_seed << "\n";
  csv::write_text_file(config.paths.database / "manifest.txt", o.str());
}

// ---- ingest ---------------------------------------------------------------

void stage_ingest(const AnalysisConfig& config, Logger& log) {
  auto corpus = load_sources(config);
  const auto raw = raw_dir(config.paths.database);
  fs::remove_all(raw);
  write_file(raw / "commits.log", [&](std::ostream& o) {
    ingest::write_commit_log(o, corpus.commits);
  });
  if (!config.paths.mbox.empty())
    write_file(raw / "mail.mbox", [&](std::ostream& o) {
      ingest::write_mbox(o, corpus.messages);
    });
  if (!config.paths.issues.empty())
    write_file(raw / "issues.json", [&](std::ostream& o) {
      ingest::write_issue_dump(o, corpus.issues);
    });
  if (corpus.dsm)
    write_file(raw / "dsm.csv", [&](std::ostream& o) {
      csv::Writer w(o);
      w.row({"from", "to", "weight"});
      for (const auto& [pair, weight] : *corpus.dsm)
        w.field(pair.first).field(pair.second).field(weight).end_row();
    });
  write_file(raw / "identities.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"person", "name", "email"});
    for (PersonId p = 0; p < corpus.identities.person_count(); ++p)
      for (const auto& key : corpus.identities.aliases(p))
        w.field(p).field(key.name).field(key.email).end_row();
  });
  write_file(raw / "links.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"hash", "key"});
    for (const auto& [hash, key] : corpus.links) w.row({hash, key});
  });
  write_file(raw / "ingest_report.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"source", "line", "message"});
    for (const auto& d : corpus.report.warnings)
      w.field(d.source).field(d.line).field(d.message).end_row();
  });
  write_manifest(config);
  log.warnings("ingest", corpus.report);
  log.event("ingest", {{"commits", std::to_string(corpus.commits.size())},
                       {"messages", std::to_string(corpus.messages.size())},
                       {"issues", std::to_string(corpus.issues.size())},
                       {"persons", std::to_string(corpus.identities.person_count())},
                       {"links", std::to_string(corpus.links.size())},
                       {"warnings", std::to_string(corpus.report.size())}});
}

// ---- build ----------------------------------------------------------------

std::size_t read_window_count(const fs::path& db) {
  const auto p = windows_dir(db) / "windows.csv";
  require(p, "build");
  auto rows = csv::read_file(p);
  if (rows.empty() || rows.front() != csv::Row{"window", "start", "end"})
    throw DataError("bad header in " + p.string());
  return rows.size() - 1;
}

network::DepLayer restrict_to(const network::DepLayer& layer,
                              const std::set<std::string>& paths) {
  network::DepLayer out;
  for (const auto& [pair, w] : layer)
    if (paths.contains(pair.first) && paths.contains(pair.second))
      out.emplace(pair, w);
  return out;
}

void stage_build(const AnalysisConfig& config, const RunOptions& options,
                 Logger& log) {
  const auto& db = config.paths.database;
  auto corpus = load_raw(db, config);
  auto windows = corpus_windows(corpus, config);
  fs::remove_all(windows_dir(db));
  fs::remove_all(db / "networks");
  write_file(windows_dir(db) / "windows.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"window", "start", "end"});
    for (const auto& win : windows)
      w.field(win.index)
          .field(format_iso8601(win.start))
          .field(format_iso8601(win.end))
          .end_row();
  });

  metrics::FileHistory history(corpus.commits);
  std::optional<metrics::SnapshotStore> store;
  if (!config.paths.snapshots.empty() && fs::exists(config.paths.snapshots))
    store.emplace(config.paths.snapshots);
  const bool wants_semantic =
      std::find(config.dependency.begin(), config.dependency.end(),
                DepMechanism::semantic) != config.dependency.end();
  if (wants_semantic && !store)
    throw ConfigError("dependency 'semantic' needs paths.snapshots");
  const bool wants_mail = std::any_of(
      config.channel.begin(), config.channel.end(),
      [](Channel c) { return c != Channel::issues; });
  const bool wants_issues = std::any_of(
      config.channel.begin(), config.channel.end(),
      [](Channel c) { return c != Channel::mail; });
  const auto networks = config.networks();

  metrics::MetricsInputs inputs;
  inputs.commits = corpus.commits;
  inputs.links = corpus.links;
  inputs.issues = corpus.issues;
  inputs.history = &history;
  inputs.snapshots = store ? &*store : nullptr;
  inputs.identities = &corpus.identities;

  std::vector<Report> reports(windows.size());
  parallel_for(windows.size(), options.jobs, [&](std::size_t i) {
    const auto& win = windows[i];
    Report& report = reports[i];
    const std::string source = "window " + std::to_string(i);
    auto rows = metrics::window_metrics(inputs, win, report);
    write_file(windows_dir(db) / std::to_string(i) / "metrics.csv",
               [&](std::ostream& o) { metrics::write_metrics_csv(o, rows); });

    auto slice = network::commits_between(corpus.commits, win.start, win.end);
    auto mod = network::build_mod_layer(slice, corpus.identities);
    network::CommLayer mail, issues;
    if (wants_mail) {
      std::vector<ingest::MailMessage> msgs;
      for (const auto& m : corpus.messages)
        if (win.contains(m.sent_at)) msgs.push_back(m);
      std::size_t dangling = 0;
      mail = network::build_comm_layer_mail(msgs, corpus.identities,
                                            config.mail_mode, &dangling);
      if (dangling > 0)
        report.warn(source, 0,
                    std::to_string(dangling) +
                        " replies to messages outside the window");
    }
    if (wants_issues)
      issues = network::build_comm_layer_issues(corpus.issues,
                                                corpus.identities, win);

    std::map<DepMechanism, network::DepLayer> deps;
    auto existing_paths = history.paths_before(win.end);
    for (auto d : config.dependency) {
      if (deps.contains(d)) continue;
      switch (d) {
        case DepMechanism::cochange: {
          auto hist = network::commits_between(
              corpus.commits, win.end - config.window.cochange_history,
              win.end);
          std::size_t skipped = 0;
          deps[d] = network::build_dep_cochange(hist, config.cochange, &skipped);
          if (skipped > 0)
            report.warn(source, 0,
                        std::to_string(skipped) +
                            " large commits ignored for co-change");
          break;
        }
        case DepMechanism::dsm: {
          if (!corpus.dsm) throw ConfigError("dependency 'dsm' needs a DSM file");
          deps[d] = restrict_to(*corpus.dsm, {existing_paths.begin(),
                                              existing_paths.end()});
          break;
        }
        case DepMechanism::semantic: {
          std::vector<semantic::Document> docs;
          for (const auto& path : existing_paths) {
            const auto* ref = history.reference(path, win.end);
            auto text = store->read(ref->hash, path);
            if (!text) continue;
            docs.push_back({path, semantic::tokenize_stem(*text)});
          }
          deps[d] = semantic::semantic_dependencies(docs, config.semantic,
                                                    &report);
          break;
        }
      }
    }
    for (auto [d, c] : networks) {
      network::CommLayer comm = c == Channel::mail     ? mail
                                : c == Channel::issues ? issues
                                : network::merge_comm_layers(mail, issues);
      auto g = network::assemble_graph(i, comm, mod, deps.at(d));
      network::write_graph(graph_dir(db, network_name(d, c), i), g);
    }
    log.event("build", {{"window", std::to_string(i)},
                        {"artifacts", std::to_string(rows.size())},
                        {"commits", std::to_string(slice.size())}});
  });
  for (const auto& r : reports) log.warnings("build", r);
  log.event("build", {{"windows", std::to_string(windows.size())},
                      {"networks", std::to_string(networks.size())}});
}

// ---- motifs ---------------------------------------------------------------

void write_motif_counts(std::ostream& o,
                        std::span<const motifs::MotifCounts> rows) {
  csv::Writer w(o);
  w.row({"window", "semantics", "triangle_motifs", "triangle_antimotifs",
         "square_motifs", "square_antimotifs"});
  for (const auto& c : rows)
    w.field(c.window_index)
        .field(motifs::to_string(c.semantics))
        .field(c.triangle_motifs)
        .field(c.triangle_antimotifs)
        .field(c.square_motifs)
        .field(c.square_antimotifs)
        .end_row();
}

std::vector<motifs::MotifCounts> read_motif_counts(const fs::path& p) {
  auto rows = csv::read_file(p);
  if (rows.empty() || rows.front().size() != 6)
    throw DataError("bad header in " + p.string());
  std::vector<motifs::MotifCounts> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 6) throw DataError("bad row in " + p.string());
    motifs::MotifCounts c;
    c.window_index = parse_u64(r[0], "window");
    c.semantics = motifs::parse_semantics(r[1]);
    c.triangle_motifs = parse_u64(r[2], "count");
    c.triangle_antimotifs = parse_u64(r[3], "count");
    c.square_motifs = parse_u64(r[4], "count");
    c.square_antimotifs = parse_u64(r[5], "count");
    out.push_back(c);
  }
  return out;
}

void write_participation(std::ostream& o,
                         std::span<const motifs::ParticipationTable> tables) {
  csv::Writer w(o);
  w.row({"window", "path", "triangle_motif", "triangle_antimotif",
         "square_motif", "square_antimotif"});
  for (std::size_t win = 0; win < tables.size(); ++win) {
    const auto& t = tables[win];
    for (std::size_t i = 0; i < t.artifacts.size(); ++i) {
      const auto& p = t.rows[i];
      w.field(win)
          .field(t.artifacts[i])
          .field(p.triangle_motif)
          .field(p.triangle_antimotif)
          .field(p.square_motif)
          .field(p.square_antimotif)
          .end_row();
    }
  }
}

std::vector<motifs::ParticipationTable> read_participation(
    const fs::path& p, std::size_t windows) {
  auto rows = csv::read_file(p);
  if (rows.empty() || rows.front().size() != 6)
    throw DataError("bad header in " + p.string());
  std::vector<motifs::ParticipationTable> out(windows);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 6) throw DataError("bad row in " + p.string());
    auto win = parse_u64(r[0], "window");
    if (win >= windows) throw DataError("window out of range in " + p.string());
    out[win].artifacts.push_back(r[1]);
    out[win].rows.push_back({parse_u64(r[2], "count"), parse_u64(r[3], "count"),
                             parse_u64(r[4], "count"),
                             parse_u64(r[5], "count")});
  }
  return out;
}

void stage_motifs(const AnalysisConfig& config, const RunOptions& options,
                  Logger& log) {
  const auto& db = config.paths.database;
  const auto windows = read_window_count(db);
  for (auto [d, c] : config.networks()) {
    const auto name = network_name(d, c);
    std::vector<motifs::MotifCounts> counts(windows);
    std::vector<motifs::ParticipationTable> tables(windows);
    parallel_for(windows, options.jobs, [&](std::size_t i) {
      const auto dir = graph_dir(db, name, i);
      require(dir / "vertices.csv", "build");
      auto g = network::read_graph(dir, i);
      std::tie(counts[i], tables[i]) =
          motifs::count_with_participation(g, config.motif_semantics);
    });
    write_file(network_dir(db, name) / "motif_counts.csv",
               [&](std::ostream& o) { write_motif_counts(o, counts); });
    write_file(network_dir(db, name) / "participation.csv",
               [&](std::ostream& o) { write_participation(o, tables); });
    for (const auto& mc : counts)
      log.event("motifs",
                {{"network", name},
                 {"window", std::to_string(mc.window_index)},
                 {"triangle_motifs", std::to_string(mc.triangle_motifs)},
                 {"triangle_antimotifs", std::to_string(mc.triangle_antimotifs)},
                 {"square_motifs", std::to_string(mc.square_motifs)},
                 {"square_antimotifs", std::to_string(mc.square_antimotifs)}});
  }
}

// ---- null model -----------------------------------------------------------

void stage_nullmodel(const AnalysisConfig& config, const RunOptions& options,
                     Logger& log) {
  const auto& db = config.paths.database;
  if (!config.nullmodel_enabled) {
    log.event("nullmodel", {{"status", "disabled"}});
    return;
  }
  const auto windows = read_window_count(db);
  auto rewire = config.rewire;
  rewire.master_seed = config.master_seed;
  for (auto [d, c] : config.networks()) {
    const auto name = network_name(d, c);
    std::vector<nullmodel::NullDistribution> rows;
    for (std::size_t i = 0; i < windows; ++i) {
      const auto dir = graph_dir(db, name, i);
      require(dir / "vertices.csv", "build");
      auto t = network::topology_of(network::read_graph(dir, i));
      auto all = nullmodel::sample_null_all(t, i, config.motif_semantics,
                                            rewire, options.jobs);
      for (auto& dist : all) {
        log.event("nullmodel",
                  {{"network", name},
                   {"window", std::to_string(i)},
                   {"kind", std::string(motifs::to_string(dist.kind))},
                   {"observed", csv::format_double(dist.observed)},
                   {"p_t", csv::format_double(dist.p_t)},
                   {"p_empirical", csv::format_double(dist.p_empirical)}});
        rows.push_back(std::move(dist));
      }
    }
    write_file(network_dir(db, name) / "nullmodel.csv", [&](std::ostream& o) {
      nullmodel::write_nullmodel_csv(o, rows);
    });
  }
}

// ---- measures -------------------------------------------------------------

std::vector<metrics::ArtifactMetrics> read_metrics(const fs::path& db,
                                                   std::size_t window) {
  const auto p = windows_dir(db) / std::to_string(window) / "metrics.csv";
  require(p, "build");
  auto in = open_input(p);
  return metrics::read_metrics_csv(in);
}

void stage_measures(const AnalysisConfig& config, Logger& log) {
  const auto& db = config.paths.database;
  const auto windows = read_window_count(db);
  std::vector<std::vector<metrics::ArtifactMetrics>> metric_rows;
  for (std::size_t i = 0; i < windows; ++i)
    metric_rows.push_back(read_metrics(db, i));
  for (auto [d, c] : config.networks()) {
    const auto name = network_name(d, c);
    const auto dir = network_dir(db, name);
    require(dir / "motif_counts.csv", "motifs");
    auto counts = read_motif_counts(dir / "motif_counts.csv");
    auto tables = read_participation(dir / "participation.csv", windows);
    if (counts.size() != windows)
      throw DataError("motif counts do not cover every window of " + name);
    std::vector<measures::MeasureRecord> rows;
    Report report;
    for (std::size_t i = 0; i < windows; ++i) {
      auto table = measures::window_measure_table(tables[i], metric_rows[i],
                                                  counts[i], &report);
      rows.insert(rows.end(), table.begin(), table.end());
    }
    write_file(dir / "measures.csv", [&](std::ostream& o) {
      measures::write_measures_csv(o, rows);
    });
    log.warnings("measures", report);
    log.event("measures", {{"network", name},
                           {"records", std::to_string(rows.size())}});
  }
}

// ---- regression -----------------------------------------------------------

constexpr motifs::Family kFamilies[] = {motifs::Family::triangle,
                                        motifs::Family::square};

std::uint64_t seed_of(std::string_view text) {
  return std::stoull(fnv1a_hex(text), nullptr, 16);
}

void write_vif(std::ostream& o,
               std::span<const std::pair<std::size_t,
                                         std::vector<std::pair<std::string, double>>>>
                   rows) {
  csv::Writer w(o);
  w.row({"window", "column", "vif"});
  for (const auto& [window, values] : rows)
    for (const auto& [column, v] : values)
      w.field(window).field(column).field(v).end_row();
}

}  // namespace

Corpus load_sources(const AnalysisConfig& config) {
  return load_from(config.paths.commits, config.paths.mbox,
                   config.paths.issues, config.paths.dsm, config.strict,
                   config.issue_key_pattern);
}

std::vector<network::Window> corpus_windows(const Corpus& corpus,
                                            const AnalysisConfig& config) {
  std::vector<network::SourceEvents> sources;
  network::SourceEvents commits{"commit log", {}};
  for (const auto& c : corpus.commits) commits.times.push_back(c.authored_at);
  sources.push_back(std::move(commits));
  if (!config.paths.mbox.empty()) {
    network::SourceEvents mail{"mailing list", {}};
    for (const auto& m : corpus.messages) mail.times.push_back(m.sent_at);
    sources.push_back(std::move(mail));
  }
  if (!config.paths.issues.empty()) {
    network::SourceEvents issues{"issue tracker", {}};
    for (const auto& is : corpus.issues) {
      issues.times.push_back(is.created_at);
      for (const auto& c : is.comments) issues.times.push_back(c.at);
    }
    sources.push_back(std::move(issues));
  }
  return network::build_windows(sources, config.window);
}

std::vector<ScenarioPair> scenario_pairs(Scenario scenario,
                                         std::size_t window_count) {
  std::vector<ScenarioPair> out;
  switch (scenario) {
    case Scenario::isochronous:
      for (std::size_t n = 0; n < window_count; ++n) out.push_back({n, n});
      break;
    case Scenario::advanced:
      if (window_count < 2) throw DataError("insufficient windows for advanced scenario");
      for (std::size_t n = 0; n + 1 < window_count; ++n) out.push_back({n, n + 1});
      break;
    case Scenario::retarded:
      if (window_count < 2) throw DataError("insufficient windows for retarded scenario");
      for (std::size_t n = 1; n < window_count; ++n) out.push_back({n, n - 1});
      break;
  }
  return out;
}

void run_scenario(const AnalysisConfig& config, const GridCell& cell,
                  Scenario scenario, const RunOptions& options) {
  Logger log(options.log);
  const auto& db = config.paths.database;
  const auto windows = read_window_count(db);
  const auto pairs = scenario_pairs(scenario, windows);
  const auto net = cell.network_name();
  const auto measures_file = network_dir(db, net) / "measures.csv";
  require(measures_file, "measures");
  std::vector<measures::MeasureRecord> records;
  {
    auto in = open_input(measures_file);
    records = measures::read_measures_csv(in);
  }
  std::map<std::tuple<std::size_t, motifs::Family, std::string>,
           const measures::MeasureRecord*>
      by_key;
  for (const auto& r : records)
    if (!r.is_global()) by_key[{r.window_index, r.family, r.scope}] = &r;
  std::vector<std::vector<metrics::ArtifactMetrics>> metric_rows;
  for (std::size_t i = 0; i < windows; ++i)
    metric_rows.push_back(read_metrics(db, i));

  const bool density = cell.quality == stats::Regressand::bug_density;
  const auto family = density ? stats::Family::gaussian : stats::Family::poisson;
  const auto out_root = results_dir(db) / cell.name() / to_string(scenario);
  fs::remove_all(out_root);

  for (auto motif_family : kFamilies) {
    const std::string label = cell.name() + "/" +
                              std::string(to_string(scenario)) + "/" +
                              std::string(motifs::to_string(motif_family));
    Report report;
    std::vector<stats::ModelFit> classical, enet;
    std::vector<std::pair<std::size_t, std::vector<std::pair<std::string, double>>>>
        vifs;
    std::ostringstream pair_log;
    csv::Writer pair_rows(pair_log);
    pair_rows.row({"quality_window", "motif_window", "rows", "status"});

    for (auto [n, m] : pairs) {
      stats::RawTable raw;
      raw.window_index = n;
      raw.regressand = cell.quality;
      raw.columns = {"loc",        "dev_count", "max_nesting", "avg_cyclomatic",
                     "motifs",     "antimotifs", "r",          "l"};
      raw.log_columns = {true, true, false, false, true, true, false, false};
      for (const auto& a : metric_rows[n]) {
        auto it = by_key.find({m, motif_family, a.path});
        if (it == by_key.end()) continue;
        const auto& rec = *it->second;
        raw.row_ids.push_back(a.path);
        raw.response.push_back(
            density ? a.bug_density.value_or(std::numeric_limits<double>::quiet_NaN())
                    : static_cast<double>(a.churn));
        std::optional<double> nesting, cyclomatic;
        if (a.max_nesting) nesting = *a.max_nesting;
        cyclomatic = a.avg_cyclomatic;
        raw.cells.push_back({static_cast<double>(a.loc),
                             static_cast<double>(a.dev_count), nesting,
                             cyclomatic, static_cast<double>(rec.motifs),
                             static_cast<double>(rec.antimotifs), rec.r,
                             rec.l});
      }
      const std::size_t raw_rows = raw.row_ids.size();
      auto table = stats::prepare(raw, config.regression.prepare, report);
      if (!table) {
        pair_rows.field(n).field(m).field(raw_rows).field("skipped").end_row();
        continue;
      }
      const std::string where = label + " window " + std::to_string(n);
      try {
        classical.push_back(density ? stats::ols_fit(*table)
                                    : stats::glm_quasipoisson(*table));
      } catch (const DataError& e) {
        report.warn(where, 0, e.what());
      }
      try {
        auto v = stats::vif(*table);
        std::vector<std::pair<std::string, double>> named;
        for (std::size_t j = 0; j < v.size(); ++j)
          named.emplace_back(table->columns[j], v[j]);
        vifs.emplace_back(n, std::move(named));
      } catch (const DataError& e) {
        report.warn(where, 0, std::string("vif: ") + e.what());
      }
      const auto folds = config.regression.folds;
      if (static_cast<std::size_t>(table->rows()) >= 2 * folds) {
        auto [standardized, scaling] = stats::standardize(*table);
        stats::CvOptions cv;
        cv.alphas = config.regression.alphas;
        cv.folds = folds;
        cv.lambda_count = config.regression.lambda_count;
        cv.lambda_ratio = config.regression.lambda_ratio;
        cv.seed = nullmodel::replicate_seed(config.master_seed,
                                            seed_of(label), n);
        auto result = stats::cv_select(standardized, family, cv, &report);
        result.fit.window_index = n;
        enet.push_back(std::move(result.fit));
      } else {
        report.warn(where, 0,
                    "elastic net skipped: " + std::to_string(table->rows()) +
                        " rows for " + std::to_string(folds) + " folds");
      }
      pair_rows.field(n).field(m).field(table->rows()).field("fitted").end_row();
    }

    const auto dir = out_root / motifs::to_string(motif_family);
    csv::write_text_file(dir / "pairs.csv", pair_log.str());
    write_file(dir / "fits.csv",
               [&](std::ostream& o) { stats::write_fits_csv(o, classical); });
    write_file(dir / "enet.csv",
               [&](std::ostream& o) { stats::write_enet_csv(o, enet); });
    write_file(dir / "vif.csv", [&](std::ostream& o) { write_vif(o, vifs); });
    write_file(dir / "diagnostics.csv", [&](std::ostream& o) {
      std::vector<stats::ModelFit> all = classical;
      all.insert(all.end(), enet.begin(), enet.end());
      stats::write_diagnostics_csv(o, all);
    });
    log.warnings("regress", report);
    log.event("regress", {{"cell", cell.name()},
                          {"scenario", std::string(to_string(scenario))},
                          {"family", std::string(motifs::to_string(motif_family))},
                          {"pairs", std::to_string(pairs.size())},
                          {"fits", std::to_string(classical.size())},
                          {"enet", std::to_string(enet.size())}});
  }
}

namespace {

void stage_regress(const AnalysisConfig& config, const RunOptions& options,
                   Logger& log) {
  const auto windows = read_window_count(config.paths.database);
  std::vector<std::pair<GridCell, Scenario>> jobs;
  for (const auto& cell : config.cells())
    for (auto s : config.scenario) {
      if (s != Scenario::isochronous && windows < 2) {
        log.event("regress", {{"cell", cell.name()},
                              {"scenario", std::string(to_string(s))},
                              {"status", "skipped"},
                              {"reason", "insufficient windows"}});
        continue;
      }
      jobs.emplace_back(cell, s);
    }
  parallel_for(jobs.size(), options.jobs, [&](std::size_t i) {
    RunOptions single = options;
    single.jobs = 1;
    run_scenario(config, jobs[i].first, jobs[i].second, single);
  });
}

// ---- reports --------------------------------------------------------------

std::vector<fs::path> sorted_subdirs(const fs::path& p) {
  std::vector<fs::path> out;
  if (!fs::is_directory(p)) return out;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

struct ResultSet {
  std::string cell, scenario, family;
  fs::path dir;
};

}  // namespace

std::vector<fs::path> emit_reports(const fs::path& db) {
  const auto out_dir = db / "reports";
  fs::remove_all(out_dir);
  std::vector<fs::path> written;
  auto emit = [&](const fs::path& rel, const std::string& contents) {
    csv::write_text_file(out_dir / rel, contents);
    written.push_back(out_dir / rel);
  };

  // ECDF of null-model p-values.
  std::vector<nullmodel::GroupedP> pvalues;
  for (const auto& net : sorted_subdirs(db / "networks")) {
    const auto file = net / "nullmodel.csv";
    if (!fs::exists(file)) continue;
    auto in = open_input(file);
    for (const auto& d : nullmodel::read_nullmodel_csv(in)) {
      const auto group = net.filename().string() + "/" +
                         std::string(motifs::to_string(d.kind));
      pvalues.push_back({group + "/p_t", d.p_t});
      pvalues.push_back({group + "/p_empirical", d.p_empirical});
    }
  }
  if (!pvalues.empty()) {
    auto ecdf = nullmodel::pvalue_ecdf(pvalues);
    std::ostringstream o;
    nullmodel::write_ecdf_csv(o, ecdf);
    emit("ecdf.csv", o.str());
    std::vector<report::Series> series;
    for (const auto& [group, curve] : ecdf) {
      report::Series s{group, {{0.0, 0.0}}, true};
      for (const auto& pt : curve) s.points.emplace_back(pt.p, pt.fraction);
      s.points.emplace_back(1.0, 1.0);
      series.push_back(std::move(s));
    }
    report::ChartOptions opt;
    opt.title = "ECDF of motif p-values";
    opt.x_label = "p";
    opt.y_label = "fraction";
    opt.y_lo = 0;
    opt.y_hi = 1;
    emit("ecdf.svg", report::line_chart(series, opt));
  }

  // Relative influence and coefficients per result set.
  std::vector<ResultSet> sets;
  for (const auto& cell : sorted_subdirs(db / "results"))
    for (const auto& scen : sorted_subdirs(cell))
      for (const auto& fam : sorted_subdirs(scen))
        sets.push_back({cell.filename().string(), scen.filename().string(),
                        fam.filename().string(), fam});

  std::ostringstream ts, qs, cs;
  csv::Writer ts_w(ts), qs_w(qs), cs_w(cs);
  ts_w.row({"cell", "scenario", "family", "column", "window",
            "relative_influence"});
  qs_w.row({"cell", "scenario", "family", "column", "count", "q10", "q50",
            "q90"});
  cs_w.row({"cell", "scenario", "family", "model", "column", "window",
            "coefficient"});
  bool any_influence = false, any_coefficients = false;
  for (const auto& set : sets) {
    const fs::path rel = fs::path(set.cell) / set.scenario / set.family;
    const std::string title =
        set.cell + " " + set.scenario + " " + set.family;
    if (fs::exists(set.dir / "enet.csv")) {
      auto in = open_input(set.dir / "enet.csv");
      auto rows = stats::read_enet_csv(in);
      std::vector<std::string> order;
      std::map<std::string, report::Series> by_column;
      std::map<std::string, std::vector<double>> values;
      for (const auto& r : rows) {
        if (r.column == "(intercept)") continue;
        if (!by_column.contains(r.column)) {
          order.push_back(r.column);
          by_column[r.column].label = r.column;
        }
        by_column[r.column].points.emplace_back(
            static_cast<double>(r.window_index), r.relative_influence);
        values[r.column].push_back(r.relative_influence);
        ts_w.field(set.cell).field(set.scenario).field(set.family)
            .field(r.column).field(r.window_index)
            .field(r.relative_influence).end_row();
      }
      if (!order.empty()) {
        any_influence = true;
        std::vector<report::Series> series;
        std::vector<report::Strip> strips;
        for (const auto& col : order) {
          series.push_back(by_column[col]);
          strips.push_back({col, values[col]});
          const auto& v = values[col];
          qs_w.field(set.cell).field(set.scenario).field(set.family)
              .field(col).field(v.size())
              .field(report::quantile_type7(v, 0.1))
              .field(report::quantile_type7(v, 0.5))
              .field(report::quantile_type7(v, 0.9)).end_row();
        }
        report::ChartOptions opt;
        opt.title = "Relative influence, " + title;
        opt.x_label = "window";
        opt.y_label = "relative influence";
        opt.corridors = {0.05, 0.1};
        opt.y_lo = -1;
        opt.y_hi = 1;
        emit(rel / "influence_timeseries.svg", report::line_chart(series, opt));
        opt.title = "Relative influence quantiles, " + title;
        opt.x_label = "covariate";
        opt.corridors = {};
        opt.quantile_lines = true;
        emit(rel / "influence_quantiles.svg", report::strip_chart(strips, opt));
      }
    }
    if (fs::exists(set.dir / "fits.csv")) {
      auto rows = csv::read_file(set.dir / "fits.csv");
      std::map<std::string, std::vector<std::string>> order;
      std::map<std::pair<std::string, std::string>, std::vector<double>> values;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() < 4 || r[2] == "(intercept)") continue;
        auto& cols = order[r[1]];
        if (std::find(cols.begin(), cols.end(), r[2]) == cols.end())
          cols.push_back(r[2]);
        const double coef = parse_double(r[3]);
        values[{r[1], r[2]}].push_back(coef);
        cs_w.field(set.cell).field(set.scenario).field(set.family)
            .field(r[1]).field(r[2]).field(r[0]).field(coef).end_row();
      }
      for (const auto& [model, cols] : order) {
        any_coefficients = true;
        std::vector<report::Strip> strips;
        for (const auto& c : cols) strips.push_back({c, values[{model, c}]});
        report::ChartOptions opt;
        opt.title = model + " coefficients, " + title;
        opt.x_label = "covariate";
        opt.y_label = "coefficient";
        emit(rel / ("coefficients_" + model + ".svg"),
             report::strip_chart(strips, opt));
      }
    }
  }
  if (any_influence) {
    emit("influence_timeseries.csv", ts.str());
    emit("influence_quantiles.csv", qs.str());
  }
  if (any_coefficients) emit("coefficients.csv", cs.str());
  std::sort(written.begin(), written.end());
  return written;
}

void run_stage(Stage stage, const AnalysisConfig& config,
               const RunOptions& options) {
  config.validate();
  Logger log(options.log);
  log.event(to_string(stage), {{"status", "start"}});
  switch (stage) {
    case Stage::ingest: stage_ingest(config, log); break;
    case Stage::build: stage_build(config, options, log); break;
    case Stage::motifs: stage_motifs(config, options, log); break;
    case Stage::nullmodel: stage_nullmodel(config, options, log); break;
    case Stage::measures: stage_measures(config, log); break;
    case Stage::regress: stage_regress(config, options, log); break;
    case Stage::report: {
      auto files = emit_reports(config.paths.database);
      log.event("report", {{"files", std::to_string(files.size())}});
      break;
    }
  }
  log.event(to_string(stage), {{"status", "done"}});
}

void run_all(const AnalysisConfig& config, const RunOptions& options) {
  for (auto [stage, name] : kStageNames) run_stage(stage, config, options);
}

}  // namespace stmc::pipeline
