#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>

#include "stmc/pipeline.hpp"
#include "stmc/report.hpp"
#include "support/corpus.hpp"

using namespace stmc;
using namespace stmc::pipeline;
namespace fs = std::filesystem;

namespace {

AnalysisConfig small_config(const synth::SyntheticSpec& spec, const std::string& name) {
  auto cfg = testkit::synth_project(spec, testkit::scratch_dir(name));
  cfg.rewire.replicates = 20;
  cfg.rewire.swaps_per_edge = 5;
  cfg.regression.lambda_count = 20;
  return cfg;
}

void run_through_measures(const AnalysisConfig& cfg) {
  for (auto s : {Stage::ingest, Stage::build, Stage::motifs, Stage::measures})
    run_stage(s, cfg);
}

#ifdef STMC_CLI
int run_cli(const std::string& args) {
  return std::system((std::string(STMC_CLI) + " " + args + " > /dev/null 2>&1").c_str());
}
#endif

}  // namespace

TEST(Config, DefaultTextParses) {
  std::istringstream in(default_config_text());
  auto cfg = parse_config(in, "/base");
  EXPECT_EQ(cfg.paths.commits, fs::path("/base/commits.log"));
  EXPECT_TRUE(cfg.paths.dsm.empty());
  EXPECT_EQ(cfg.rewire.replicates, 1000u);
  EXPECT_EQ(cfg.cells().size(), 2u);
  std::istringstream again(default_config_text());
  EXPECT_EQ(parse_config(again, "/base").canonical_text(), cfg.canonical_text());
}

TEST(Config, Errors) {
  std::istringstream unknown("colour = blue\n");
  EXPECT_THROW(parse_config(unknown), ConfigError);
  std::istringstream bad("rewire.replicates = many\n");
  EXPECT_THROW(parse_config(bad), ConfigError);
  std::istringstream dsm("dependency = dsm\npaths.dsm =\n");
  EXPECT_THROW(parse_config(dsm).validate(), ConfigError);
  EXPECT_THROW(parse_stage("plot"), ConfigError);
  EXPECT_EQ(parse_stage("nullmodel"), Stage::nullmodel);
}

TEST(Scenarios, Pairs) {
  auto adv = scenario_pairs(Scenario::advanced, 5);
  ASSERT_EQ(adv.size(), 4u);
  for (std::size_t n = 0; n < 4; ++n) EXPECT_EQ(adv[n], (ScenarioPair{n, n + 1}));
  auto ret = scenario_pairs(Scenario::retarded, 3);
  EXPECT_EQ(ret, (std::vector<ScenarioPair>{{1, 0}, {2, 1}}));
  EXPECT_EQ(scenario_pairs(Scenario::isochronous, 3).size(), 3u);
  EXPECT_THROW(scenario_pairs(Scenario::retarded, 1), DataError);
  EXPECT_THROW(scenario_pairs(Scenario::advanced, 1), DataError);
}

TEST(Reports, QuantileRule) {
  std::vector<double> v = {0.2, -0.2, 0.0};
  EXPECT_NEAR(report::quantile_type7(v, 0.1), -0.16, 1e-15);
  EXPECT_NEAR(report::quantile_type7(v, 0.9), 0.16, 1e-15);
  EXPECT_EQ(report::quantile_type7(v, 0.5), 0.0);
  EXPECT_TRUE(std::isnan(report::quantile_type7({}, 0.5)));
}

TEST(Reports, EmptyDatabaseWritesNothing) {
  auto db = testkit::scratch_dir("empty_db");
  EXPECT_TRUE(emit_reports(db).empty());
  EXPECT_FALSE(fs::exists(db / "reports"));
}

TEST(Reports, SingleWindowSeries) {
  auto db = testkit::scratch_dir("single_window_db");
  auto set = db / "results" / "cochange-mail+issues-bug_density" / "isochronous" / "square";
  fs::create_directories(set);
  csv::write_text_file(set / "enet.csv",
                       "window,alpha,lambda,column,coefficient,relative_influence\n"
                       "0,0.5,0.01,r,0.2,0.4\n0,0.5,0.01,l,-0.3,-0.6\n");
  auto files = emit_reports(db);
  ASSERT_FALSE(files.empty());
  auto series = csv::read_file(db / "reports" / "influence_timeseries.csv");
  std::size_t l_rows = 0;
  for (const auto& row : series)
    if (std::find(row.begin(), row.end(), "l") != row.end()) ++l_rows;
  EXPECT_EQ(l_rows, 1u);
  std::string svg;
  for (const auto& f : files)
    if (f.filename() == "influence_timeseries.svg") svg = testkit::read_text(f);
  ASSERT_FALSE(svg.empty());
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

TEST(Synth, FullCommunicationLeavesNoAntimotifs) {
  synth::SyntheticSpec spec;
  spec.developers = 12;
  spec.artifacts = 40;
  spec.windows = 3;
  spec.p_comm = 1;
  auto cfg = small_config(spec, "synth_pcomm1");
  run_through_measures(cfg);
  auto rows = testkit::network_measures(cfg.paths.database, "cochange-mail+issues");
  std::size_t globals = 0;
  for (const auto& r : rows) {
    EXPECT_EQ(r.antimotifs, 0u) << r.scope << " window " << r.window_index;
    if (r.motifs > 0) EXPECT_EQ(r.r, -2.0);
    globals += r.is_global();
  }
  EXPECT_EQ(globals, 2 * testkit::window_count(cfg.paths.database));
}

TEST(Synth, NoCommunicationLeavesNoMotifs) {
  synth::SyntheticSpec spec;
  spec.developers = 12;
  spec.artifacts = 40;
  spec.windows = 3;
  spec.p_comm = 0;
  auto cfg = small_config(spec, "synth_pcomm0");
  run_through_measures(cfg);
  bool any_anti = false;
  for (const auto& r : testkit::network_measures(cfg.paths.database, "cochange-mail+issues")) {
    EXPECT_EQ(r.motifs, 0u) << r.scope << " window " << r.window_index;
    if (r.antimotifs > 0) {
      EXPECT_EQ(r.r, 2.0);
      any_anti = true;
    }
  }
  EXPECT_TRUE(any_anti);
}

TEST(Synth, IngestsWithoutWarnings) {
  synth::SyntheticSpec spec;
  spec.windows = 2;
  auto cfg = small_config(spec, "synth_ingest");
  cfg.strict = true;
  auto corpus = load_sources(cfg);
  EXPECT_TRUE(corpus.report.empty());
  EXPECT_GT(corpus.links.size(), 0u);
  EXPECT_THROW((synth::SyntheticSpec{.p_comm = 1.5}).validate(), ConfigError);
}

// Correlation between exposure-normalized bug counts and excess anti-motif
// participation, with a permutation p value.
double permutation_p(const AnalysisConfig& cfg, std::uint64_t seed) {
  const auto& db = cfg.paths.database;
  std::map<std::pair<std::size_t, std::string>, const measures::MeasureRecord*> sq;
  auto recs = testkit::network_measures(db, "cochange-mail+issues");
  for (const auto& r : recs)
    if (!r.is_global() && r.family == motifs::Family::square)
      sq[{r.window_index, r.scope}] = &r;
  std::vector<double> x, y;
  for (std::size_t w = 0; w < testkit::window_count(db); ++w)
    for (const auto& m : testkit::window_metrics(db, w)) {
      auto it = sq.find({w, m.path});
      if (it == sq.end() || !m.avg_cyclomatic || m.loc == 0) continue;
      double excess = std::max(0.0, double(it->second->antimotifs) - double(it->second->motifs));
      x.push_back(excess);
      y.push_back(double(m.bug_count) / (double(m.loc) * *m.avg_cyclomatic));
    }
  auto corr = [&](const std::vector<double>& a) {
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double sab = 0, saa = 0, sxx = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sab += (a[i] - ma) * (x[i] - mx);
      saa += (a[i] - ma) * (a[i] - ma);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sab / std::sqrt(saa * sxx);
  };
  const double observed = std::fabs(corr(y));
  std::mt19937_64 gen(seed);
  int extreme = 0;
  const int shuffles = 2000;
  for (int s = 0; s < shuffles; ++s) {
    std::shuffle(y.begin(), y.end(), gen);
    extreme += std::fabs(corr(y)) >= observed;
  }
  return (1.0 + extreme) / (1.0 + shuffles);
}

TEST(Synth, BugPlacementIndependentWithoutEffect) {
  synth::SyntheticSpec spec;
  spec.developers = 30;
  spec.artifacts = 200;
  spec.windows = 2;
  spec.bug_rate = 0.01;
  spec.effect = 0;
  auto cfg = small_config(spec, "synth_effect0");
  run_through_measures(cfg);
  EXPECT_GT(permutation_p(cfg, 1), 0.01);

  spec.effect = 0.5;
  auto planted = small_config(spec, "synth_effect_high");
  run_through_measures(planted);
  EXPECT_LT(permutation_p(planted, 1), 0.01);
}

TEST(Pipeline, DeterministicAndSeedScoped) {
  synth::SyntheticSpec spec;
  spec.developers = 16;
  spec.artifacts = 60;
  spec.windows = 3;
  auto cfg = small_config(spec, "determinism");
  cfg.regression.folds = 3;
  run_all(cfg);
  auto first = testkit::read_tree(cfg.paths.database);
  run_all(cfg);
  EXPECT_EQ(testkit::read_tree(cfg.paths.database), first);
  ASSERT_TRUE(first.contains("manifest.txt"));

  cfg.master_seed = 99;
  run_all(cfg);
  auto reseeded = testkit::read_tree(cfg.paths.database);
  std::vector<std::string> changed;
  for (const auto& [path, text] : first)
    if (reseeded.at(path) != text) changed.push_back(path);
  EXPECT_EQ(first.size(), reseeded.size());
  bool null_changed = false;
  for (const auto& p : changed) {
    const bool rng = p == "manifest.txt" || p.ends_with("nullmodel.csv") ||
                     p.starts_with("results/") || p.starts_with("reports/");
    EXPECT_TRUE(rng) << p;
    null_changed |= p.ends_with("nullmodel.csv");
  }
  EXPECT_TRUE(null_changed);
}

#ifdef STMC_CLI
TEST(Cli, ExitCodes) {
  EXPECT_NE(run_cli(""), 0);
  EXPECT_NE(run_cli("frobnicate"), 0);
  EXPECT_EQ(run_cli("--version"), 0);
  auto dir = testkit::scratch_dir("cli");
  EXPECT_EQ(run_cli("--seed 3 synth --out " + dir.string() +
                    " --developers 10 --artifacts 30 --windows 2"), 0);
  EXPECT_TRUE(fs::exists(dir / "commits.log"));
  EXPECT_EQ(run_cli("--config " + (dir / "stmc.conf").string() + " ingest"), 0);
  EXPECT_TRUE(fs::exists(dir / "db" / "raw" / "commits.log"));
  // Data stages out of order report a data problem.
  auto other = testkit::scratch_dir("cli_missing");
  fs::copy(dir / "stmc.conf", other / "stmc.conf");
  int status = run_cli("--config " + (other / "stmc.conf").string() + " measures");
  EXPECT_NE(status, 0);
}
#endif
