#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "stmc/config.hpp"
#include "stmc/errors.hpp"
#include "stmc/pipeline.hpp"
#include "stmc/synth.hpp"

namespace {

namespace fs = std::filesystem;
using stmc::pipeline::Stage;

struct Globals {
  std::string config = "stmc.conf";
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool strict = false;
};

stmc::pipeline::AnalysisConfig load(const Globals& g) {
  if (!fs::exists(g.config))
    throw stmc::ConfigError("configuration file '" + g.config +
                            "' not found (use --config)");
  auto cfg = stmc::pipeline::load_config(g.config);
  if (g.seed) cfg.master_seed = *g.seed;
  if (g.strict) cfg.strict = true;
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"Socio-technical motif congruence analysis of software "
               "project histories."};
  app.set_version_flag("--version", std::string(stmc::pipeline::version()));
  Globals g;
  app.add_option("--config", g.config, "Configuration file")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--jobs", g.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--strict", g.strict, "Fail on the first malformed record");
  bool print_config = false;
  app.add_flag("--print-default-config", print_config,
               "Print a configuration file with every default and exit");

  struct StageCommand {
    const char* name;
    Stage stage;
    const char* help;
  };
  const StageCommand stages[] = {
      {"ingest", Stage::ingest, "Parse the sources into the database"},
      {"build", Stage::build, "Compute windows, metrics and networks"},
      {"motifs", Stage::motifs, "Count motifs and anti-motifs"},
      {"nullmodel", Stage::nullmodel, "Configuration-model significance tests"},
      {"measures", Stage::measures, "Compute the congruence measures"},
      {"regress", Stage::regress, "Fit the regression models"},
      {"report", Stage::report, "Write CSV and SVG reports"}};
  std::optional<Stage> chosen;
  for (const auto& s : stages)
    app.add_subcommand(s.name, s.help)->callback([&chosen, st = s.stage] {
      chosen = st;
    });
  bool run_all = false;
  app.add_subcommand("run-all", "Run every stage in order")->callback([&] {
    run_all = true;
  });

  stmc::synth::SyntheticSpec spec;
  std::string out_dir = "synthetic";
  std::string effect_family = "square";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic project");
  synth->add_option("--out", out_dir, "Output directory")->capture_default_str();
  synth->add_option("--developers", spec.developers)->capture_default_str();
  synth->add_option("--artifacts", spec.artifacts)->capture_default_str();
  synth->add_option("--windows", spec.windows)->capture_default_str();
  synth->add_option("--modules", spec.modules)->capture_default_str();
  synth->add_option("--p-comm", spec.p_comm,
                    "Communication probability of collaborating pairs")
      ->capture_default_str();
  synth->add_option("--effect", spec.effect,
                    "Planted bugs per unit of anti-motif excess")
      ->capture_default_str();
  synth->add_option("--effect-family", effect_family, "triangle or square")
      ->check(CLI::IsMember({"triangle", "square"}))
      ->capture_default_str();
  synth->add_option("--bug-rate", spec.bug_rate)->capture_default_str();
  synth->add_option("--commits-per-developer", spec.commits_per_developer)
      ->capture_default_str();
  synth->add_option("--window-days", spec.window_days)->capture_default_str();

  app.require_subcommand(0, 1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (print_config) {
    std::cout << stmc::pipeline::default_config_text();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  stmc::pipeline::RunOptions options;
  options.jobs = g.jobs;
  options.log = &std::cerr;
  if (synth->parsed()) {
    if (g.seed) spec.seed = *g.seed;
    spec.effect_family = effect_family == "triangle"
                             ? stmc::motifs::Family::triangle
                             : stmc::motifs::Family::square;
    auto corpus = stmc::synth::synth_generate(spec);
    stmc::synth::write_corpus(corpus, out_dir);
    std::cerr << "stage=synth out=" << out_dir
              << " commits=" << corpus.commits.size()
              << " messages=" << corpus.messages.size()
              << " issues=" << corpus.issues.size() << '\n';
    return 0;
  }
  auto cfg = load(g);
  if (run_all)
    stmc::pipeline::run_all(cfg, options);
  else
    stmc::pipeline::run_stage(*chosen, cfg, options);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const stmc::ConfigError& e) {
    std::cerr << "level=error kind=config message=\"" << e.what() << "\"\n";
    return 1;
  } catch (const stmc::DataError& e) {
    std::cerr << "level=error kind=data message=\"" << e.what() << "\"\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "level=error kind=internal message=\"" << e.what() << "\"\n";
    return 3;
  }
}
