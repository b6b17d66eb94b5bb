#include "stmc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "stmc/csv.hpp"

namespace stmc::pipeline {

std::string_view to_string(DepMechanism d) {
  switch (d) {
    case DepMechanism::cochange: return "cochange";
    case DepMechanism::dsm: return "dsm";
    case DepMechanism::semantic: return "semantic";
  }
  return "?";
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::mail: return "mail";
    case Channel::issues: return "issues";
    case Channel::mail_issues: return "mail+issues";
  }
  return "?";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::isochronous: return "isochronous";
    case Scenario::advanced: return "advanced";
    case Scenario::retarded: return "retarded";
  }
  return "?";
}

DepMechanism parse_dep_mechanism(std::string_view t) {
  if (t == "cochange") return DepMechanism::cochange;
  if (t == "dsm") return DepMechanism::dsm;
  if (t == "semantic") return DepMechanism::semantic;
  throw ConfigError("unknown dependency mechanism '" + std::string(t) + "'");
}

Channel parse_channel(std::string_view t) {
  if (t == "mail") return Channel::mail;
  if (t == "issues") return Channel::issues;
  if (t == "mail+issues") return Channel::mail_issues;
  throw ConfigError("unknown communication channel '" + std::string(t) + "'");
}

Scenario parse_scenario(std::string_view t) {
  if (t == "isochronous") return Scenario::isochronous;
  if (t == "advanced") return Scenario::advanced;
  if (t == "retarded") return Scenario::retarded;
  throw ConfigError("unknown scenario '" + std::string(t) + "'");
}

std::string GridCell::network_name() const {
  return std::string(to_string(dependency)) + "-" +
         std::string(to_string(channel));
}

std::string GridCell::name() const {
  return network_name() + "-" + std::string(stats::to_string(quality));
}

std::vector<std::pair<DepMechanism, Channel>> AnalysisConfig::networks()
    const {
  std::vector<std::pair<DepMechanism, Channel>> out;
  for (auto d : dependency)
    for (auto c : channel)
      if (std::find(out.begin(), out.end(), std::pair{d, c}) == out.end())
        out.emplace_back(d, c);
  return out;
}

std::vector<GridCell> AnalysisConfig::cells() const {
  std::vector<GridCell> out;
  for (auto [d, c] : networks())
    for (auto q : quality) {
      GridCell cell{d, c, q};
      if (std::none_of(out.begin(), out.end(), [&](const GridCell& o) {
            return o.name() == cell.name();
          }))
        out.push_back(cell);
    }
  return out;
}

void AnalysisConfig::validate() const {
  window.validate();
  rewire.validate();
  if (dependency.empty() || channel.empty() || quality.empty() ||
      scenario.empty())
    throw ConfigError("dependency, channel, quality and scenario need values");
  if (paths.commits.empty()) throw ConfigError("paths.commits is required");
  for (auto d : dependency)
    if (d == DepMechanism::dsm && paths.dsm.empty())
      throw ConfigError("dependency 'dsm' requires paths.dsm");
  for (auto c : channel) {
    if (c != Channel::issues && paths.mbox.empty())
      throw ConfigError("channel '" + std::string(to_string(c)) +
                        "' requires paths.mbox");
    if (c != Channel::mail && paths.issues.empty())
      throw ConfigError("channel '" + std::string(to_string(c)) +
                        "' requires paths.issues");
  }
  if (!(semantic.threshold > 0 && semantic.threshold <= 1))
    throw ConfigError("semantic.threshold must lie in (0, 1]");
  if (semantic.max_rank < 1) throw ConfigError("semantic.max_rank must be >= 1");
  if (regression.alphas.empty()) throw ConfigError("regression.alphas empty");
  for (double a : regression.alphas)
    if (!(a >= 0.1 && a <= 0.9))
      throw ConfigError("regression.alphas must lie in [0.1, 0.9]");
  if (regression.folds < 2) throw ConfigError("regression.folds must be >= 2");
  if (regression.lambda_count < 1)
    throw ConfigError("regression.lambda_count must be >= 1");
  if (!(regression.lambda_ratio > 0 && regression.lambda_ratio < 1))
    throw ConfigError("regression.lambda_ratio must lie in (0, 1)");
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    auto comma = v.find(',', start);
    if (comma == std::string_view::npos) comma = v.size();
    auto item = trim(v.substr(start, comma - start));
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view v, std::string_view key) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("invalid number '" + std::string(v) + "' for " +
                      std::string(key));
  return out;
}

bool parse_bool(std::string_view v, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(v) + "' for " +
                    std::string(key));
}

template <typename T, typename F>
std::vector<T> parse_list(std::string_view v, F&& parse) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(parse(item));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (double d : v) {
    if (!out.empty()) out += ", ";
    out += csv::format_double(d);
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& name) {
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += ", ";
    out += std::string(name(x));
  }
  return out;
}

}  // namespace

AnalysisConfig parse_config(std::istream& in,
                            const std::filesystem::path& base_dir) {
  AnalysisConfig cfg;
  auto path = [&](const std::string& v) -> std::filesystem::path {
    if (v.empty()) return {};
    std::filesystem::path p(v);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  using Setter = std::function<void(const std::string&, std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"dependency",
       [&](const std::string& v, auto) {
         cfg.dependency = parse_list<DepMechanism>(v, parse_dep_mechanism);
       }},
      {"channel",
       [&](const std::string& v, auto) {
         cfg.channel = parse_list<Channel>(v, parse_channel);
       }},
      {"quality",
       [&](const std::string& v, auto) {
         cfg.quality =
             parse_list<stats::Regressand>(v, stats::parse_regressand);
       }},
      {"scenario",
       [&](const std::string& v, auto) {
         cfg.scenario = parse_list<Scenario>(v, parse_scenario);
       }},
      {"motif_semantics",
       [&](const std::string& v, auto) {
         cfg.motif_semantics = motifs::parse_semantics(v);
       }},
      {"mail_mode",
       [&](const std::string& v, auto) {
         cfg.mail_mode = network::parse_mail_mode(v);
       }},
      {"window.width_days",
       [&](const std::string& v, auto k) {
         cfg.window.width = days(parse_number<int>(v, k));
       }},
      {"window.cochange_history_days",
       [&](const std::string& v, auto k) {
         cfg.window.cochange_history = days(parse_number<int>(v, k));
       }},
      {"window.origin",
       [&](const std::string& v, auto) {
         if (v.empty())
           cfg.window.origin.reset();
         else if (auto t = parse_iso8601(v))
           cfg.window.origin = *t;
         else
           throw ConfigError("invalid timestamp '" + v + "'");
       }},
      {"cochange.max_files",
       [&](const std::string& v, auto k) {
         cfg.cochange.max_files = parse_number<std::size_t>(v, k);
       }},
      {"semantic.max_rank",
       [&](const std::string& v, auto k) {
         cfg.semantic.max_rank = parse_number<std::size_t>(v, k);
       }},
      {"semantic.threshold",
       [&](const std::string& v, auto k) {
         cfg.semantic.threshold = parse_number<double>(v, k);
       }},
      {"rewire.swaps_per_edge",
       [&](const std::string& v, auto k) {
         cfg.rewire.swaps_per_edge = parse_number<std::uint32_t>(v, k);
       }},
      {"rewire.replicates",
       [&](const std::string& v, auto k) {
         cfg.rewire.replicates = parse_number<std::uint32_t>(v, k);
       }},
      {"nullmodel.enabled",
       [&](const std::string& v, auto k) {
         cfg.nullmodel_enabled = parse_bool(v, k);
       }},
      {"regression.min_rows",
       [&](const std::string& v, auto k) {
         cfg.regression.prepare.min_rows = parse_number<std::size_t>(v, k);
       }},
      {"regression.drop_zero_response",
       [&](const std::string& v, auto k) {
         cfg.regression.prepare.drop_zero_response = parse_bool(v, k);
       }},
      {"regression.alphas",
       [&](const std::string& v, auto k) {
         cfg.regression.alphas = parse_list<double>(
             v, [&](const std::string& s) { return parse_number<double>(s, k); });
       }},
      {"regression.folds",
       [&](const std::string& v, auto k) {
         cfg.regression.folds = parse_number<std::size_t>(v, k);
       }},
      {"regression.lambda_count",
       [&](const std::string& v, auto k) {
         cfg.regression.lambda_count = parse_number<std::size_t>(v, k);
       }},
      {"regression.lambda_ratio",
       [&](const std::string& v, auto k) {
         cfg.regression.lambda_ratio = parse_number<double>(v, k);
       }},
      {"master_seed",
       [&](const std::string& v, auto k) {
         cfg.master_seed = parse_number<std::uint64_t>(v, k);
       }},
      {"issue_key_pattern",
       [&](const std::string& v, auto) { cfg.issue_key_pattern = v; }},
      {"strict",
       [&](const std::string& v, auto k) { cfg.strict = parse_bool(v, k); }},
      {"paths.commits",
       [&](const std::string& v, auto) { cfg.paths.commits = path(v); }},
      {"paths.mbox",
       [&](const std::string& v, auto) { cfg.paths.mbox = path(v); }},
      {"paths.issues",
       [&](const std::string& v, auto) { cfg.paths.issues = path(v); }},
      {"paths.dsm", [&](const std::string& v, auto) { cfg.paths.dsm = path(v); }},
      {"paths.snapshots",
       [&](const std::string& v, auto) { cfg.paths.snapshots = path(v); }},
      {"paths.database",
       [&](const std::string& v, auto) { cfg.paths.database = path(v); }},
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // '#' starts a comment unless inside the value of issue_key_pattern.
    auto eq = line.find('=');
    std::string key = trim(line.substr(0, eq == std::string::npos ? line.size() : eq));
    if (key.empty() || key[0] == '#') continue;
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string value = line.substr(eq + 1);
    if (key != "issue_key_pattern")
      if (auto hash = value.find('#'); hash != std::string::npos)
        value.resize(hash);
    value = trim(value);
    auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    try {
      it->second(value, key);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const FormatError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  return parse_config(in, file.parent_path());
}

std::string AnalysisConfig::canonical_text() const {
  std::ostringstream o;
  o << "dependency = " << join(dependency, [](auto d) { return to_string(d); })
    << "\nchannel = " << join(channel, [](auto c) { return to_string(c); })
    << "\nquality = "
    << join(quality, [](auto q) { return stats::to_string(q); })
    << "\nscenario = " << join(scenario, [](auto s) { return to_string(s); })
    << "\nmotif_semantics = " << motifs::to_string(motif_semantics)
    << "\nmail_mode = "
    << (mail_mode == network::MailMode::thread_participants
            ? "thread_participants"
            : "direct_reply")
    << "\nwindow.width_days = " << window.width.count() / 86400
    << "\nwindow.cochange_history_days = "
    << window.cochange_history.count() / 86400 << "\nwindow.origin = "
    << (window.origin ? format_iso8601(*window.origin) : std::string())
    << "\ncochange.max_files = " << cochange.max_files
    << "\nsemantic.max_rank = " << semantic.max_rank
    << "\nsemantic.threshold = " << csv::format_double(semantic.threshold)
    << "\nrewire.swaps_per_edge = " << rewire.swaps_per_edge
    << "\nrewire.replicates = " << rewire.replicates
    << "\nnullmodel.enabled = " << (nullmodel_enabled ? "true" : "false")
    << "\nregression.min_rows = " << regression.prepare.min_rows
    << "\nregression.drop_zero_response = "
    << (regression.prepare.drop_zero_response ? "true" : "false")
    << "\nregression.alphas = " << join_doubles(regression.alphas)
    << "\nregression.folds = " << regression.folds
    << "\nregression.lambda_count = " << regression.lambda_count
    << "\nregression.lambda_ratio = "
    << csv::format_double(regression.lambda_ratio)
    << "\nissue_key_pattern = " << issue_key_pattern
    << "\nstrict = " << (strict ? "true" : "false") << "\n";
  return o.str();
}

std::string default_config_text() {
  return R"(# stmc analysis configuration. Relative paths are resolved against the
# directory holding this file. Lists are comma separated.

# Dependency mechanisms: cochange | dsm | semantic
dependency = cochange
# Communication channels: mail | issues | mail+issues
channel = mail+issues
# Quality regressands: bug_density | churn
quality = bug_density, churn
# Temporal pairing of quality and motifs: isochronous | advanced | retarded
scenario = isochronous, advanced, retarded

# induced | partial
motif_semantics = induced
# thread_participants | direct_reply
mail_mode = thread_participants

window.width_days = 90
window.cochange_history_days = 365
# ISO-8601; empty derives the origin from the data
window.origin =
# commits touching more files add no co-change edges
cochange.max_files = 50

semantic.max_rank = 50
semantic.threshold = 0.7

rewire.swaps_per_edge = 100
rewire.replicates = 1000
nullmodel.enabled = true

regression.min_rows = 10
regression.drop_zero_response = false
regression.alphas = 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9
regression.folds = 10
regression.lambda_count = 100
regression.lambda_ratio = 0.001

master_seed = 0
issue_key_pattern = \b([A-Z][A-Z0-9]+-[0-9]+)\b
strict = false

paths.commits = commits.log
paths.mbox = mail.mbox
paths.issues = issues.json
paths.dsm =
paths.snapshots = snapshots
paths.database = db
)";
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace stmc::pipeline
