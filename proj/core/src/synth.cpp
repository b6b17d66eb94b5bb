#include "stmc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "stmc/config.hpp"
#include "stmc/csv.hpp"
#include "stmc/metrics.hpp"
#include "stmc/network.hpp"
#include "stmc/nullmodel.hpp"

namespace stmc::synth {

void SyntheticSpec::validate() const {
  if (developers < 1 || artifacts < 1 || windows < 1 || modules < 1)
    throw ConfigError("synthetic counts must be >= 1");
  if (!(p_comm >= 0 && p_comm <= 1))
    throw ConfigError("p_comm must lie in [0, 1]");
  if (!(effect >= 0)) throw ConfigError("effect must be >= 0");
  if (!(bug_rate >= 0)) throw ConfigError("bug_rate must be >= 0");
  if (!(commits_per_developer >= 1))
    throw ConfigError("commits_per_developer must be >= 1");
  if (window_days < 2) throw ConfigError("window_days must be >= 2");
}

namespace {

using nullmodel::Rng;

const char* const kFirstNames[] = {
    "Ada",   "Bruno", "Chiara", "Dmitri", "Elena", "Farid",  "Greta", "Hugo",
    "Ines",  "Jonas", "Kara",   "Luca",   "Mina",  "Nils",   "Olga",  "Pavel",
    "Quinn", "Rosa",  "Sven",   "Tomas",  "Ulla",  "Viktor", "Wanda", "Yusuf"};
const char* const kLastNames[] = {
    "Albers", "Berger", "Castro", "Dahl",   "Eriksen", "Fischer", "Gallo",
    "Horvat", "Ivanov", "Jansen", "Keller", "Lindqvist", "Moreau", "Novak",
    "Olsen",  "Petrov", "Quist",  "Rossi",  "Schmid",  "Tanaka", "Urban",
    "Varga",  "Weber",  "Zeman"};
const char* const kModuleNames[] = {"net",   "storage", "render", "parser",
                                    "sched", "crypto",  "audio",  "config"};
// Vocabulary per module; words are chosen to stem to distinct terms.
const char* const kVocabulary[][8] = {
    {"socket", "packet", "router", "latency", "handshake", "bandwidth", "proxy", "tunnel"},
    {"disk", "block", "journal", "extent", "inode", "volume", "flush", "sector"},
    {"pixel", "shader", "texture", "raster", "viewport", "gradient", "sprite", "canvas"},
    {"token", "grammar", "syntax", "lexeme", "parse", "ast", "symbol", "literal"},
    {"thread", "queue", "quantum", "priority", "preempt", "affinity", "tick", "deadline"},
    {"cipher", "key", "nonce", "digest", "signature", "entropy", "salt", "certificate"},
    {"sample", "codec", "volume", "mixer", "stereo", "frequency", "decibel", "waveform"},
    {"option", "default", "profile", "schema", "override", "setting", "environment", "flag"}};
constexpr std::size_t kModuleKinds = std::size(kModuleNames);

std::string hex_hash(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t a = nullmodel::replicate_seed(seed, 0xc0ffee, counter);
  std::uint64_t b = nullmodel::replicate_seed(seed, 0xbeef, counter);
  std::uint64_t c = nullmodel::replicate_seed(seed, 0xf00d, counter);
  char buf[49];
  std::snprintf(buf, sizeof buf, "%016llx%016llx%016llx",
                static_cast<unsigned long long>(a),
                static_cast<unsigned long long>(b),
                static_cast<unsigned long long>(c));
  return std::string(buf, 40);
}

std::uint64_t poisson(Rng& rng, double lambda) {
  if (lambda <= 0) return 0;
  if (lambda > 30) {
    // Normal approximation; Box-Muller.
    double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
    double z = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
    return static_cast<std::uint64_t>(
        std::max(0.0, std::round(lambda + std::sqrt(lambda) * z)));
  }
  const double limit = std::exp(-lambda);
  std::uint64_t k = 0;
  double prod = rng.uniform();
  while (prod > limit) {
    ++k;
    prod *= rng.uniform();
  }
  return k;
}

Timestamp random_time(Rng& rng, Timestamp from, Timestamp to) {
  auto span = (to - from).count();
  if (span <= 0) return from;
  return from + Duration(static_cast<long long>(
                    rng.below(static_cast<std::uint64_t>(span))));
}

struct Developer {
  std::string name;
  std::string commit_email;
  std::string mail_email;
  std::uint32_t module = 0;
};

struct Function {
  std::vector<std::string> lines;
};

struct File {
  std::string path;
  std::uint32_t module = 0;
  std::uint32_t complexity = 1;  // mean branches per function
  std::uint32_t nesting = 1;
  std::uint32_t owner = 0;
  std::vector<Function> functions;
  std::uint32_t next_function = 0;
  std::uint32_t tweaks = 0;

  std::size_t lines() const {
    std::size_t n = 3;  // header
    for (const auto& f : functions) n += f.lines.size() + 1;
    return n;
  }
};

const char* word(std::uint32_t module, Rng& rng) {
  return kVocabulary[module % kModuleKinds][rng.below(8)];
}

Function make_function(const File& file, Rng& rng) {
  Function f;
  const auto m = file.module;
  f.lines.push_back(std::string("// ") + word(m, rng) + " " + word(m, rng) +
                    " " + word(m, rng));
  std::ostringstream sig;
  sig << "int " << word(m, rng) << "_" << file.next_function << "(int x) {";
  f.lines.push_back(sig.str());
  f.lines.push_back("  int y = x;");
  int branches = static_cast<int>(file.complexity) +
                 static_cast<int>(rng.below(3)) - 1;
  branches = std::max(branches, 0);
  const int nested = std::min<int>(branches, static_cast<int>(file.nesting));
  auto indent = [](int depth) { return std::string(2 * depth, ' '); };
  auto open = [&](int depth, int k) {
    switch (rng.below(3)) {
      case 0:
        return indent(depth) + "if (y > " + std::to_string(k) + ") {";
      case 1:
        return indent(depth) + "while (y > " + std::to_string(k * 10) + ") {";
      default:
        return indent(depth) + "for (int i = 0; i < " + std::to_string(k) +
               "; ++i) {";
    }
  };
  // One nested chain, then sequential blocks.
  for (int d = 1; d <= nested; ++d) f.lines.push_back(open(d, d));
  if (nested > 0) f.lines.push_back(indent(nested + 1) + "y -= 1;");
  for (int d = nested; d >= 1; --d) f.lines.push_back(indent(d) + "}");
  for (int b = nested; b < branches; ++b) {
    f.lines.push_back(open(1, b + 2));
    f.lines.push_back(indent(2) + "y += " + std::to_string(b) + ";");
    f.lines.push_back(indent(1) + "}");
  }
  f.lines.push_back("  return y;");
  f.lines.push_back("}");
  return f;
}

std::string render(const File& file) {
  std::string out = "// " + std::string(kModuleNames[file.module % kModuleKinds]) +
                    " module\n#include <stdio.h>\n\n";
  for (const auto& f : file.functions) {
    for (const auto& l : f.lines) out += l + "\n";
    out += "\n";
  }
  return out;
}

// Changes one line: the local initialisation of a function.
ingest::FileChange tweak(File& file, Rng& rng) {
  auto& f = file.functions[rng.below(file.functions.size())];
  f.lines[2] = "  int y = x + " + std::to_string(++file.tweaks) + ";";
  return {file.path, 1, 1, false};
}

ingest::FileChange edit(File& file, Rng& rng) {
  ingest::FileChange fc{file.path, 0, 0, false};
  double u = rng.uniform();
  if (u < 0.3 || file.functions.empty()) {
    ++file.next_function;
    auto fn = make_function(file, rng);
    fc.lines_added = fn.lines.size() + 1;
    file.functions.push_back(std::move(fn));
  } else if (u < 0.85 || file.functions.size() <= 2) {
    auto i = rng.below(file.functions.size());
    ++file.next_function;
    auto fn = make_function(file, rng);
    fc.lines_deleted = file.functions[i].lines.size();
    fc.lines_added = fn.lines.size();
    file.functions[i] = std::move(fn);
  } else {
    auto i = rng.below(file.functions.size());
    fc.lines_deleted = file.functions[i].lines.size() + 1;
    file.functions.erase(file.functions.begin() +
                         static_cast<std::ptrdiff_t>(i));
  }
  return fc;
}

enum class Kind { feature, maintenance, fix };

struct Intent {
  Timestamp at;
  std::uint32_t dev = 0;
  std::vector<std::uint32_t> files;
  Kind kind = Kind::feature;
  std::string issue_key;  // fixes only
};

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec)
      : spec_(spec), rng_(spec.seed) {}

  SyntheticCorpus run() {
    setup();
    initial_import();
    for (std::uint32_t w = 0; w < spec_.windows; ++w) window(w);
    std::stable_sort(out_.messages.begin(), out_.messages.end(),
                     [](const auto& a, const auto& b) {
                       return a.sent_at < b.sent_at;
                     });
    return std::move(out_);
  }

 private:
  void setup() {
    const auto modules = spec_.modules;
    for (std::uint32_t d = 0; d < spec_.developers; ++d) {
      Developer dev;
      const auto first = kFirstNames[d % std::size(kFirstNames)];
      const auto last =
          kLastNames[(d / std::size(kFirstNames) + d) % std::size(kLastNames)];
      dev.name = std::string(first) + " " + last;
      std::string lower_first = first, lower_last = last;
      for (auto& c : lower_first) c = static_cast<char>(std::tolower(c));
      for (auto& c : lower_last) c = static_cast<char>(std::tolower(c));
      const auto tag = std::to_string(d);
      dev.commit_email = lower_first + "." + lower_last + tag + "@example.org";
      // Every third developer writes mail from a second address.
      dev.mail_email = d % 3 == 0 ? lower_first + tag + "@lists.example.org"
                                  : dev.commit_email;
      dev.module = d % modules;
      dev_index_[dev.commit_email] = d;
      devs_.push_back(std::move(dev));
    }
    module_devs_.resize(modules);
    for (std::uint32_t d = 0; d < spec_.developers; ++d)
      module_devs_[devs_[d].module].push_back(d);
    module_files_.resize(modules);
    for (std::uint32_t a = 0; a < spec_.artifacts; ++a) {
      File f;
      f.module = a % modules;
      const auto& mname = kModuleNames[f.module % kModuleKinds];
      f.path = "src/" + std::string(mname) +
               (f.module >= kModuleKinds
                    ? std::to_string(f.module / kModuleKinds)
                    : std::string()) +
               "/" + kVocabulary[f.module % kModuleKinds][a / modules % 8] +
               "_" + std::to_string(a) + ".c";
      f.complexity = 1 + static_cast<std::uint32_t>(rng_.below(5));
      f.nesting = 1 + static_cast<std::uint32_t>(rng_.below(3));
      const auto& pool = module_devs_[f.module];
      f.owner = pool.empty() ? static_cast<std::uint32_t>(rng_.below(
                                   spec_.developers))
                             : pool[rng_.below(pool.size())];
      auto count = 3 + rng_.below(6);
      for (std::uint64_t i = 0; i < count; ++i) {
        ++f.next_function;
        f.functions.push_back(make_function(f, rng_));
      }
      module_files_[f.module].push_back(a);
      files_.push_back(std::move(f));
    }
    for (std::uint32_t a = 0; a < spec_.artifacts; ++a) {
      const auto& pool = module_files_[files_[a].module];
      if (pool.size() < 2) continue;
      for (int k = 0; k < 2; ++k) {
        auto b = pool[rng_.below(pool.size())];
        if (b != a) out_.dsm.emplace_back(files_[a].path, files_[b].path);
      }
    }
  }

  Timestamp window_start(std::uint32_t w) const {
    return spec_.start + days(static_cast<long long>(spec_.window_days) * w);
  }

  ingest::CommitRecord commit(const Intent& in, std::string message) {
    ingest::CommitRecord c;
    c.hash = hex_hash(spec_.seed, commit_counter_++);
    c.author_name = devs_[in.dev].name;
    c.author_email = devs_[in.dev].commit_email;
    c.authored_at = in.at;
    c.message = std::move(message);
    return c;
  }

  void initial_import() {
    // One commit per file before the origin, so the import shapes history
    // without creating co-change edges.
    Timestamp at = spec_.start - days(1);
    for (std::uint32_t a = 0; a < spec_.artifacts; ++a) {
      auto& f = files_[a];
      Intent in{at + Duration(a), f.owner, {a}, Kind::feature, {}};
      auto c = commit(in, "Add " + f.path);
      c.file_changes.push_back({f.path, f.lines(), 0, false});
      last_hash_[f.path] = c.hash;
      out_.snapshots[{c.hash, f.path}] = render(f);
      out_.commits.push_back(std::move(c));
    }
    // Kick-off events at the origin.
    ingest::MailMessage m;
    m.message_id = "kickoff@synth.example.org";
    m.from_name = devs_[0].name;
    m.from_email = devs_[0].mail_email;
    m.sent_at = spec_.start;
    m.subject = "Project kick-off";
    out_.messages.push_back(std::move(m));
    ingest::IssueRecord is;
    is.key = next_issue_key();
    is.issue_type = ingest::IssueType::other;
    is.raw_type = "Task";
    is.created_at = spec_.start;
    is.reporter = {devs_[0].name, devs_[0].commit_email};
    out_.issues.push_back(std::move(is));
  }

  std::string next_issue_key() { return "PROJ-" + std::to_string(++issues_); }

  std::string describe(const std::vector<std::uint32_t>& files) const {
    std::string s;
    for (auto a : files) {
      if (!s.empty()) s += ", ";
      s += files_[a].path;
    }
    return s;
  }

  void apply(const Intent& in) {
    std::string msg;
    switch (in.kind) {
      case Kind::feature: msg = "Rework " + describe(in.files); break;
      case Kind::maintenance: msg = "Tidy " + describe(in.files); break;
      case Kind::fix: msg = "Fix " + in.issue_key + " in " + describe(in.files); break;
    }
    auto c = commit(in, std::move(msg));
    for (auto a : in.files) {
      auto& f = files_[a];
      c.file_changes.push_back(in.kind == Kind::feature ? edit(f, rng_)
                                                        : tweak(f, rng_));
      last_hash_[f.path] = c.hash;
      touched_.insert(a);
    }
    out_.commits.push_back(std::move(c));
  }

  void window(std::uint32_t w) {
    const Timestamp ws = window_start(w);
    const Timestamp we = window_start(w + 1);
    const Duration width = we - ws;
    const Timestamp work_end = ws + width * 8 / 10;
    touched_.clear();

    // Feature and maintenance work in the first 80% of the window.
    std::vector<Intent> intents;
    for (std::uint32_t d = 0; d < spec_.developers; ++d) {
      auto n = 1 + poisson(rng_, spec_.commits_per_developer - 1);
      for (std::uint64_t k = 0; k < n; ++k) {
        Intent in;
        in.at = random_time(rng_, ws, work_end);
        in.dev = d;
        std::uint32_t module = devs_[d].module;
        if (rng_.uniform() < 0.15)
          module = static_cast<std::uint32_t>(rng_.below(spec_.modules));
        const auto& pool = module_files_[module];
        if (pool.empty()) continue;
        auto count = 1 + rng_.below(3);
        std::set<std::uint32_t> chosen;
        for (std::uint64_t i = 0; i < count; ++i)
          chosen.insert(pool[rng_.below(pool.size())]);
        in.files.assign(chosen.begin(), chosen.end());
        intents.push_back(std::move(in));
      }
    }
    for (std::uint32_t a = 0; a < spec_.artifacts; ++a)
      intents.push_back({random_time(rng_, ws, work_end), files_[a].owner, {a},
                         Kind::maintenance, {}});
    std::stable_sort(intents.begin(), intents.end(),
                     [](const Intent& a, const Intent& b) { return a.at < b.at; });
    const std::size_t first_commit = out_.commits.size();
    for (const auto& in : intents) apply(in);

    // Window graph as the analysis will see it (identities = indices).
    network::ModLayer mod;
    for (std::size_t i = first_commit; i < out_.commits.size(); ++i) {
      const auto& c = out_.commits[i];
      auto d = dev_index_.at(c.author_email);
      for (const auto& fc : c.file_changes) ++mod[{d, fc.path}];
    }
    auto history = network::commits_between(
        out_.commits, we - days(365), we);
    auto dep = network::build_dep_cochange(history);
    auto pairs = collaborating_pairs(mod, dep);

    network::CommLayer comm;
    for (auto [d1, d2] : pairs) {
      if (rng_.uniform() >= spec_.p_comm) continue;
      comm[{d1, d2}] = 1;
      communicate(d1, d2, random_time(rng_, ws, we - std::chrono::hours(3)));
    }

    // Bugs, fixed by the artifact's owner near the end of the window.
    auto graph = network::assemble_graph(w, comm, mod, dep);
    auto [counts, part] =
        motifs::count_with_participation(graph, motifs::Semantics::induced);
    std::map<std::string, double> excess;
    for (std::size_t i = 0; i < part.artifacts.size(); ++i) {
      const auto& p = part.rows[i];
      double am = spec_.effect_family == motifs::Family::square
                      ? static_cast<double>(p.square_antimotif)
                      : static_cast<double>(p.triangle_antimotif);
      double m = spec_.effect_family == motifs::Family::square
                     ? static_cast<double>(p.square_motif)
                     : static_cast<double>(p.triangle_motif);
      excess[part.artifacts[i]] = std::max(0.0, am - m);
    }
    std::vector<Intent> fixes;
    for (std::uint32_t a = 0; a < spec_.artifacts; ++a) {
      const auto& f = files_[a];
      double lambda = spec_.bug_rate * static_cast<double>(f.lines()) *
                      static_cast<double>(f.complexity);
      if (auto it = excess.find(f.path); it != excess.end())
        lambda += spec_.effect * it->second;
      auto bugs = poisson(rng_, lambda);
      for (std::uint64_t b = 0; b < bugs; ++b) {
        auto created = random_time(rng_, ws, we - std::chrono::hours(2));
        auto fixed = random_time(rng_, std::max(created, work_end) +
                                           std::chrono::minutes(1),
                                 we - std::chrono::minutes(1));
        ingest::IssueRecord is;
        is.key = next_issue_key();
        is.issue_type = ingest::IssueType::bug;
        is.raw_type = "Bug";
        is.created_at = created;
        const auto reporter = rng_.below(spec_.developers);
        is.reporter = {devs_[reporter].name, devs_[reporter].commit_email};
        fixes.push_back({fixed, f.owner, {a}, Kind::fix, is.key});
        out_.issues.push_back(std::move(is));
      }
    }
    std::stable_sort(fixes.begin(), fixes.end(),
                     [](const Intent& a, const Intent& b) { return a.at < b.at; });
    for (const auto& in : fixes) apply(in);

    for (auto a : touched_) {
      const auto& f = files_[a];
      out_.snapshots[{last_hash_.at(f.path), f.path}] = render(f);
    }
  }

  std::vector<std::pair<PersonId, PersonId>> collaborating_pairs(
      const network::ModLayer& mod, const network::DepLayer& dep) const {
    std::map<std::string, std::vector<PersonId>> modifiers;
    for (const auto& [key, weight] : mod) modifiers[key.second].push_back(key.first);
    std::set<std::pair<PersonId, PersonId>> out;
    auto add = [&](PersonId a, PersonId b) {
      if (a != b) out.insert(std::minmax(a, b));
    };
    for (const auto& [path, ds] : modifiers)
      for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = i + 1; j < ds.size(); ++j) add(ds[i], ds[j]);
    for (const auto& [edge, weight] : dep) {
      auto i1 = modifiers.find(edge.first);
      auto i2 = modifiers.find(edge.second);
      if (i1 == modifiers.end() || i2 == modifiers.end()) continue;
      for (auto d1 : i1->second)
        for (auto d2 : i2->second) add(d1, d2);
    }
    return {out.begin(), out.end()};
  }

  void communicate(PersonId d1, PersonId d2, Timestamp t) {
    const auto& a = devs_[d1];
    const auto& b = devs_[d2];
    Rng& r = rng_;
    std::string topic = word(a.module, r);
    ingest::MailMessage first;
    first.message_id = "m" + std::to_string(++mails_) + "@synth.example.org";
    first.from_name = a.name;
    first.from_email = a.mail_email;
    first.sent_at = t;
    first.subject = "Question about " + topic;
    ingest::MailMessage reply;
    reply.message_id = "m" + std::to_string(++mails_) + "@synth.example.org";
    reply.in_reply_to = first.message_id;
    reply.references = {first.message_id};
    reply.from_name = b.name;
    reply.from_email = b.mail_email;
    reply.sent_at = t + std::chrono::hours(1);
    reply.subject = "Re: Question about " + topic;
    out_.messages.push_back(std::move(first));
    out_.messages.push_back(std::move(reply));

    ingest::IssueRecord is;
    is.key = next_issue_key();
    is.issue_type = ingest::IssueType::other;
    is.raw_type = "Task";
    is.created_at = t;
    is.reporter = {a.name, a.commit_email};
    is.comments.push_back({{a.name, a.commit_email}, t + std::chrono::minutes(30)});
    is.comments.push_back({{b.name, b.commit_email}, t + std::chrono::minutes(90)});
    out_.issues.push_back(std::move(is));
  }

  const SyntheticSpec& spec_;
  Rng rng_;
  std::vector<Developer> devs_;
  std::map<std::string, PersonId> dev_index_;
  std::vector<std::vector<std::uint32_t>> module_devs_;
  std::vector<std::vector<std::uint32_t>> module_files_;
  std::vector<File> files_;
  std::map<std::string, std::string> last_hash_;
  std::set<std::uint32_t> touched_;
  std::uint64_t commit_counter_ = 0;
  std::uint64_t issues_ = 0;
  std::uint64_t mails_ = 0;
  SyntheticCorpus out_;
};

}  // namespace

SyntheticCorpus synth_generate(const SyntheticSpec& spec) {
  spec.validate();
  Generator g(spec);
  return g.run();
}

void write_corpus(const SyntheticCorpus& corpus,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "commits.log", std::ios::binary);
    ingest::write_commit_log(out, corpus.commits);
  }
  {
    std::ofstream out(dir / "mail.mbox", std::ios::binary);
    ingest::write_mbox(out, corpus.messages);
  }
  {
    std::ofstream out(dir / "issues.json", std::ios::binary);
    ingest::write_issue_dump(out, corpus.issues);
  }
  {
    std::ofstream out(dir / "dsm.csv", std::ios::binary);
    csv::Writer w(out);
    w.row({"from", "to"});
    for (const auto& [from, to] : corpus.dsm) w.row({from, to});
  }
  metrics::SnapshotStore store(dir / "snapshots");
  for (const auto& [key, contents] : corpus.snapshots)
    store.write(key.first, key.second, contents);
  std::string conf = pipeline::default_config_text();
  const std::string from = "paths.dsm =\n";
  conf.replace(conf.find(from), from.size(), "paths.dsm = dsm.csv\n");
  csv::write_text_file(dir / "stmc.conf", conf);
}

}  // namespace stmc::synth
