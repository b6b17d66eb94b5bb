#include "stmc/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stmc/csv.hpp"
#include "stmc/embedded_data.hpp"

namespace stmc::metrics {

std::size_t loc_of_snapshot(std::string_view contents) {
  std::size_t n = std::count(contents.begin(), contents.end(), '\n');
  if (!contents.empty() && contents.back() != '\n') ++n;
  return n;
}

std::uint64_t churn_per_window(std::span<const ingest::CommitRecord> commits,
                               std::string_view path) {
  std::uint64_t total = 0;
  for (const auto& c : commits)
    for (const auto& fc : c.file_changes)
      if (fc.path == path) total += fc.lines_added + fc.lines_deleted;
  return total;
}

std::map<std::string, std::uint64_t> churn_by_path(
    std::span<const ingest::CommitRecord> commits) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& c : commits)
    for (const auto& fc : c.file_changes)
      out[fc.path] += fc.lines_added + fc.lines_deleted;
  return out;
}

namespace {

std::set<std::string_view> bug_keys(
    std::span<const ingest::IssueRecord> issues) {
  std::set<std::string_view> keys;
  for (const auto& i : issues)
    if (i.issue_type == ingest::IssueType::bug) keys.insert(i.key);
  return keys;
}

// hash -> bug keys linked to it
std::map<std::string_view, std::vector<std::string_view>> bug_links(
    std::span<const std::pair<std::string, std::string>> links,
    std::span<const ingest::IssueRecord> issues) {
  auto bugs = bug_keys(issues);
  std::map<std::string_view, std::vector<std::string_view>> out;
  for (const auto& [hash, key] : links)
    if (bugs.contains(key)) out[hash].push_back(key);
  return out;
}

}  // namespace

std::map<std::string, std::uint64_t> bug_counts_by_path(
    std::span<const std::pair<std::string, std::string>> links,
    std::span<const ingest::IssueRecord> issues,
    std::span<const ingest::CommitRecord> commits) {
  auto linked = bug_links(links, issues);
  std::map<std::string, std::set<std::string_view>> per_path;
  for (const auto& c : commits) {
    auto it = linked.find(c.hash);
    if (it == linked.end()) continue;
    for (const auto& fc : c.file_changes)
      per_path[fc.path].insert(it->second.begin(), it->second.end());
  }
  std::map<std::string, std::uint64_t> out;
  for (auto& [path, keys] : per_path) out[path] = keys.size();
  return out;
}

BugStats bug_stats_per_window(
    std::span<const std::pair<std::string, std::string>> links,
    std::span<const ingest::IssueRecord> issues,
    std::span<const ingest::CommitRecord> commits, std::string_view path,
    std::size_t loc) {
  auto counts = bug_counts_by_path(links, issues, commits);
  BugStats s;
  if (auto it = counts.find(std::string(path)); it != counts.end())
    s.bug_count = it->second;
  if (loc > 0) s.bug_density = static_cast<double>(s.bug_count) / loc;
  return s;
}

// ---------------------------------------------------------------------------
// Language profiles

LanguageProfiles LanguageProfiles::from_json(std::string_view text) {
  LanguageProfiles out;
  try {
    auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw ConfigError("language profiles: not an object");
    for (const auto& [name, entry] : doc.items()) {
      LanguageProfile p;
      p.name = name;
      p.extensions = entry.at("extensions").get<std::vector<std::string>>();
      p.branch_tokens =
          entry.at("branch_tokens").get<std::vector<std::string>>();
      p.block_open = entry.value("block_open", "{");
      p.block_close = entry.value("block_close", "}");
      p.line_comment = entry.value("line_comment", "");
      if (entry.contains("block_comment")) {
        auto bc = entry.at("block_comment").get<std::vector<std::string>>();
        if (bc.size() != 2)
          throw ConfigError("language profile " + name +
                            ": block_comment needs two markers");
        p.block_comment = {bc[0], bc[1]};
      }
      if (entry.contains("string_quotes"))
        p.string_quotes =
            entry.at("string_quotes").get<std::vector<std::string>>();
      if (p.block_open.empty() || p.block_close.empty())
        throw ConfigError("language profile " + name + ": empty delimiter");
      out.profiles_.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("language profiles: ") + e.what());
  }
  for (std::size_t i = 0; i < out.profiles_.size(); ++i)
    for (const auto& ext : out.profiles_[i].extensions)
      out.by_extension_.emplace(ext, i);
  return out;
}

const LanguageProfiles& LanguageProfiles::builtin() {
  static const LanguageProfiles table =
      from_json(data::language_profiles_json);
  return table;
}

const LanguageProfile* LanguageProfiles::for_path(std::string_view path) const {
  auto slash = path.rfind('/');
  auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
  auto dot = name.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return nullptr;
  auto it = by_extension_.find(name.substr(dot));
  return it == by_extension_.end() ? nullptr : &profiles_[it->second];
}

// ---------------------------------------------------------------------------
// Complexity

namespace {

bool is_ident(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool starts_with_at(std::string_view s, std::size_t i, std::string_view p) {
  return !p.empty() && s.substr(i, p.size()) == p;
}

// Blanks out comments and string literals, keeping newlines and offsets.
std::string strip(std::string_view src, const LanguageProfile& p) {
  std::string out(src);
  std::size_t i = 0;
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to && k < out.size(); ++k)
      if (out[k] != '\n') out[k] = ' ';
  };
  while (i < src.size()) {
    if (starts_with_at(src, i, p.line_comment)) {
      auto end = src.find('\n', i);
      if (end == std::string_view::npos) end = src.size();
      blank(i, end);
      i = end;
      continue;
    }
    if (starts_with_at(src, i, p.block_comment.first)) {
      auto end = src.find(p.block_comment.second,
                          i + p.block_comment.first.size());
      end = end == std::string_view::npos ? src.size()
                                          : end + p.block_comment.second.size();
      blank(i, end);
      i = end;
      continue;
    }
    bool quoted = false;
    for (const auto& q : p.string_quotes) {
      if (!starts_with_at(src, i, q)) continue;
      std::size_t k = i + q.size();
      while (k < src.size() && !starts_with_at(src, k, q) && src[k] != '\n')
        k += src[k] == '\\' ? 2 : 1;
      k = std::min(src.size(), k + (k < src.size() && src[k] != '\n'
                                        ? q.size()
                                        : 0));
      blank(i, k);
      i = k;
      quoted = true;
      break;
    }
    if (!quoted) ++i;
  }
  return out;
}

const std::set<std::string_view>& control_keywords() {
  static const std::set<std::string_view> kw = {
      "if",     "for",   "while",  "switch", "catch", "foreach", "return",
      "sizeof", "else",  "do",     "match",  "loop",  "synchronized",
      "using",  "lock",  "fixed",  "with",   "when",  "select", "defer",
      "new",    "throw", "typeof", "delete", "await"};
  return kw;
}

std::size_t skip_space_back(std::string_view s, std::size_t i) {
  // returns index one past the last non-space char before i
  while (i > 0 && std::isspace(static_cast<unsigned char>(s[i - 1]))) --i;
  return i;
}

// Position of the bracket matching the closer at s[close], scanning back.
std::optional<std::size_t> match_back(std::string_view s, std::size_t close,
                                      char open_c, char close_c) {
  int depth = 0;
  for (std::size_t k = close + 1; k-- > 0;) {
    if (s[k] == close_c) ++depth;
    else if (s[k] == open_c && --depth == 0) return k;
    if (s[k] == '{' || s[k] == '}' || s[k] == ';') return std::nullopt;
  }
  return std::nullopt;
}

// Whether the block opening at `open` starts a function body.
bool is_function_open(std::string_view s, std::size_t open) {
  std::size_t i = open;
  // Trailing qualifiers, return types and initializer lists.
  while (true) {
    i = skip_space_back(s, i);
    if (i == 0) return false;
    char c = s[i - 1];
    if (c == ')') break;
    if (c == '>' && !(i >= 2 && s[i - 2] == '-')) {
      auto m = match_back(s, i - 1, '<', '>');
      if (!m) return false;
      i = *m;
      continue;
    }
    if (is_ident(c) || c == ':' || c == '&' || c == '*' || c == ',' ||
        c == '.' || c == '[' || c == ']' || c == '?' || c == '>' ||
        c == '-') {
      --i;
      continue;
    }
    return false;
  }
  // One or more parenthesized groups, then a name.
  while (true) {
    auto m = match_back(s, i - 1, '(', ')');
    if (!m) return false;
    i = skip_space_back(s, *m);
    if (i == 0) return false;
    if (s[i - 1] == ')') continue;
    std::size_t end = i;
    while (i > 0 && is_ident(s[i - 1])) --i;
    if (i == end) return false;
    auto name = s.substr(i, end - i);
    if (std::isdigit(static_cast<unsigned char>(name.front()))) return false;
    return !control_keywords().contains(name);
  }
}

std::size_t count_tokens(std::string_view s, std::size_t from, std::size_t to,
                         const std::vector<std::string>& tokens) {
  std::size_t n = 0;
  std::size_t i = from;
  while (i < to) {
    if (!is_ident(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < to && is_ident(s[j])) ++j;
    auto word = s.substr(i, j - i);
    for (const auto& t : tokens)
      if (word == t) ++n;
    i = j;
  }
  return n;
}

}  // namespace

Complexity complexity_estimates(std::string_view contents,
                                const LanguageProfile& profile) {
  const std::string code = strip(contents, profile);
  const std::string_view s = code;
  const auto& open = profile.block_open;
  const auto& close = profile.block_close;

  std::uint32_t depth = 0, raw_max = 0;
  std::uint32_t fn_max = 0;
  // Active function: body depth (after its opening) and start offset.
  std::uint32_t fn_depth = 0;  // depth of the open function body, 0 outside
  std::size_t fn_start = 0;
  std::vector<std::size_t> cyclomatic;

  std::size_t i = 0;
  while (i < s.size()) {
    if (starts_with_at(s, i, open)) {
      ++depth;
      raw_max = std::max(raw_max, depth);
      if (!fn_depth && is_function_open(s, i)) {
        fn_depth = depth;
        fn_start = i + open.size();
      } else if (fn_depth) {
        fn_max = std::max(fn_max, depth - fn_depth);
      }
      i += open.size();
    } else if (starts_with_at(s, i, close)) {
      if (fn_depth && depth == fn_depth) {
        cyclomatic.push_back(
            1 + count_tokens(s, fn_start, i, profile.branch_tokens));
        fn_depth = 0;
      }
      if (depth > 0) --depth;
      i += close.size();
    } else {
      ++i;
    }
  }
  if (fn_depth)  // unterminated body
    cyclomatic.push_back(
        1 + count_tokens(s, fn_start, s.size(), profile.branch_tokens));

  Complexity c;
  c.function_count = cyclomatic.size();
  if (cyclomatic.empty()) {
    c.max_nesting = raw_max;
  } else {
    c.max_nesting = fn_max;
    double sum = 0;
    for (auto v : cyclomatic) sum += static_cast<double>(v);
    c.avg_cyclomatic = sum / static_cast<double>(cyclomatic.size());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Snapshots and history

std::optional<std::string> SnapshotStore::read(std::string_view hash,
                                               std::string_view path) const {
  std::ifstream in(root_ / std::string(hash) / std::string(path),
                   std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void SnapshotStore::write(std::string_view hash, std::string_view path,
                          std::string_view contents) const {
  csv::write_text_file(root_ / std::string(hash) / std::string(path),
                       contents);
}

FileHistory::FileHistory(std::span<const ingest::CommitRecord> commits) {
  for (const auto& c : commits)
    for (const auto& fc : c.file_changes)
      entries_[fc.path].push_back(
          {c.authored_at, c.hash, fc.lines_added, fc.lines_deleted});
  for (auto& [path, list] : entries_)
    std::stable_sort(list.begin(), list.end(),
                     [](const Entry& a, const Entry& b) { return a.at < b.at; });
}

const FileHistory::Entry* FileHistory::reference(std::string_view path,
                                                 Timestamp end) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) return nullptr;
  const auto& list = it->second;
  auto pos = std::lower_bound(
      list.begin(), list.end(), end,
      [](const Entry& e, Timestamp t) { return e.at < t; });
  if (pos == list.begin()) return nullptr;
  return &*std::prev(pos);
}

std::int64_t FileHistory::replayed_loc(std::string_view path,
                                       Timestamp end) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) return 0;
  std::int64_t loc = 0;
  for (const auto& e : it->second) {
    if (e.at >= end) break;
    loc += static_cast<std::int64_t>(e.added) -
           static_cast<std::int64_t>(e.deleted);
  }
  return loc;
}

std::vector<std::string> FileHistory::paths_before(Timestamp end) const {
  std::vector<std::string> out;
  for (const auto& [path, list] : entries_)
    if (!list.empty() && list.front().at < end) out.push_back(path);
  return out;
}

std::vector<ArtifactMetrics> window_metrics(const MetricsInputs& in,
                                            const network::Window& window,
                                            Report& report) {
  if (!in.history) throw Error("window_metrics: file history missing");
  const auto* profiles =
      in.profiles ? in.profiles : &LanguageProfiles::builtin();
  auto slice = network::commits_between(in.commits, window.start, window.end);
  auto churn = churn_by_path(slice);
  auto bugs = bug_counts_by_path(in.links, in.issues, slice);
  std::map<std::string, std::set<PersonId>> devs;
  if (in.identities)
    for (const auto& c : slice) {
      auto id = in.identities->find(c.author_name, c.author_email);
      if (!id) continue;
      for (const auto& fc : c.file_changes) devs[fc.path].insert(*id);
    }

  const std::string source = "window " + std::to_string(window.index);
  std::vector<ArtifactMetrics> out;
  for (const auto& path : in.history->paths_before(window.end)) {
    const auto* ref = in.history->reference(path, window.end);
    ArtifactMetrics m;
    m.path = path;
    m.window_index = window.index;
    if (in.snapshots) {
      auto contents = in.snapshots->read(ref->hash, path);
      if (!contents) {
        // Deleted files are expected; only report touched ones.
        if (churn.contains(path))
          report.warn(source, 0, "no snapshot for " + path + " at " +
                                     ref->hash + "; artifact dropped");
        continue;
      }
      m.loc = loc_of_snapshot(*contents);
      if (const auto* profile = profiles->for_path(path)) {
        auto cx = complexity_estimates(*contents, *profile);
        m.max_nesting = cx.max_nesting;
        m.avg_cyclomatic = cx.avg_cyclomatic;
      }
    } else {
      auto loc = in.history->replayed_loc(path, window.end);
      if (loc <= 0) continue;  // deleted
      m.loc = static_cast<std::size_t>(loc);
    }
    if (auto it = churn.find(path); it != churn.end()) m.churn = it->second;
    if (auto it = bugs.find(path); it != bugs.end()) m.bug_count = it->second;
    if (auto it = devs.find(path); it != devs.end())
      m.dev_count = static_cast<std::uint32_t>(it->second.size());
    if (m.loc > 0)
      m.bug_density = static_cast<double>(m.bug_count) / m.loc;
    else
      report.warn(source, 0, path + " has zero lines; bug density undefined");
    out.push_back(std::move(m));
  }
  return out;
}

namespace {
const csv::Row kMetricsHeader = {"path",        "window",     "loc",
                                 "churn",       "bug_count",  "bug_density",
                                 "max_nesting", "avg_cyclomatic",
                                 "dev_count"};
}

void write_metrics_csv(std::ostream& out,
                       std::span<const ArtifactMetrics> rows) {
  csv::Writer w(out);
  w.row(kMetricsHeader);
  for (const auto& m : rows) {
    w.field(m.path).field(m.window_index).field(m.loc).field(m.churn).field(
        m.bug_count);
    m.bug_density ? w.field(*m.bug_density) : w.empty_field();
    m.max_nesting ? w.field(*m.max_nesting) : w.empty_field();
    m.avg_cyclomatic ? w.field(*m.avg_cyclomatic) : w.empty_field();
    w.field(m.dev_count);
    w.end_row();
  }
}

std::vector<ArtifactMetrics> read_metrics_csv(std::istream& in) {
  auto rows = csv::parse(in);
  if (rows.empty() || rows.front() != kMetricsHeader)
    throw DataError("metrics csv: unexpected header");
  std::vector<ArtifactMetrics> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != kMetricsHeader.size())
      throw FormatError("metrics csv", r + 1, "wrong field count");
    ArtifactMetrics m;
    m.path = f[0];
    m.window_index = std::stoull(f[1]);
    m.loc = std::stoull(f[2]);
    m.churn = std::stoull(f[3]);
    m.bug_count = std::stoull(f[4]);
    if (!f[5].empty()) m.bug_density = csv::parse_double(f[5]);
    if (!f[6].empty()) m.max_nesting = static_cast<std::uint32_t>(std::stoul(f[6]));
    if (!f[7].empty()) m.avg_cyclomatic = csv::parse_double(f[7]);
    m.dev_count = static_cast<std::uint32_t>(std::stoul(f[8]));
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace stmc::metrics
