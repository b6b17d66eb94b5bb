#include "stmc/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace stmc::ingest {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  return true;
}

bool getline_lf(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::optional<std::uint64_t> parse_count(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    return std::nullopt;
  return v;
}

// Lenient-or-strict error sink shared by the parsers.
class ErrorSink {
 public:
  ErrorSink(const ParseOptions& options, Report& report)
      : options_(options), report_(report) {}

  void operator()(std::size_t line, const std::string& message) {
    if (options_.strict) throw FormatError(options_.source_name, line, message);
    report_.warn(options_.source_name, line, message);
  }

 private:
  const ParseOptions& options_;
  Report& report_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Commit log

Parsed<CommitRecord> parse_commit_log(std::istream& in,
                                      const ParseOptions& options) {
  Parsed<CommitRecord> result;
  ErrorSink error(options, result.report);
  std::unordered_set<std::string> seen_hashes;

  enum class State { outside, header, message, numstat, skipping };
  State state = State::outside;
  CommitRecord current;
  std::size_t record_line = 0;
  std::vector<std::string> message_lines;
  bool has_name = false, has_email = false, has_date = false;

  auto reset = [&] {
    current = CommitRecord{};
    message_lines.clear();
    has_name = has_email = has_date = false;
  };
  auto finish = [&] {
    if (state == State::header || state == State::message) {
      error(record_line, "commit record ended before msg-end");
    } else if (state == State::numstat) {
      if (!seen_hashes.insert(current.hash).second) {
        error(record_line, "duplicate commit hash " + current.hash);
      } else {
        result.records.push_back(std::move(current));
      }
    }
    reset();
  };

  std::string line;
  std::size_t line_no = 0;
  while (getline_lf(in, line)) {
    ++line_no;
    if (line == kCommitSeparator) {
      finish();
      state = State::header;
      record_line = line_no;
      continue;
    }
    switch (state) {
      case State::outside:
        if (!trim(line).empty()) {
          error(line_no, "content before first commit separator");
          state = State::skipping;
        }
        break;
      case State::skipping:
        break;
      case State::header: {
        if (line == "msg-begin") {
          if (current.hash.empty() || !has_name || !has_email || !has_date) {
            error(record_line, "commit header lacks hash, name, email or date");
            state = State::skipping;
            reset();
          } else {
            state = State::message;
          }
          break;
        }
        auto colon = line.find(':');
        if (colon == std::string::npos) {
          error(line_no, "malformed header line");
          state = State::skipping;
          reset();
          break;
        }
        std::string_view key = std::string_view(line).substr(0, colon);
        std::string_view value = trim(std::string_view(line).substr(colon + 1));
        if (key == "hash") {
          current.hash = value;
        } else if (key == "name") {
          current.author_name = value;
          has_name = true;
        } else if (key == "email") {
          current.author_email = value;
          has_email = true;
        } else if (key == "date") {
          auto t = parse_iso8601(value);
          if (!t) {
            error(line_no, "unparseable date '" + std::string(value) + "'");
            state = State::skipping;
            reset();
            break;
          }
          current.authored_at = *t;
          has_date = true;
        } else {
          error(line_no, "unknown header '" + std::string(key) + "'");
          state = State::skipping;
          reset();
        }
        break;
      }
      case State::message:
        if (line == "msg-end") {
          std::string msg;
          for (std::size_t i = 0; i < message_lines.size(); ++i) {
            if (i) msg.push_back('\n');
            msg += message_lines[i];
          }
          current.message = std::move(msg);
          state = State::numstat;
        } else if (!line.empty() && line.front() == '\\') {
          message_lines.push_back(line.substr(1));
        } else {
          message_lines.push_back(line);
        }
        break;
      case State::numstat: {
        if (trim(line).empty()) break;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || t2 + 1 >= line.size()) {
          error(line_no, "malformed numstat line");
          state = State::skipping;
          reset();
          break;
        }
        std::string_view added = std::string_view(line).substr(0, t1);
        std::string_view deleted =
            std::string_view(line).substr(t1 + 1, t2 - t1 - 1);
        FileChange change;
        change.path = line.substr(t2 + 1);
        if (added == "-" && deleted == "-") {
          change.binary = true;
        } else {
          auto a = parse_count(added);
          auto d = parse_count(deleted);
          if (!a || !d) {
            error(line_no, "non-numeric numstat counts");
            state = State::skipping;
            reset();
            break;
          }
          change.lines_added = *a;
          change.lines_deleted = *d;
        }
        current.file_changes.push_back(std::move(change));
        break;
      }
    }
  }
  finish();
  return result;
}

void write_commit_log(std::ostream& out, std::span<const CommitRecord> commits) {
  for (const auto& c : commits) {
    out << kCommitSeparator << '\n'
        << "hash: " << c.hash << '\n'
        << "name: " << c.author_name << '\n'
        << "email: " << c.author_email << '\n'
        << "date: " << format_iso8601(c.authored_at) << '\n'
        << "msg-begin\n";
    if (!c.message.empty()) {
      std::size_t start = 0;
      while (true) {
        auto nl = c.message.find('\n', start);
        std::string_view ln = std::string_view(c.message).substr(
            start, nl == std::string::npos ? std::string::npos : nl - start);
        if (ln == "msg-end" || ln == kCommitSeparator ||
            (!ln.empty() && ln.front() == '\\'))
          out << '\\';
        out << ln << '\n';
        if (nl == std::string::npos) break;
        start = nl + 1;
      }
    }
    out << "msg-end\n";
    for (const auto& f : c.file_changes) {
      if (f.binary)
        out << "-\t-\t" << f.path << '\n';
      else
        out << f.lines_added << '\t' << f.lines_deleted << '\t' << f.path
            << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Mail

namespace {

std::string base64_decode(std::string_view in) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  int buffer = 0, bits = 0;
  for (char c : in) {
    int v = value(c);
    if (v < 0) continue;
    buffer = (buffer << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
    }
  }
  return out;
}

std::string q_decode(std::string_view in) {
  std::string out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    char c = in[i];
    if (c == '_') {
      out.push_back(' ');
    } else if (c == '=' && i + 2 < in.size() &&
               std::isxdigit(static_cast<unsigned char>(in[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(in[i + 2]))) {
      out.push_back(static_cast<char>(
          std::stoi(std::string(in.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// First "<...>" token; requires an "@" when `need_at`.
std::optional<std::string> first_angle_id(std::string_view s, bool need_at) {
  std::size_t pos = 0;
  while ((pos = s.find('<', pos)) != std::string_view::npos) {
    auto end = s.find('>', pos);
    if (end == std::string_view::npos) return std::nullopt;
    std::string_view id = s.substr(pos + 1, end - pos - 1);
    if (!id.empty() && id.find_first_of(" \t<") == std::string_view::npos &&
        (!need_at || id.find('@') != std::string_view::npos))
      return std::string(id);
    pos = end + 1;
  }
  return std::nullopt;
}

std::vector<std::string> all_angle_ids(std::string_view s) {
  std::vector<std::string> ids;
  std::size_t pos = 0;
  while ((pos = s.find('<', pos)) != std::string_view::npos) {
    auto end = s.find('>', pos);
    if (end == std::string_view::npos) break;
    std::string_view id = s.substr(pos + 1, end - pos - 1);
    if (!id.empty() && id.find_first_of(" \t") == std::string_view::npos)
      ids.emplace_back(id);
    pos = end + 1;
  }
  return ids;
}

std::string strip_quotes(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) ++i;
      out.push_back(s[i]);
    }
    return out;
  }
  return std::string(s);
}

struct RawMessage {
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> headers;
};

}  // namespace

std::string decode_encoded_words(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  bool last_was_word = false;
  std::string pending_space;
  while (pos < text.size()) {
    auto start = text.find("=?", pos);
    if (start == std::string_view::npos) {
      out += pending_space;
      out.append(text.substr(pos));
      break;
    }
    auto q1 = text.find('?', start + 2);
    auto q2 = q1 == std::string_view::npos ? q1 : text.find('?', q1 + 1);
    auto end = q2 == std::string_view::npos ? q2 : text.find("?=", q2 + 1);
    if (end == std::string_view::npos) {
      out += pending_space;
      out.append(text.substr(pos));
      break;
    }
    std::string_view between = text.substr(pos, start - pos);
    // Whitespace between two adjacent encoded words is dropped.
    if (!(last_was_word && trim(between).empty())) {
      out += pending_space;
      out.append(between);
    }
    pending_space.clear();
    char enc = static_cast<char>(
        std::toupper(static_cast<unsigned char>(text[q1 + 1])));
    std::string_view payload = text.substr(q2 + 1, end - q2 - 1);
    if (q2 == q1 + 2 && enc == 'B') {
      out += base64_decode(payload);
    } else if (q2 == q1 + 2 && enc == 'Q') {
      out += q_decode(payload);
    } else {
      out.append(text.substr(start, end + 2 - start));
    }
    last_was_word = true;
    pos = end + 2;
  }
  return out;
}

PersonRef parse_address(std::string_view text) {
  std::string decoded = decode_encoded_words(text);
  std::string_view s = trim(decoded);
  PersonRef ref;
  auto lt = s.rfind('<');
  auto gt = s.rfind('>');
  if (lt != std::string_view::npos && gt != std::string_view::npos && gt > lt) {
    ref.email = std::string(trim(s.substr(lt + 1, gt - lt - 1)));
    ref.name = strip_quotes(s.substr(0, lt));
    return ref;
  }
  auto lp = s.find('(');
  auto rp = s.rfind(')');
  if (lp != std::string_view::npos && rp != std::string_view::npos && rp > lp) {
    ref.email = std::string(trim(s.substr(0, lp)));
    ref.name = strip_quotes(s.substr(lp + 1, rp - lp - 1));
    return ref;
  }
  ref.email = std::string(s);
  return ref;
}

Parsed<MailMessage> parse_mbox(std::istream& in, const ParseOptions& options) {
  Parsed<MailMessage> result;
  ErrorSink error(options, result.report);
  std::unordered_set<std::string> seen_ids;

  auto process = [&](const RawMessage& raw) {
    MailMessage msg;
    bool has_id = false, has_date = false;
    std::string date_text;
    for (const auto& [name, value] : raw.headers) {
      if (starts_with_ci(name, "message-id") && name.size() == 10) {
        if (auto id = first_angle_id(value, false)) {
          msg.message_id = *id;
          has_id = true;
        } else if (auto v = trim(value);
                   !v.empty() && v.find_first_of(" \t") == std::string_view::npos) {
          msg.message_id = std::string(v);
          has_id = true;
        }
      } else if (starts_with_ci(name, "in-reply-to") && name.size() == 11) {
        msg.in_reply_to = first_angle_id(value, true);
      } else if (starts_with_ci(name, "references") && name.size() == 10) {
        msg.references = all_angle_ids(value);
      } else if (starts_with_ci(name, "from") && name.size() == 4) {
        auto ref = parse_address(value);
        msg.from_name = std::move(ref.name);
        msg.from_email = std::move(ref.email);
      } else if (starts_with_ci(name, "date") && name.size() == 4) {
        date_text = std::string(trim(value));
        if (auto t = parse_rfc5322_date(date_text)) {
          msg.sent_at = *t;
          has_date = true;
        }
      } else if (starts_with_ci(name, "subject") && name.size() == 7) {
        msg.subject = decode_encoded_words(trim(value));
      }
    }
    if (!has_id) {
      error(raw.line, "message without Message-ID skipped");
      return;
    }
    if (!has_date) {
      error(raw.line, "message " + msg.message_id + " has unparseable Date '" +
                          date_text + "'");
      return;
    }
    if (!seen_ids.insert(msg.message_id).second) {
      error(raw.line, "duplicate Message-ID " + msg.message_id);
      return;
    }
    result.records.push_back(std::move(msg));
  };

  std::string line;
  std::size_t line_no = 0;
  bool prev_blank = true;
  bool in_message = false;
  bool in_headers = false;
  RawMessage raw;
  while (getline_lf(in, line)) {
    ++line_no;
    bool separator = prev_blank && line.rfind("From ", 0) == 0;
    prev_blank = line.empty();
    if (separator) {
      if (in_message) process(raw);
      raw = RawMessage{};
      raw.line = line_no;
      in_message = true;
      in_headers = true;
      continue;
    }
    if (!in_message) {
      if (!line.empty()) {
        error(line_no, "content before first mbox separator");
        in_message = false;
      }
      continue;
    }
    if (!in_headers) continue;
    if (line.empty()) {
      in_headers = false;
      continue;
    }
    if ((line.front() == ' ' || line.front() == '\t') && !raw.headers.empty()) {
      raw.headers.back().second += line;
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;  // not a header; ignore
    raw.headers.emplace_back(line.substr(0, colon), line.substr(colon + 1));
  }
  if (in_message) process(raw);
  return result;
}

void write_mbox(std::ostream& out, std::span<const MailMessage> messages) {
  for (const auto& m : messages) {
    out << "From " << (m.from_email.empty() ? "MAILER-DAEMON" : m.from_email)
        << ' ' << format_rfc5322_date(m.sent_at) << '\n';
    out << "Message-ID: <" << m.message_id << ">\n";
    if (m.in_reply_to) out << "In-Reply-To: <" << *m.in_reply_to << ">\n";
    if (!m.references.empty()) {
      out << "References:";
      for (std::size_t i = 0; i < m.references.size(); ++i)
        out << (i ? "\n " : " ") << '<' << m.references[i] << '>';
      out << '\n';
    }
    out << "From: ";
    if (!m.from_name.empty()) out << '"' << m.from_name << "\" ";
    out << '<' << m.from_email << ">\n";
    out << "Date: " << format_rfc5322_date(m.sent_at) << '\n';
    out << "Subject: " << m.subject << "\n\n";
    out << "(body omitted)\n\n";
  }
}

// ---------------------------------------------------------------------------
// Issues

namespace {

PersonRef person_from_json(const nlohmann::json& j) {
  PersonRef ref;
  if (!j.is_object()) return ref;
  if (auto it = j.find("name"); it != j.end() && it->is_string())
    ref.name = it->get<std::string>();
  if (auto it = j.find("email"); it != j.end() && it->is_string())
    ref.email = it->get<std::string>();
  return ref;
}

std::optional<std::string> string_field(const nlohmann::json& j,
                                        const char* name) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

bool is_bug_type(std::string_view type) {
  std::string lower;
  for (char c : trim(type))
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "bug";
}

}  // namespace

Parsed<IssueRecord> parse_issue_dump(std::istream& in,
                                     const ParseOptions& options) {
  Parsed<IssueRecord> result;
  ErrorSink error(options, result.report);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(options.source_name, 0,
                      std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array())
    throw FormatError(options.source_name, 0, "issue dump must be a JSON array");

  std::unordered_set<std::string> seen_keys;
  std::size_t index = 0;
  for (const auto& item : doc) {
    ++index;  // diagnostics use the 1-based array position as "line"
    if (!item.is_object()) {
      error(index, "issue entry is not an object");
      continue;
    }
    auto key = string_field(item, "key");
    auto created = string_field(item, "created");
    if (!key || key->empty()) {
      error(index, "issue without key skipped");
      continue;
    }
    std::optional<Timestamp> created_at;
    if (created) created_at = parse_iso8601(*created);
    if (!created_at) {
      error(index, "issue " + *key + " without valid created timestamp skipped");
      continue;
    }
    if (!seen_keys.insert(*key).second) {
      error(index, "duplicate issue key " + *key);
      continue;
    }
    IssueRecord issue;
    issue.key = *key;
    issue.raw_type = string_field(item, "type").value_or("");
    issue.issue_type = is_bug_type(issue.raw_type) ? IssueType::bug
                                                   : IssueType::other;
    issue.created_at = *created_at;
    if (auto it = item.find("reporter"); it != item.end())
      issue.reporter = person_from_json(*it);
    if (auto it = item.find("comments"); it != item.end() && it->is_array()) {
      for (const auto& c : *it) {
        auto at = c.is_object() ? string_field(c, "created") : std::nullopt;
        std::optional<Timestamp> ts;
        if (at) ts = parse_iso8601(*at);
        if (!ts || !c.contains("author")) {
          error(index, "comment on " + issue.key +
                           " lacks author or valid created timestamp");
          continue;
        }
        issue.comments.push_back({person_from_json(c["author"]), *ts});
      }
    }
    std::stable_sort(issue.comments.begin(), issue.comments.end(),
                     [](const IssueComment& a, const IssueComment& b) {
                       return a.at < b.at;
                     });
    result.records.push_back(std::move(issue));
  }
  return result;
}

void write_issue_dump(std::ostream& out, std::span<const IssueRecord> issues) {
  auto person = [](const PersonRef& p) {
    return nlohmann::ordered_json{{"name", p.name}, {"email", p.email}};
  };
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& issue : issues) {
    nlohmann::ordered_json comments = nlohmann::ordered_json::array();
    for (const auto& c : issue.comments)
      comments.push_back(
          {{"author", person(c.author)}, {"created", format_iso8601(c.at)}});
    std::string type = issue.raw_type;
    if (type.empty()) type = issue.issue_type == IssueType::bug ? "Bug" : "Task";
    doc.push_back({{"key", issue.key},
                   {"type", type},
                   {"created", format_iso8601(issue.created_at)},
                   {"reporter", person(issue.reporter)},
                   {"comments", comments}});
  }
  out << doc.dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Commit-issue links

IssueLinks link_commits_to_issues(std::span<const CommitRecord> commits,
                                  std::span<const IssueRecord> issues,
                                  std::string_view key_pattern) {
  std::regex pattern;
  try {
    pattern = std::regex(key_pattern.begin(), key_pattern.end());
  } catch (const std::regex_error& e) {
    throw ConfigError("invalid issue key pattern '" + std::string(key_pattern) +
                      "': " + e.what());
  }
  if (pattern.mark_count() != 1)
    throw ConfigError("issue key pattern must have exactly one capture group");

  std::unordered_set<std::string> known;
  for (const auto& issue : issues) known.insert(issue.key);

  IssueLinks result;
  for (const auto& commit : commits) {
    std::set<std::string> mentioned;
    for (std::sregex_iterator it(commit.message.begin(), commit.message.end(),
                                 pattern),
         end;
         it != end; ++it) {
      std::string key = (*it)[1].str();
      if (!mentioned.insert(key).second) continue;
      if (known.contains(key))
        result.links.emplace_back(commit.hash, key);
      else
        ++result.unmatched;
    }
  }
  return result;
}

}  // namespace stmc::ingest
