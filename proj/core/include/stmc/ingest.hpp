#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stmc/errors.hpp"
#include "stmc/time.hpp"

// Readers and writers for the three raw residues of a software project:
// version-control history, mailing-list archives and issue-tracker dumps.
namespace stmc::ingest {

struct FileChange {
  std::string path;
  std::uint64_t lines_added = 0;
  std::uint64_t lines_deleted = 0;
  bool binary = false;  // numstat reported "-" for both counts

  bool operator==(const FileChange&) const = default;
};

struct CommitRecord {
  std::string hash;
  std::string author_name;
  std::string author_email;
  Timestamp authored_at;
  std::string message;
  std::vector<FileChange> file_changes;

  bool operator==(const CommitRecord&) const = default;
};

struct MailMessage {
  std::string message_id;
  std::optional<std::string> in_reply_to;
  std::vector<std::string> references;
  std::string from_name;
  std::string from_email;
  Timestamp sent_at;
  std::string subject;

  bool operator==(const MailMessage&) const = default;
};

struct PersonRef {
  std::string name;
  std::string email;

  bool operator==(const PersonRef&) const = default;
};

enum class IssueType { bug, other };

struct IssueComment {
  PersonRef author;
  Timestamp at;

  bool operator==(const IssueComment&) const = default;
};

struct IssueRecord {
  std::string key;
  IssueType issue_type = IssueType::other;
  std::string raw_type;  // as found in the dump
  Timestamp created_at;
  PersonRef reporter;
  std::vector<IssueComment> comments;  // sorted by timestamp

  bool operator==(const IssueRecord&) const = default;
};

struct ParseOptions {
  /// Fail with FormatError on the first malformed record instead of
  /// skipping it and recording a warning.
  bool strict = false;
  /// Used to label diagnostics.
  std::string source_name = "<stream>";
};

template <class T>
struct Parsed {
  std::vector<T> records;
  Report report;
};

/// Commit log layout:
///
///   \x01COMMIT\x01
///   hash: <id>
///   name: <author name>
///   email: <author email>
///   date: <ISO-8601>
///   msg-begin
///   <message lines; a leading backslash escapes the next character>
///   msg-end
///   <added>\t<deleted>\t<path>     (zero or more; "-\t-\t<path>" = binary)
Parsed<CommitRecord> parse_commit_log(std::istream& in,
                                      const ParseOptions& options = {});
void write_commit_log(std::ostream& out, std::span<const CommitRecord> commits);

inline constexpr std::string_view kCommitSeparator = "\x01" "COMMIT" "\x01";

/// RFC 4155 mbox; only Message-ID, In-Reply-To, References, From, Date and
/// Subject are read. Bodies are discarded.
Parsed<MailMessage> parse_mbox(std::istream& in,
                               const ParseOptions& options = {});
void write_mbox(std::ostream& out, std::span<const MailMessage> messages);

/// JSON array of {key, type, created, reporter{name,email},
/// comments[{author{name,email}, created}]}.
Parsed<IssueRecord> parse_issue_dump(std::istream& in,
                                     const ParseOptions& options = {});
void write_issue_dump(std::ostream& out, std::span<const IssueRecord> issues);

/// Decodes RFC 2047 encoded words (=?charset?Q|B?text?=); the charset is not
/// converted.
std::string decode_encoded_words(std::string_view text);

/// Splits "Name <addr>", "addr (Name)" or "addr" into a person reference.
PersonRef parse_address(std::string_view text);

inline constexpr std::string_view kDefaultIssueKeyPattern =
    R"(\b([A-Z][A-Z0-9]+-[0-9]+)\b)";

struct IssueLinks {
  std::vector<std::pair<std::string, std::string>> links;  // (hash, key)
  /// Distinct (commit, key) mentions whose key is not in the issue set.
  std::size_t unmatched = 0;
};

/// Links commits to issues whose key the commit message mentions. The
/// pattern must contain exactly one capture group; an invalid pattern raises
/// ConfigError.
IssueLinks link_commits_to_issues(
    std::span<const CommitRecord> commits, std::span<const IssueRecord> issues,
    std::string_view key_pattern = kDefaultIssueKeyPattern);

}  // namespace stmc::ingest
