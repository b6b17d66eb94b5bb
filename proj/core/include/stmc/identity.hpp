#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stmc/ingest.hpp"

namespace stmc {

using PersonId = std::uint32_t;

/// A canonicalized (name, email) pair: email trimmed and ASCII case-folded,
/// name trimmed with inner whitespace runs collapsed to one space.
struct PersonKey {
  std::string name;
  std::string email;

  auto operator<=>(const PersonKey& o) const {
    if (auto c = email <=> o.email; c != 0) return c;
    return name <=> o.name;
  }
  bool operator==(const PersonKey&) const = default;
};

PersonKey canonicalize(std::string_view name, std::string_view email);

/// Partition of observed (name, email) pairs into persons.
///
/// Two pairs belong to the same person when they share a non-empty canonical
/// email, or share a canonical full name made of at least two tokens; the
/// partition is the transitive closure of both rules. Persons are numbered
/// 0..n-1 in order of their smallest (email, name) pair, so ids do not depend
/// on the order in which pairs were observed.
class IdentityMap {
 public:
  IdentityMap() = default;

  std::optional<PersonId> find(std::string_view name,
                               std::string_view email) const;
  /// Throws DataError for a pair that was never observed.
  PersonId at(std::string_view name, std::string_view email) const;
  PersonId at(const ingest::PersonRef& ref) const {
    return at(ref.name, ref.email);
  }

  std::size_t person_count() const { return aliases_.size(); }
  /// Sorted aliases of one person; the first is its representative.
  const std::vector<PersonKey>& aliases(PersonId id) const {
    return aliases_.at(id);
  }
  const std::map<PersonKey, PersonId>& assignments() const { return ids_; }

 private:
  friend IdentityMap resolve_identities(std::span<const PersonKey>);
  std::map<PersonKey, PersonId> ids_;
  std::vector<std::vector<PersonKey>> aliases_;
};

/// Input pairs are canonicalized before merging.
IdentityMap resolve_identities(std::span<const PersonKey> observed);

/// Every (name, email) pair appearing as commit author, mail sender, issue
/// reporter or issue commenter.
std::vector<PersonKey> observed_persons(
    std::span<const ingest::CommitRecord> commits,
    std::span<const ingest::MailMessage> messages,
    std::span<const ingest::IssueRecord> issues);

}  // namespace stmc
