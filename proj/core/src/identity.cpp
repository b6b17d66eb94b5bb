#include "stmc/identity.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_map>

#include "stmc/errors.hpp"

namespace stmc {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller index becomes the root; keeps the structure deterministic.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::size_t token_count(std::string_view name) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : name) {
    bool space = c == ' ';
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

}  // namespace

PersonKey canonicalize(std::string_view name, std::string_view email) {
  PersonKey key;
  bool pending_space = false;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !key.name.empty();
      continue;
    }
    if (pending_space) key.name.push_back(' ');
    pending_space = false;
    key.name.push_back(c);
  }
  std::size_t b = 0, e = email.size();
  while (b < e && std::isspace(static_cast<unsigned char>(email[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(email[e - 1]))) --e;
  for (char c : email.substr(b, e - b))
    key.email.push_back(
        static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return key;
}

std::optional<PersonId> IdentityMap::find(std::string_view name,
                                          std::string_view email) const {
  auto it = ids_.find(canonicalize(name, email));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

PersonId IdentityMap::at(std::string_view name, std::string_view email) const {
  if (auto id = find(name, email)) return *id;
  throw DataError("unknown identity '" + std::string(name) + " <" +
                  std::string(email) + ">'");
}

IdentityMap resolve_identities(std::span<const PersonKey> observed) {
  std::vector<PersonKey> pairs;
  pairs.reserve(observed.size());
  for (const auto& p : observed) pairs.push_back(canonicalize(p.name, p.email));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  DisjointSets sets(pairs.size());
  std::unordered_map<std::string, std::size_t> by_email;
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].email.empty()) {
      auto [it, inserted] = by_email.emplace(pairs[i].email, i);
      if (!inserted) sets.unite(it->second, i);
    }
    if (token_count(pairs[i].name) >= 2) {
      auto [it, inserted] = by_name.emplace(pairs[i].name, i);
      if (!inserted) sets.unite(it->second, i);
    }
  }

  // pairs are sorted by (email, name), so the first pair met for each root
  // is its class minimum and visiting in index order numbers classes by it.
  IdentityMap map;
  std::unordered_map<std::size_t, PersonId> root_to_id;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto root = sets.find(i);
    auto [it, inserted] =
        root_to_id.emplace(root, static_cast<PersonId>(map.aliases_.size()));
    if (inserted) map.aliases_.emplace_back();
    map.aliases_[it->second].push_back(pairs[i]);
    map.ids_.emplace(pairs[i], it->second);
  }
  return map;
}

std::vector<PersonKey> observed_persons(
    std::span<const ingest::CommitRecord> commits,
    std::span<const ingest::MailMessage> messages,
    std::span<const ingest::IssueRecord> issues) {
  std::vector<PersonKey> out;
  for (const auto& c : commits) out.push_back({c.author_name, c.author_email});
  for (const auto& m : messages) out.push_back({m.from_name, m.from_email});
  for (const auto& i : issues) {
    out.push_back({i.reporter.name, i.reporter.email});
    for (const auto& c : i.comments)
      out.push_back({c.author.name, c.author.email});
  }
  return out;
}

}  // namespace stmc
