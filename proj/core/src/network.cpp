#include "stmc/network.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "stmc/csv.hpp"

namespace stmc::network {

void WindowConfig::validate() const {
  if (width <= Duration::zero())
    throw ConfigError("window width must be positive");
  if (cochange_history < width)
    throw ConfigError("co-change history must be at least the window width");
}

std::vector<Window> build_windows(std::span<const SourceEvents> sources,
                                  const WindowConfig& cfg) {
  cfg.validate();
  if (sources.empty()) throw ConfigError("no data sources given");
  Timestamp origin = Timestamp::min();
  Timestamp last = Timestamp::min();
  for (const auto& src : sources) {
    if (src.times.empty())
      throw ConfigError("data source '" + src.name + "' is empty");
    auto [lo, hi] = std::minmax_element(src.times.begin(), src.times.end());
    origin = std::max(origin, *lo);
    last = std::max(last, *hi);
  }
  if (cfg.origin) origin = *cfg.origin;
  if (last < origin) throw ConfigError("all events precede the window origin");

  auto span = last - origin;
  auto count = static_cast<std::size_t>(span / cfg.width) + 1;
  std::vector<Window> windows;
  windows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Timestamp start = origin + cfg.width * static_cast<long long>(i);
    windows.push_back({i, start, start + cfg.width});
  }
  return windows;
}

std::optional<std::size_t> window_of(std::span<const Window> windows,
                                     Timestamp t) {
  if (windows.empty() || t < windows.front().start || t >= windows.back().end)
    return std::nullopt;
  auto it = std::upper_bound(
      windows.begin(), windows.end(), t,
      [](Timestamp value, const Window& w) { return value < w.start; });
  return static_cast<std::size_t>(std::prev(it) - windows.begin());
}

std::vector<ingest::CommitRecord> commits_between(
    std::span<const ingest::CommitRecord> commits, Timestamp start,
    Timestamp end) {
  std::vector<ingest::CommitRecord> out;
  for (const auto& c : commits)
    if (start <= c.authored_at && c.authored_at < end) out.push_back(c);
  return out;
}

ModLayer build_mod_layer(std::span<const ingest::CommitRecord> commits,
                         const IdentityMap& identities) {
  ModLayer layer;
  for (const auto& commit : commits) {
    PersonId person = identities.at(commit.author_name, commit.author_email);
    std::set<std::string_view> paths;
    for (const auto& change : commit.file_changes) paths.insert(change.path);
    for (auto path : paths) ++layer[{person, std::string(path)}];
  }
  return layer;
}

MailMode parse_mail_mode(std::string_view token) {
  if (token == "thread_participants") return MailMode::thread_participants;
  if (token == "direct_reply") return MailMode::direct_reply;
  throw ConfigError("unknown mail mode '" + std::string(token) + "'");
}

namespace {

PersonPair ordered(PersonId a, PersonId b) {
  return a < b ? PersonPair{a, b} : PersonPair{b, a};
}

}  // namespace

CommLayer build_comm_layer_mail(std::span<const ingest::MailMessage> messages,
                                const IdentityMap& identities, MailMode mode,
                                std::size_t* dangling) {
  const std::size_t n = messages.size();
  std::unordered_map<std::string_view, std::size_t> by_id;
  for (std::size_t i = 0; i < n; ++i) by_id.emplace(messages[i].message_id, i);

  std::vector<std::optional<std::size_t>> parent(n);
  std::size_t dangling_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = messages[i];
    std::vector<std::string_view> candidates;
    if (m.in_reply_to) candidates.push_back(*m.in_reply_to);
    for (auto it = m.references.rbegin(); it != m.references.rend(); ++it)
      candidates.push_back(*it);
    for (auto id : candidates) {
      auto found = by_id.find(id);
      if (found != by_id.end() && found->second != i) {
        parent[i] = found->second;
        break;
      }
    }
    if (!parent[i] && !candidates.empty()) ++dangling_count;
  }
  if (dangling) *dangling = dangling_count;

  // Thread root per message; parent chains are cut at the first cycle.
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i;
    std::size_t steps = 0;
    while (parent[cur] && steps++ < n) cur = *parent[cur];
    root[i] = cur;
  }

  std::vector<PersonId> author(n);
  for (std::size_t i = 0; i < n; ++i)
    author[i] = identities.at(messages[i].from_name, messages[i].from_email);

  CommLayer layer;
  if (mode == MailMode::direct_reply) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!parent[i]) continue;
      PersonId a = author[i], b = author[*parent[i]];
      if (a != b) ++layer[ordered(a, b)];
    }
    return layer;
  }

  // Thread participants: each message links its author to every distinct
  // author of earlier messages in the same thread.
  std::map<std::size_t, std::vector<std::size_t>> threads;
  for (std::size_t i = 0; i < n; ++i) threads[root[i]].push_back(i);
  for (auto& [r, members] : threads) {
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t a, std::size_t b) {
                       return messages[a].sent_at < messages[b].sent_at;
                     });
    std::set<PersonId> earlier;
    for (std::size_t m : members) {
      for (PersonId other : earlier)
        if (other != author[m]) ++layer[ordered(author[m], other)];
      earlier.insert(author[m]);
    }
  }
  return layer;
}

CommLayer build_comm_layer_issues(std::span<const ingest::IssueRecord> issues,
                                  const IdentityMap& identities,
                                  const Window& window) {
  CommLayer layer;
  for (const auto& issue : issues) {
    std::set<PersonId> commenters;
    for (const auto& c : issue.comments)
      if (window.contains(c.at)) commenters.insert(identities.at(c.author));
    for (auto a = commenters.begin(); a != commenters.end(); ++a)
      for (auto b = std::next(a); b != commenters.end(); ++b)
        ++layer[{*a, *b}];
  }
  return layer;
}

CommLayer merge_comm_layers(const CommLayer& a, const CommLayer& b) {
  CommLayer out = a;
  for (const auto& [edge, w] : b) out[edge] += w;
  return out;
}

DepLayer build_dep_cochange(std::span<const ingest::CommitRecord> commits,
                            const CochangeOptions& options,
                            std::size_t* skipped) {
  DepLayer layer;
  std::size_t skipped_count = 0;
  for (const auto& commit : commits) {
    std::set<std::string_view> paths;
    for (const auto& change : commit.file_changes) paths.insert(change.path);
    if (paths.size() > options.max_files) {
      ++skipped_count;
      continue;
    }
    for (auto a = paths.begin(); a != paths.end(); ++a)
      for (auto b = std::next(a); b != paths.end(); ++b)
        ++layer[{std::string(*a), std::string(*b)}];
  }
  if (skipped) *skipped = skipped_count;
  return layer;
}

DepLayer import_dsm(std::istream& in) {
  auto rows = csv::parse(in);
  if (rows.empty()) throw DataError("dependency CSV has no header");
  const auto& header = rows.front();
  bool with_weight = false;
  if (header == csv::Row{"from", "to"}) {
    with_weight = false;
  } else if (header == csv::Row{"from", "to", "weight"}) {
    with_weight = true;
  } else {
    std::string got;
    for (const auto& h : header) got += (got.empty() ? "" : ",") + h;
    throw DataError("dependency CSV columns must be from,to[,weight]; got " +
                    got);
  }
  DepLayer layer;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size())
      throw DataError("dependency CSV row " + std::to_string(i + 1) +
                      " has the wrong number of fields");
    if (row[0] == row[1]) continue;
    std::uint32_t weight = 1;
    if (with_weight && !row[2].empty()) {
      double w = csv::parse_double(row[2]);
      weight = w >= 1.0 ? static_cast<std::uint32_t>(w) : 1u;
    }
    ArtifactPair key = row[0] < row[1] ? ArtifactPair{row[0], row[1]}
                                       : ArtifactPair{row[1], row[0]};
    auto& w = layer[key];
    w = std::max(w, weight);
  }
  return layer;
}

STGraph assemble_graph(std::size_t window_index, const CommLayer& comm,
                       const ModLayer& mod, const DepLayer& dep) {
  STGraph g;
  g.window_index = window_index;
  std::set<PersonId> devs;
  std::set<std::string> arts;
  for (const auto& [e, w] : comm) {
    if (e.first == e.second) continue;
    devs.insert(e.first);
    devs.insert(e.second);
  }
  for (const auto& [e, w] : mod) {
    devs.insert(e.first);
    arts.insert(e.second);
  }
  for (const auto& [e, w] : dep) {
    if (e.first == e.second) continue;
    arts.insert(e.first);
    arts.insert(e.second);
  }
  g.developers.assign(devs.begin(), devs.end());
  g.artifacts.assign(arts.begin(), arts.end());

  auto dev_index = [&](PersonId p) {
    return static_cast<std::uint32_t>(
        std::lower_bound(g.developers.begin(), g.developers.end(), p) -
        g.developers.begin());
  };
  auto art_index = [&](const std::string& a) {
    return static_cast<std::uint32_t>(
        std::lower_bound(g.artifacts.begin(), g.artifacts.end(), a) -
        g.artifacts.begin());
  };
  auto sorted_undirected = [](std::uint32_t a, std::uint32_t b,
                              std::uint32_t w) {
    return a < b ? Edge{a, b, w} : Edge{b, a, w};
  };
  auto edge_less = [](const Edge& a, const Edge& b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  };
  for (const auto& [e, w] : comm)
    if (e.first != e.second)
      g.comm.push_back(sorted_undirected(dev_index(e.first),
                                         dev_index(e.second), std::max(w, 1u)));
  for (const auto& [e, w] : mod)
    g.mod.push_back({dev_index(e.first), art_index(e.second), std::max(w, 1u)});
  for (const auto& [e, w] : dep)
    if (e.first != e.second)
      g.dep.push_back(sorted_undirected(art_index(e.first),
                                        art_index(e.second), std::max(w, 1u)));
  std::sort(g.comm.begin(), g.comm.end(), edge_less);
  std::sort(g.mod.begin(), g.mod.end(), edge_less);
  std::sort(g.dep.begin(), g.dep.end(), edge_less);
  return g;
}

std::optional<std::string> check_invariants(const STGraph& g) {
  if (!std::is_sorted(g.developers.begin(), g.developers.end()) ||
      std::adjacent_find(g.developers.begin(), g.developers.end()) !=
          g.developers.end())
    return "developer list not sorted and unique";
  if (!std::is_sorted(g.artifacts.begin(), g.artifacts.end()) ||
      std::adjacent_find(g.artifacts.begin(), g.artifacts.end()) !=
          g.artifacts.end())
    return "artifact list not sorted and unique";
  const auto nd = g.developers.size();
  const auto na = g.artifacts.size();
  auto check_simple = [](const std::vector<Edge>& edges, std::size_t nu,
                         std::size_t nv, bool unipartite,
                         const char* layer) -> std::optional<std::string> {
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& e : edges) {
      if (e.u >= nu || e.v >= nv)
        return std::string(layer) + " edge endpoint out of range";
      if (unipartite && e.u >= e.v)
        return std::string(layer) + " edge is a self-loop or not ordered";
      if (e.weight < 1) return std::string(layer) + " edge weight below 1";
      if (!seen.insert({e.u, e.v}).second)
        return std::string(layer) + " has a duplicate edge";
    }
    return std::nullopt;
  };
  if (auto err = check_simple(g.comm, nd, nd, true, "comm")) return err;
  if (auto err = check_simple(g.mod, nd, na, false, "mod")) return err;
  if (auto err = check_simple(g.dep, na, na, true, "dep")) return err;
  return std::nullopt;
}

Topology topology_of(const STGraph& g) {
  Topology t;
  t.developer_count = static_cast<std::uint32_t>(g.developers.size());
  t.artifact_count = static_cast<std::uint32_t>(g.artifacts.size());
  for (const auto& e : g.comm) t.comm.emplace_back(e.u, e.v);
  for (const auto& e : g.mod) t.mod.emplace_back(e.u, e.v);
  for (const auto& e : g.dep) t.dep.emplace_back(e.u, e.v);
  return t;
}

STGraph with_topology(const STGraph& g, const Topology& t) {
  STGraph out;
  out.window_index = g.window_index;
  out.developers = g.developers;
  out.artifacts = g.artifacts;
  auto convert = [](const auto& pairs, std::vector<Edge>& edges) {
    edges.clear();
    for (auto [u, v] : pairs) edges.push_back({u, v, 1});
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return std::pair(a.u, a.v) < std::pair(b.u, b.v);
    });
  };
  convert(t.comm, out.comm);
  convert(t.mod, out.mod);
  convert(t.dep, out.dep);
  return out;
}

DegreeSequence degree_sequences(const STGraph& g) {
  DegreeSequence seq;
  auto finish = [](std::vector<std::uint32_t>& deg) {
    std::erase(deg, 0u);
    std::sort(deg.begin(), deg.end(), std::greater<>());
    return deg;
  };
  std::vector<std::uint32_t> comm(g.developers.size()), dep(g.artifacts.size()),
      mod_d(g.developers.size()), mod_a(g.artifacts.size());
  for (const auto& e : g.comm) ++comm[e.u], ++comm[e.v];
  for (const auto& e : g.dep) ++dep[e.u], ++dep[e.v];
  for (const auto& e : g.mod) ++mod_d[e.u], ++mod_a[e.v];
  seq.comm = finish(comm);
  seq.dep = finish(dep);
  seq.mod_developers = finish(mod_d);
  seq.mod_artifacts = finish(mod_a);
  return seq;
}

void write_graph(const std::filesystem::path& dir, const STGraph& g) {
  std::filesystem::create_directories(dir);
  {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"id", "type"});
    for (PersonId p : g.developers) w.field(p).field("developer").end_row();
    for (const auto& a : g.artifacts) w.field(a).field("artifact").end_row();
    csv::write_text_file(dir / "vertices.csv", out.str());
  }
  auto write_layer = [&](const char* name, const std::vector<Edge>& edges,
                         auto u_id, auto v_id) {
    std::ostringstream out;
    csv::Writer w(out);
    w.row({"u", "v", "weight"});
    for (const auto& e : edges)
      w.field(u_id(e.u)).field(v_id(e.v)).field(e.weight).end_row();
    csv::write_text_file(dir / name, out.str());
  };
  auto dev = [&](std::uint32_t i) { return std::to_string(g.developers[i]); };
  auto art = [&](std::uint32_t i) { return g.artifacts[i]; };
  write_layer("comm.csv", g.comm, dev, dev);
  write_layer("mod.csv", g.mod, dev, art);
  write_layer("dep.csv", g.dep, art, art);
}

STGraph read_graph(const std::filesystem::path& dir, std::size_t window_index) {
  auto vertices = csv::read_file(dir / "vertices.csv");
  if (vertices.empty() || vertices.front() != csv::Row{"id", "type"})
    throw DataError("bad vertex manifest in " + dir.string());
  auto parse_person = [](const std::string& s) {
    PersonId p = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), p);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw DataError("bad developer id '" + s + "'");
    return p;
  };
  CommLayer comm;
  ModLayer mod;
  DepLayer dep;
  std::set<PersonId> devs;
  std::set<std::string> arts;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const auto& row = vertices[i];
    if (row.size() != 2) throw DataError("bad vertex row in " + dir.string());
    if (row[1] == "developer")
      devs.insert(parse_person(row[0]));
    else if (row[1] == "artifact")
      arts.insert(row[0]);
    else
      throw DataError("unknown vertex type '" + row[1] + "'");
  }
  auto read_layer = [&](const char* name, auto&& add) {
    auto rows = csv::read_file(dir / name);
    if (rows.empty() || rows.front() != csv::Row{"u", "v", "weight"})
      throw DataError(std::string("bad header in ") + name);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != 3) throw DataError(std::string("bad row in ") + name);
      add(rows[i][0], rows[i][1],
          static_cast<std::uint32_t>(std::stoul(rows[i][2])));
    }
  };
  read_layer("comm.csv", [&](const std::string& u, const std::string& v,
                             std::uint32_t w) {
    comm[ordered(parse_person(u), parse_person(v))] = w;
  });
  read_layer("mod.csv", [&](const std::string& u, const std::string& v,
                            std::uint32_t w) { mod[{parse_person(u), v}] = w; });
  read_layer("dep.csv", [&](const std::string& u, const std::string& v,
                            std::uint32_t w) {
    dep[u < v ? ArtifactPair{u, v} : ArtifactPair{v, u}] = w;
  });
  STGraph g = assemble_graph(window_index, comm, mod, dep);
  std::vector<PersonId> d(devs.begin(), devs.end());
  std::vector<std::string> a(arts.begin(), arts.end());
  if (d != g.developers || a != g.artifacts)
    throw DataError("vertex manifest does not match edges in " + dir.string());
  return g;
}

}  // namespace stmc::network
