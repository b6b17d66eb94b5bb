#include "stmc/measures.hpp"

#include <istream>
#include <map>
#include <ostream>

#include "stmc/csv.hpp"

namespace stmc::measures {

double motif_percent_diff(double antimotifs, double motifs) {
  const double sum = antimotifs + motifs;
  if (sum == 0) return 0.0;
  return 2.0 * (antimotifs - motifs) / sum;
}

std::optional<double> loc_norm_diff(double antimotifs, double motifs,
                                    double loc) {
  if (loc == 0) return std::nullopt;
  return (antimotifs - motifs) / loc;
}

std::vector<MeasureRecord> window_measure_table(
    const motifs::ParticipationTable& participation,
    std::span<const metrics::ArtifactMetrics> metrics,
    const motifs::MotifCounts& counts, Report* report) {
  std::vector<MeasureRecord> out;
  if (participation.artifacts.empty() && counts.triangle_motifs == 0 &&
      counts.triangle_antimotifs == 0 && counts.square_motifs == 0 &&
      counts.square_antimotifs == 0)
    return out;

  const std::size_t w = counts.window_index;
  auto global = [&](motifs::Family f, std::uint64_t m, std::uint64_t am) {
    MeasureRecord rec;
    rec.window_index = w;
    rec.scope = std::string(kGlobalScope);
    rec.family = f;
    rec.motifs = m;
    rec.antimotifs = am;
    rec.r = motif_percent_diff(static_cast<double>(am), static_cast<double>(m));
    out.push_back(std::move(rec));
  };
  global(motifs::Family::triangle, counts.triangle_motifs,
         counts.triangle_antimotifs);
  global(motifs::Family::square, counts.square_motifs,
         counts.square_antimotifs);

  std::map<std::string_view, std::size_t> loc;
  for (const auto& m : metrics) loc.emplace(m.path, m.loc);

  for (std::size_t i = 0; i < participation.artifacts.size(); ++i) {
    const auto& path = participation.artifacts[i];
    auto it = loc.find(path);
    if (it == loc.end()) continue;
    if (it->second == 0) {
      if (report)
        report->warn("window " + std::to_string(w), 0,
                     path + " has zero lines; l undefined, record omitted");
      continue;
    }
    const auto& p = participation.rows[i];
    auto artifact = [&](motifs::Family f, std::uint64_t m, std::uint64_t am) {
      MeasureRecord rec;
      rec.window_index = w;
      rec.scope = path;
      rec.family = f;
      rec.motifs = m;
      rec.antimotifs = am;
      rec.loc = it->second;
      rec.r = motif_percent_diff(static_cast<double>(am),
                                 static_cast<double>(m));
      rec.l = loc_norm_diff(static_cast<double>(am), static_cast<double>(m),
                            static_cast<double>(it->second));
      out.push_back(std::move(rec));
    };
    artifact(motifs::Family::triangle, p.triangle_motif, p.triangle_antimotif);
    artifact(motifs::Family::square, p.square_motif, p.square_antimotif);
  }
  return out;
}

namespace {
const csv::Row kHeader = {"window", "scope", "family", "M", "AM",
                          "loc",    "r",     "l"};
}

void write_measures_csv(std::ostream& out,
                        std::span<const MeasureRecord> rows) {
  csv::Writer w(out);
  w.row(kHeader);
  for (const auto& r : rows) {
    w.field(r.window_index)
        .field(r.scope)
        .field(motifs::to_string(r.family))
        .field(r.motifs)
        .field(r.antimotifs);
    r.loc ? w.field(*r.loc) : w.empty_field();
    w.field(r.r);
    r.l ? w.field(*r.l) : w.empty_field();
    w.end_row();
  }
}

std::vector<MeasureRecord> read_measures_csv(std::istream& in) {
  auto rows = csv::parse(in);
  if (rows.empty() || rows.front() != kHeader)
    throw DataError("measures csv: unexpected header");
  std::vector<MeasureRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != kHeader.size())
      throw FormatError("measures csv", i + 1, "wrong field count");
    MeasureRecord r;
    r.window_index = std::stoull(f[0]);
    r.scope = f[1];
    if (f[2] == "triangle") r.family = motifs::Family::triangle;
    else if (f[2] == "square") r.family = motifs::Family::square;
    else throw FormatError("measures csv", i + 1, "unknown family " + f[2]);
    r.motifs = std::stoull(f[3]);
    r.antimotifs = std::stoull(f[4]);
    if (!f[5].empty()) r.loc = std::stoull(f[5]);
    r.r = csv::parse_double(f[6]);
    if (!f[7].empty()) r.l = csv::parse_double(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace stmc::measures
