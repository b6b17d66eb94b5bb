#include "stmc/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "stmc/embedded_data.hpp"
#include "stmc/nullmodel.hpp"

namespace stmc::semantic {

namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

// Minimum stem: two letters when starting with a vowel, otherwise three
// letters with a vowel in the second or third position.
bool acceptable(const std::string& w, std::size_t strip) {
  if (strip > w.size()) return false;
  const std::size_t rest = w.size() - strip;
  if (w.empty()) return false;
  if (is_vowel(w[0])) return rest >= 2;
  return rest >= 3 && (is_vowel(w[1]) || is_vowel(w[2]));
}

}  // namespace

LancasterStemmer::LancasterStemmer(std::string_view rules) {
  static const std::regex line_re(R"(^([a-z]+)(\*?)(\d)([a-z]*)([>.]?)$)");
  std::istringstream in{std::string(rules)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::smatch m;
    if (!std::regex_match(line, m, line_re))
      throw ConfigError("invalid stemmer rule '" + line + "'");
    Rule r;
    r.ending = m[1].str();
    std::reverse(r.ending.begin(), r.ending.end());
    r.intact_only = m[2].length() > 0;
    r.strip = static_cast<std::size_t>(m[3].str()[0] - '0');
    r.append = m[4].str();
    r.stop = m[5].str() == ".";
    rules_[r.ending.back()].push_back(std::move(r));
  }
}

const LancasterStemmer& LancasterStemmer::builtin() {
  static const LancasterStemmer s(data::lancaster_rules_txt);
  return s;
}

std::string LancasterStemmer::stem(std::string_view input) const {
  std::string word(input);
  for (auto& c : word)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const std::string intact = word;
  while (!word.empty()) {
    auto it = rules_.find(word.back());
    if (it == rules_.end()) break;
    bool applied = false, stop = false;
    for (const auto& r : it->second) {
      if (!word.ends_with(r.ending)) continue;
      if (r.intact_only && word != intact) continue;
      if (!acceptable(word, r.strip)) continue;
      word.resize(word.size() - r.strip);
      word += r.append;
      applied = true;
      stop = r.stop;
      break;
    }
    if (!applied || stop) break;
  }
  return word;
}

namespace {

const std::set<std::string, std::less<>>& stop_words() {
  static const std::set<std::string, std::less<>> words = [] {
    std::set<std::string, std::less<>> s;
    std::istringstream in{std::string(data::stopwords_txt)};
    std::string w;
    while (in >> w)
      if (w[0] != '#') s.insert(w);
    return s;
  }();
  return words;
}

}  // namespace

std::vector<std::string> tokenize_stem(std::string_view text) {
  const auto& stemmer = LancasterStemmer::builtin();
  const auto& stops = stop_words();
  std::vector<std::string> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty() && !stops.contains(token))
      out.push_back(stemmer.stem(token));
    token.clear();
  };
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u < 128 && std::isalpha(u))
      token.push_back(static_cast<char>(std::tolower(u)));
    else
      flush();
  }
  flush();
  return out;
}

TermDocumentMatrix build_weighted_tdm(std::span<const Document> documents,
                                      Report* report) {
  TermDocumentMatrix tdm;
  for (const auto& d : documents) tdm.documents.push_back(d.path);
  const std::size_t n = documents.size();
  if (n < 2) {
    if (report)
      report->warn("semantic", 0,
                   "fewer than two documents; semantic layer skipped");
    return tdm;
  }
  // term -> (doc -> tf)
  std::map<std::string, std::map<std::size_t, double>> tf;
  for (std::size_t j = 0; j < n; ++j)
    for (const auto& t : documents[j].tokens) tf[t][j] += 1.0;

  std::vector<Eigen::Triplet<double>> entries;
  for (auto& [term, docs] : tf) {
    double idf = std::log(static_cast<double>(n) /
                          static_cast<double>(docs.size()));
    if (idf <= 0) continue;  // in every document
    const auto row = static_cast<int>(tdm.terms.size());
    tdm.terms.push_back(term);
    for (auto [j, f] : docs)
      entries.emplace_back(row, static_cast<int>(j), f * idf);
  }
  tdm.weights.resize(static_cast<Eigen::Index>(tdm.terms.size()),
                     static_cast<Eigen::Index>(n));
  tdm.weights.setFromTriplets(entries.begin(), entries.end());
  for (Eigen::Index j = 0; j < tdm.weights.outerSize(); ++j) {
    double norm = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(tdm.weights, j); it;
         ++it)
      norm += it.value() * it.value();
    if (norm == 0) continue;
    norm = std::sqrt(norm);
    for (Eigen::SparseMatrix<double>::InnerIterator it(tdm.weights, j); it;
         ++it)
      it.valueRef() /= norm;
  }
  return tdm;
}

namespace {

constexpr std::uint64_t kSvdSeed = 0x5eed5eedULL;
constexpr int kPowerIterations = 4;
constexpr Eigen::Index kOversampling = 10;
constexpr Eigen::Index kDenseLimit = 64;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols,
                         std::uint64_t seed) {
  nullmodel::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      // Box-Muller; the second variate is discarded.
      double u1 = 1.0 - rng.uniform();
      double u2 = rng.uniform();
      m(i, j) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * M_PI * u2);
    }
  return m;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

LsiProjection lsi_project(const TermDocumentMatrix& tdm, std::size_t k) {
  const Eigen::Index m = tdm.weights.rows();
  const Eigen::Index n = tdm.weights.cols();
  if (k < 1 || static_cast<Eigen::Index>(k) > std::min(m, n))
    throw ConfigError("lsi rank " + std::to_string(k) + " outside [1, " +
                      std::to_string(std::min(m, n)) + "]");
  const auto kk = static_cast<Eigen::Index>(k);
  LsiProjection p;
  p.k = k;
  Eigen::MatrixXd u, v;
  Eigen::VectorXd s;
  if (m < kDenseLimit && n < kDenseLimit) {
    Eigen::MatrixXd a(tdm.weights);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  } else {
    const Eigen::Index l = std::min(std::min(m, n), kk + kOversampling);
    const auto& a = tdm.weights;
    Eigen::MatrixXd q = orthonormal_basis(a * gaussian(n, l, kSvdSeed));
    for (int it = 0; it < kPowerIterations; ++it) {
      Eigen::MatrixXd z = orthonormal_basis(a.transpose() * q);
      q = orthonormal_basis(a * z);
    }
    Eigen::MatrixXd b = q.transpose() * a;  // l x n
    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = q * svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  }
  p.term_vectors = u.leftCols(kk);
  p.singular_values = s.head(kk);
  p.document_vectors = v.leftCols(kk) * p.singular_values.asDiagonal();
  return p;
}

double reconstruction_error(const TermDocumentMatrix& tdm,
                            const LsiProjection& p) {
  Eigen::MatrixXd a(tdm.weights);
  // document_vectors = V Sigma, so U (V Sigma)^T = U Sigma V^T.
  Eigen::MatrixXd approx = p.term_vectors * p.document_vectors.transpose();
  return (a - approx).norm();
}

double cosine(const Eigen::MatrixXd& vectors, std::size_t i, std::size_t j) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  double dot = 0, ni = 0, nj = 0;
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    dot += vectors(ii, c) * vectors(jj, c);
    ni += vectors(ii, c) * vectors(ii, c);
    nj += vectors(jj, c) * vectors(jj, c);
  }
  if (ni == 0 || nj == 0) return 0;
  return dot / (std::sqrt(ni) * std::sqrt(nj));
}

network::DepLayer semantic_edges(const LsiProjection& projection,
                                 std::span<const std::string> documents,
                                 double threshold) {
  if (!(threshold > 0 && threshold <= 1))
    throw ConfigError("semantic threshold must lie in (0, 1]");
  const auto& vecs = projection.document_vectors;
  if (static_cast<std::size_t>(vecs.rows()) != documents.size())
    throw Error("semantic_edges: document count mismatch");
  std::vector<double> norms(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i)
    norms[i] = vecs.row(static_cast<Eigen::Index>(i)).squaredNorm();
  network::DepLayer out;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (norms[i] == 0) continue;
    for (std::size_t j = i + 1; j < documents.size(); ++j) {
      if (norms[j] == 0 || documents[i] == documents[j]) continue;
      // Tiny tolerance so that identical documents pass at threshold 1.
      if (cosine(vecs, i, j) >= threshold - 1e-12) {
        auto key = std::minmax(documents[i], documents[j]);
        out[{key.first, key.second}] = 1;
      }
    }
  }
  return out;
}

network::DepLayer semantic_dependencies(std::span<const Document> documents,
                                        const SemanticOptions& options,
                                        Report* report) {
  auto tdm = build_weighted_tdm(documents, report);
  const auto m = static_cast<std::size_t>(tdm.weights.rows());
  const auto n = static_cast<std::size_t>(tdm.weights.cols());
  if (m == 0 || n < 2) return {};
  auto k = std::min(options.max_rank, std::min(m, n));
  auto proj = lsi_project(tdm, k);
  return semantic_edges(proj, tdm.documents, options.threshold);
}

}  // namespace stmc::semantic
