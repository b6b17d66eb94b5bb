#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "stmc/semantic.hpp"

using namespace stmc;
using namespace stmc::semantic;

namespace {

// Frozen output of oracles/lancaster.py (NLTK LancasterStemmer).
const std::pair<const char*, const char*> kStems[] = {
    {"running", "run"}, {"runner", "run"}, {"runs", "run"}, {"maximum", "maxim"},
    {"presumably", "presum"}, {"multiply", "multiply"}, {"provision", "provid"},
    {"owed", "ow"}, {"ear", "ear"}, {"saying", "say"}, {"crying", "cry"},
    {"string", "string"}, {"meant", "meant"}, {"cement", "cem"},
    {"happiness", "happy"}, {"generously", "gen"}, {"organization", "org"},
    {"apply", "apply"}, {"applications", "apply"}, {"communicate", "commun"},
    {"communication", "commun"}, {"developer", "develop"},
    {"developers", "develop"}, {"socket", "socket"}, {"packet", "packet"},
    {"router", "rout"}, {"latency", "lat"}, {"handshake", "handshak"},
    {"bandwidth", "bandwid"}, {"journal", "journ"}, {"inode", "inod"},
    {"volume", "volum"}, {"sector", "sect"}, {"shader", "shad"},
    {"texture", "text"}, {"raster", "rast"}, {"viewport", "viewport"},
    {"gradient", "grady"}, {"sprite", "sprite"}, {"canvas", "canva"},
    {"token", "tok"}, {"grammar", "gramm"}, {"syntax", "syntax"},
    {"symbol", "symbol"}, {"literal", "lit"}, {"thread", "thread"},
    {"queue", "queu"}, {"priority", "pri"}, {"deadline", "deadlin"},
    {"cipher", "ciph"}, {"nonce", "nont"}, {"digest", "digest"},
    {"signature", "sign"}, {"entropy", "entrop"}, {"certificate", "cert"},
    {"sample", "sampl"}, {"codec", "codec"}, {"mixer", "mix"},
    {"frequency", "frequ"}, {"waveform", "waveform"}, {"option", "opt"},
    {"default", "default"}, {"profile", "profil"}, {"schema", "schema"},
    {"override", "overrid"}, {"setting", "set"}, {"environment", "environ"},
    {"flag", "flag"}, {"aaa", "aa"}, {"a", "a"}, {"be", "be"}, {"is", "is"},
    {"national", "nat"}, {"nationality", "nat"}, {"dependencies", "depend"},
    {"dependency", "depend"}};

Document doc(std::string path, std::vector<std::string> tokens) {
  return {std::move(path), std::move(tokens)};
}

TermDocumentMatrix dense_tdm(const Eigen::MatrixXd& a) {
  TermDocumentMatrix t;
  for (Eigen::Index i = 0; i < a.rows(); ++i) t.terms.push_back("t" + std::to_string(i));
  for (Eigen::Index j = 0; j < a.cols(); ++j) t.documents.push_back("d" + std::to_string(j));
  t.weights = a.sparseView();
  return t;
}

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(gen);
  return m;
}

}  // namespace

TEST(Stemmer, MatchesReferenceTable) {
  const auto& s = LancasterStemmer::builtin();
  for (const auto& [word, stem] : kStems) EXPECT_EQ(s.stem(word), stem) << word;
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize_stem("running runner runs"),
            (std::vector<std::string>{"run", "run", "run"}));
  EXPECT_TRUE(tokenize_stem("").empty());
  EXPECT_TRUE(tokenize_stem("the a of").empty());
  EXPECT_EQ(tokenize_stem("Socket_packet42; ROUTER"),
            (std::vector<std::string>{"socket", "packet", "rout"}));
}

TEST(Tdm, Examples) {
  std::vector<Document> docs = {doc("a", {"u", "u", "w", "all"}),
                                doc("b", {"w", "all"}), doc("c", {"x", "all"}),
                                doc("d", {"y", "all"})};
  auto tdm = build_weighted_tdm(docs);
  EXPECT_EQ(tdm.documents, (std::vector<std::string>{"a", "b", "c", "d"}));
  // "all" has idf 0 and is pruned.
  EXPECT_EQ(tdm.terms, (std::vector<std::string>{"u", "w", "x", "y"}));
  Eigen::MatrixXd w(tdm.weights);
  // Before normalization u = 2 ln 4 and w = ln 2 in column a.
  EXPECT_NEAR(w(0, 0) / w(1, 0), 2 * std::log(4.0) / std::log(2.0), 1e-12);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(w.col(j).norm(), 1.0, 1e-12);
  EXPECT_GE(w.minCoeff(), 0.0);

  std::vector<Document> twins = {doc("p", {"k", "m"}), doc("q", {"k", "m"}),
                                 doc("r", {"z"})};
  Eigen::MatrixXd t(build_weighted_tdm(twins).weights);
  EXPECT_EQ(t.col(0), t.col(1));

  Report report;
  auto single = build_weighted_tdm(std::vector<Document>{doc("a", {"x"})}, &report);
  EXPECT_EQ(single.weights.size(), 0);
  EXPECT_EQ(report.size(), 1u);
}

TEST(Lsi, ReconstructionExamples) {
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(5, 1, 5);
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, 0.5, 2);
  auto rank1 = dense_tdm(u * v.transpose());
  EXPECT_LE(reconstruction_error(rank1, lsi_project(rank1, 1)), 1e-8);

  auto full = dense_tdm(random_matrix(5, 4, 3));
  EXPECT_LE(reconstruction_error(full, lsi_project(full, 4)), 1e-8);

  Eigen::MatrixXd a = random_matrix(5, 4, 7);
  auto tdm = dense_tdm(a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  auto sv = svd.singularValues();
  double discarded = std::sqrt(sv(2) * sv(2) + sv(3) * sv(3));
  EXPECT_NEAR(reconstruction_error(tdm, lsi_project(tdm, 2)), discarded, 1e-10);

  double prev = INFINITY;
  for (std::size_t k = 1; k <= 4; ++k) {
    double e = reconstruction_error(tdm, lsi_project(tdm, k));
    EXPECT_LE(e, prev + 1e-12);
    prev = e;
  }
  EXPECT_THROW(lsi_project(tdm, 0), ConfigError);
  EXPECT_THROW(lsi_project(tdm, 5), ConfigError);
}

TEST(Lsi, SingularValuesMatchDenseOracle) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    int m = 2 + static_cast<int>(gen() % 19), n = 2 + static_cast<int>(gen() % 19);
    Eigen::MatrixXd a = random_matrix(m, n, gen());
    auto k = static_cast<std::size_t>(1 + gen() % std::min(m, n));
    auto p = lsi_project(dense_tdm(a), k);
    Eigen::BDCSVD<Eigen::MatrixXd> oracle(a);
    ASSERT_EQ(p.singular_values.size(), static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < p.singular_values.size(); ++i) {
      EXPECT_NEAR(p.singular_values(i), oracle.singularValues()(i), 1e-6);
      if (i > 0) EXPECT_LE(p.singular_values(i), p.singular_values(i - 1));
    }
  }
}

TEST(Lsi, RandomizedPathOnLowRankMatrix) {
  // 120 x 90 of exact rank 6 takes the randomized branch.
  Eigen::MatrixXd a = random_matrix(120, 6, 5) * random_matrix(6, 90, 6);
  auto tdm = dense_tdm(a);
  auto p = lsi_project(tdm, 6);
  Eigen::BDCSVD<Eigen::MatrixXd> oracle(a);
  for (int i = 0; i < 6; ++i)
    EXPECT_NEAR(p.singular_values(i), oracle.singularValues()(i),
                1e-6 * oracle.singularValues()(0));
  EXPECT_LE(reconstruction_error(tdm, p), 1e-6 * a.norm());
}

TEST(Edges, Examples) {
  std::vector<Document> same = {doc("a", {"x", "y"}), doc("b", {"x", "y"}),
                                doc("c", {"z"})};
  auto tdm = build_weighted_tdm(same);
  auto p = lsi_project(tdm, 2);
  auto e = semantic_edges(p, tdm.documents, 1.0);
  EXPECT_EQ(e.size(), 1u);
  EXPECT_TRUE(e.contains({"a", "b"}));

  std::vector<Document> disjoint = {doc("a", {"x"}), doc("b", {"y"}), doc("c", {"z"})};
  auto td = build_weighted_tdm(disjoint);
  EXPECT_TRUE(semantic_edges(lsi_project(td, 3), td.documents, 0.01).empty());

  // Hand-computed cosines: (a,b) = 2/sqrt(6) ~ 0.816, (a,c) = 0,
  // (b,c) = ln1.5 / sqrt(3 (ln1.5^2 + ln3^2)) ~ 0.20.
  std::vector<Document> three = {doc("a", {"alpha", "beta"}),
                                 doc("b", {"alpha", "beta", "gamma"}),
                                 doc("c", {"gamma", "delta"})};
  auto t3 = build_weighted_tdm(three);
  auto p3 = lsi_project(t3, 3);
  EXPECT_NEAR(cosine(p3.document_vectors, 0, 1), 2 / std::sqrt(6.0), 1e-9);
  double l15 = std::log(1.5), l3 = std::log(3.0);
  EXPECT_NEAR(cosine(p3.document_vectors, 1, 2),
              l15 / std::sqrt(3 * (l15 * l15 + l3 * l3)), 1e-9);
  auto e3 = semantic_edges(p3, t3.documents, 0.7);
  EXPECT_EQ(e3, (network::DepLayer{{{"a", "b"}, 1}}));
  EXPECT_THROW(semantic_edges(p3, t3.documents, 0.0), ConfigError);
}

TEST(Edges, SymmetryMonotonicityPermutation) {
  std::mt19937 gen(21);
  const char* vocab[] = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Document> docs;
    for (int d = 0; d < 8; ++d) {
      std::vector<std::string> toks;
      for (int t = 0; t < 6; ++t) toks.push_back(vocab[gen() % 8]);
      docs.push_back(doc("f" + std::to_string(d), toks));
    }
    auto tdm = build_weighted_tdm(docs);
    if (tdm.weights.rows() == 0) continue;
    auto k = std::min<std::size_t>(3, std::min(tdm.weights.rows(), tdm.weights.cols()));
    auto p = lsi_project(tdm, k);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j)
        EXPECT_EQ(cosine(p.document_vectors, i, j), cosine(p.document_vectors, j, i));

    auto loose = semantic_edges(p, tdm.documents, 0.3);
    auto strict = semantic_edges(p, tdm.documents, 0.8);
    for (const auto& [edge, w] : strict) EXPECT_TRUE(loose.contains(edge));

    SemanticOptions opt{8, 0.6};
    auto base = semantic_dependencies(docs, opt);
    auto shuffled = docs;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_EQ(semantic_dependencies(shuffled, opt), base);
  }
}
