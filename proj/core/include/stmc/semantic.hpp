#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "stmc/errors.hpp"
#include "stmc/network.hpp"

// Semantic coupling between artifacts: tf-idf, latent semantic indexing and
// cosine thresholding.
namespace stmc::semantic {

/// Paice/Husk (Lancaster) suffix stripper driven by a rule table.
class LancasterStemmer {
 public:
  /// Rule lines: <reversed ending>[*]<count>[append]<'>'|'.'>; '#' comments.
  explicit LancasterStemmer(std::string_view rules);
  static const LancasterStemmer& builtin();

  std::string stem(std::string_view word) const;

 private:
  struct Rule {
    std::string ending;  // in reading order
    bool intact_only = false;
    std::size_t strip = 0;
    std::string append;
    bool stop = false;
  };
  std::unordered_map<char, std::vector<Rule>> rules_;
};

/// Lowercase ASCII letter runs, minus stop words, stemmed.
std::vector<std::string> tokenize_stem(std::string_view text);

struct Document {
  std::string path;
  std::vector<std::string> tokens;
};

struct TermDocumentMatrix {
  std::vector<std::string> terms;      // rows, sorted
  std::vector<std::string> documents;  // columns, in input order
  Eigen::SparseMatrix<double> weights;
};

/// weight(t, d) = tf(t, d) * ln(N / df(t)); terms with no remaining weight
/// are pruned, non-zero columns scaled to unit L2 norm. Fewer than two
/// documents leaves `weights` empty and adds a warning.
TermDocumentMatrix build_weighted_tdm(std::span<const Document> documents,
                                      Report* report = nullptr);

struct LsiProjection {
  std::size_t k = 0;
  Eigen::MatrixXd term_vectors;      // U_k, M x k
  Eigen::VectorXd singular_values;   // non-increasing
  Eigen::MatrixXd document_vectors;  // V_k * Sigma_k, N x k
};

/// Rank-k truncated SVD. Dense Jacobi SVD when both dimensions are below 64,
/// randomized subspace iteration otherwise (fixed seed, 4 power iterations).
/// Throws ConfigError unless 1 <= k <= min(M, N).
LsiProjection lsi_project(const TermDocumentMatrix& tdm, std::size_t k);

/// ||A - U_k Sigma_k V_k^T||_F
double reconstruction_error(const TermDocumentMatrix& tdm,
                            const LsiProjection& p);

double cosine(const Eigen::MatrixXd& vectors, std::size_t i, std::size_t j);

/// Edge {d1, d2} when cosine(d1, d2) >= threshold; zero vectors never match.
network::DepLayer semantic_edges(const LsiProjection& projection,
                                 std::span<const std::string> documents,
                                 double threshold);

struct SemanticOptions {
  std::size_t max_rank = 50;
  double threshold = 0.7;
};

/// Tokenize, weight, project and threshold in one call. Empty when fewer than
/// two documents carry weight.
network::DepLayer semantic_dependencies(std::span<const Document> documents,
                                        const SemanticOptions& options,
                                        Report* report = nullptr);

}  // namespace stmc::semantic
