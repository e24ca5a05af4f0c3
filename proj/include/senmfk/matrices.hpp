#pragma once

#include <Eigen/SparseCore>

#include <string>
#include <vector>

#include "senmfk/textprep.hpp"

namespace senmfk {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Term-document TF-IDF matrix, F x N, column-L2-normalized.
struct TfidfMatrix {
    SparseMatrix X;
    int n_docs = 0;
    std::vector<std::string> doc_ids;  // column order
};

// Shifted positive PMI matrix over the vocabulary, F x F, symmetric.
struct SppmiMatrix {
    SparseMatrix M;
    int window = 5;
    double shift = 1.0;
};

// Column concatenation A = [X | sqrt(lambda) * M], F x (N + F).
struct AugmentedMatrix {
    SparseMatrix A;
    double lambda = 1.0;
    int n_docs = 0;  // width of the leading X block
};

// X[t,d] = tf(t,d) * (ln((1+N)/(1+df[t])) + 1), columns then L2-normalized
// (zero columns stay zero). Out-of-vocabulary tokens are skipped. Throws
// EmptyVocabularyError on an empty vocabulary.
TfidfMatrix build_tfidf(const std::vector<TokenizedDoc>& docs, const Vocabulary& vocab);

// C[i,j] = number of ordered in-document position pairs (p,q) with
// 0 < |p-q| <= window, token(p)=i, token(q)=j. Symmetric by construction;
// windows never cross document boundaries. include_diagonal=false zeroes the
// self-pairs C[i,i].
SparseMatrix build_cooccurrence(const std::vector<TokenizedDoc>& docs, const Vocabulary& vocab,
                                int window, bool include_diagonal = true);

// M[i,j] = max(ln(C[i,j] * D / (r[i] * r[j])) - ln(shift), 0) where D is the
// total count mass and r the row marginals. Throws EmptyCorpusError when
// D = 0.
SppmiMatrix build_sppmi(const SparseMatrix& C, double shift, int window);

// A = [X | sqrt(lambda) * M]; requires matching row dimension.
AugmentedMatrix concatenate(const TfidfMatrix& X, const SppmiMatrix& M, double lambda);

// Sparse triplet-file persistence. Header line "rows cols nnz", then one
// "row col value" line per stored entry (row-major order, %.17g values).
void save_sparse(const SparseMatrix& m, const std::string& path);
SparseMatrix load_sparse(const std::string& path);

}  // namespace senmfk
