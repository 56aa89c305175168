#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ddsr {

/// Column-atom dictionary. Atoms used for coding are expected to have unit
/// Euclidean norm.
struct Dictionary {
  Eigen::MatrixXd atoms;  // signal_dim x n_atoms

  Eigen::Index signal_dim() const { return atoms.rows(); }
  Eigen::Index n_atoms() const { return atoms.cols(); }

  /// Largest deviation of any atom norm from one.
  double max_norm_deviation() const;
};

/// Sparse representation vector: selected atom indices in selection order
/// and their joint least-squares coefficients.
struct SparseCode {
  std::vector<int> indices;
  std::vector<double> coefficients;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  bool operator==(const SparseCode&) const = default;
};

/// Residual norm after each accepted atom, index 0 being ||signal||.
struct OmpTrace {
  std::vector<double> residual_norms;
};

/// Orthogonal matching pursuit with a hard sparsity target L. Picks the atom
/// of maximum |correlation| with the residual (lowest index on ties), then
/// re-solves least squares over the whole support. Stops early once the
/// residual drops to 1e-12 * ||signal||, and drops an atom that would make
/// the support rank-deficient.
SparseCode omp(const Dictionary& dict, const Eigen::VectorXd& signal, int sparsity, OmpTrace* trace = nullptr);

/// omp over every column of `signals`. Results are bit-identical to calling
/// omp column by column, independent of thread count.
std::vector<SparseCode> omp_batch(const Dictionary& dict, const Eigen::MatrixXd& signals, int sparsity);

/// D * q for a sparse q.
Eigen::VectorXd reconstruct(const Eigen::MatrixXd& atoms, const SparseCode& code);

/// Dense K x n coefficient matrix with one column per code.
Eigen::MatrixXd codes_to_matrix(const std::vector<SparseCode>& codes, Eigen::Index n_atoms);

}  // namespace ddsr
