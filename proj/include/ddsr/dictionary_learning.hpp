#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ddsr/sparse_coding.hpp"

namespace ddsr {

struct KsvdConfig {
  int n_atoms = 500;
  int sparsity = 3;
  int iterations = 40;
  std::uint64_t seed = 20120325;
  /// Training pairs whose high-frequency patch norm falls below this are
  /// discarded before learning (intensities in [0,1]).
  double min_patch_norm = 0.03;

  void validate() const;
};

/// A low-feature dictionary (unit-norm atoms) and a high-patch dictionary
/// sharing one sparse code per signal.
struct CoupledDictionary {
  Dictionary low;
  Eigen::MatrixXd high;

  Eigen::Index n_atoms() const { return low.n_atoms(); }
  /// Throws DimensionError on atom-count mismatch or non-unit low atoms.
  void validate() const;
};

struct KsvdResult {
  Dictionary dict;
  std::vector<SparseCode> codes;
  /// Sum of squared representation errors: entry 0 for the initialization,
  /// entry t after iteration t. Non-increasing.
  std::vector<double> objective;
  int replaced_atoms = 0;
};

/// K-SVD: alternate OMP coding with rank-1 SVD atom updates. Atoms that no
/// sample uses are replaced by the worst-represented samples. During
/// re-coding a sample keeps its previous code when that code is better
/// than the fresh OMP one, so the objective never increases.
KsvdResult ksvd(const Eigen::MatrixXd& samples, const KsvdConfig& cfg);

/// Sum over columns of ||x - D q||^2.
double representation_error(const Eigen::MatrixXd& samples, const Dictionary& dict,
                            const std::vector<SparseCode>& codes);

struct HighFit {
  Eigen::MatrixXd high;
  Eigen::Index code_rank = 0;
  bool rank_deficient = false;
};

/// Least-squares high dictionary: argmin_H ||P_h - H Q||_F via a complete
/// orthogonal decomposition of Q^T. Rank-deficient Q yields the
/// minimum-norm solution and a diagnostic on stderr.
HighFit fit_high_dictionary(const Eigen::MatrixXd& high_patches, const std::vector<SparseCode>& codes,
                            Eigen::Index n_atoms);

struct PrunedPairs {
  Eigen::MatrixXd low;
  Eigen::MatrixXd high;
  std::vector<Eigen::Index> kept;  // original column indices, ascending
};

/// Drops columns whose high patch norm is below `min_patch_norm`, from both
/// matrices at once.
PrunedPairs prune_flat_pairs(const Eigen::MatrixXd& low, const Eigen::MatrixXd& high, double min_patch_norm);

struct CoupledTrainingReport {
  std::vector<double> ksvd_objective;
  std::size_t samples_used = 0;
  Eigen::Index code_rank = 0;
  bool rank_deficient = false;
};

/// Prune, run K-SVD on the low features, re-code with the final dictionary,
/// then fit the high dictionary on those codes.
CoupledDictionary train_coupled(const Eigen::MatrixXd& low_feats, const Eigen::MatrixXd& high_patches,
                                const KsvdConfig& cfg, CoupledTrainingReport* report = nullptr);

}  // namespace ddsr
