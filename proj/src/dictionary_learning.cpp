#include "ddsr/dictionary_learning.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <string>

#include "ddsr/errors.hpp"

namespace ddsr {

namespace {

template <typename Vec>
double squared_error(const Vec& x, const Eigen::MatrixXd& atoms, const SparseCode& code, Eigen::VectorXd& scratch) {
  scratch = x;
  for (std::size_t s = 0; s < code.size(); ++s) scratch -= code.coefficients[s] * atoms.col(code.indices[s]);
  return scratch.squaredNorm();
}

struct SingularPair {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  double sigma = 0.0;
};

// Leading singular triplet of `m` by power iteration started from `u0`.
// Each half-step is an exact least-squares update of the rank-1 fit, so the
// approximation error never exceeds the one of (u0, m^T u0).
SingularPair leading_singular_pair(const Eigen::MatrixXd& m, const Eigen::VectorXd& u0) {
  constexpr int kMaxIterations = 50;
  constexpr double kTolerance = 1e-10;
  SingularPair p;
  p.u = u0;
  p.v = m.transpose() * p.u;
  p.sigma = p.v.norm();
  if (p.sigma == 0.0) {
    // u0 orthogonal to the residual; restart from its largest column.
    Eigen::Index j = 0;
    m.colwise().norm().maxCoeff(&j);
    if (m.col(j).norm() == 0.0) return p;
    p.u = m.col(j).normalized();
    p.v = m.transpose() * p.u;
    p.sigma = p.v.norm();
  }
  for (int it = 0; it < kMaxIterations; ++it) {
    Eigen::VectorXd u = m * p.v;
    const double norm = u.norm();
    if (norm == 0.0) break;
    u /= norm;
    const double change = (u - p.u).norm();
    p.u = std::move(u);
    p.v = m.transpose() * p.u;
    p.sigma = p.v.norm();
    if (change < kTolerance) break;
  }
  if (p.sigma > 0.0) p.v /= p.sigma;
  return p;
}

std::vector<double> per_sample_errors(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& atoms,
                                      const std::vector<SparseCode>& codes) {
  std::vector<double> err(codes.size());
  Eigen::VectorXd scratch;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    err[i] = squared_error(samples.col(static_cast<Eigen::Index>(i)), atoms, codes[i], scratch);
  }
  return err;
}

Dictionary initial_dictionary(const Eigen::MatrixXd& samples, const KsvdConfig& cfg) {
  std::vector<Eigen::Index> usable;
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    if (samples.col(i).norm() > 0.0) usable.push_back(i);
  }
  if (static_cast<Eigen::Index>(usable.size()) < cfg.n_atoms) {
    throw ConfigError("ksvd: only " + std::to_string(usable.size()) + " non-zero samples for " +
                      std::to_string(cfg.n_atoms) + " atoms");
  }
  // Seeded uniform draw without replacement (lazy Fisher-Yates). Draws nearly
  // parallel to an atom already taken are set aside and only used if the
  // distinct directions run out.
  constexpr double kDuplicateCosine = 0.99;
  std::mt19937_64 rng(cfg.seed);
  Dictionary dict;
  dict.atoms.resize(samples.rows(), cfg.n_atoms);
  std::vector<Eigen::Index> set_aside;
  Eigen::Index filled = 0;
  for (std::size_t k = 0; k < usable.size() && filled < cfg.n_atoms; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, usable.size() - 1);
    std::swap(usable[k], usable[pick(rng)]);
    const Eigen::VectorXd candidate = samples.col(usable[k]).normalized();
    const bool duplicate =
        filled > 0 && (dict.atoms.leftCols(filled).transpose() * candidate).cwiseAbs().maxCoeff() > kDuplicateCosine;
    if (duplicate) {
      set_aside.push_back(usable[k]);
    } else {
      dict.atoms.col(filled++) = candidate;
    }
  }
  for (std::size_t i = 0; filled < cfg.n_atoms; ++i) dict.atoms.col(filled++) = samples.col(set_aside[i]).normalized();
  return dict;
}

// One K-SVD sweep over the atoms. Supports stay fixed; only atoms and the
// coefficients attached to them change. Returns the indices of atoms no
// sample uses.
std::vector<int> update_atoms(const Eigen::MatrixXd& samples, Dictionary& dict, std::vector<SparseCode>& codes) {
  const Eigen::Index n_atoms = dict.n_atoms();
  // users[k] = (sample, slot in that sample's code) pairs.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> users(static_cast<std::size_t>(n_atoms));
  for (std::size_t i = 0; i < codes.size(); ++i) {
    for (std::size_t s = 0; s < codes[i].size(); ++s) users[codes[i].indices[s]].emplace_back(i, s);
  }

  std::vector<int> unused;
  for (Eigen::Index k = 0; k < n_atoms; ++k) {
    const auto& who = users[static_cast<std::size_t>(k)];
    if (who.empty()) {
      unused.push_back(static_cast<int>(k));
      continue;
    }
    Eigen::MatrixXd residual(samples.rows(), static_cast<Eigen::Index>(who.size()));
    for (std::size_t u = 0; u < who.size(); ++u) {
      const auto [i, slot] = who[u];
      Eigen::VectorXd e = samples.col(static_cast<Eigen::Index>(i));
      const SparseCode& code = codes[i];
      for (std::size_t s = 0; s < code.size(); ++s) {
        if (s != slot) e -= code.coefficients[s] * dict.atoms.col(code.indices[s]);
      }
      residual.col(static_cast<Eigen::Index>(u)) = e;
    }
    const SingularPair pair = leading_singular_pair(residual, dict.atoms.col(k));
    if (!(pair.sigma > 0.0)) continue;  // residual vanished; leave the atom as is
    dict.atoms.col(k) = pair.u;
    for (std::size_t u = 0; u < who.size(); ++u) {
      const auto [i, slot] = who[u];
      codes[i].coefficients[slot] = pair.sigma * pair.v[static_cast<Eigen::Index>(u)];
    }
  }
  return unused;
}

// Replace unused atoms by the worst-represented samples, skipping samples
// nearly parallel to an atom in use or to a replacement already made.
int replace_unused(const Eigen::MatrixXd& samples, Dictionary& dict, const std::vector<SparseCode>& codes,
                   const std::vector<int>& unused) {
  if (unused.empty()) return 0;
  const auto err = per_sample_errors(samples, dict.atoms, codes);
  std::vector<std::size_t> order(err.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return err[a] != err[b] ? err[a] > err[b] : a < b;
  });

  std::vector<bool> is_unused(static_cast<std::size_t>(dict.n_atoms()), false);
  for (int atom : unused) is_unused[static_cast<std::size_t>(atom)] = true;
  std::vector<Eigen::VectorXd> chosen;
  std::size_t cursor = 0;
  int replaced = 0;
  for (int atom : unused) {
    while (cursor < order.size()) {
      const Eigen::VectorXd x = samples.col(static_cast<Eigen::Index>(order[cursor++]));
      const double norm = x.norm();
      if (norm == 0.0) continue;
      const Eigen::VectorXd candidate = x / norm;
      bool duplicate = std::any_of(chosen.begin(), chosen.end(), [&](const Eigen::VectorXd& c) {
        return std::abs(c.dot(candidate)) > 0.99;
      });
      for (Eigen::Index k = 0; k < dict.n_atoms() && !duplicate; ++k) {
        duplicate = !is_unused[static_cast<std::size_t>(k)] && std::abs(dict.atoms.col(k).dot(candidate)) > 0.99;
      }
      if (duplicate) continue;
      dict.atoms.col(atom) = candidate;
      chosen.push_back(candidate);
      ++replaced;
      break;
    }
  }
  return replaced;
}

}  // namespace

void KsvdConfig::validate() const {
  if (n_atoms < 1) throw ConfigError("dictionary size must be positive");
  if (sparsity < 1 || sparsity > n_atoms) throw ConfigError("sparsity must lie in [1, n_atoms]");
  if (iterations < 0) throw ConfigError("K-SVD iteration count must be non-negative");
  if (!(min_patch_norm >= 0.0)) throw ConfigError("minimum patch norm must be non-negative");
}

void CoupledDictionary::validate() const {
  if (low.n_atoms() != high.cols()) {
    throw DimensionError("coupled dictionary: " + std::to_string(low.n_atoms()) + " low atoms vs " +
                         std::to_string(high.cols()) + " high atoms");
  }
  if (low.max_norm_deviation() > 1e-10) throw DimensionError("coupled dictionary: low atoms are not unit-norm");
}

double representation_error(const Eigen::MatrixXd& samples, const Dictionary& dict,
                            const std::vector<SparseCode>& codes) {
  const auto err = per_sample_errors(samples, dict.atoms, codes);
  return std::accumulate(err.begin(), err.end(), 0.0);
}

KsvdResult ksvd(const Eigen::MatrixXd& samples, const KsvdConfig& cfg) {
  cfg.validate();
  if (samples.cols() < cfg.n_atoms) {
    throw ConfigError("ksvd: " + std::to_string(samples.cols()) + " samples for " + std::to_string(cfg.n_atoms) +
                      " atoms");
  }
  KsvdResult result;
  result.dict = initial_dictionary(samples, cfg);
  result.codes = omp_batch(result.dict, samples, cfg.sparsity);
  result.objective.push_back(representation_error(samples, result.dict, result.codes));

  for (int it = 0; it < cfg.iterations; ++it) {
    const auto unused = update_atoms(samples, result.dict, result.codes);
    result.replaced_atoms += replace_unused(samples, result.dict, result.codes, unused);

    auto fresh = omp_batch(result.dict, samples, cfg.sparsity);
    double total = 0.0;
    Eigen::VectorXd scratch;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      const auto x = samples.col(static_cast<Eigen::Index>(i));
      const double e_new = squared_error(x, result.dict.atoms, fresh[i], scratch);
      const double e_old = squared_error(x, result.dict.atoms, result.codes[i], scratch);
      if (e_new <= e_old) {
        result.codes[i] = std::move(fresh[i]);
        total += e_new;
      } else {
        total += e_old;
      }
    }
    result.objective.push_back(total);
  }
  return result;
}

HighFit fit_high_dictionary(const Eigen::MatrixXd& high_patches, const std::vector<SparseCode>& codes,
                            Eigen::Index n_atoms) {
  if (high_patches.cols() != static_cast<Eigen::Index>(codes.size())) {
    throw DimensionError("fit_high_dictionary: " + std::to_string(high_patches.cols()) + " patches for " +
                         std::to_string(codes.size()) + " codes");
  }
  // Normal equations H (Q Q^T) = P_h Q^T, both sides accumulated straight
  // from the sparse codes: O(n L^2) and O(n L d_h) instead of touching the
  // dense K x n matrix.
  Eigen::MatrixXd qqt = Eigen::MatrixXd::Zero(n_atoms, n_atoms);
  Eigen::MatrixXd pqt = Eigen::MatrixXd::Zero(high_patches.rows(), n_atoms);
  for (std::size_t k = 0; k < codes.size(); ++k) {
    const SparseCode& c = codes[k];
    for (std::size_t a = 0; a < c.size(); ++a) {
      if (c.indices[a] < 0 || c.indices[a] >= n_atoms) throw DimensionError("fit_high_dictionary: atom index out of range");
      pqt.col(c.indices[a]) += c.coefficients[a] * high_patches.col(static_cast<Eigen::Index>(k));
      for (std::size_t b = 0; b < c.size(); ++b) qqt(c.indices[a], c.indices[b]) += c.coefficients[a] * c.coefficients[b];
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(qqt);
  HighFit fit;
  fit.code_rank = cod.rank();
  fit.rank_deficient = fit.code_rank < n_atoms;
  if (fit.rank_deficient) {
    std::clog << "ddsr: warning: code matrix has rank " << fit.code_rank << " < " << n_atoms
              << " atoms; using the minimum-norm high dictionary\n";
  }
  // Q Q^T is symmetric, so H^T solves (Q Q^T) H^T = (P_h Q^T)^T.
  fit.high = cod.solve(pqt.transpose()).transpose();
  return fit;
}

PrunedPairs prune_flat_pairs(const Eigen::MatrixXd& low, const Eigen::MatrixXd& high, double min_patch_norm) {
  if (low.cols() != high.cols()) {
    throw DimensionError("training pairs: " + std::to_string(low.cols()) + " feature columns vs " +
                         std::to_string(high.cols()) + " patch columns");
  }
  PrunedPairs out;
  for (Eigen::Index i = 0; i < high.cols(); ++i) {
    if (high.col(i).norm() >= min_patch_norm) out.kept.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(out.kept.size());
  out.low.resize(low.rows(), n);
  out.high.resize(high.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.low.col(j) = low.col(out.kept[j]);
    out.high.col(j) = high.col(out.kept[j]);
  }
  return out;
}

CoupledDictionary train_coupled(const Eigen::MatrixXd& low_feats, const Eigen::MatrixXd& high_patches,
                                const KsvdConfig& cfg, CoupledTrainingReport* report) {
  cfg.validate();
  const PrunedPairs pairs = prune_flat_pairs(low_feats, high_patches, cfg.min_patch_norm);
  if (static_cast<Eigen::Index>(pairs.kept.size()) < cfg.n_atoms) {
    throw ConfigError("insufficient training patches: " + std::to_string(pairs.kept.size()) + " of " +
                      std::to_string(high_patches.cols()) + " survive pruning at norm " +
                      std::to_string(cfg.min_patch_norm) + ", " + std::to_string(cfg.n_atoms) +
                      " needed (short by " + std::to_string(cfg.n_atoms - static_cast<Eigen::Index>(pairs.kept.size())) +
                      ")");
  }
  KsvdResult learned = ksvd(pairs.low, cfg);
  const auto codes = omp_batch(learned.dict, pairs.low, cfg.sparsity);
  HighFit fit = fit_high_dictionary(pairs.high, codes, cfg.n_atoms);

  if (report) {
    report->ksvd_objective = learned.objective;
    report->samples_used = pairs.kept.size();
    report->code_rank = fit.code_rank;
    report->rank_deficient = fit.rank_deficient;
  }
  CoupledDictionary out{std::move(learned.dict), std::move(fit.high)};
  out.validate();
  return out;
}

}  // namespace ddsr
