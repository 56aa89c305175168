#include "ddsr/sparse_coding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddsr/errors.hpp"

namespace ddsr {

namespace {

constexpr double kRelativeTolerance = 1e-12;

void check_inputs(const Dictionary& dict, Eigen::Index signal_dim, int sparsity) {
  if (signal_dim != dict.signal_dim()) {
    throw DimensionError("omp: signal dimension " + std::to_string(signal_dim) + " does not match dictionary " +
                         std::to_string(dict.signal_dim()));
  }
  if (sparsity < 1 || sparsity > dict.n_atoms()) {
    throw ConfigError("omp: sparsity must lie in [1, n_atoms]");
  }
}

// D^T v, always through the same expression so that single and batched
// coding see bit-identical correlations.
Eigen::VectorXd correlate(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& v) {
  return atoms.transpose() * v;
}

Eigen::VectorXd gram_column(const Eigen::MatrixXd& atoms, Eigen::Index j) {
  const Eigen::VectorXd atom = atoms.col(j);
  return correlate(atoms, atom);
}

// Gram columns on demand (single-signal coding) or from a precomputed
// matrix (batch coding). Both produce the same bits.
class GramSource {
 public:
  explicit GramSource(const Eigen::MatrixXd& atoms) : atoms_(atoms) {}
  GramSource(const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& gram) : atoms_(atoms), gram_(&gram) {}

  void column(Eigen::Index j, Eigen::VectorXd& out) const {
    if (gram_) {
      out = gram_->col(j);
    } else {
      out = gram_column(atoms_, j);
    }
  }

 private:
  const Eigen::MatrixXd& atoms_;
  const Eigen::MatrixXd* gram_ = nullptr;
};

// Buffers reused across signals coded by one thread.
struct OmpWorkspace {
  Eigen::VectorXd alpha0;     // D^T x
  Eigen::VectorXd alpha;      // D^T r
  std::vector<char> selected;
  Eigen::MatrixXd basis;      // orthonormal basis of the selected atoms
  Eigen::MatrixXd upper;      // R of the incremental QR, basis * upper = support
  Eigen::MatrixXd gram_cols;  // G[:, support]
  Eigen::VectorXd qtx;        // basis^T x
  Eigen::VectorXd coef;
  Eigen::VectorXd w;
  Eigen::VectorXd column;

  OmpWorkspace(Eigen::Index dim, Eigen::Index n_atoms, int sparsity)
      : selected(static_cast<std::size_t>(n_atoms)),
        basis(dim, sparsity),
        upper(sparsity, sparsity),
        gram_cols(n_atoms, sparsity),
        qtx(sparsity),
        w(dim) {}
};

// Correlations with the residual are tracked as D^T x - G_S c, so each step
// costs O(K |S|) instead of O(K d). The support least-squares problem is
// solved through an incremental QR of the selected atoms (Gram-Schmidt with
// one re-orthogonalization pass); an atom whose orthogonal component falls
// below the relative tolerance is rank-deficient and ends the pursuit.
SparseCode omp_core(const Dictionary& dict, const GramSource& gram, const Eigen::VectorXd& signal, int sparsity,
                    OmpWorkspace& ws, OmpTrace* trace) {
  SparseCode code;
  const double signal_norm = signal.norm();
  if (trace) trace->residual_norms.assign(1, signal_norm);
  if (signal_norm == 0.0) return code;

  const double stop = kRelativeTolerance * signal_norm;
  const Eigen::Index n_atoms = dict.n_atoms();
  ws.alpha0.noalias() = correlate(dict.atoms, signal);
  ws.alpha = ws.alpha0;
  std::fill(ws.selected.begin(), ws.selected.end(), 0);
  double residual_norm = signal_norm;
  Eigen::Index m = 0;  // support size

  for (int step = 0; step < sparsity; ++step) {
    if (residual_norm <= stop) break;
    Eigen::Index best = -1;
    double best_abs = 0.0;
    for (Eigen::Index j = 0; j < n_atoms; ++j) {
      if (ws.selected[j]) continue;
      const double a = std::abs(ws.alpha[j]);
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best < 0) break;  // residual orthogonal to every remaining atom

    const auto atom = dict.atoms.col(best);
    ws.w = atom;
    ws.upper.col(m).setZero();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < m; ++i) {
        const double proj = ws.basis.col(i).dot(ws.w);
        ws.upper(i, m) += proj;
        ws.w -= proj * ws.basis.col(i);
      }
    }
    const double orth = ws.w.norm();
    if (!(orth > kRelativeTolerance * atom.norm())) break;
    ws.basis.col(m) = ws.w / orth;
    ws.upper(m, m) = orth;
    ws.qtx[m] = ws.basis.col(m).dot(signal);
    ++m;

    ws.selected[best] = 1;
    code.indices.push_back(static_cast<int>(best));
    ws.coef = ws.upper.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(ws.qtx.head(m));
    ws.w = signal - ws.basis.leftCols(m) * ws.qtx.head(m);
    residual_norm = ws.w.norm();
    if (trace) trace->residual_norms.push_back(residual_norm);

    gram.column(best, ws.column);
    ws.gram_cols.col(m - 1) = ws.column;
    ws.alpha = ws.alpha0 - ws.gram_cols.leftCols(m) * ws.coef;
  }
  code.coefficients.assign(ws.coef.data(), ws.coef.data() + m);
  return code;
}

}  // namespace

double Dictionary::max_norm_deviation() const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) worst = std::max(worst, std::abs(atoms.col(j).norm() - 1.0));
  return worst;
}

SparseCode omp(const Dictionary& dict, const Eigen::VectorXd& signal, int sparsity, OmpTrace* trace) {
  check_inputs(dict, signal.size(), sparsity);
  OmpWorkspace ws(dict.signal_dim(), dict.n_atoms(), sparsity);
  return omp_core(dict, GramSource(dict.atoms), signal, sparsity, ws, trace);
}

std::vector<SparseCode> omp_batch(const Dictionary& dict, const Eigen::MatrixXd& signals, int sparsity) {
  check_inputs(dict, signals.rows(), sparsity);
  std::vector<SparseCode> codes(static_cast<std::size_t>(signals.cols()));
  const auto n_atoms = static_cast<long>(dict.n_atoms());
  Eigen::MatrixXd gram(dict.n_atoms(), dict.n_atoms());
#pragma omp parallel for schedule(static)
  for (long j = 0; j < n_atoms; ++j) gram.col(j) = gram_column(dict.atoms, j);

  const GramSource source(dict.atoms, gram);
  const auto n = static_cast<long>(signals.cols());
#pragma omp parallel
  {
    OmpWorkspace ws(dict.signal_dim(), dict.n_atoms(), sparsity);
    Eigen::VectorXd signal;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) {
      signal = signals.col(i);
      codes[static_cast<std::size_t>(i)] = omp_core(dict, source, signal, sparsity, ws, nullptr);
    }
  }
  return codes;
}

Eigen::VectorXd reconstruct(const Eigen::MatrixXd& atoms, const SparseCode& code) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(atoms.rows());
  for (std::size_t i = 0; i < code.size(); ++i) out += code.coefficients[i] * atoms.col(code.indices[i]);
  return out;
}

Eigen::MatrixXd codes_to_matrix(const std::vector<SparseCode>& codes, Eigen::Index n_atoms) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n_atoms, static_cast<Eigen::Index>(codes.size()));
  for (std::size_t k = 0; k < codes.size(); ++k) {
    for (std::size_t i = 0; i < codes[k].size(); ++i) {
      q(codes[k].indices[i], static_cast<Eigen::Index>(k)) = codes[k].coefficients[i];
    }
  }
  return q;
}

}  // namespace ddsr
