#include <doctest.h>

#include <random>

#include "ddsr/errors.hpp"
#include "ddsr/features.hpp"
#include "support.hpp"

using namespace ddsr;

namespace {

FilterBank identity_bank() {
  FilterBank b;
  b.kernels.push_back({1, 1, {1.0}});
  return b;
}

}  // namespace

TEST_CASE("default bank is four zero-DC kernels") {
  const FilterBank bank = FilterBank::gradient_laplacian();
  REQUIRE(bank.kernels.size() == 4);
  for (const auto& k : bank.kernels) CHECK(std::abs(k.sum()) <= 1e-12);
  CHECK_NOTHROW(bank.validate());
  CHECK_THROWS_AS(identity_bank().validate(), ConfigError);
  CHECK_THROWS_AS(FilterBank{}.validate(), ConfigError);
}

TEST_CASE("filters kill constants") {
  const auto out = filter_image(GrayImage(12, 12, 0.7), FilterBank::gradient_laplacian());
  REQUIRE(out.size() == 4);
  for (const auto& f : out)
    for (double v : f.data()) CHECK(std::abs(v) <= 1e-15);
}

TEST_CASE("horizontal gradient of a ramp is 2 in the interior") {
  GrayImage ramp(10, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 10; ++c) ramp(r, c) = c;
  const auto out = filter_image(ramp, FilterBank::gradient_laplacian());
  for (int r = 0; r < 6; ++r)
    for (int c = 1; c < 9; ++c) CHECK(out[0](r, c) == 2.0);
  // Second derivative of a ramp vanishes away from the borders.
  for (int r = 0; r < 6; ++r)
    for (int c = 2; c < 8; ++c) CHECK(out[2](r, c) == 0.0);
  // Vertical filters see nothing.
  for (double v : out[1].data()) CHECK(v == 0.0);
}

TEST_CASE("filtering is linear") {
  std::mt19937_64 rng(4);
  const Plane a = testing::random_plane(11, 9, rng);
  const Plane b = testing::random_plane(11, 9, rng);
  Plane s(a);
  for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] += b.data()[i];
  const auto bank = FilterBank::gradient_laplacian();
  const auto fs = filter_image(s, bank), fa = filter_image(a, bank), fb = filter_image(b, bank);
  for (std::size_t k = 0; k < fs.size(); ++k)
    for (std::size_t i = 0; i < s.size(); ++i)
      CHECK(fs[k].data()[i] == doctest::Approx(fa[k].data()[i] + fb[k].data()[i]).epsilon(1e-12));
}

TEST_CASE("raw features with an identity kernel are plain patches") {
  std::mt19937_64 rng(8);
  const Plane img = testing::random_plane(15, 13, rng);
  CHECK(testing::bit_equal(raw_features(img, identity_bank(), 5, 3), extract_patches(img, 5, 3).patches));
}

TEST_CASE("raw feature columns stack the per-filter patches") {
  const GrayImage img = testing::textured_image(30, 24, 6);
  const auto bank = FilterBank::gradient_laplacian();
  const Eigen::MatrixXd raw = raw_features(img, bank, 9, 8);
  CHECK(raw.rows() == 324);
  const auto filtered = filter_image(img, bank);
  for (std::size_t f = 0; f < filtered.size(); ++f) {
    const PatchGrid g = extract_patches(filtered[f], 9, 8);
    REQUIRE(g.patches.cols() == raw.cols());
    CHECK(testing::bit_equal(raw.middleRows(81 * static_cast<Eigen::Index>(f), 81), g.patches));
  }
}

TEST_CASE("feature and patch columns share origins") {
  // Each pixel carries its own coordinates, so a column names its origin.
  GrayImage tagged(23, 19);
  for (int r = 0; r < 19; ++r)
    for (int c = 0; c < 23; ++c) tagged(r, c) = 1000.0 * r + c;
  const Eigen::MatrixXd raw = raw_features(tagged, identity_bank(), 9, 1);
  const PatchGrid hf = extract_patches(tagged, 9, 1);
  REQUIRE(raw.cols() == hf.patches.cols());
  for (Eigen::Index k = 0; k < raw.cols(); ++k) {
    const auto o = hf.origins[static_cast<std::size_t>(k)];
    CHECK(raw(0, k) == 1000.0 * o.row + o.col);
    CHECK(hf.patches(0, k) == raw(0, k));
  }
}

TEST_CASE("sampler columns match the dense raw feature matrix") {
  const GrayImage img = testing::textured_image(21, 17, 12);
  const auto bank = FilterBank::gradient_laplacian();
  const RawFeatureSampler sampler(img, bank, 5, 2);
  const Eigen::MatrixXd raw = raw_features(img, bank, 5, 2);
  REQUIRE(sampler.size() == raw.cols());
  REQUIRE(sampler.dim() == raw.rows());
  const std::vector<Eigen::Index> pick{3, 0, raw.cols() - 1};
  const Eigen::MatrixXd cols = sampler.columns(pick);
  for (std::size_t j = 0; j < pick.size(); ++j) CHECK(cols.col(static_cast<Eigen::Index>(j)) == raw.col(pick[j]));
}

TEST_CASE("pca of points on a line keeps one direction") {
  std::mt19937_64 rng(1);
  const Eigen::Vector3d dir = Eigen::Vector3d(1.0, -2.0, 0.5).normalized();
  Eigen::MatrixXd x(3, 50);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index j = 0; j < 50; ++j) x.col(j) = Eigen::Vector3d(0.3, 0.1, -0.2) + n(rng) * dir;
  const PcaProjection p = fit_pca(x, 0.999);
  REQUIRE(p.reduced_dim() == 1);
  CHECK(std::abs(p.basis.row(0).dot(dir)) >= 1.0 - 1e-8);
  CHECK((p.mean - x.rowwise().mean()).norm() <= 1e-14);
  // Sign convention: largest-magnitude entry is positive (here the -2 component).
  CHECK(p.basis(0, 1) > 0.0);
}

TEST_CASE("full energy keeps every dimension of full-rank data") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = testing::gaussian_matrix(6, 40, rng);
  const PcaProjection p = fit_pca(x, 1.0);
  CHECK(p.reduced_dim() == 6);
  CHECK((p.basis * p.basis.transpose() - Eigen::MatrixXd::Identity(6, 6)).norm() <= 1e-10);
}

TEST_CASE("pca reconstruction error equals the eigenvalue tail") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = testing::gaussian_matrix(12, 400, rng);
  const PcaProjection p = fit_pca(x, 0.999);
  CHECK(p.reduced_dim() >= 11);
  CHECK(p.reduced_dim() <= 12);
  CHECK((p.basis * p.basis.transpose() - Eigen::MatrixXd::Identity(p.reduced_dim(), p.reduced_dim())).norm() <= 1e-10);

  // Oracle: singular values of the centred data give the covariance spectrum.
  const Eigen::MatrixXd c = x.colwise() - x.rowwise().mean();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(c).singularValues();
  double tail = 0.0;
  for (Eigen::Index i = p.reduced_dim(); i < sv.size(); ++i) tail += sv[i] * sv[i];
  const Eigen::MatrixXd recon = p.basis.transpose() * project(x, p);
  const double err = (c - recon).squaredNorm();
  CHECK(std::abs(err - tail) <= 1e-8 * std::max(1.0, c.squaredNorm()));

  const PcaProjection q = fit_pca(x, 0.7);
  double kept = 0.0, total = sv.squaredNorm();
  for (Eigen::Index i = 0; i < q.reduced_dim(); ++i) kept += sv[i] * sv[i];
  CHECK(kept >= 0.7 * total - 1e-9 * total);
  kept -= sv[q.reduced_dim() - 1] * sv[q.reduced_dim() - 1];
  CHECK(kept < 0.7 * total);
}

TEST_CASE("streamed moments give the same projection") {
  std::mt19937_64 rng(13);
  Eigen::MatrixXd x = testing::gaussian_matrix(8, 300, rng);
  x.row(0) *= 4.0;
  x.row(3) *= 2.0;
  SampleMoments m(8);
  m.add(x.leftCols(100));
  m.add(x.rightCols(200));
  CHECK(m.count == 300);
  const PcaProjection a = fit_pca(x, 0.95, PcaCentering::none);
  const PcaProjection b = fit_pca(m, 0.95, PcaCentering::none);
  REQUIRE(a.reduced_dim() == b.reduced_dim());
  CHECK((a.basis - b.basis).norm() <= 1e-9);
  CHECK(b.mean.isZero(0.0));
  CHECK_THROWS_AS(m.add(Eigen::MatrixXd(5, 2)), DimensionError);
}

TEST_CASE("degenerate pca still keeps one direction") {
  const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(4, 10, 0.5);
  CHECK(fit_pca(same, 0.999).reduced_dim() == 1);
  CHECK_THROWS_AS(fit_pca(Eigen::MatrixXd(4, 1), 0.9), ConfigError);
  CHECK_THROWS_AS(fit_pca(same, 0.0), ConfigError);
  CHECK_THROWS_AS(fit_pca(same, 1.5), ConfigError);
}

TEST_CASE("projection centres and contracts") {
  std::mt19937_64 rng(21);
  const Eigen::MatrixXd x = testing::gaussian_matrix(5, 60, rng);
  const PcaProjection p = fit_pca(x, 0.9);
  CHECK(project(p.mean, p).norm() <= 1e-15);
  const Eigen::MatrixXd y = project(x, p);
  for (Eigen::Index j = 0; j < x.cols(); ++j) CHECK(y.col(j).norm() <= (x.col(j) - p.mean).norm() + 1e-12);

  PcaProjection id;
  id.mean = Eigen::VectorXd::Constant(5, 0.25);
  id.basis = Eigen::MatrixXd::Identity(5, 5);
  CHECK(project(x, id) == (x.array() - 0.25).matrix());
  CHECK_THROWS_AS(project(Eigen::MatrixXd(4, 3), p), DimensionError);
}

TEST_CASE("chunked feature extraction equals project of raw features") {
  const GrayImage img = testing::textured_image(64, 60, 14);  // > one chunk at stride 1
  FeaturePipeline fp;
  fp.bank = FilterBank::gradient_laplacian();
  fp.patch_size = 9;
  fp.stride = 1;
  const Eigen::MatrixXd raw = raw_features(img, fp);
  REQUIRE(raw.cols() > 2048);
  fp.pca = fit_pca(raw, 0.99);
  const Eigen::MatrixXd want = project(raw, fp.pca);
  const Eigen::MatrixXd got = extract_features(img, fp);
  CHECK((got - want).norm() <= 1e-10 * want.norm());

  fp.pca.basis = Eigen::MatrixXd::Identity(10, 10);
  CHECK_THROWS_AS(extract_features(img, fp), DimensionError);
}
