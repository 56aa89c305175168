#include "ddsr/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "ddsr/errors.hpp"

namespace ddsr {

namespace {

// Sampling conventions frozen into every model: decimation keeps the
// top-left sample of each block, bicubic uses Keys a = -0.5 aligned on it.
constexpr std::int64_t kDecimationPhaseRow = 0;
constexpr std::int64_t kDecimationPhaseCol = 0;
constexpr double kBicubicA = -0.5;

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    raw(b, 8);
  }
  void u32(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    raw(b, 4);
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void matrix(const Eigen::MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }
  void vector(const Eigen::VectorXd& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void section(std::string name) { section_ = std::move(name); }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("truncated model file: section '" + section_ + "' needs " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos_) + ", " + std::to_string(bytes_.size() - pos_) +
                        " left");
    }
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  int small_int(const char* field) {
    const std::int64_t v = i64();
    if (v < 0 || v > (1 << 30)) throw FormatError("model file: field '" + std::string(field) + "' out of range");
    return static_cast<int>(v);
  }
  double f64() { return std::bit_cast<double>(u64()); }
  Eigen::Index count(std::uint64_t per_item_bytes) {
    const std::uint64_t n = u64();
    if (per_item_bytes != 0 && n > (bytes_.size() - pos_) / per_item_bytes) {
      throw FormatError("truncated model file: section '" + section_ + "' declares " + std::to_string(n) +
                        " values but the payload is shorter");
    }
    return static_cast<Eigen::Index>(n);
  }
  Eigen::MatrixXd matrix() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (rows != 0 && cols > (bytes_.size() - pos_) / 8 / rows) {
      throw FormatError("truncated model file: section '" + section_ + "' declares a " + std::to_string(rows) +
                        "x" + std::to_string(cols) + " matrix but the payload is shorter");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
  }
  Eigen::VectorXd vector() {
    const Eigen::Index n = count(8);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
  void expect_magic() {
    section("header");
    need(sizeof(kModelMagic));
    if (std::memcmp(bytes_.data() + pos_, kModelMagic, sizeof(kModelMagic)) != 0) {
      throw FormatError("model file: bad magic tag (not a .ddsr model)");
    }
    pos_ += sizeof(kModelMagic);
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
  std::string section_;
};

void write_config(Writer& w, const ModelConfig& c) {
  w.i64(c.degradation.blur_kernel_size);
  w.f64(c.degradation.blur_sigma);
  w.i64(c.degradation.scale);
  w.i64(kDecimationPhaseRow);
  w.i64(kDecimationPhaseCol);
  w.f64(kBicubicA);
  w.i64(c.patch_size);
  w.i64(c.stride);
  w.i64(c.sparsity);
  w.i64(c.md_atoms);
  w.i64(c.rd_atoms);
  w.i64(c.ksvd.iterations);
  w.u64(c.ksvd.seed);
  w.f64(c.ksvd.min_patch_norm);
  w.f64(c.pca_energy);
}

ModelConfig read_config(Reader& r) {
  ModelConfig c;
  c.degradation.blur_kernel_size = r.small_int("blur_kernel_size");
  c.degradation.blur_sigma = r.f64();
  c.degradation.scale = r.small_int("scale");
  const std::int64_t phase_row = r.i64();
  const std::int64_t phase_col = r.i64();
  const double a = r.f64();
  if (phase_row != kDecimationPhaseRow || phase_col != kDecimationPhaseCol || a != kBicubicA) {
    throw FormatError("model file: unsupported decimation phase or bicubic kernel");
  }
  c.patch_size = r.small_int("patch_size");
  c.stride = r.small_int("stride");
  c.sparsity = r.small_int("sparsity");
  c.md_atoms = r.small_int("md_atoms");
  c.rd_atoms = r.small_int("rd_atoms");
  c.ksvd.iterations = r.small_int("ksvd_iterations");
  c.ksvd.seed = r.u64();
  c.ksvd.min_patch_norm = r.f64();
  c.pca_energy = r.f64();
  return c;
}

void write_features(Writer& w, const FeaturePipeline& f) {
  w.i64(f.patch_size);
  w.i64(f.stride);
  w.u64(f.bank.kernels.size());
  for (const auto& k : f.bank.kernels) {
    w.u64(static_cast<std::uint64_t>(k.rows));
    w.u64(static_cast<std::uint64_t>(k.cols));
    for (double t : k.taps) w.f64(t);
  }
  w.f64(f.pca.energy_kept);
  w.vector(f.pca.mean);
  w.matrix(f.pca.basis);
}

FeaturePipeline read_features(Reader& r) {
  FeaturePipeline f;
  f.patch_size = r.small_int("patch_size");
  f.stride = r.small_int("stride");
  const Eigen::Index n = r.count(16);
  for (Eigen::Index i = 0; i < n; ++i) {
    Stencil k;
    k.rows = static_cast<int>(r.count(0));
    k.cols = static_cast<int>(r.count(0));
    if (k.rows < 1 || k.cols < 1 || k.rows > 1024 || k.cols > 1024) throw FormatError("model file: bad kernel shape");
    r.need(static_cast<std::size_t>(k.rows) * k.cols * 8);
    k.taps.resize(static_cast<std::size_t>(k.rows) * k.cols);
    for (double& t : k.taps) t = r.f64();
    f.bank.kernels.push_back(std::move(k));
  }
  f.pca.energy_kept = r.f64();
  f.pca.mean = r.vector();
  f.pca.basis = r.matrix();
  return f;
}

void write_dictionary(Writer& w, const CoupledDictionary& d) {
  w.matrix(d.low.atoms);
  w.matrix(d.high);
}

CoupledDictionary read_dictionary(Reader& r) {
  CoupledDictionary d;
  d.low.atoms = r.matrix();
  d.high = r.matrix();
  return d;
}

}  // namespace

std::vector<std::uint8_t> encode_model(const SRModel& model) {
  Writer w;
  w.raw(kModelMagic, sizeof(kModelMagic));
  w.u32(model.format_version);
  write_config(w, model.config);
  write_features(w, model.md_features);
  write_dictionary(w, model.md);
  write_features(w, model.rd_features);
  write_dictionary(w, model.rd);
  return w.take();
}

SRModel decode_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.expect_magic();
  SRModel m;
  m.format_version = r.u32();
  if (m.format_version != kModelFormatVersion) {
    throw FormatError("model file: format version " + std::to_string(m.format_version) + " is not supported (expected " +
                      std::to_string(kModelFormatVersion) + ")");
  }
  r.section("config");
  m.config = read_config(r);
  r.section("main features");
  m.md_features = read_features(r);
  r.section("main dictionary");
  m.md = read_dictionary(r);
  r.section("residual features");
  m.rd_features = read_features(r);
  r.section("residual dictionary");
  m.rd = read_dictionary(r);
  if (!r.at_end()) throw FormatError("model file: trailing bytes after the residual dictionary");
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("model file: inconsistent contents: ") + e.what());
  }
  return m;
}

void save_model(const SRModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

SRModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace ddsr
