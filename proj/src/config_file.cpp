#include "ddsr/config_file.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "ddsr/errors.hpp"

namespace ddsr {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("config: invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

}  // namespace

ModelConfig parse_config(std::istream& in) {
  ModelConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string_view key = trim(view.substr(0, eq));
    const std::string_view value = trim(view.substr(eq + 1));

    if (key == "blur_kernel_size") cfg.degradation.blur_kernel_size = parse_number<int>(key, value);
    else if (key == "blur_sigma") cfg.degradation.blur_sigma = parse_number<double>(key, value);
    else if (key == "scale") cfg.degradation.scale = parse_number<int>(key, value);
    else if (key == "patch_size") cfg.patch_size = parse_number<int>(key, value);
    else if (key == "stride") cfg.stride = parse_number<int>(key, value);
    else if (key == "sparsity") cfg.sparsity = parse_number<int>(key, value);
    else if (key == "md_atoms") cfg.md_atoms = parse_number<int>(key, value);
    else if (key == "rd_atoms") cfg.rd_atoms = parse_number<int>(key, value);
    else if (key == "ksvd_iterations") cfg.ksvd.iterations = parse_number<int>(key, value);
    else if (key == "seed") cfg.ksvd.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "min_patch_norm") cfg.ksvd.min_patch_norm = parse_number<double>(key, value);
    else if (key == "pca_energy") cfg.pca_energy = parse_number<double>(key, value);
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
  }
  cfg.validate();
  return cfg;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

void write_config(const ModelConfig& cfg, std::ostream& out) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "blur_kernel_size = " << cfg.degradation.blur_kernel_size << '\n'
      << "blur_sigma = " << cfg.degradation.blur_sigma << '\n'
      << "scale = " << cfg.degradation.scale << '\n'
      << "patch_size = " << cfg.patch_size << '\n'
      << "stride = " << cfg.stride << '\n'
      << "sparsity = " << cfg.sparsity << '\n'
      << "md_atoms = " << cfg.md_atoms << '\n'
      << "rd_atoms = " << cfg.rd_atoms << '\n'
      << "ksvd_iterations = " << cfg.ksvd.iterations << '\n'
      << "seed = " << cfg.ksvd.seed << '\n'
      << "min_patch_norm = " << cfg.ksvd.min_patch_norm << '\n'
      << "pca_energy = " << cfg.pca_energy << '\n';
  out.precision(old);
}

}  // namespace ddsr
