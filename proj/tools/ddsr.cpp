// ddsr: train, apply and benchmark dual-dictionary super-resolution models.
//
// Exit codes: 0 success, 1 usage error, 2 processing error.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ddsr/bench.hpp"
#include "ddsr/config_file.hpp"
#include "ddsr/errors.hpp"
#include "ddsr/image_io.hpp"
#include "ddsr/model_io.hpp"
#include "ddsr/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitProcessing = 2;

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ddsr::IoError(dir.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pgm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ddsr::IoError("no .png or .pgm images in " + dir.string());
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_train(const std::string& config_path, const std::string& images_dir, const std::string& out_path) {
  const ddsr::ModelConfig cfg = config_path.empty() ? ddsr::ModelConfig{} : ddsr::load_config(config_path);
  std::vector<ddsr::GrayImage> images;
  for (const auto& p : list_images(images_dir)) {
    images.push_back(ddsr::load_image(p));
    std::cout << "training image " << p.filename().string() << " (" << images.back().width() << "x"
              << images.back().height() << ")\n";
  }
  const auto t0 = std::chrono::steady_clock::now();
  ddsr::TrainingReport report;
  const ddsr::SRModel model = ddsr::train_model(images, cfg, &report);
  std::cout << "main dictionary: " << report.md.samples_used << " patches, feature dim "
            << model.md_features.pca.reduced_dim() << ", objective " << report.md.ksvd_objective.front() << " -> "
            << report.md.ksvd_objective.back() << "\n";
  std::cout << "residual dictionary: " << report.rd.samples_used << " patches, feature dim "
            << model.rd_features.pca.reduced_dim() << ", objective " << report.rd.ksvd_objective.front()
            << " -> " << report.rd.ksvd_objective.back() << "\n";
  for (std::size_t i = 0; i < report.images.size(); ++i) {
    std::cout << "training psnr [" << i << "]: bicubic " << report.images[i].psnr_lf << " dB, main layer "
              << report.images[i].psnr_tmp << " dB\n";
  }
  ddsr::save_model(model, out_path);
  std::cout << "wrote " << out_path << " in " << seconds_since(t0) << " s\n";
  return 0;
}

int run_upscale(const std::string& model_path, const std::string& in_path, const std::string& out_path,
                bool single_layer, const std::string& dump_dir) {
  const ddsr::SRModel model = ddsr::load_model(model_path);
  const ddsr::GrayImage lr = ddsr::load_image(in_path);
  ddsr::SynthesisLayers layers;
  const ddsr::GrayImage hr =
      single_layer ? ddsr::super_resolve_single_layer(lr, model, &layers) : ddsr::super_resolve(lr, model, &layers);
  ddsr::save_image(hr, out_path);
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    const fs::path dir(dump_dir);
    ddsr::save_image(layers.h_lf, dir / "h_lf.png");
    // High-frequency layers are signed; store them offset by 0.5.
    auto offset = [](const ddsr::Plane& p) {
      ddsr::Plane q = p;
      for (double& v : q.data()) v += 0.5;
      return q;
    };
    ddsr::save_image(offset(layers.h_mhf), dir / "h_mhf.png");
    ddsr::save_image(layers.h_tmp, dir / "h_tmp.png");
    if (!layers.h_rhf.empty()) ddsr::save_image(offset(layers.h_rhf), dir / "h_rhf.png");
    ddsr::save_image(layers.h_est, dir / "h_est.png");
  }
  return 0;
}

int run_eval(const std::string& model_path, const std::string& images_dir, const std::string& report_path,
             const std::string& outputs_dir) {
  const ddsr::SRModel model = ddsr::load_model(model_path);
  std::vector<ddsr::GrayImage> images;
  std::vector<std::string> names;
  for (const auto& p : list_images(images_dir)) {
    images.push_back(ddsr::load_image(p));
    names.push_back(p.stem().string());
  }
  const auto t0 = std::chrono::steady_clock::now();
  const ddsr::BenchReport report = ddsr::run_benchmark(model, images, names);
  ddsr::print_report(report, std::cout);
  std::cout << "evaluated " << images.size() << " images in " << seconds_since(t0) << " s\n";
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw ddsr::IoError("cannot write " + report_path);
    ddsr::write_report_csv(report, out);
  }
  if (!outputs_dir.empty()) {
    fs::create_directories(outputs_dir);
    const int s = model.config.degradation.scale;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto lr = ddsr::degrade(ddsr::crop_to_multiple(images[i], s), model.config.degradation);
      const fs::path dir(outputs_dir);
      ddsr::save_image(ddsr::clamp_to_gray(ddsr::bicubic_upscale(lr, s)), dir / (names[i] + "_bicubic.png"));
      ddsr::save_image(ddsr::super_resolve_single_layer(lr, model), dir / (names[i] + "_single.png"));
      ddsr::save_image(ddsr::super_resolve(lr, model), dir / (names[i] + "_dual.png"));
    }
  }
  return 0;
}

int run_degrade(const std::string& config_path, const std::string& in_path, const std::string& out_path) {
  const ddsr::ModelConfig cfg = config_path.empty() ? ddsr::ModelConfig{} : ddsr::load_config(config_path);
  const auto img = ddsr::crop_to_multiple(ddsr::load_image(in_path), cfg.degradation.scale);
  ddsr::save_image(ddsr::degrade(img, cfg.degradation), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-dictionary sparse-representation super-resolution"};
  app.require_subcommand(1);

  std::string config_path, images_dir, out_path, model_path, in_path, report_path, dump_dir, outputs_dir;
  bool single_layer = false;

  auto* train = app.add_subcommand("train", "Learn main and residual dictionaries from HR images");
  train->add_option("--config", config_path, "key=value hyperparameter file (defaults if omitted)");
  train->add_option("--images", images_dir, "directory of training images")->required();
  train->add_option("--out", out_path, "output model file (.ddsr)")->required();

  auto* upscale = app.add_subcommand("upscale", "Super-resolve one low-resolution image");
  upscale->add_option("--model", model_path, "trained model (.ddsr)")->required();
  upscale->add_option("--in", in_path, "low-resolution input image")->required();
  upscale->add_option("--out", out_path, "high-resolution output image")->required();
  upscale->add_flag("--single-layer", single_layer, "stop after the main dictionary layer");
  upscale->add_option("--dump-layers", dump_dir, "write intermediate layers to this directory");

  auto* eval = app.add_subcommand("eval", "Benchmark bicubic, single- and dual-layer PSNR on HR images");
  eval->add_option("--model", model_path, "trained model (.ddsr)")->required();
  eval->add_option("--images", images_dir, "directory of HR test images")->required();
  eval->add_option("--report", report_path, "CSV report path");
  eval->add_option("--outputs", outputs_dir, "write reconstructed images to this directory");

  auto* degrade = app.add_subcommand("degrade", "Blur and decimate an HR image into an LR input");
  degrade->add_option("--config", config_path, "key=value hyperparameter file (defaults if omitted)");
  degrade->add_option("--in", in_path, "high-resolution image")->required();
  degrade->add_option("--out", out_path, "low-resolution output image")->required();

  auto* defaults = app.add_subcommand("default-config", "Print the default configuration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return run_train(config_path, images_dir, out_path);
    if (*upscale) return run_upscale(model_path, in_path, out_path, single_layer, dump_dir);
    if (*eval) return run_eval(model_path, images_dir, report_path, outputs_dir);
    if (*degrade) return run_degrade(config_path, in_path, out_path);
    if (*defaults) {
      ddsr::write_config(ddsr::ModelConfig{}, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "ddsr: " << e.what() << '\n';
    return kExitProcessing;
  }
  return kExitUsage;
}
