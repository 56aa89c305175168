#include "ddsr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "ddsr/errors.hpp"

namespace ddsr {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

// PGM header tokens, skipping whitespace and '#' comments.
int read_pgm_int(std::istream& in, const std::string& name) {
  int c = in.peek();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int value = -1;
  if (!(in >> value)) throw IoError(name + ": malformed PGM header");
  return value;
}

GrayImage load_pgm(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + name);
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2')) throw IoError(name + ": not a PGM file");
  const int w = read_pgm_int(in, name);
  const int h = read_pgm_int(in, name);
  const int maxval = read_pgm_int(in, name);
  if (w < 1 || h < 1) throw IoError(name + ": bad PGM dimensions");
  if (maxval < 1 || maxval > 255) {
    throw IoError(name + ": unsupported bit depth (maxval " + std::to_string(maxval) + ", 8-bit required)");
  }
  GrayImage img(w, h);
  auto px = img.data();
  if (magic[1] == '5') {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(px.size());
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError(name + ": truncated PGM data");
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = buf[i] / static_cast<double>(maxval);
  } else {
    for (double& v : px) v = read_pgm_int(in, name) / static_cast<double>(maxval);
  }
  return img;
}

GrayImage load_png(const std::filesystem::path& path) {
  const std::string name = path.string();
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, name.c_str())) {
    throw IoError("cannot read " + name + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw IoError(name + ": unsupported bit depth (16-bit PNG)");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode " + name + ": " + msg);
  }
  GrayImage img(static_cast<int>(image.width), static_cast<int>(image.height));
  auto px = img.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = color ? luminance(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]) : buf[i * channels] / 255.0;
  }
  return img;
}

}  // namespace

double luminance(unsigned char r, unsigned char g, unsigned char b) noexcept {
  return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
}

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  unsigned char head[8] = {};
  probe.read(reinterpret_cast<char*>(head), 8);
  const auto got = probe.gcount();
  probe.close();
  if (got >= 2 && head[0] == 'P' && (head[1] == '5' || head[1] == '2')) return load_pgm(path);
  if (got == 8 && png_sig_cmp(head, 0, 8) == 0) return load_png(path);
  throw IoError(path.string() + ": not a PNG or PGM image");
}

GrayImage quantize_8bit(const Plane& img) {
  GrayImage out(img);
  for (double& v : out.data()) v = to_byte(v) / 255.0;
  return out;
}

void save_image(const Plane& img, const std::filesystem::path& path) {
  if (img.empty()) throw IoError("refusing to write an empty image to " + path.string());
  std::vector<png_byte> bytes(img.size());
  const auto px = img.data();
  std::transform(px.begin(), px.end(), bytes.begin(), to_byte);

  if (lower_extension(path) == ".pgm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
    return;
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError("cannot write " + path.string() + ": " + image.message);
  }
}

}  // namespace ddsr
