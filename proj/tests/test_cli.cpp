#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ddsr/config_file.hpp"
#include "ddsr/image_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(DDSR_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "ddsr_cli_tests";
  fs::remove_all(dir);
  fs::create_directories(dir / "train");
  fs::create_directories(dir / "test");
  return dir;
}

}  // namespace

TEST_CASE("cli verbs and exit codes") {
  const fs::path dir = workdir();
  {
    std::ofstream cfg(dir / "small.cfg");
    ddsr::write_config(ddsr::testing::small_config(), cfg);
  }
  ddsr::save_image(ddsr::testing::textured_image(64, 64, 100), dir / "train" / "a.png");
  ddsr::save_image(ddsr::testing::textured_image(48, 40, 5), dir / "test" / "b.pgm");
  const std::string d = dir.string();

  CHECK(run("default-config") == 0);
  CHECK(run("train --config " + d + "/small.cfg --images " + d + "/train --out " + d + "/m.ddsr") == 0);
  REQUIRE(fs::exists(dir / "m.ddsr"));

  CHECK(run("degrade --config " + d + "/small.cfg --in " + d + "/test/b.pgm --out " + d + "/lr.png") == 0);
  CHECK(ddsr::load_image(dir / "lr.png").width() == 24);
  CHECK(run("upscale --model " + d + "/m.ddsr --in " + d + "/lr.png --out " + d + "/hr.png --dump-layers " + d +
            "/layers") == 0);
  CHECK(ddsr::load_image(dir / "hr.png").width() == 48);
  for (const char* layer : {"h_lf.png", "h_mhf.png", "h_tmp.png", "h_rhf.png", "h_est.png"})
    CHECK(fs::exists(dir / "layers" / layer));
  CHECK(run("upscale --single-layer --model " + d + "/m.ddsr --in " + d + "/lr.png --out " + d + "/hr1.png") == 0);

  CHECK(run("eval --model " + d + "/m.ddsr --images " + d + "/test --report " + d + "/r.csv --outputs " + d +
            "/out") == 0);
  std::ifstream csv(dir / "r.csv");
  std::string all((std::istreambuf_iterator<char>(csv)), std::istreambuf_iterator<char>());
  CHECK(all.find("name,bicubic_db,single_db,dual_db,gain_db") != std::string::npos);
  CHECK(all.find("\nb,") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "b_dual.png"));

  // Usage errors.
  CHECK(run("") == 1);
  CHECK(run("upscale --model " + d + "/m.ddsr") == 1);
  CHECK(run("frobnicate") == 1);

  // Processing errors.
  {
    std::ofstream junk(dir / "junk.png");
    junk << "not an image";
  }
  CHECK(run("upscale --model " + d + "/m.ddsr --in " + d + "/junk.png --out " + d + "/x.png") == 2);
  CHECK(run("upscale --model " + d + "/junk.png --in " + d + "/lr.png --out " + d + "/x.png") == 2);
  CHECK(run("train --images " + d + "/empty_dir --out " + d + "/x.ddsr") == 2);
  {
    std::ofstream bad(dir / "bad.cfg");
    bad << "stride = 99\n";
  }
  CHECK(run("train --config " + d + "/bad.cfg --images " + d + "/train --out " + d + "/x.ddsr") == 2);
}
