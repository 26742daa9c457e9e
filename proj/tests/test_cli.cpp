#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "slrbm/dataset_io.hpp"
#include "slrbm/train_config.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SLRBM_CLI_PATH;

int run(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Runs the CLI with stdout+stderr captured into a file next to the scratch data.
int run_captured(const std::string& args, const std::string& log_path) {
  return run(kCli + " " + args + " > " + log_path + " 2>&1");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::size_t count_lines(const std::string& text) {
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// 24 4x4 images in two classes: class 0 lights the left half, class 1 the
// right half, plus one roaming pixel so the images are not all identical.
void write_two_class_fixture(const fs::path& images_path, const fs::path& labels_path) {
  const int count = 24;
  std::vector<std::uint8_t> images;
  append_be32(images, 0x00000803);
  append_be32(images, count);
  append_be32(images, 4);
  append_be32(images, 4);
  std::vector<std::uint8_t> labels;
  append_be32(labels, 0x00000801);
  append_be32(labels, count);
  for (int i = 0; i < count; ++i) {
    const int label = i % 2;
    std::uint8_t pixels[16];
    for (int p = 0; p < 16; ++p) {
      const bool left = p % 4 < 2;
      pixels[p] = (label == 0) == left ? 200 : 10;
    }
    pixels[i % 16] = 255;
    images.insert(images.end(), pixels, pixels + 16);
    labels.push_back(static_cast<std::uint8_t>(label));
  }
  write_bytes(images_path, images);
  write_bytes(labels_path, labels);
}

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_two_class_fixture(dir / "fix-images-idx3", dir / "fix-labels-idx1");
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string images() const { return (dir / "fix-images-idx3").string(); }
  std::string labels() const { return (dir / "fix-labels-idx1").string(); }
  std::string log() const { return (dir / "log.txt").string(); }
  std::string train_flags(const std::string& extra) const {
    return "train --images " + images() + " --labels " + labels() +
           " --epochs 2 --batch-size 8 --n-hidden 6 --eta 0.1 --seed 3 " + extra;
  }
};

}  // namespace

TEST_CASE("version and help") {
  Scratch scratch("cli_basic");
  CHECK(run_captured("--version", scratch.log()) == 0);
  CHECK(contains(read_text(scratch.log()), "0.1.0"));
  CHECK(run_captured("--help", scratch.log()) == 0);
  const std::string help = read_text(scratch.log());
  CHECK(contains(help, "train"));
  CHECK(contains(help, "eval"));
  CHECK(contains(help, "oracle-check"));
  CHECK(contains(help, "dump-reprs"));
}

TEST_CASE("usage errors exit with 1") {
  Scratch scratch("cli_usage");
  CHECK(run_captured("", scratch.log()) == 1);
  CHECK(run_captured("--bogus-flag", scratch.log()) == 1);
  CHECK(run_captured("train --images a --labels b --model banana", scratch.log()) == 1);
  CHECK(run_captured("eval", scratch.log()) == 1); // required options missing
  CHECK(run_captured("oracle-check --trials -3", scratch.log()) == 1);
}

TEST_CASE("missing input files exit with 2") {
  Scratch scratch("cli_missing");
  CHECK(run_captured("train --images no-such-idx3 --labels " + scratch.labels(),
                     scratch.log()) == 2);
  CHECK(contains(read_text(scratch.log()), "error:"));
  CHECK(run_captured("eval --checkpoint no-such.ckpt --train-images a"
                     " --train-labels b --test-images c --test-labels d",
                     scratch.log()) == 2);
}

TEST_CASE("oracle check command") {
  Scratch scratch("cli_oracle");
  CHECK(run_captured("oracle-check --trials 24 --seed 5", scratch.log()) == 0);
  const std::string out = read_text(scratch.log());
  CHECK(contains(out, "conditional identity: 24/24"));
  CHECK(contains(out, "gradient check:"));
  CHECK(contains(out, "trace identity: 24/24"));
  CHECK(contains(out, "patch alignment: 24/24"));
  CHECK(contains(out, "oracle-check: all suites passed"));

  CHECK(run_captured("oracle-check --trials 0", scratch.log()) == 0);
  CHECK(contains(read_text(scratch.log()), "vacuous"));
}

TEST_CASE("training writes the documented artifacts") {
  Scratch scratch("cli_train");
  const std::string out_dir = (scratch.dir / "out").string();
  CHECK(run_captured(scratch.train_flags("--model slrbm --lambda 0.05 --out-dir " + out_dir),
                     scratch.log()) == 0);
  const std::string message = read_text(scratch.log());
  CHECK(contains(message, "trained slrbm on 24 examples"));
  CHECK(fs::exists(fs::path(out_dir) / "checkpoint.slrbm"));
  CHECK(fs::exists(fs::path(out_dir) / "train_report.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "manifest.toml"));

  const std::string report = read_text((fs::path(out_dir) / "train_report.csv").string());
  CHECK(contains(report, "epoch,reconstruction_error,smoothness,seconds"));
  CHECK(count_lines(report) == 3); // header + 2 epochs

  const std::string manifest = read_text((fs::path(out_dir) / "manifest.toml").string());
  CHECK(contains(manifest, "[train]"));
  CHECK(contains(manifest, "model = \"slrbm\""));
  CHECK(contains(manifest, "images: 0x")); // provenance digest comment

  const slrbm::Checkpoint checkpoint =
      slrbm::load_checkpoint((fs::path(out_dir) / "checkpoint.slrbm").string());
  CHECK(checkpoint.params.n_hidden() == 6);
  CHECK(checkpoint.params.n_visible() == 16);
  CHECK(checkpoint.config.lambda == 0.05);

  // The kNN variant trains end to end as well.
  const std::string knn_dir = (scratch.dir / "knn").string();
  CHECK(run_captured(scratch.train_flags("--model graphrbm --knn-p 3 --out-dir " + knn_dir),
                     scratch.log()) == 0);
  CHECK(contains(read_text(scratch.log()), "trained graphrbm"));
}

TEST_CASE("identical invocations and manifest replays reproduce the checkpoint") {
  Scratch scratch("cli_replay");
  const std::string flags = "--model slrbm --lambda 0.05 --delta-source sample";
  const std::string dir_a = (scratch.dir / "a").string();
  const std::string dir_b = (scratch.dir / "b").string();
  REQUIRE(run_captured(scratch.train_flags(flags + " --out-dir " + dir_a), scratch.log()) == 0);
  REQUIRE(run_captured(scratch.train_flags(flags + " --out-dir " + dir_b), scratch.log()) == 0);
  const std::string bytes_a = read_text(dir_a + "/checkpoint.slrbm");
  CHECK(bytes_a == read_text(dir_b + "/checkpoint.slrbm"));

  // Replaying the manifest (command-line flags beat config values, so only
  // the output directory moves) reproduces the artifact byte for byte.
  const std::string dir_c = (scratch.dir / "c").string();
  REQUIRE(run_captured("train --config " + dir_a + "/manifest.toml --out-dir " + dir_c,
                       scratch.log()) == 0);
  CHECK(bytes_a == read_text(dir_c + "/checkpoint.slrbm"));

  // Unknown keys in a config file are rejected, not skipped.
  const std::string broken = (scratch.dir / "broken.toml").string();
  {
    std::ofstream out(broken, std::ios::trunc);
    out << read_text(dir_a + "/manifest.toml") << "bogus-key = 1\n";
  }
  CHECK(run_captured("train --config " + broken, scratch.log()) == 1);
  CHECK(contains(read_text(scratch.log()), "bogus-key"));
}

TEST_CASE("plain rbm ignores lambda with a warning") {
  Scratch scratch("cli_rbm");
  const std::string out_dir = (scratch.dir / "out").string();
  CHECK(run_captured(scratch.train_flags("--model rbm --lambda 0.25 --out-dir " + out_dir),
                     scratch.log()) == 0);
  CHECK(contains(read_text(scratch.log()), "--lambda has no effect"));
  const slrbm::Checkpoint checkpoint =
      slrbm::load_checkpoint((fs::path(out_dir) / "checkpoint.slrbm").string());
  CHECK(checkpoint.config.graph == slrbm::GraphMode::None);
  CHECK(checkpoint.config.lambda == 0.0);
}

TEST_CASE("eval reports a nearest neighbor error rate") {
  Scratch scratch("cli_eval");
  const std::string out_dir = (scratch.dir / "out").string();
  REQUIRE(run_captured(scratch.train_flags("--model slrbm --lambda 0.05 --out-dir " + out_dir),
                       scratch.log()) == 0);
  CHECK(run_captured("eval --checkpoint " + out_dir + "/checkpoint.slrbm" +
                         " --train-images " + scratch.images() + " --train-labels " +
                         scratch.labels() + " --test-images " + scratch.images() +
                         " --test-labels " + scratch.labels() + " --out-dir " + out_dir,
                     scratch.log()) == 0);
  CHECK(contains(read_text(scratch.log()), "error_rate"));
  const std::string summary = read_text(out_dir + "/eval.csv");
  CHECK(contains(summary, "model,lambda,eta,seed,error_rate"));
  CHECK(contains(summary, "slrbm,0.05"));
  // Identical reference and query sets: every query finds itself.
  CHECK(contains(summary, ",0\n"));
}

TEST_CASE("dump-reprs filters classes") {
  Scratch scratch("cli_dump");
  const std::string out_dir = (scratch.dir / "out").string();
  REQUIRE(run_captured(scratch.train_flags("--model slrbm --lambda 0.05 --out-dir " + out_dir),
                       scratch.log()) == 0);
  const std::string base = "dump-reprs --checkpoint " + out_dir + "/checkpoint.slrbm" +
                           " --images " + scratch.images() + " --labels " +
                           scratch.labels() + " --out-dir " + out_dir;

  CHECK(run_captured(base, scratch.log()) == 0);
  std::string reprs = read_text(out_dir + "/reprs.csv");
  CHECK(count_lines(reprs) == 25); // header + all 24 rows
  CHECK(contains(reprs, "label,h0,h1,h2,h3,h4,h5"));

  CHECK(run_captured(base + " --classes 1", scratch.log()) == 0);
  reprs = read_text(out_dir + "/reprs.csv");
  CHECK(count_lines(reprs) == 13); // header + the 12 class-1 rows
  CHECK_FALSE(contains(reprs, "\n0,"));

  // A selection that matches nothing still yields the documented header.
  CHECK(run_captured(base + " --classes 5", scratch.log()) == 0);
  CHECK(contains(read_text(scratch.log()), "wrote 0 representations"));
  reprs = read_text(out_dir + "/reprs.csv");
  CHECK(reprs == "label,h0,h1,h2,h3,h4,h5\n");
}
