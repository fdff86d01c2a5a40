#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "upscaler/imaging/codec.hpp"

using namespace upscaler;
using nlohmann::json;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI with `args`; stderr is folded into stdout when `merge` is set.
Run run_cli(const std::string& args, bool merge = false) {
  const std::string cmd = std::string(UPSCALER_CLI_PATH) + " " + args + (merge ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, ValidatesReferenceCaptions) {
  test::TempDir dir;
  const auto jpg = imaging::save_jpeg(test::random_image(16, 16, 1), 90);
  imaging::write_file(dir / "imago1050756553.jpg", jpg);
  imaging::write_file(dir / "imago1050756556.jpg", jpg);
  const auto r = run_cli("dataset validate --captions " + q(test::data_dir() / "reference_captions.json") + " --root " +
                         q(dir.path()));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["valid"], true);
  EXPECT_EQ(doc["entries_valid"], 2);
}

TEST(Cli, ValidationFindingsExitOne) {
  test::TempDir dir;
  const auto r = run_cli("dataset validate --captions " + q(test::data_dir() / "reference_captions.json") + " --root " +
                             q(dir.path()),
                         true);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.out.find("validation-error"), std::string::npos);
}

TEST(Cli, ScoreIdenticalImages) {
  test::TempDir dir;
  imaging::write_file(dir / "a.png", imaging::save_png(test::random_image(16, 16, 2)));
  const auto r = run_cli("score --gt " + q(dir / "a.png") + " --cand " + q(dir / "a.png"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(json::parse(r.out)["candidates"][0]["psnr"], 99.0);
}

TEST(Cli, PlanMatchesTrainingArithmetic) {
  const auto r = run_cli("dataset plan --images 460");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["samples_per_epoch"], 2300);
  EXPECT_EQ(doc["total_steps"], 2880);
}

TEST(Cli, EmitWritesGoldenFiles) {
  test::TempDir dir;
  const auto r = run_cli("dataset emit --repeats 1 --out-dir " + q(dir.path()));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(test::slurp(dir / "dataset.toml"), test::slurp(test::golden_dir() / "reference_dataset.toml"));
  EXPECT_EQ(test::slurp(dir / "train_command.txt"), test::slurp(test::golden_dir() / "reference_train_command.txt"));
}

TEST(Cli, FixtureThenReconstruct) {
  test::TempDir dir;
  auto r = run_cli("fixture make --synthetic 256 --seed 4 --output " + q(dir / "lq.png") + " --ground-truth-output " +
                   q(dir / "gt.png"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(imaging::load_image_file(dir / "lq.png").width(), 16);
  r = run_cli("reconstruct run --input " + q(dir / "lq.png") + " --facts " + q(test::data_dir() / "facts_sample.json") +
              " --seed 5 --output " + q(dir / "out.png"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto out = imaging::load_image_file(dir / "out.png");
  EXPECT_EQ(out.width(), 1024);
  EXPECT_EQ(out.height(), 1024);
  EXPECT_EQ(json::parse(r.out)["width"], 1024);
}

TEST(Cli, PromptBuild) {
  const auto r = run_cli("prompt build --facts " + q(test::data_dir() / "facts_sample.json") + " --caption");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto doc = json::parse(r.out);
  EXPECT_NE(doc["prompt"].get<std::string>().find("number 11"), std::string::npos);
  EXPECT_FALSE(doc["caption"].get<std::string>().empty());
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("score --bogus-flag").exit_code, 2);
  EXPECT_EQ(run_cli("no-such-command").exit_code, 2);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
}

TEST(Cli, LibraryErrorsAreJsonOnStderr) {
  test::TempDir dir;
  imaging::write_file(dir / "junk.png", Bytes{'n', 'o', 'p', 'e'});
  const auto r = run_cli("score --gt " + q(dir / "junk.png") + " --cand " + q(dir / "junk.png"), true);
  EXPECT_EQ(r.exit_code, 1);
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc["error"]["code"], "decode-error");
}
