#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "support/fixtures.hpp"
#include "vgforge/digest.hpp"
#include "vgforge/manifest.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::string& args, const fixture::TempDir& dir, const std::string& env = "") {
  const fs::path err_file = dir / "stderr.txt";
  const std::string cmd = env + " '" + std::string(VGFORGE_CLI_PATH) + "' " + args + " 2>'" + err_file.string() + "'";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_file);
  r.err.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

std::string line_value(const std::string& text, const std::string& key) {
  const auto at = text.find(key + ": ");
  if (at == std::string::npos) return {};
  const auto start = at + key.size() + 2;
  return text.substr(start, text.find('\n', start) - start);
}

}  // namespace

TEST(Cli, GenerateVerifyRenderRoundTrip) {
  fixture::TempDir dir("cli");
  const auto out = (dir / "ds").string();
  const auto gen = run("generate -c 3 -m 2 -s 7 -o '" + out + "'", dir);
  ASSERT_EQ(gen.code, 0) << gen.err;
  const std::string manifest = line_value(gen.out, "manifest");
  EXPECT_EQ(line_value(gen.out, "digest"), vgforge::sha256_file(manifest));
  EXPECT_EQ(line_value(gen.out, "records"), "6");

  const auto ver = run("verify '" + manifest + "'", dir);
  EXPECT_EQ(ver.code, 0) << ver.out;
  EXPECT_NE(ver.out.find("verify: ok"), std::string::npos);

  const auto ren = run("render '" + manifest + "' --record 4 --out '" + (dir / "r.png").string() + "'", dir);
  EXPECT_EQ(ren.code, 0);
  EXPECT_EQ(line_value(ren.out, "byte-identical"), "true");
  EXPECT_EQ(vgforge::sha256_file(dir / "r.png"), vgforge::sha256_file(dir / "ds/images/2/0.png"));

  const auto st = run("stats '" + manifest + "'", dir);
  ASSERT_EQ(st.code, 0);
  EXPECT_EQ(nlohmann::json::parse(st.out)["records"], 6);

  const auto sh = run("shuffle '" + manifest + "' --mode instance_category --seed 3", dir);
  ASSERT_EQ(sh.code, 0) << sh.err;
  EXPECT_TRUE(fs::exists(dir / "ds/manifest.shuffle-instance_category-3.json"));
  EXPECT_EQ(run("verify --no-regenerate '" + line_value(sh.out, "manifest") + "'", dir).code, 0);

  const auto vj = run("--json verify '" + manifest + "'", dir);
  ASSERT_EQ(vj.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(vj.out)["ok"].get<bool>());
}

TEST(Cli, ExitCodes) {
  fixture::TempDir dir("cli-codes");
  EXPECT_EQ(run("generate -c 0 -m 2 -o x", dir).code, 2);
  EXPECT_EQ(run("generate -m 2 -o x", dir).code, 2);
  EXPECT_EQ(run("frobnicate", dir).code, 2);
  EXPECT_EQ(run("generate -c 2 -m 2 --mix-ratio 1.5 -o '" + (dir / "bad").string() + "'", dir).code, 2);
  EXPECT_FALSE(fs::exists(dir / "bad"));
  const auto cap = run("generate -c 2 -m 2 --threshold 0.9 --rejection-cap 3 -o '" + (dir / "cap").string() + "'", dir);
  EXPECT_EQ(cap.code, 3);
  EXPECT_NE(cap.err.find("acceptance rate"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "cap/manifest.json"));
  EXPECT_EQ(run("verify /definitely/not/here.json", dir).code, 2);
  EXPECT_EQ(run("--help", dir).code, 0);
}

TEST(Cli, JsonErrorsOnStderr) {
  fixture::TempDir dir("cli-json");
  const auto r = run("--json generate -c 2 -m 2 --threshold 0.9 --rejection-cap 2 -o '" + (dir / "x").string() + "'", dir);
  EXPECT_EQ(r.code, 3);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"]["kind"], "build-error");
  EXPECT_EQ(j["error"]["exit_code"], 3);
  const auto u = run("--json generate -c 0 -m 1 -o x", dir);
  EXPECT_EQ(u.code, 2);
  EXPECT_EQ(nlohmann::json::parse(u.err)["error"]["exit_code"], 2);
}

TEST(Cli, TomlAndJsonConfigFiles) {
  fixture::TempDir dir("cli-config");
  std::ofstream(dir / "cfg.toml") << "[generate]\ncategories = 2\ninstances = 2\nseed = 4\nout = \""
                                  << (dir / "toml").string() << "\"\n";
  std::ofstream(dir / "cfg.json") << nlohmann::json{{"generate", {{"categories", 2}, {"instances", 2}, {"seed", 4},
                                                                  {"out", (dir / "json").string()}}}}
                                         .dump();
  const auto a = run("--config '" + (dir / "cfg.toml").string() + "' generate", dir);
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run("--config '" + (dir / "cfg.json").string() + "' generate", dir);
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(line_value(a.out, "digest"), line_value(b.out, "digest"));
  const auto c = run("--config '" + (dir / "cfg.json").string() + "' generate -s 5 -o '" + (dir / "cli").string() + "'", dir);
  ASSERT_EQ(c.code, 0);
  EXPECT_NE(line_value(c.out, "digest"), line_value(a.out, "digest"));
  EXPECT_EQ(vgforge::dataset::read_manifest(dir / "cli/manifest.json").global_seed, 5u);
}

TEST(Cli, DefaultOutputUnderEnvironmentRoot) {
  fixture::TempDir dir("cli-env");
  const auto r = run("generate -c 2 -m 1 -s 3", dir, "VGFORGE_OUT='" + dir.path().string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "fractal-c2-m1-s3/manifest.json"));
  EXPECT_EQ(run("generate -c 2 -m 1 -s 3", dir, "VGFORGE_OUT=").code, 2);
}

TEST(Cli, RenderDetectsModifiedImage) {
  fixture::TempDir dir("cli-render");
  ASSERT_EQ(run("generate -c 2 -m 2 -s 1 -o '" + (dir / "ds").string() + "'", dir).code, 0);
  std::ofstream(dir / "ds/images/0/1.png", std::ios::binary | std::ios::trunc) << "not a png";
  const auto r = run("render '" + (dir / "ds/manifest.json").string() + "' --record 1", dir);
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(line_value(r.out, "byte-identical"), "false");
  EXPECT_EQ(run("render '" + (dir / "ds/manifest.json").string() + "' --record 99", dir).code, 2);
  EXPECT_EQ(run("verify '" + (dir / "ds/manifest.json").string() + "'", dir).code, 3);
}

TEST(Cli, TrainToyWritesReportAndCheckpoint) {
  fixture::TempDir dir("cli-train");
  ASSERT_EQ(run("generate -c 2 -m 2 -s 1 -o '" + (dir / "ds").string() + "'", dir).code, 0);
  const auto r = run("train-toy '" + (dir / "ds/manifest.json").string() +
                         "' --depth 1 --width 16 --heads 2 --epochs 1 --batch 4 --report '" +
                         (dir / "rep.json").string() + "' --checkpoint '" + (dir / "m.vgck").string() + "'",
                     dir);
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "rep.json");
  const auto rep = nlohmann::json::parse(in);
  EXPECT_EQ(rep["epochs_run"], 1);
  EXPECT_TRUE(fs::exists(dir / "m.vgck"));
  EXPECT_EQ(run("train-toy '" + (dir / "ds/manifest.json").string() + "' --width 1000", dir).code, 2);
}
