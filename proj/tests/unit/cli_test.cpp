// tests/unit/cli_test.cpp

// Copyright 2026  The npads Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "npads/feature_cache.hpp"
#include "npads/metrics.hpp"
#include "npads/model.hpp"
#include "npads/wav.hpp"
#include "npads_app/app.hpp"
#include "synth.hpp"
#include "temp_dir.hpp"

namespace npads {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct RunResult {
  int code;
  std::string out, err;
};

RunResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = app::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_clips(const fs::path& dir, const testing::SoundTemplate& t, int count, double seconds, Rng& rng) {
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) write_wav(dir / (t.name + std::to_string(i) + ".wav"), testing::render(t, seconds, rng));
}

// Small corpus, feature config and training flags shared by the pipeline tests.
class CliPipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(5);
    write_clips(dir / "normal", testing::normal_template(), 4, 2.0, rng);
    for (const auto& t : testing::various_templates()) write_clips(dir / "various" / t.name, t, 1, 1.0, rng);
    write_clips(dir / "test_normal", testing::normal_template(), 2, 2.0, rng);
    for (const auto& t : testing::anomaly_templates()) write_clips(dir / "anomaly" / t.name, t, 2, 0.5, rng);
    std::ofstream cfg(dir / "run.cfg");
    cfg << "n_mels=8\ncontext=1\nepochs=5\n";
  }

  std::vector<std::string> train_args(const std::string& model, const std::string& mode = "NP") {
    return {"train",         "--config",     (dir / "run.cfg").string(), "--normal", (dir / "normal.npfc").string(),
            "--various",     (dir / "various.npfc").string(),           "--model",  (dir / model).string(),
            "--mode",        mode,           "--epochs",                 "2",        "--batch-size",
            "64",            "--hidden-units", "16",                     "--hidden-layers", "1",
            "--latent-dim",  "4",            "--num-mixtures",           "2",        "--gmm-refresh-every",
            "3",             "--quiet"};
  }

  void extract() {
    ASSERT_EQ(run({"features", "--config", (dir / "run.cfg").string(), "--in", (dir / "normal").string(), "--out",
                   (dir / "normal.npfc").string()})
                  .code,
              0);
    ASSERT_EQ(run({"features", "--config", (dir / "run.cfg").string(), "--in", (dir / "various").string(), "--out",
                   (dir / "various.npfc").string(), "--augment"})
                  .code,
              0);
  }

  TempDir dir;
};

TEST(CliTest, UsageAndUnknownCommand) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"help"}).code, 0);
  const RunResult r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown command"), std::string::npos);
}

TEST(CliTest, MissingRequiredOptionIsUsageError) { EXPECT_EQ(run({"features", "--in", "x"}).code, 1); }

TEST(CliTest, EmptyDirectoryHasNoInputFiles) {
  TempDir dir;
  const RunResult r = run({"features", "--in", dir.path().string(), "--out", (dir / "f.npfc").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no input files"), std::string::npos) << r.err;
}

TEST(CliTest, OneSecondClipGives61FramesAndCacheIsExact) {
  TempDir dir;
  Rng rng(1);
  fs::create_directories(dir / "in");
  write_wav(dir / "in" / "a.wav", testing::render(testing::normal_template(), 1.0, rng));
  ASSERT_EQ(run({"features", "--in", (dir / "in").string(), "--out", (dir / "f.npfc").string(), "--fit-stats",
                 (dir / "s.bin").string()})
                .code,
            0);
  const Mat m = read_feature_cache(dir / "f.npfc");
  EXPECT_EQ(m.rows(), 61);
  EXPECT_EQ(m.cols(), 440);
  const auto index = read_frame_index(fs::path((dir / "f.npfc").string() + ".index.csv"));
  ASSERT_EQ(index.size(), 1u);
  EXPECT_EQ(index[0].num_frames, 61u);
  EXPECT_EQ(read_norm_stats(dir / "s.bin").mean.size(), 440);

  // the cache holds float32: a second write of what was read is byte-identical
  write_feature_cache(dir / "g.npfc", m);
  EXPECT_EQ(slurp(dir / "g.npfc"), slurp(dir / "f.npfc"));
  EXPECT_EQ(read_feature_cache(dir / "g.npfc"), m);
}

TEST(CliTest, CorruptWavIsDataError) {
  TempDir dir;
  {
    std::ofstream f(dir / "bad.wav");
    f << "not a wav file";
  }
  EXPECT_EQ(run({"features", "--in", (dir / "bad.wav").string(), "--out", (dir / "f.npfc").string()}).code, 2);
}

TEST(CliTest, TrainHelpEchoesDefaults) {
  const RunResult r = run({"train", "--help"});
  ASSERT_EQ(r.code, 0);
  auto line_of = [&](const std::string& flag) {
    std::istringstream in(r.out);
    std::string line;
    while (std::getline(in, line))
      if (line.find(flag) != std::string::npos) return line;
    return std::string();
  };
  EXPECT_NE(line_of("--rho ").find("[0.2]"), std::string::npos) << r.out;
  EXPECT_NE(line_of("--lr").find("[0.0001]"), std::string::npos) << r.out;
  EXPECT_NE(line_of("--batch-size").find("[512]"), std::string::npos) << r.out;
  EXPECT_NE(line_of("--num-mixtures").find("[16]"), std::string::npos) << r.out;
  EXPECT_NE(line_of("--epochs").find("[500]"), std::string::npos) << r.out;
}

TEST_F(CliPipelineTest, ModesAcceptedAndBadModeRejected) {
  extract();
  for (const std::string mode : {"AE", "NP", "AUC"}) {
    const RunResult r = run(train_args("m_" + mode + ".npm", mode));
    EXPECT_EQ(r.code, 0) << mode << ": " << r.err;
  }
  EXPECT_EQ(run(train_args("bad.npm", "XX")).code, 1);
  auto args = train_args("nov.npm", "NP");
  args.erase(args.begin() + 5, args.begin() + 7);  // drop --various
  EXPECT_EQ(run(args).code, 1);
}

TEST_F(CliPipelineTest, FlagsOverrideConfigFile) {
  extract();
  ASSERT_EQ(run(train_args("m.npm")).code, 0);
  const TrainedModel m = load_model(dir / "m.npm");
  EXPECT_EQ(m.config.epochs, 2u);  // file says 5
  EXPECT_EQ(m.features.n_mels, 8u);
  EXPECT_EQ(m.features.context, 1u);
  EXPECT_NE(m.provenance.find("hidden_units=16"), std::string::npos);
}

TEST_F(CliPipelineTest, FeatureConfigMismatchIsDataError) {
  extract();
  auto args = train_args("m.npm");
  args.push_back("--n-mels");
  args.push_back("10");
  EXPECT_EQ(run(args).code, 2);
}

TEST_F(CliPipelineTest, SameSeedSameDigest) {
  extract();
  const RunResult a = run(train_args("a.npm"));
  const RunResult b = run(train_args("b.npm"));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(dir / "a.npm"), slurp(dir / "b.npm"));
  auto args = train_args("c.npm");
  args.push_back("--seed");
  args.push_back("3");
  ASSERT_EQ(run(args).code, 0);
  EXPECT_NE(model_digest(load_model(dir / "c.npm")), model_digest(load_model(dir / "a.npm")));
}

TEST_F(CliPipelineTest, DetectSilenceAndCounts) {
  extract();
  ASSERT_EQ(run(train_args("m.npm")).code, 0);
  AudioClip silence;
  silence.samples.assign(16000, 0.0);
  write_wav(dir / "test_normal" / "silence.wav", silence);
  const RunResult r = run({"detect", "--model", (dir / "m.npm").string(), "--input", (dir / "test_normal").string(),
                           "--frame-scores", (dir / "frames").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  ASSERT_EQ(doc["clips"].size(), 3u);
  const TrainedModel m = load_model(dir / "m.npm");
  EXPECT_EQ(doc["threshold"].get<double>(), m.threshold);
  EXPECT_EQ(doc["model_digest"].get<std::string>(), model_digest(m));
  for (const auto& c : doc["clips"]) {
    EXPECT_TRUE(std::isfinite(c["max_score"].get<double>()));
    EXPECT_GE(c["v"].get<double>(), 0.0);
    EXPECT_LE(c["v"].get<double>(), 1.0);
  }
  EXPECT_EQ(std::distance(fs::directory_iterator(dir / "frames"), fs::directory_iterator{}), 3);
}

TEST_F(CliPipelineTest, RhoDeployReproducesStoredThreshold) {
  extract();
  ASSERT_EQ(run(train_args("m.npm")).code, 0);
  const RunResult r = run({"detect", "--model", (dir / "m.npm").string(), "--input",
                           (dir / "test_normal").string(), "--rho-deploy", "0.001"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["threshold"].get<double>(), load_model(dir / "m.npm").threshold);
  const RunResult t = run({"detect", "--model", (dir / "m.npm").string(), "--input", (dir / "test_normal").string(),
                           "--threshold", "1e300"});
  ASSERT_EQ(t.code, 0);
  for (const auto& c : nlohmann::json::parse(t.out)["clips"]) EXPECT_FALSE(c["anomalous"].get<bool>());
  EXPECT_EQ(run({"detect", "--model", (dir / "m.npm").string(), "--input", (dir / "test_normal").string(),
                 "--threshold", "1", "--rho-deploy", "0.1"})
                .code,
            1);
}

TEST_F(CliPipelineTest, EvalDefaultsAndJsonReload) {
  extract();
  ASSERT_EQ(run(train_args("m.npm")).code, 0);
  const RunResult r = run({"eval", "--model", (dir / "m.npm").string(), "--normal-dir",
                           (dir / "test_normal").string(), "--anomaly-dir", (dir / "anomaly").string(), "--out",
                           (dir / "report.json").string(), "--roc-dir", (dir / "roc").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string json = slurp(dir / "report.json");
  const auto reports = reports_from_json(json);
  ASSERT_EQ(reports.size(), 4u);
  EXPECT_EQ(reports[0].anr_db, -15.0);
  EXPECT_EQ(reports[1].anr_db, -20.0);
  EXPECT_EQ(reports[2].anr_db, -25.0);
  EXPECT_EQ(reports[3].condition, "pooled");
  for (const auto& rep : reports) {
    EXPECT_EQ(rep.rho, 0.05);
    EXPECT_EQ(rep.pauc_p, 0.1);
    EXPECT_EQ(rep.num_anomalous, rep.num_normal);
  }
  EXPECT_EQ(reports[0].category, "rattle+whine");
  EXPECT_EQ(reports_to_json(reports), json);
  EXPECT_TRUE(fs::exists(dir / "roc" / "roc_anr-15.csv"));
  EXPECT_TRUE(fs::exists(dir / "roc" / "roc_pooled.csv"));

  // same seed, same bytes
  ASSERT_EQ(run({"eval", "--model", (dir / "m.npm").string(), "--normal-dir", (dir / "test_normal").string(),
                 "--anomaly-dir", (dir / "anomaly").string(), "--out", (dir / "report2.json").string()})
                .code,
            0);
  EXPECT_EQ(slurp(dir / "report2.json"), json);
}

TEST_F(CliPipelineTest, SimulateWritesRequestedCount) {
  extract();
  ASSERT_EQ(run(train_args("m.npm")).code, 0);
  const RunResult r = run({"simulate", "--model", (dir / "m.npm").string(), "--count", "10", "--out",
                           (dir / "sim.csv").string(), "--latents", (dir / "z.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(dir / "sim.csv");
  std::string line;
  int lines = 0;
  while (std::getline(f, line)) ++lines;
  EXPECT_GE(lines, 10);
  EXPECT_LE(lines, 11);
}

TEST_F(CliPipelineTest, MissingModelIsDataError) {
  EXPECT_EQ(run({"detect", "--model", (dir / "none.npm").string(), "--input", (dir / "test_normal").string()}).code,
            2);
}

}  // namespace
}  // namespace npads
