#include <filesystem>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rallycast/bleu.hpp"
#include "rallycast/error.hpp"
#include "rallycast/io.hpp"

namespace fs = std::filesystem;
using oracle::quote;
using oracle::run;

namespace {

const std::string kCli = quote(RALLYCAST_CLI);

/// Small simulated bundle written by the CLI itself.
void simulate(const fs::path& dir, const std::string& extra = "") {
  const auto r = run(kCli + " --seed 3 simulate --out " + quote(dir) +
                     " --train-matches 30 --corpus-size 60 --test-matches 3 " + extra);
  ASSERT_EQ(r.exit_code, 0) << r.output;
}

} // namespace

TEST(Cli, ExitCodeCategories) {
  EXPECT_EQ(rallycast::UsageError("x").exit_code(), 1);
  EXPECT_EQ(rallycast::DataError("x").exit_code(), 2);
  EXPECT_EQ(rallycast::NumericalError("x").exit_code(), 3);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(kCli).exit_code, 1);
  EXPECT_EQ(run(kCli + " no-such-command").exit_code, 1);
  EXPECT_EQ(run(kCli + " build-dict").exit_code, 1); // missing required options
  EXPECT_EQ(run(kCli + " ngram-stats --corpus x --step 0").exit_code, 1);
  EXPECT_EQ(run("RALLYCAST_SEED=abc " + kCli + " ablation --runs 1").exit_code, 1);
  EXPECT_EQ(run(kCli + " --help").exit_code, 0);
}

TEST(Cli, DataErrorsExitTwo) {
  oracle::TempDir dir("cli-data");
  EXPECT_EQ(run(kCli + " build-dict --corpus " + quote(dir.path / "missing.txt") + " --out " +
                quote(dir.path / "d.json")).exit_code, 2);
  rallycast::io::write_file(dir.path / "empty.txt", "\n\n");
  EXPECT_EQ(run(kCli + " fit-lsi --corpus " + quote(dir.path / "empty.txt") + " --out " +
                quote(dir.path / "m.lsi")).exit_code, 2);
  rallycast::io::write_file(dir.path / "bad.jsonl", "{\"video_id\": 3}\n");
  EXPECT_EQ(run(kCli + " evaluate --input " + quote(dir.path / "bad.jsonl")).exit_code, 2);
}

TEST(Cli, CorpusToolsProduceArtifacts) {
  oracle::TempDir dir("cli-corpus");
  rallycast::io::write_file(dir.path / "c.txt", "Federer hits a forehand\nNadal slices a backhand\nFederer lobs\n");
  const auto c = quote(dir.path / "c.txt");
  auto r = run(kCli + " build-dict --corpus " + c + " --out " + quote(dir.path / "d.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(rallycast::io::read_json(dir.path / "d.json").at("num_docs"), 3);
  r = run(kCli + " ngram-stats --corpus " + c + " -n 1 --checkpoints 1 3");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.output, "corpus_size,unique_count\n1,4\n3,8\n");
  r = run(kCli + " fit-lsi --corpus " + c + " -k 2 --out " + quote(dir.path / "m.lsi"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(rallycast::io::read_file(dir.path / "m.lsi").rfind("rallycast-lsi 1\n", 0), 0u);
  rallycast::io::write_file(dir.path / "q.json", R"({"phrases": ["hits a forehand"], "players": ["Federer"]})");
  r = run(kCli + " retrieve --corpus " + c + " --query " + quote(dir.path / "q.json") + " -k 2 --lsi-k 2" +
          " --model-cache " + quote(dir.path / "cache") + " --out " + quote(dir.path / "r.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto res = rallycast::io::read_json(dir.path / "r.json");
  ASSERT_EQ(res.size(), 2u);
  EXPECT_EQ(res[0].at("text"), "Federer hits a forehand");
  EXPECT_TRUE(fs::exists(dir.path / "cache" / "lsi.model"));
}

TEST(Cli, EvaluateWritesMetricsCsv) {
  oracle::TempDir dir("cli-eval");
  rallycast::io::write_file(dir.path / "in.jsonl",
                            R"({"video_id": "v1", "candidates": ["the cat sat"], "reference": "the cat sat"})" "\n");
  const auto r = run(kCli + " evaluate --input " + quote(dir.path / "in.jsonl") + " --max-n 2");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.output, "video_id,B1,B2,p1,p2\nv1,1.000000,1.000000,1.000000,1.000000\n");
}

TEST(Cli, SeedEnvironmentVariableMatchesFlag) {
  oracle::TempDir a("cli-seed-a"), b("cli-seed-b");
  ASSERT_EQ(run(kCli + " --seed 11 simulate --out " + quote(a.path) + " --train-matches 5 --corpus-size 10").exit_code, 0);
  ASSERT_EQ(run("RALLYCAST_SEED=11 " + kCli + " simulate --out " + quote(b.path) +
                " --train-matches 5 --corpus-size 10").exit_code, 0);
  EXPECT_EQ(rallycast::io::read_file(a.path / "corpus.txt"), rallycast::io::read_file(b.path / "corpus.txt"));
  EXPECT_EQ(rallycast::io::read_file(a.path / "train_labels.csv"),
            rallycast::io::read_file(b.path / "train_labels.csv"));
}

TEST(Cli, PipelineIsDeterministicAcrossRunsAndJobs) {
  oracle::TempDir dir("cli-pipe");
  simulate(dir.path);
  const auto cfg = quote(dir.path / "config.json");
  auto r = run(kCli + " pipeline --config " + cfg + " --out-dir " + quote(dir.path / "o1"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  r = run(kCli + " pipeline --config " + cfg + " --out-dir " + quote(dir.path / "o2"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  r = run(kCli + " pipeline --config " + cfg + " --jobs 3 --out-dir " + quote(dir.path / "o3"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const char* f : {"results.json", "metrics.csv"}) {
    const auto first = rallycast::io::read_file(dir.path / "o1" / f);
    EXPECT_EQ(first, rallycast::io::read_file(dir.path / "o2" / f)) << f;
    EXPECT_EQ(first, rallycast::io::read_file(dir.path / "o3" / f)) << f;
  }
  const auto results = rallycast::io::read_json(dir.path / "o1" / "results.json");
  ASSERT_EQ(results.size(), 3u);
  for (const auto& v : results) EXPECT_EQ(v.at("descriptions").size(), 5u);
}

TEST(Cli, PipelineFailureLeavesNoOutputs) {
  oracle::TempDir dir("cli-fail");
  simulate(dir.path);
  const auto out = dir.path / "out";
  ASSERT_EQ(run(kCli + " pipeline --config " + quote(dir.path / "config.json")).exit_code, 0);
  ASSERT_TRUE(fs::exists(out / "results.json"));
  fs::remove(dir.path / "corpus.txt");
  EXPECT_EQ(run(kCli + " pipeline --config " + quote(dir.path / "config.json")).exit_code, 2);
  EXPECT_FALSE(fs::exists(out / "results.json"));
  EXPECT_FALSE(fs::exists(out / "metrics.csv"));
  EXPECT_EQ(run(kCli + " pipeline --config " + quote(dir.path / "missing.json")).exit_code, 1);
}

TEST(Cli, PipelineFlagVariants) {
  oracle::TempDir dir("cli-flags");
  simulate(dir.path);
  const auto r = run(kCli + " pipeline --config " + quote(dir.path / "config.json") +
                     " --no-smoothing --lexical --template --lsi-k 4");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto results = rallycast::io::read_json(dir.path / "out" / "results.json");
  EXPECT_TRUE(results[0].contains("template"));
}

TEST(Cli, CalibrateWritesModels) {
  oracle::TempDir dir("cli-cal");
  simulate(dir.path);
  const auto r = run(kCli + " calibrate --lexicon " + quote(dir.path / "lexicon.json") + " --train-scores " +
                     quote(dir.path / "train") + " --train-labels " + quote(dir.path / "train_labels.csv") +
                     " --platt-out " + quote(dir.path / "p.json") + " --transitions-out " + quote(dir.path / "t.json") +
                     " --apply " + quote(dir.path / "test" / "test0000.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(rallycast::io::read_json(dir.path / "p.json").at("upper").size(), 8u);
  EXPECT_EQ(rallycast::io::read_json(dir.path / "t.json").at("p11").size(), 8u);
}

TEST(Cli, BuildDictIsDeterministicAndReportsVocabulary) {
  oracle::TempDir dir("cli-dict");
  std::string lines;
  for (int i = 0; i < 100; ++i) lines += "player" + std::to_string(i % 13) + " hits shot" + std::to_string(i % 7) + "\n";
  rallycast::io::write_file(dir.path / "c.txt", lines);
  const auto c = quote(dir.path / "c.txt");
  const auto r1 = run(kCli + " build-dict --corpus " + c + " --out " + quote(dir.path / "a.json"));
  const auto r2 = run(kCli + " build-dict --corpus " + c + " --out " + quote(dir.path / "b.json"));
  ASSERT_EQ(r1.exit_code, 0) << r1.output;
  EXPECT_EQ(rallycast::io::read_file(dir.path / "a.json"), rallycast::io::read_file(dir.path / "b.json"));
  const auto dict = rallycast::io::read_json(dir.path / "a.json");
  EXPECT_EQ(dict.at("num_docs"), 100);
  EXPECT_NE(r1.output.find("vocabulary " + std::to_string(dict.at("terms").size())), std::string::npos) << r1.output;
}

TEST(Cli, SimulateWithSameSeedWritesIdenticalBundles) {
  oracle::TempDir a("cli-sim-a"), b("cli-sim-b");
  for (const auto* d : {&a, &b})
    ASSERT_EQ(run(kCli + " simulate --seed 7 --out " + quote(d->path) + " --train-matches 10 --corpus-size 20").exit_code, 0);
  for (const char* f : {"corpus.txt", "train_labels.csv", "test_labels.csv", "references.jsonl", "lexicon.json",
                        "config.json", "sim_config.json", "test/test0000.json", "train/train0003.json"})
    EXPECT_EQ(rallycast::io::read_file(a.path / f), rallycast::io::read_file(b.path / f)) << f;
}

TEST(Cli, EvaluateMatchesDirectBleu) {
  oracle::TempDir dir("cli-eval2");
  const std::vector<std::string> cands{"federer hits a forehand down the line", "nadal lobs", "federer hits"};
  const std::string ref = "federer hits a forehand across the court";
  rallycast::io::Json line{{"video_id", "v"}, {"candidates", cands}, {"reference", ref}};
  rallycast::io::write_file(dir.path / "in.jsonl", line.dump() + "\n");
  const auto r = run(kCli + " evaluate --input " + quote(dir.path / "in.jsonl"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string want = rallycast::io::metrics_header() + rallycast::io::metrics_row("v", rallycast::evaluate_topk(cands, ref));
  EXPECT_EQ(r.output, want);
}
