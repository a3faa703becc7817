// Copyright 2026-present the linklab project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <cstdlib>

#include "json.hpp"
#include "linklab/cli.hpp"
#include "linklab/embedding_io.hpp"
#include "linklab/io.hpp"
#include "linklab/toyland.hpp"
#include "linklab/trainer.hpp"
#include "test_util.hpp"

namespace linklab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = run_cli(args);
  std::cout.flush();
  std::cerr.flush();
  Run r{code, ::testing::internal::GetCapturedStdout(), ::testing::internal::GetCapturedStderr()};
  return r;
}

std::string p(const fs::path& path) { return path.string(); }

// Toyland written to disk and ingested into kb/train/eval stores.
class CliCorpus : public ::testing::Test {
 protected:
  void SetUp() override {
    ToylandConfig toy;
    toy.seed = 77;
    toy.n_entities = 24;
    toy.mentions_per_entity = 6;
    toy.train_per_entity = 4;
    toy.homonym_pairs = 0;
    write_toyland(generate_toyland(toy), dir_ / "raw");
    for (const auto* name : {"kb", "train", "eval"}) {
      const auto r = cli({"ingest", p(dir_ / "raw" / (std::string(name) + ".jsonl")), "-l", "tr", "-o",
                          p(dir_ / name)});
      ASSERT_EQ(r.code, kExitOk) << r.err;
    }
  }

  fs::path write_config(const std::string& name, const std::string& extra) {
    const fs::path path = dir_ / name;
    io::write_file(path, "kb = " + p(dir_ / "kb") + "\ntrain_mentions = " + p(dir_ / "train") +
                             "\neval_mentions = " + p(dir_ / "eval") +
                             "\nbatch_size = 4\nneg = 3\nvocab_size = 4096\ndim = 8\nlr = 0.01\n"
                             "steps_round1 = 12\nsteps_later = 8\nretrieval_k = 8\nn_partitions = 2\n"
                             "default_probes = 1\n" +
                             extra);
    return path;
  }

  testing::TempDir dir_;
};

TEST_F(CliCorpus, IngestWritesStoresAndManifest) {
  for (const auto* f : {"entities.jsonl", "mentions.jsonl", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "train" / f)) << f;
  }
  const json m = json::parse(io::read_file(dir_ / "train" / "manifest.json"));
  EXPECT_EQ(m["command"], "ingest");
  EXPECT_EQ(m["store"]["language"], "tr");
  EXPECT_EQ(m["counts"]["mentions"], 24 * 4);
  EXPECT_EQ(m["inputs"].size(), 1u);
  EXPECT_TRUE(m.contains("started"));
  EXPECT_TRUE(m.contains("finished"));
}

TEST(CliIngest, MissingFileLeavesNoOutputs) {
  testing::TempDir dir;
  const auto r = cli({"ingest", p(dir / "absent.jsonl"), "-l", "en", "-o", p(dir / "store")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(fs::exists(dir / "store"));
  EXPECT_FALSE(r.err.empty());
}

TEST(CliIngest, CorruptArchiveLeavesNoOutputs) {
  testing::TempDir dir;
  io::write_file(dir / "kb.jsonl.gz", "this is not gzip");
  const auto r = cli({"ingest", p(dir / "kb.jsonl.gz"), "-l", "en", "-o", p(dir / "store")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(fs::exists(dir / "store"));
}

TEST(CliIngest, MalformedLinesAreCountedNotFatal) {
  testing::TempDir dir;
  io::write_file(dir / "kb.jsonl", "{not json\n{\"qid\": \"Q1\"}\n{\"qid\": \"Q2\", \"label\": \"B\"}\n");
  const auto r = cli({"ingest", p(dir / "kb.jsonl"), "-l", "en", "-o", p(dir / "store")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("skipped_lines\t2\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("entities\t1\n"), std::string::npos) << r.out;
}

TEST(CliIngest, EmptySurfaceLinkIsNotCounted) {
  testing::TempDir dir;
  const std::string lines =
      R"({"qid":"Q1","label":"Paris","wiki":{"text":"Paris is big. Lyon too.","links":[{"start":0,"end":5,"qid":"Q1"},{"start":14,"end":18,"qid":"Q2"},{"start":6,"end":6,"qid":"Q3"}]}})"
      "\n"
      R"({"qid":"Q2","label":"Lyon","wiki":{"text":"Lyon near Paris.","links":[{"start":10,"end":15,"qid":"Q1"}]}})"
      "\n";
  io::write_file(dir / "kb.jsonl", lines);
  std::size_t links = 0;
  std::istringstream in(lines);
  for (std::string line; std::getline(in, line);) links += json::parse(line)["wiki"]["links"].size();
  const auto r = cli({"ingest", p(dir / "kb.jsonl"), "-l", "fr", "-o", p(dir / "store")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("mentions\t" + std::to_string(links - 1) + "\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("dropped_empty\t1\n"), std::string::npos);
}

TEST(CliIngest, DefaultsToDataDir) {
  testing::TempDir dir;
  io::write_file(dir / "kb.jsonl", R"({"qid":"Q1","label":"A","wiki":{"text":"A b"}})" "\n");
  ::setenv("LINKLAB_DATA_DIR", p(dir.path()).c_str(), 1);
  const auto r = cli({"ingest", "kb.jsonl", "-l", "de"});
  ::unsetenv("LINKLAB_DATA_DIR");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "de" / "entities.jsonl"));
}

TEST(CliUsage, BadArgumentsExitTwo) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"link"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(CliCorpus, AliasBaselineOnSeenMentionsIsPerfect) {
  const auto r = cli({"baseline", "--mode", "alias", "--train", p(dir_ / "train"), "--eval", p(dir_ / "train")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, "tr\talias\t1\t1.000000\t96\ntr\talias\t10\t1.000000\t96\n");
}

TEST_F(CliCorpus, BaselineModeInputMismatch) {
  EXPECT_EQ(cli({"baseline", "--mode", "alias", "--eval", p(dir_ / "eval")}).code, kExitUsage);
  EXPECT_EQ(cli({"baseline", "--mode", "dense", "--train", p(dir_ / "train"), "--eval", p(dir_ / "eval")}).code,
            kExitUsage);
  EXPECT_EQ(cli({"baseline", "--mode", "fuzzy", "--train", p(dir_ / "train"), "--eval", p(dir_ / "eval")}).code,
            kExitUsage);
}

TEST_F(CliCorpus, TableThenLink) {
  ASSERT_EQ(cli({"table", "--mentions", p(dir_ / "train"), "-o", p(dir_ / "t.tsv")}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "t.tsv.manifest.json"));
  const std::string first_line = io::read_file(dir_ / "t.tsv").substr(0, io::read_file(dir_ / "t.tsv").find('\n'));
  const std::string alias = first_line.substr(0, first_line.find('\t'));
  const auto hit = cli({"link", alias, "--table", p(dir_ / "t.tsv")});
  ASSERT_EQ(hit.code, kExitOk) << hit.err;
  EXPECT_FALSE(hit.out.empty());
  const auto fuzzy = cli({"link", alias + "'da", "--table", p(dir_ / "t.tsv"), "--mode", "string", "-k", "1"});
  ASSERT_EQ(fuzzy.code, kExitOk) << fuzzy.err;
  EXPECT_NE(fuzzy.out.find(alias), std::string::npos);
}

TEST_F(CliCorpus, DenseBaselineIsDeterministic) {
  TrainConfig cfg;
  cfg.vocab_size = 4096;
  cfg.dim = 8;
  save_params(dir_ / "params.bin", initial_state(cfg).params);
  ASSERT_EQ(cli({"table", "--mentions", p(dir_ / "train"), "-o", p(dir_ / "t.tsv")}).code, kExitOk);
  ASSERT_EQ(cli({"embed-kb", "--params", p(dir_ / "params.bin"), "--table", p(dir_ / "t.tsv"), "-o",
                 p(dir_ / "aliases.tsv")})
                .code,
            kExitOk);
  const std::vector<std::string> args = {"baseline", "--mode", "dense", "--embeddings", p(dir_ / "aliases.tsv"),
                                         "--params", p(dir_ / "params.bin"), "--eval", p(dir_ / "eval")};
  const auto a = cli(args);
  const auto b = cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("tr\tdense\t10\t"), std::string::npos);
}

TEST_F(CliCorpus, TrainRejectsUnknownKeyByName) {
  const auto cfg = write_config("bad.cfg", "out_dir = " + p(dir_ / "run") + "\nlearning_rate = 0.1\n");
  const auto r = cli({"--config", p(cfg), "train"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("learning_rate"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "run"));
}

TEST_F(CliCorpus, TrainRequiresPaths) {
  io::write_file(dir_ / "empty.cfg", "rounds = 1\n");
  EXPECT_EQ(cli({"--config", p(dir_ / "empty.cfg"), "train"}).code, kExitUsage);
}

std::string hash_tree(const fs::path& dir) {
  std::string all;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) all += e.path().string() + "\n" + io::read_file(e.path());
  }
  return std::to_string(std::hash<std::string>{}(all));
}

json without_timestamps(json m) {
  m.erase("started");
  m.erase("finished");
  return m;
}

TEST_F(CliCorpus, TrainWritesArtifactsAndEchoesDefaults) {
  const std::string before = hash_tree(dir_ / "kb") + hash_tree(dir_ / "train") + hash_tree(dir_ / "eval");
  const auto cfg = write_config("run.cfg", "out_dir = " + p(dir_ / "run") + "\n");
  const auto r = cli({"--config", p(cfg), "--set", "rounds=2", "train"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const auto* f : {"manifest.json", "epochs/round_1.bin.gz", "epochs/round_2.bin.gz", "reports/round_0.tsv",
                        "reports/round_2.tsv", "checkpoints/params_round_2.bin", "checkpoints/state.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  }
  const json m = json::parse(io::read_file(dir_ / "run" / "manifest.json"));
  EXPECT_EQ(m["config"]["logit_multiplier"], "50");
  EXPECT_EQ(m["config"]["context_size"], "64");
  EXPECT_EQ(m["config"]["rounds"], "2");
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(r.out, io::read_file(dir_ / "run" / "reports" / "round_2.tsv"));
  EXPECT_EQ(before, hash_tree(dir_ / "kb") + hash_tree(dir_ / "train") + hash_tree(dir_ / "eval"));

  // Rerunning into a fresh directory reproduces everything but timestamps.
  const json first = without_timestamps(m);
  const std::string first_epoch = io::read_file(dir_ / "run" / "epochs" / "round_2.bin.gz");
  fs::remove_all(dir_ / "run");
  ASSERT_EQ(cli({"--config", p(cfg), "--set", "rounds=2", "train"}).code, kExitOk);
  EXPECT_EQ(without_timestamps(json::parse(io::read_file(dir_ / "run" / "manifest.json"))), first);
  EXPECT_EQ(io::read_file(dir_ / "run" / "epochs" / "round_2.bin.gz"), first_epoch);
}

TEST_F(CliCorpus, ManifestEchoesTableDefaults) {
  const auto cfg = write_config("d.cfg", "out_dir = " + p(dir_ / "run") + "\nrounds = 0\n");
  ASSERT_EQ(cli({"--config", p(cfg), "train"}).code, kExitOk);
  const json m = json::parse(io::read_file(dir_ / "run" / "manifest.json"));
  EXPECT_EQ(m["config"]["retrieval_k"], "8");
  io::write_file(dir_ / "paths.cfg", "kb = " + p(dir_ / "kb") + "\ntrain_mentions = " + p(dir_ / "train") +
                                         "\neval_mentions = " + p(dir_ / "eval") + "\nout_dir = " +
                                         p(dir_ / "run0") + "\nrounds = 0\nvocab_size = 4096\ndim = 8\n");
  ASSERT_EQ(cli({"--config", p(dir_ / "paths.cfg"), "train"}).code, kExitOk);
  const json d = json::parse(io::read_file(dir_ / "run0" / "manifest.json"));
  EXPECT_EQ(d["config"]["logit_multiplier"], "50");
  EXPECT_EQ(d["config"]["context_size"], "64");
  EXPECT_EQ(d["config"]["retrieval_k"], "100");
  EXPECT_EQ(d["config"]["lr"], "1e-05");
}

TEST_F(CliCorpus, ResumeMatchesUninterruptedRun) {
  const auto full_cfg = write_config("full.cfg", "out_dir = " + p(dir_ / "full") + "\nrounds = 3\n");
  ASSERT_EQ(cli({"--config", p(full_cfg), "train"}).code, kExitOk);
  const auto part_cfg = write_config("part.cfg", "out_dir = " + p(dir_ / "part") + "\n");
  ASSERT_EQ(cli({"--config", p(part_cfg), "--set", "rounds=1", "train"}).code, kExitOk);
  const auto resumed = cli({"--config", p(part_cfg), "--set", "rounds=3", "train"});
  ASSERT_EQ(resumed.code, kExitOk) << resumed.err;
  EXPECT_NE(resumed.err.find("resuming after round 1"), std::string::npos);
  for (std::size_t r = 0; r <= 3; ++r) {
    const std::string name = "reports/round_" + std::to_string(r) + ".tsv";
    EXPECT_EQ(io::read_file(dir_ / "part" / name), io::read_file(dir_ / "full" / name)) << name;
  }
  for (std::size_t r = 1; r <= 3; ++r) {
    const std::string name = "epochs/round_" + std::to_string(r) + ".bin.gz";
    EXPECT_EQ(io::read_file(dir_ / "part" / name), io::read_file(dir_ / "full" / name)) << name;
  }
  EXPECT_EQ(io::read_file(dir_ / "part/checkpoints/params_round_3.bin"),
            io::read_file(dir_ / "full/checkpoints/params_round_3.bin"));
  // A finished run is a no-op; a changed config is refused.
  EXPECT_EQ(cli({"--config", p(part_cfg), "--set", "rounds=3", "train"}).code, kExitOk);
  EXPECT_EQ(cli({"--config", p(part_cfg), "--set", "rounds=3", "--set", "lr=0.5", "train"}).code, kExitUsage);
}

TEST_F(CliCorpus, EpochAndEvalCommands) {
  const auto cfg = write_config("e.cfg", "");
  ASSERT_EQ(cli({"--config", p(cfg), "epoch", "--round", "1", "-o", p(dir_ / "r1.bin.gz")}).code, kExitOk);
  const auto inspect = cli({"epoch", "--inspect", p(dir_ / "r1.bin.gz")});
  ASSERT_EQ(inspect.code, kExitOk) << inspect.err;
  EXPECT_NE(inspect.out.find("batch_size\t4\n"), std::string::npos) << inspect.out;

  TrainConfig tc;
  tc.vocab_size = 4096;
  tc.dim = 8;
  save_params(dir_ / "params.bin", initial_state(tc).params);
  ASSERT_EQ(cli({"index", "--params", p(dir_ / "params.bin"), "--kb", p(dir_ / "kb"), "-o", p(dir_ / "idx")}).code,
            kExitOk);
  const auto via_index = cli({"eval", "--params", p(dir_ / "params.bin"), "--eval", p(dir_ / "eval"), "--index",
                              p(dir_ / "idx")});
  const auto via_kb =
      cli({"eval", "--params", p(dir_ / "params.bin"), "--eval", p(dir_ / "eval"), "--kb", p(dir_ / "kb")});
  ASSERT_EQ(via_index.code, kExitOk) << via_index.err;
  ASSERT_EQ(via_kb.code, kExitOk) << via_kb.err;
  EXPECT_EQ(via_index.out, via_kb.out);
  EXPECT_EQ(cli({"eval", "--params", p(dir_ / "params.bin"), "--eval", p(dir_ / "eval"), "--kb", p(dir_ / "kb"),
                 "--kb-mode", "contexts"})
                .code,
            kExitUsage);
}

TEST_F(CliCorpus, BoundReportsCoverage) {
  const auto r = cli({"bound", "--eval", p(dir_ / "eval"), "--kb", p(dir_ / "kb")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("recall_upper_bound\t1.000000\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("kb_size\t24\n"), std::string::npos) << r.out;
}

}  // namespace
}  // namespace linklab
