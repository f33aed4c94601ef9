/*
 * Copyright (C) 2026 The csreply Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Drives the command-line tool as a subprocess. The binary path comes from the
// CSREPLY_CLI environment variable set by the test runner.

#include <gtest/gtest.h>
#include <netinet/in.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "csreply/codeswitch.h"
#include "csreply/encoder.h"
#include "csreply/util.h"
#include "fixtures.h"
#include "httplib.h"

extern char** environ;

namespace csreply {
namespace {

namespace fs = std::filesystem;

std::string Quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* cli = std::getenv("CSREPLY_CLI");
    if (cli == nullptr) GTEST_SKIP() << "CSREPLY_CLI not set";
    cli_ = cli;
    dir_ = testing::TempDir(std::string("cli-") +
                            ::testing::UnitTest::GetInstance()
                                ->current_test_info()
                                ->name());
    WriteInputs();
  }

  CliResult Run(const std::vector<std::string>& args) {
    std::string cmd = Quote(cli_);
    for (const auto& a : args) cmd += " " + Quote(a);
    const std::string out = Path("stdout.txt"), err = Path("stderr.txt");
    cmd += " >" + Quote(out) + " 2>" + Quote(err);
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = ReadFileOrThrow(out);
    r.err = ReadFileOrThrow(err);
    return r;
  }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  void WriteInputs() {
    const auto data = testing::MakeSeparableCorpus(20, 3, 9);
    WriteCorpusFile(Path("train.jsonl"), data.train);
    WriteCorpusFile(Path("heldout.jsonl"), data.heldout);
    WriteFileOrThrow(Path("table.tsv"), "key0\tkunji0\nr1\taar1\nw5\tvee5\n");
  }

  // synthesize -> train -> build-responses -> eval on the fixture corpus.
  void RunPipeline() {
    ASSERT_EQ(Run({"synthesize", "--in", Path("train.jsonl"), "--table",
                   Path("table.tsv"), "--out", Path("cs.jsonl")})
                  .exit_code,
              0);
    ASSERT_EQ(Run({"train", "--corpus", Path("cs.jsonl"), "--out",
                   Path("model.json"), "--epochs", "3", "--batch-size", "8"})
                  .exit_code,
              0);
    ASSERT_EQ(Run({"build-responses", "--corpus", Path("cs.jsonl"), "--model",
                   Path("model.json"), "--out", Path("responses.json"),
                   "--k-intents", "4"})
                  .exit_code,
              0);
    ASSERT_EQ(Run({"eval", "--corpus", Path("heldout.jsonl"), "--model",
                   Path("model.json"), "--responses", Path("responses.json"),
                   "--out", Path("report.json")})
                  .exit_code,
              0);
  }

  std::string cli_;
  fs::path dir_;
};

size_t CountLines(const std::string& text) {
  return static_cast<size_t>(std::count(text.begin(), text.end(), '\n'));
}

TEST_F(CliTest, SynthesizeDoublesTheRecordCount) {
  const CliResult r = Run({"synthesize", "--in", Path("train.jsonl"), "--table",
                           Path("table.tsv"), "--out", Path("cs.jsonl")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(CountLines(ReadFileOrThrow(Path("cs.jsonl"))),
            2 * CountLines(ReadFileOrThrow(Path("train.jsonl"))));
  const auto stats = nlohmann::json::parse(r.out);
  EXPECT_EQ(stats["input_pairs"].get<size_t>(), 60u);
  const auto meta = nlohmann::json::parse(ReadFileOrThrow(Path("cs.jsonl.meta.json")));
  EXPECT_EQ(meta["config"]["p_switch"], "0.3");
  EXPECT_TRUE(meta["inputs"].contains(Path("table.tsv")));
}

TEST_F(CliTest, SynthesizeWithZeroProbabilityKeepsTexts) {
  ASSERT_EQ(Run({"synthesize", "--in", Path("train.jsonl"), "--table",
                 Path("table.tsv"), "--out", Path("cs.jsonl"), "--p-switch", "0"})
                .exit_code,
            0);
  const auto in = ReadCorpusFile(Path("train.jsonl"));
  const auto out = ReadCorpusFile(Path("cs.jsonl"));
  ASSERT_EQ(out.size(), 2 * in.size());
  for (size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(out[2 * i + 1].message, in[i].message);
    EXPECT_EQ(out[2 * i + 1].reply, in[i].reply);
  }
}

TEST_F(CliTest, MissingTableIsExitOne) {
  const CliResult r = Run({"synthesize", "--in", Path("train.jsonl"), "--table",
                           Path("missing.tsv"), "--out", Path("cs.jsonl")});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("IoError"), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrorsAreExitTwo) {
  EXPECT_EQ(Run({}).exit_code, 2);
  EXPECT_EQ(Run({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(Run({"train", "--corpus", Path("train.jsonl")}).exit_code, 2);
  EXPECT_EQ(Run({"train", "--corpus", Path("train.jsonl"), "--out", Path("m"),
                 "--config", Path("missing.conf")})
                .exit_code,
            2);
  EXPECT_EQ(Run({"--help"}).exit_code, 0);
}

TEST_F(CliTest, BadConfigValueIsExitOne) {
  WriteFileOrThrow(Path("bad.conf"), "alpha = banana\n");
  EXPECT_EQ(Run({"train", "--corpus", Path("train.jsonl"), "--out", Path("m"),
                 "--config", Path("bad.conf")})
                .exit_code,
            1);
}

TEST_F(CliTest, TrainWritesReloadableCheckpointAndLossLog) {
  const CliResult r = Run({"train", "--corpus", Path("train.jsonl"), "--out",
                           Path("model.json"), "--epochs", "1"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Checkpoint ck = LoadCheckpoint(Path("model.json"));
  EXPECT_EQ(ck.meta["config"]["epochs"], "1");
  EXPECT_TRUE(ck.params.AllFinite());
  const std::string log = ReadFileOrThrow(Path("model.json.loss.csv"));
  EXPECT_EQ(CountLines(log), 2u);
}

TEST_F(CliTest, ZeroLearningRateKeepsInitialParams) {
  ASSERT_EQ(Run({"train", "--corpus", Path("train.jsonl"), "--out",
                 Path("model.json"), "--epochs", "2", "--lr", "0"})
                .exit_code,
            0);
  const Checkpoint ck = LoadCheckpoint(Path("model.json"));
  EXPECT_EQ(ck.params, InitParams(ck.vocab.size(), ck.params.dims, 42));
}

TEST_F(CliTest, ConfigFileDrivesEveryStep) {
  WriteFileOrThrow(Path("c.conf"),
                   "d_emb = 8\nd_hid = 8\nd_out = 8\nepochs = 2\nseed = 3\n");
  ASSERT_EQ(Run({"train", "--config", Path("c.conf"), "--corpus",
                 Path("train.jsonl"), "--out", Path("model.json")})
                .exit_code,
            0);
  const Checkpoint ck = LoadCheckpoint(Path("model.json"));
  EXPECT_EQ(ck.params.dims, (Dims{8, 8, 8}));
  EXPECT_EQ(ck.meta["config"]["seed"], "3");
  EXPECT_EQ(ck.meta["config_fingerprint"].get<std::string>().size(), 16u);
}

TEST_F(CliTest, PipelineIsReproducible) {
  RunPipeline();
  const std::vector<std::string> artifacts = {
      "cs.jsonl", "cs.jsonl.meta.json", "model.json", "model.json.loss.csv",
      "responses.json"};
  std::vector<std::string> first;
  for (const auto& a : artifacts) first.push_back(ReadFileOrThrow(Path(a)));
  auto report = nlohmann::json::parse(ReadFileOrThrow(Path("report.json")));
  RunPipeline();
  for (size_t i = 0; i < artifacts.size(); ++i)
    EXPECT_EQ(ReadFileOrThrow(Path(artifacts[i])), first[i]) << artifacts[i];
  auto again = nlohmann::json::parse(ReadFileOrThrow(Path("report.json")));
  for (auto* j : {&report, &again}) {
    j->erase("latency_mean_ms");
    j->erase("latency_p95_ms");
  }
  EXPECT_EQ(report, again);
}

TEST_F(CliTest, EvalBeatsTheRandomBaselineOnTrainingData) {
  RunPipeline();
  ASSERT_EQ(Run({"eval", "--corpus", Path("train.jsonl"), "--model",
                 Path("model.json"), "--responses", Path("responses.json"),
                 "--out", Path("train_report.json")})
                .exit_code,
            0);
  const auto report =
      nlohmann::json::parse(ReadFileOrThrow(Path("train_report.json")));
  EXPECT_GT(report["mrr"].get<double>(),
            report["baseline_mrr_closed_form"].get<double>());
  const std::string csv = ReadFileOrThrow(Path("train_report.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,mrr,latency_mean_ms");
}

TEST_F(CliTest, SuggestPrintsRankedReplies) {
  RunPipeline();
  const CliResult r = Run({"suggest", "--model", Path("model.json"),
                           "--responses", Path("responses.json"), "--message",
                           "key3 w1 w2", "--n", "2"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto out = nlohmann::json::parse(r.out);
  EXPECT_LE(out["suggestions"].size(), 2u);
  EXPECT_FALSE(out["suggestions"].empty());

  const CliResult empty = Run({"suggest", "--model", Path("model.json"),
                               "--responses", Path("responses.json"),
                               "--message", ""});
  EXPECT_EQ(empty.exit_code, 1);
  EXPECT_NE(empty.err.find("EmptyInput"), std::string::npos) << empty.err;
}

int FreePort() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

TEST_F(CliTest, ServeAnswersHealth) {
  RunPipeline();
  const int port = FreePort();
  std::vector<std::string> args = {cli_, "serve", "--model", Path("model.json"),
                                   "--responses", Path("responses.json"),
                                   "--port", std::to_string(port)};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  ASSERT_EQ(posix_spawn(&pid, cli_.c_str(), nullptr, nullptr, argv.data(), environ), 0);

  httplib::Client client("127.0.0.1", port);
  int status = 0;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
  while (std::chrono::steady_clock::now() < deadline) {
    if (auto res = client.Get("/api/health"); res && res->status == 200) {
      status = 200;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ::kill(pid, SIGTERM);
  int wstatus = 0;
  ::waitpid(pid, &wstatus, 0);
  EXPECT_EQ(status, 200);
}

}  // namespace
}  // namespace csreply
