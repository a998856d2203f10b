// Copyright 2026 The fadx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "fadx/cli.hpp"
#include "fadx/digest.hpp"
#include "fadx/nncore.hpp"
#include "fadx/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run fadx_run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = fadx::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "fadx_cli_XXXXXX").string();
    path_ = mkdtemp(pattern.data());
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

json load(const std::string& path) { return json::parse(fadx::read_file(path)); }

}  // namespace

TEST_CASE("help, version and bad flags") {
  CHECK(fadx_run({"--help"}).code == 0);
  CHECK(fadx_run({"--version"}).out.find(fadx::cli::kVersion) != std::string::npos);
  CHECK(fadx_run({"--no-such-flag"}).code == fadx::cli::kExitInput);
  CHECK(fadx_run({}).code == fadx::cli::kExitInput);
}

TEST_CASE("tool binary reports exit codes") {
  const int status = std::system((std::string(FADX_TOOL) + " match --lexicon /nonexistent --mentions /x > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 2);
}

TEST_CASE("train on planted data") {
  TempDir dir;
  REQUIRE(fadx_run({"--seed", "3", "--out", dir / "data.csv", "gen"}).code == 0);
  CHECK(fs::exists(dir / "data.meta.json"));
  const auto r = fadx_run({"--seed", "3", "--out", dir / "model.json", "train", "--data", dir / "data.csv"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "model.loss.csv"));
  const json manifest = load(dir / "model.manifest.json");
  CHECK(manifest["format"] == "fadx-run-manifest");
  CHECK(manifest["results"]["final_train_accuracy"].get<double>() >= 0.9);
  CHECK(manifest["inputs"].size() == 2);
  CHECK(manifest["inputs"][0]["sha256"].get<std::string>().size() == 64);
}

TEST_CASE("train with zero epochs keeps the initialization") {
  TempDir dir;
  REQUIRE(fadx_run({"--out", dir / "data.csv", "gen", "--instances", "30", "--features", "5"}).code == 0);
  fadx::write_file(dir / "cfg.json", R"({"epochs": 0, "hidden": [4], "seed": 11})");
  REQUIRE(fadx_run({"--out", dir / "m.json", "train", "--data", dir / "data.csv", "--config", dir / "cfg.json"}).code == 0);
  const auto model = fadx::nn::parse_network(fadx::read_file(dir / "m.json"));
  const auto init = fadx::nn::DenseNetwork::initialize({5, {4}, 3}, fadx::mix_seed(11, 0));
  CHECK(model.layers() == init.layers());
}

TEST_CASE("train input errors") {
  TempDir dir;
  fadx::write_file(dir / "nolabel.csv", "a,b\n1,2\n3,4\n");
  const auto r = fadx_run({"--out", dir / "m.json", "train", "--data", dir / "nolabel.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 1") != std::string::npos);
  fadx::write_file(dir / "bad.csv", "a,label\n1,x\n2,y\noops,x\n");
  const auto bad = fadx_run({"--out", dir / "m.json", "train", "--data", dir / "bad.csv"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 4") != std::string::npos);
  fadx::write_file(dir / "ok.csv", "a,label\n1,x\n2,y\n");
  fadx::write_file(dir / "cfg.json", R"({"epochs": 1, "typo": 3})");
  CHECK(fadx_run({"--out", dir / "m.json", "train", "--data", dir / "ok.csv", "--config", dir / "cfg.json"}).code == 2);
}

TEST_CASE("numeric divergence exits 3") {
  TempDir dir;
  REQUIRE(fadx_run({"--out", dir / "data.csv", "gen", "--instances", "60", "--features", "5"}).code == 0);
  fadx::write_file(dir / "cfg.json", R"({"epochs": 5, "learning_rate": 1e300})");
  CHECK(fadx_run({"--out", dir / "m.json", "train", "--data", dir / "data.csv", "--config", dir / "cfg.json"}).code == 3);
}

TEST_CASE("attribute, then fad from files") {
  TempDir dir;
  REQUIRE(fadx_run({"--out", dir / "data.csv", "gen", "--instances", "45", "--features", "8"}).code == 0);
  fadx::write_file(dir / "cfg.json", R"({"epochs": 5, "hidden": [8]})");
  REQUIRE(fadx_run({"--out", dir / "m.json", "train", "--data", dir / "data.csv", "--config", dir / "cfg.json"}).code == 0);

  const auto r = fadx_run({"--out", dir / "a.json", "attribute", "--model", dir / "m.json", "--data",
                           dir / "data.csv", "--method", "ig,shapley", "--steps", "64"});
  REQUIRE(r.code == 0);
  const json doc = load(dir / "a.json");
  CHECK(doc["rows"].size() == 90);
  CHECK(doc["rows"][0]["method"] == "ig");
  CHECK(doc["rows"][0]["metadata"].contains("completeness_gap"));
  CHECK(doc["rows"][1]["metadata"]["mode"] == "exact");
  CHECK(doc["rows"][1]["metadata"]["auto_selected"] == true);

  const auto f = fadx_run({"--out", dir / "fad", "fad", "--model", dir / "m.json", "--data", dir / "data.csv",
                           "--attributions", dir / "a.json"});
  REQUIRE(f.code == 0);
  const json report = load(dir / "fad/report.json");
  CHECK(report["nauc"]["beta"] == 20.0);
  CHECK(fs::exists(dir / "fad/nauc.csv"));
  CHECK(fs::exists(dir / "fad/plots/class0.svg"));
}

TEST_CASE("sampled attribution is byte-identical per seed") {
  TempDir dir;
  REQUIRE(fadx_run({"--out", dir / "data.csv", "gen", "--instances", "12", "--features", "20"}).code == 0);
  fadx::write_file(dir / "cfg.json", R"({"epochs": 2, "hidden": [4]})");
  REQUIRE(fadx_run({"--out", dir / "m.json", "train", "--data", dir / "data.csv", "--config", dir / "cfg.json"}).code == 0);
  for (const char* name : {"a1.json", "a2.json"}) {
    REQUIRE(fadx_run({"--seed", "9", "--out", dir / name, "attribute", "--model", dir / "m.json", "--data",
                      dir / "data.csv", "--method", "shapley", "--permutations", "16"}).code == 0);
  }
  CHECK(fadx::read_file(dir / "a1.json") == fadx::read_file(dir / "a2.json"));
  CHECK(load(dir / "a1.json")["rows"][0]["metadata"]["mode"] == "sampled");
}

TEST_CASE("attribute rejects a dimension mismatch") {
  TempDir dir;
  REQUIRE(fadx_run({"--out", dir / "d5.csv", "gen", "--instances", "30", "--features", "5"}).code == 0);
  REQUIRE(fadx_run({"--out", dir / "d6.csv", "gen", "--instances", "30", "--features", "6"}).code == 0);
  fadx::write_file(dir / "cfg.json", R"({"epochs": 1})");
  REQUIRE(fadx_run({"--out", dir / "m.json", "train", "--data", dir / "d5.csv", "--config", dir / "cfg.json"}).code == 0);
  CHECK(fadx_run({"--out", dir / "a.json", "attribute", "--model", dir / "m.json", "--data", dir / "d6.csv"}).code == 2);
}

TEST_CASE("fad end to end and validation") {
  TempDir dir;
  fadx::write_file(dir / "cfg.json", R"({"epochs": 3, "hidden": [8], "folds": 2, "ig_steps": 8})");
  const auto r = fadx_run({"--seed", "1", "--out", dir / "e2e", "fad", "--end-to-end", "--planted", "--instances",
                           "60", "--features", "10", "--config", dir / "cfg.json", "--seeds", "2",
                           "--methods", "ig,oracle,random"});
  REQUIRE(r.code == 0);
  const json summary = load(dir / "e2e/summary.json");
  CHECK(summary["runs"] == 2);
  CHECK(summary["win_rate_vs_random"].contains("Oracle"));
  CHECK(fs::exists(dir / "e2e/seed_1/nauc.csv"));
  CHECK(fs::exists(dir / "e2e/seed_2/report.json"));
  CHECK(fadx_run({"--out", dir / "x", "fad", "--end-to-end", "--planted", "--methods", ""}).code == 2);
  CHECK(fadx_run({"--out", dir / "x", "fad", "--end-to-end", "--planted", "--methods", " , "}).code == 2);
  CHECK(fadx_run({"--out", dir / "x", "fad"}).code == 2);
}

TEST_CASE("match command") {
  TempDir dir;
  fadx::write_file(dir / "lex.csv", "id,name,v0,v1,v2\nA,fever,1,0,0\nB,cough,0,1,0\n");
  fadx::write_file(dir / "same.csv", "text,v0,v1,v2\nfever,1,0,0\ncough,0,1,0\n");
  const auto r = fadx_run({"--out", dir / "out.json", "match", "--lexicon", dir / "lex.csv", "--mentions", dir / "same.csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("filtered fraction 0.0000") != std::string::npos);
  CHECK(load(dir / "out.json")["summary"]["filtered"] == 0);
  CHECK(load(dir / "out.manifest.json")["config"]["epsilon"] == 0.35);
  CHECK(fadx_run({"--out", dir / "o.json", "match", "--lexicon", dir / "lex.csv", "--mentions", dir / "same.csv",
                  "--epsilon", "1.01"}).code == 2);
  fadx::write_file(dir / "wide.csv", "text,v0,v1,v2,v3\nx,1,0,0,0\n");
  CHECK(fadx_run({"--out", dir / "o.json", "match", "--lexicon", dir / "lex.csv", "--mentions", dir / "wide.csv"}).code == 2);
}

TEST_CASE("replay reproduces outputs byte for byte") {
  TempDir dir;
  REQUIRE(fadx_run({"--seed", "4", "--out", dir / "d.csv", "gen", "--instances", "40", "--features", "6"}).code == 0);
  fadx::write_file(dir / "cfg.json", R"({"epochs": 3, "hidden": [5]})");
  REQUIRE(fadx_run({"--seed", "4", "--out", dir / "m.json", "train", "--data", dir / "d.csv", "--config", dir / "cfg.json"}).code == 0);
  const std::string first = fadx::read_file(dir / "m.json");
  const std::string trace = fadx::read_file(dir / "m.loss.csv");
  fs::remove(dir / "m.json");
  REQUIRE(fadx_run({"replay", dir / "m.manifest.json"}).code == 0);
  CHECK(fadx::read_file(dir / "m.json") == first);
  CHECK(fadx::read_file(dir / "m.loss.csv") == trace);

  fadx::write_file(dir / "cfg.json", R"({"epochs": 4, "hidden": [5]})");
  CHECK(fadx_run({"replay", dir / "m.manifest.json"}).code == 2);
}
