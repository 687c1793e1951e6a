#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/commands.hpp"
#include "helpers.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using detectkit::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json base_config() {
  return nlohmann::json::parse(R"({
    "seed": 5,
    "output_dir": "out",
    "data": {"hc3": "data.jsonl"},
    "embeddings": {"dim": 16, "epochs": 3, "min_count": 1},
    "classifier": {"family": "logreg", "epochs": 100},
    "zeroshot": {"k": 4, "methods": ["detect_gpt", "single_revise"]},
    "evaluate": {"transforms": [{"kind": "special_chars", "intensity": 0.2},
                                {"kind": "case_flip", "intensity": 0.0}]}
  })");
}

struct Workspace {
  dk_test::TempDir dir{"cli"};
  fs::path config;

  explicit Workspace(const nlohmann::json& cfg = base_config(), std::size_t questions = 60) {
    dk_test::write_text(dir / "data.jsonl", detectkit::testing::synthetic_hc3(questions, 21));
    config = dir / "config.json";
    dk_test::write_text(config, cfg.dump(2));
  }
  std::vector<std::string> args(const std::string& command) const {
    return {command, "--config", config.string()};
  }
  fs::path out(const std::string& name) const { return dir / "out" / name; }
};

}  // namespace

TEST_CASE("cli usage errors exit with the config code") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"ingest"}).code == 2);
  const Outcome help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("ingest") != std::string::npos);
}

TEST_CASE("cli ingest writes a manifest of disjoint splits") {
  Workspace ws;
  const Outcome r = invoke(ws.args("ingest"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("documents 120") != std::string::npos);
  const auto manifest = nlohmann::json::parse(dk_test::read_text(ws.out("splits.json")));
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const char* key : {"train", "val", "test"}) {
    for (const auto& id : manifest.at(key)) {
      seen.insert(id.get<std::string>());
      ++total;
    }
  }
  CHECK(total == 120);
  CHECK(seen.size() == 120);
  const std::string first = dk_test::read_text(ws.out("splits.json"));
  REQUIRE(invoke(ws.args("ingest")).code == 0);
  CHECK(dk_test::read_text(ws.out("splits.json")) == first);
  auto reseeded = ws.args("ingest");
  reseeded.insert(reseeded.end(), {"--seed", "6"});
  REQUIRE(invoke(reseeded).code == 0);
  CHECK(dk_test::read_text(ws.out("splits.json")) != first);
}

TEST_CASE("cli missing data file is a data error naming the path") {
  auto cfg = base_config();
  cfg["data"]["hc3"] = "absent.jsonl";
  Workspace ws(cfg);
  const Outcome r = invoke(ws.args("ingest"));
  CHECK(r.code == 3);
  CHECK(r.err.find("absent.jsonl") != std::string::npos);
}

TEST_CASE("cli config validation") {
  auto cfg = base_config();
  cfg["classifier"]["family"] = "perceptron";
  Workspace ws(cfg);
  CHECK(invoke(ws.args("ingest")).code == 2);
  dk_test::write_text(ws.config, "{not json");
  CHECK(invoke(ws.args("ingest")).code == 2);
  CHECK(invoke({"ingest", "--config", (ws.dir / "nope.json").string()}).code == 2);
  auto both = base_config();
  both["embeddings"]["source"] = "train";
  both["embeddings"]["path"] = "vectors.txt";
  dk_test::write_text(ws.config, both.dump());
  CHECK(invoke(ws.args("ingest")).code == 2);
}

TEST_CASE("cli stats sections and io failures") {
  auto cfg = base_config();
  cfg["data"]["conllu"] = {{"human", (dk_test::fixture("human.conllu")).string()},
                           {"machine", (dk_test::fixture("machine.conllu")).string()}};
  Workspace ws(cfg);
  REQUIRE(invoke(ws.args("ingest")).code == 0);
  const Outcome r = invoke(ws.args("stats"));
  REQUIRE(r.code == 0);
  const auto stats = nlohmann::json::parse(dk_test::read_text(ws.out("stats.json")));
  for (const char* cls : {"human", "machine"}) {
    for (const char* stat : {"answer_length", "sentence_length", "ttr", "fkgl", "dependency_distance"}) {
      CHECK(stats.at(cls).contains(stat));
    }
  }

  Workspace plain;
  REQUIRE(invoke(plain.args("ingest")).code == 0);
  REQUIRE(invoke(plain.args("stats")).code == 0);
  const auto no_dep = nlohmann::json::parse(dk_test::read_text(plain.out("stats.json")));
  CHECK(no_dep.at("human").size() == 4);
  CHECK_FALSE(no_dep.at("human").contains("dependency_distance"));

  // stats.json cannot be written when a directory occupies its name
  fs::remove(plain.out("stats.json"));
  fs::create_directories(plain.out("stats.json"));
  CHECK(invoke(plain.args("stats")).code == 4);
}

TEST_CASE("cli stats on a single-class corpus is a data error") {
  Workspace ws;
  std::string lines;
  for (int i = 0; i < 20; ++i) {
    lines += detectkit::testing::hc3_line("q", {"human words " + std::to_string(i)}, {}) + "\n";
  }
  dk_test::write_text(ws.dir / "data.jsonl", lines);
  CHECK(invoke(ws.args("ingest")).code == 3);
}

TEST_CASE("cli commands before ingest report missing inputs") {
  Workspace ws;
  CHECK(invoke(ws.args("stats")).code == 3);
  CHECK(invoke(ws.args("train")).code == 3);
  CHECK(invoke(ws.args("evaluate")).code == 3);
  dk_test::write_text(ws.dir / "in.txt", "hello there\n");
  auto detect = ws.args("detect");
  detect.insert(detect.end(), {"--input", (ws.dir / "in.txt").string()});
  CHECK(invoke(detect).code == 3);
}

TEST_CASE("cli full pipeline") {
  Workspace ws;
  REQUIRE(invoke(ws.args("ingest")).code == 0);
  const Outcome trained = invoke(ws.args("train"));
  REQUIRE(trained.code == 0);
  CHECK(trained.out.find("logreg") != std::string::npos);
  for (const char* f : {"model.json", "embeddings.txt", "lm.json", "zeroshot.json", "validation_metrics.json"}) {
    CHECK(fs::exists(ws.out(f)));
  }
  const std::string model = dk_test::read_text(ws.out("model.json"));
  REQUIRE(invoke(ws.args("train")).code == 0);
  CHECK(dk_test::read_text(ws.out("model.json")) == model);

  const Outcome evaluated = invoke(ws.args("evaluate"));
  REQUIRE(evaluated.code == 0);
  const auto metrics = nlohmann::json::parse(dk_test::read_text(ws.out("metrics.json")));
  CHECK(metrics.size() == 3);
  for (const auto& [method, report] : metrics.items()) {
    for (const char* field : {"precision", "recall", "f1", "accuracy", "auroc"}) {
      const double v = report.at(field).get<double>();
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  for (const char* m : {"logreg", "detect_gpt", "single_revise"}) {
    CHECK(fs::exists(ws.out(std::string("robustness_") + m + ".csv")));
  }
  const auto robustness = nlohmann::json::parse(dk_test::read_text(ws.out("robustness.json")));
  for (const auto& t : robustness.at("logreg").at("transforms")) {
    if (t.at("transform") == "case_flip@0") {
      for (const auto& [metric, d] : t.at("delta").items()) CHECK(d.get<double>() == 0.0);
    }
  }

  dk_test::write_text(ws.dir / "in.txt", "Ba ko ti mu.\n\nsomething else here\n");
  auto detect = ws.args("detect");
  detect.insert(detect.end(), {"--input", (ws.dir / "in.txt").string(), "--method", "single_revise", "--debug"});
  const Outcome d1 = invoke(detect);
  REQUIRE(d1.code == 0);
  std::istringstream lines(d1.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "id,score,label,method");
  std::getline(lines, line);
  CHECK(line.rfind("1,", 0) == 0);
  std::getline(lines, line);
  CHECK(line == "2,NA,NA,single_revise");
  CHECK(d1.err.find("lm_passes=2") != std::string::npos);
  CHECK(d1.err.find("lm_passes=3") == std::string::npos);
  CHECK(invoke(detect).out == d1.out);

  dk_test::write_text(ws.dir / "empty.txt", "");
  auto empty = ws.args("detect");
  empty.insert(empty.end(), {"--input", (ws.dir / "empty.txt").string()});
  const Outcome e = invoke(empty);
  CHECK(e.code == 0);
  CHECK(e.out == "id,score,label,method\n");

  auto classifier = ws.args("detect");
  classifier.insert(classifier.end(), {"--input", (ws.dir / "in.txt").string(), "--method", "classifier"});
  const Outcome c = invoke(classifier);
  CHECK(c.code == 0);
  CHECK(c.out.find(",logreg\n") != std::string::npos);

  fs::remove(ws.out("model.json"));
  auto missing = ws.args("detect");
  missing.insert(missing.end(), {"--input", (ws.dir / "in.txt").string(), "--method", "classifier"});
  CHECK(invoke(missing).code == 3);
}
