#include <doctest.h>

#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "olfalign/cli.hpp"
#include "olfalign/core_data.hpp"
#include "support.hpp"

using namespace olfalign;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "olfalign");
  return cli::execute(args);
}

std::string number(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

// Small end-to-end corpus in every input format.
struct Corpus {
  fixture::TempDir dir;

  Corpus() {
    const int n = 40;
    const Eigen::MatrixXd E = fixture::gaussian(n, 6, 1);
    for (int layer = 0; layer < 2; ++layer) {
      std::vector<MoleculeId> ids;
      for (int i = 0; i < n; ++i) ids.emplace_back("m" + std::to_string(i));
      const Eigen::MatrixXd values = layer == 0 ? E : Eigen::MatrixXd(E + 0.5 * fixture::gaussian(n, 6, 2));
      const EmbeddingTable t(ids, values, "toy", layer == 0 ? Layer::final_layer() : Layer::at(0));
      const std::string stem = layer == 0 ? "emb" : "layer0";
      write_embedding_table(t, dir / (stem + ".csv"), dir / (stem + ".json"));
    }

    std::ostringstream labels, ratings, descriptors, subjects, pairs;
    labels << "odorant,floral,meaty,ethereal\n";
    ratings << "odorant,sweet,sour\n";
    descriptors << "id";
    for (int j = 0; j < 15; ++j) descriptors << ",d" << j;
    descriptors << "\n";
    subjects << "subject,odorant,sweet,sour\n";
    pairs << "odorant_a,odorant_b,score\n";
    for (int i = 0; i < n; ++i) {
      const bool floral = E(i, 0) > 0;
      const bool meaty = E(i, 1) + E(i, 2) > 0;
      labels << "m" << i << "," << floral << "," << meaty << "," << (!floral) << "\n";
      ratings << "m" << i << "," << number(std::tanh(E(i, 3))) << "," << number(std::tanh(E(i, 4) - E(i, 0))) << "\n";
      descriptors << "m" << i;
      for (int j = 0; j < 15; ++j) descriptors << "," << number(E(i, j % 6) * (j + 1) + j);
      descriptors << "\n";
      for (int s = 0; s < 3; ++s) {
        subjects << "s" << s << ",m" << i << "," << number(std::tanh(E(i, 3)) + 0.1 * s * E(i, 5)) << ","
                 << number(E(i, 4) * (s + 1)) << "\n";
      }
      if (i + 1 < n) pairs << "m" << i << ",m" << i + 1 << "," << number(std::tanh(E(i, 0) * E(i + 1, 0))) << "\n";
      if (i + 3 < n) pairs << "m" << i << ";m" << i + 2 << ",m" << i + 3 << "," << number(std::tanh(E(i, 1))) << "\n";
    }
    dir.write("labels.csv", labels.str());
    dir.write("ratings.csv", ratings.str());
    dir.write("ratings.json", "{\"range\": [-1, 1]}");
    dir.write("desc.csv", descriptors.str());
    dir.write("subj.csv", subjects.str());
    dir.write("pairs.csv", pairs.str());
    dir.write("pairs.json", "{\"range\": [-1, 1], \"polarity\": \"similarity\"}");
  }

  std::string operator[](const std::string& name) const { return (dir / name).string(); }
};

const Corpus& corpus() {
  static const Corpus c;
  return c;
}

std::vector<std::string> with_out(std::vector<std::string> args, const fs::path& out) {
  args.push_back("--out");
  args.push_back(out.string());
  return args;
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) { ::setenv(name, value.c_str(), 1); }
  ~ScopedEnv() { ::unsetenv(name_); }

 private:
  const char* name_;
};

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}) == cli::kExitUsage);
  CHECK(run({"frobnicate"}) == cli::kExitUsage);
  CHECK(run({"classify", "--no-such-flag"}) == cli::kExitUsage);
  const auto& c = corpus();
  fixture::TempDir out;
  // A missing seed is a usage error: seeds are never implicit.
  CHECK(run(with_out({"classify", "--embeddings", c["emb.csv"], "--labels", c["labels.csv"]}, out.path())) ==
        cli::kExitUsage);
}

TEST_CASE("every subcommand has --help") {
  for (const char* sub : {"classify", "regress", "rsa", "physchem", "noise-ceiling", "layers", "rsm", "pca-scatter"}) {
    CAPTURE(sub);
    CHECK(run({sub, "--help"}) == cli::kExitOk);
  }
  CHECK(run({"--help"}) == cli::kExitOk);
}

TEST_CASE("missing input file exits 1") {
  const auto& c = corpus();
  fixture::TempDir out;
  CHECK(run(with_out({"classify", "--embeddings", c["nope.csv"], "--labels", c["labels.csv"], "--seed", "7"},
                     out.path())) == cli::kExitFailure);
  CHECK(run(with_out({"regress", "--embeddings", c["emb.csv"], "--ratings", c["missing.csv"], "--seed", "7"},
                     out.path())) == cli::kExitFailure);
}

TEST_CASE("classify happy path with protocol defaults") {
  const auto& c = corpus();
  fixture::TempDir out;
  REQUIRE(run(with_out({"classify", "--embeddings", c["emb.csv"], "--labels", c["labels.csv"], "--seed", "7"},
                       out.path())) == cli::kExitOk);
  for (const char* f : {"report.csv", "config.json", "run.json", "roc.svg", "roc_curves.csv", "predictions.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(out / f));
  }
  const auto config = nlohmann::json::parse(fixture::read(out / "config.json"));
  CHECK(config["plan"]["repetitions"] == 30);
  CHECK(config["plan"]["test_fraction"] == 0.2);
  CHECK(config["plan"]["inner_folds"] == 5);
  CHECK(config["seed"] == 7);
  const auto manifest = nlohmann::json::parse(fixture::read(out / "run.json"));
  CHECK(manifest["subcommand"] == "classify");
  CHECK(manifest["inputs"].size() >= 2);
  CHECK(fixture::read(out / "report.csv").find("roc_auc_micro") != std::string::npos);
}

TEST_CASE("every subcommand runs on the corpus") {
  const auto& c = corpus();
  const std::vector<std::string> fast{"--repetitions", "3", "--seed", "1"};
  const auto cmd = [&](std::vector<std::string> head, bool probe) {
    if (probe) head.insert(head.end(), fast.begin(), fast.end());
    else head.insert(head.end(), {"--seed", "1"});
    return head;
  };
  struct Case {
    std::vector<std::string> args;
    std::vector<std::string> outputs;
  };
  const std::vector<Case> cases{
      {cmd({"regress", "--embeddings", c["emb.csv"], "--ratings", c["ratings.csv"]}, true), {"report.csv", "bars.svg"}},
      {cmd({"rsa", "--embeddings", c["emb.csv"], "--pairs", c["pairs.csv"]}, false), {"report.csv"}},
      {cmd({"physchem", "--embeddings", c["emb.csv"], "--descriptors", c["desc.csv"]}, true), {"report.csv"}},
      {cmd({"noise-ceiling", "--ratings", c["subj.csv"]}, false), {"report.csv"}},
      {cmd({"layers", "--embeddings", c["emb.csv"], "--embeddings", c["layer0.csv"], "--pairs", c["pairs.csv"]}, false),
       {"report.csv", "layer_trend.svg", "layer_trend.csv"}},
      {cmd({"rsm", "--embeddings", c["emb.csv"], "--pairs", c["pairs.csv"]}, false),
       {"rsm_model.csv", "rsm_model_mask.csv", "rsm_model.svg", "rsm_human.svg"}},
      {cmd({"pca-scatter", "--embeddings", c["emb.csv"], "--labels", c["labels.csv"], "--narrow", "meaty"}, false),
       {"pca_scatter.csv", "pca_scatter.svg"}},
  };
  for (const auto& k : cases) {
    CAPTURE(k.args[0]);
    fixture::TempDir out;
    REQUIRE(run(with_out(k.args, out.path())) == cli::kExitOk);
    CHECK(fs::exists(out / "run.json"));
    for (const auto& f : k.outputs) {
      CAPTURE(f);
      CHECK(fs::exists(out / f));
    }
  }
}

TEST_CASE("config file fills flags, command line wins") {
  const auto& c = corpus();
  fixture::TempDir cfg;
  const auto path = cfg.write("cfg.json", "{\"seed\": 11, \"repetitions\": 2, \"inner_folds\": 3}");
  ScopedEnv env("OLFALIGN_CONFIG", path.string());
  fixture::TempDir out;
  REQUIRE(run(with_out({"regress", "--embeddings", c["emb.csv"], "--ratings", c["ratings.csv"], "--repetitions", "4"},
                       out.path())) == cli::kExitOk);
  const auto config = nlohmann::json::parse(fixture::read(out / "config.json"));
  CHECK(config["seed"] == 11);
  CHECK(config["plan"]["repetitions"] == 4);
  CHECK(config["plan"]["inner_folds"] == 3);
}

TEST_CASE("reruns are byte identical") {
  const auto& c = corpus();
  fixture::TempDir a, b;
  const std::vector<std::string> args{"classify", "--embeddings", c["emb.csv"], "--labels", c["labels.csv"],
                                      "--seed", "3", "--repetitions", "4"};
  REQUIRE(run(with_out(args, a.path())) == cli::kExitOk);
  REQUIRE(run(with_out(args, b.path())) == cli::kExitOk);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a.path())) {
    const auto name = entry.path().filename().string();
    if (name == "run.json") continue;
    CAPTURE(name);
    CHECK(fixture::read(entry.path()) == fixture::read(b / name));
    ++compared;
  }
  CHECK(compared >= 5);
}
