#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>

#include <fmt/format.h>
#include <json.hpp>

#include "dcot/io.hpp"

using namespace dcot;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

class Workspace {
 public:
  Workspace() : root_(fs::temp_directory_path() / fmt::format("dcot_cli_tests_{}", ::getpid())) {
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~Workspace() { fs::remove_all(root_); }

  const fs::path& root() const { return root_; }

  fs::path config(const std::string& name, const json& j) const {
    write_file(root_ / name, j.dump());
    return root_ / name;
  }

  Run run(const std::string& args) const {
    const fs::path log = root_ / "stdout.txt";
    const std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2>/dev/null", DCOT_CLI_PATH, args, log.string());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(log)};
  }

 private:
  fs::path root_;
};

const json synth_config = {{"seed", 3},
                           {"ranks", {2, 2, 2}},
                           {"synth", {{"shape", {6, 5, 4}}, {"noise_sigma", 0.1}, {"missing_fraction", 0.3}}}};

}  // namespace

TEST_CASE("malformed config exits 2 and writes nothing") {
  Workspace w;
  const auto cfg = w.config("bad.json", {{"seed", 1}, {"solvr", {}}});
  const Run r = w.run(fmt::format("factorize --config {} --output {}", cfg.string(), (w.root() / "out").string()));
  CHECK(r.code == 2);
  const json err = json::parse(r.out);
  CHECK(err.at("error").at("kind") == "config");
  CHECK(err.at("error").at("message").get<std::string>().find("solvr") != std::string::npos);
  CHECK_FALSE(fs::exists(w.root() / "out"));

  write_file(w.root() / "broken.json", "{\"seed\": ");
  CHECK(w.run(fmt::format("synth --config {}/broken.json --output {}/o", w.root().string(), w.root().string())).code ==
        2);
  CHECK(w.run("factorize").code == 2);
}

TEST_CASE("missing input exits 4 and writes nothing") {
  Workspace w;
  const auto cfg = w.config("fit.json", {{"ranks", {2, 2}}, {"data", {{"observed", "nowhere.coo"}}}});
  const Run r = w.run(fmt::format("factorize --config {} --output {}/out", cfg.string(), w.root().string()));
  CHECK(r.code == 4);
  CHECK(json::parse(r.out).at("error").at("kind") == "io");
  CHECK_FALSE(fs::exists(w.root() / "out"));
}

TEST_CASE("solver abort exits 3") {
  Workspace w;
  const auto synth = w.config("synth.json", synth_config);
  REQUIRE(w.run(fmt::format("synth --config {} --output {}/data", synth.string(), w.root().string())).code == 0);
  const auto fit = w.config("fit.json", {{"ranks", {2, 2, 2}},
                                         {"data", {{"observed", "data/observed.coo"}}},
                                         {"solver", {{"gamma", 1e-300}, {"enforce_gamma_bound", false}}}});
  const Run r = w.run(fmt::format("factorize --config {} --output {}/fit", fit.string(), w.root().string()));
  CHECK(r.code == 3);
  CHECK_FALSE(fs::exists(w.root() / "fit"));
}

TEST_CASE("synth, complete, evaluate and grid-search") {
  Workspace w;
  const std::string root = w.root().string();
  json dense_config = synth_config;
  dense_config["synth"]["missing_fraction"] = 0.0;
  const auto synth = w.config("synth.json", dense_config);
  CHECK(w.run(fmt::format("synth --config {} --output {}/data --format dense", w.config("gappy.json", synth_config).string(), root)).code == 2);
  REQUIRE(w.run(fmt::format("synth --config {} --output {}/data --format dense", synth.string(), root)).code == 0);
  for (const char* f : {"observed.dct", "truth.dct", "model_g.dct", "model_h.dct", "factor_3.dct", "features_1.txt",
                        "labels_3.txt", "summary.json"})
    CHECK(fs::exists(w.root() / "data" / f));

  const json fit = {{"ranks", {2, 2, 2}},
                    {"data",
                     {{"observed", "data/observed.dct"},
                      {"format", "dense"},
                      {"reference", "data/truth.dct"},
                      {"reference_format", "dense"}}},
                    {"similarity",
                     {{"kind", "features"},
                      {"features", {"data/features_1.txt", "data/features_2.txt", "data/features_3.txt"}},
                      {"labels", {"data/labels_1.txt", "data/labels_2.txt", "data/labels_3.txt"}},
                      {"neighbor_cap", 3}}},
                    {"penalties", {{"core_g", {{"kind", "frob_sq"}}}, {"core_h", {{"kind", "frob_sq"}}}}},
                    {"solver", {{"max_iters", 30}}},
                    {"grid", {{"values", {0.01, 1.0}}}}};
  const auto fit_path = w.config("fit.json", fit);
  REQUIRE(w.run(fmt::format("complete --config {} --output {}/fit", fit_path.string(), root)).code == 0);
  CHECK(fs::exists(w.root() / "fit" / "completed.dct"));
  CHECK(fs::exists(w.root() / "fit" / "trace.csv"));
  const json summary = json::parse(read_file(w.root() / "fit" / "summary.json"));
  CHECK(summary.at("solver").at("iterations") == 30);
  CHECK(summary.at("config").at("solver").at("tol_step") == 1e-8);
  CHECK(summary.contains("reference_rmse"));

  const auto same = w.config("same.json", {{"data",
                                            {{"estimate", "data/truth.dct"},
                                             {"reference", "data/truth.dct"},
                                             {"reference_format", "dense"}}}});
  REQUIRE(w.run(fmt::format("evaluate --config {} --output {}/self", same.string(), root)).code == 0);
  CHECK(json::parse(read_file(w.root() / "self" / "summary.json")).at("rmse") == 0.0);

  const auto model = w.config("model.json", {{"data",
                                              {{"model", "fit"},
                                               {"reference", "data/truth.dct"},
                                               {"reference_format", "dense"}}}});
  REQUIRE(w.run(fmt::format("evaluate --config {} --output {}/eval", model.string(), root)).code == 0);
  CHECK(json::parse(read_file(w.root() / "eval" / "summary.json")).at("rmse") == summary.at("reference_rmse"));

  REQUIRE(w.run(fmt::format("grid-search --config {} --output {}/grid --threads 2", fit_path.string(), root)).code ==
          0);
  const std::string csv = read_file(w.root() / "grid" / "grid.csv");
  CHECK(csv.starts_with("lambda_g,lambda_h,lambda_u1,lambda_u2,lambda_u3,validation_rmse"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("--seed overrides the config seed") {
  Workspace w;
  const auto synth = w.config("synth.json", synth_config);
  const std::string root = w.root().string();
  REQUIRE(w.run(fmt::format("synth --config {} --output {}/a", synth.string(), root)).code == 0);
  REQUIRE(w.run(fmt::format("synth --config {} --output {}/b --seed 3", synth.string(), root)).code == 0);
  REQUIRE(w.run(fmt::format("synth --config {} --output {}/c --seed 4", synth.string(), root)).code == 0);
  CHECK(read_file(w.root() / "a" / "observed.coo") == read_file(w.root() / "b" / "observed.coo"));
  CHECK(read_file(w.root() / "a" / "observed.coo") != read_file(w.root() / "c" / "observed.coo"));
}
