#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dcot/config.hpp"
#include "dcot/error.hpp"
#include "dcot/evaluation.hpp"
#include "dcot/io.hpp"
#include "dcot/logging.hpp"
#include "dcot/model.hpp"
#include "dcot/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dcot;

namespace {

struct Options {
  std::string command;
  fs::path config;
  std::optional<fs::path> output;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
};

// Files go to a hidden sibling directory and are moved into place once the
// command has finished, so a failed run leaves nothing behind.
class Staging {
 public:
  explicit Staging(const fs::path& output) : output_(output) {
    const fs::path parent = output.parent_path().empty() ? fs::path(".") : output.parent_path();
    dir_ = parent / ("." + output.filename().string() + ".partial");
    std::error_code ec;
    fs::remove_all(dir_, ec);
    fs::create_directories(dir_, ec);
    if (ec) throw IoError(fmt::format("{}: {}", dir_.string(), ec.message()));
  }
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  const fs::path& dir() const { return dir_; }

  void commit() {
    std::error_code ec;
    fs::create_directories(output_, ec);
    if (ec) throw IoError(fmt::format("{}: {}", output_.string(), ec.message()));
    for (const auto& entry : fs::directory_iterator(dir_)) {
      fs::rename(entry.path(), output_ / entry.path().filename(), ec);
      if (ec) throw IoError(fmt::format("{}: {}", (output_ / entry.path().filename()).string(), ec.message()));
    }
  }

 private:
  fs::path output_;
  fs::path dir_;
};

fs::path output_dir(const RunConfig& c) {
  if (c.output.empty()) throw ConfigError("output: required (config key or --output)");
  return c.output;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void write_summary(const fs::path& dir, json summary) {
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

json model_stats(const SolveResult& r) {
  const auto& rows = r.state.trace.rows;
  return {{"iterations", r.state.iter},
          {"stop_reason", r.stop_reason},
          {"lagrangian", rows.empty() ? 0.0 : rows.back().lagrangian},
          {"loss", rows.empty() ? 0.0 : rows.back().loss},
          {"primal_residual", rows.empty() ? 0.0 : rows.back().primal_residual},
          {"gamma", r.moduli.gamma}};
}

ObservationSet read_input(const RunConfig& c) {
  require(!c.data.observed.empty(), "data.observed: required");
  return read_observations(c.data.observed, c.data.format);
}

DcotModel initial_model(const ObservationSet& omega, const RunConfig& c) {
  require(!c.ranks.empty(), "ranks: required");
  require(c.ranks.size() == omega.shape().order(),
          fmt::format("ranks: {} entries for a tensor of order {}", c.ranks.size(), omega.shape().order()));
  for (Index n = 0; n < c.ranks.size(); ++n)
    require(c.ranks[n] <= omega.shape().dim(n),
            fmt::format("ranks[{}]: {} exceeds the mode size {}", n, c.ranks[n], omega.shape().dim(n)));
  return initialize_model(initial_z(omega, c.family), c.ranks, {c.init, c.seed}, c.partition, c.solver.tie_reducer);
}

int run_synth(const RunConfig& c) {
  require(c.synth.has_value(), "synth: section required");
  require(c.data.format == TensorFormat::coo || c.synth->missing_fraction == 0.0,
          "synth: dense output cannot hold missing cells; use the coo format");
  const fs::path out = output_dir(c);
  const SynthData d = synthesize(synth_spec(c));
  Staging stage(out);
  const auto ext = c.data.format == TensorFormat::coo ? "coo" : "dct";
  write_observations(d.observed, stage.dir() / fmt::format("observed.{}", ext), c.data.format);
  write_dense(d.truth.to_dense(), stage.dir() / "truth.dct");
  write_model(d.planted, stage.dir());
  for (Index n = 0; n < d.planted.factors.size(); ++n) {
    write_features(d.planted.factors[n], stage.dir() / fmt::format("features_{}.txt", n + 1));
    write_labels(d.labels[n], stage.dir() / fmt::format("labels_{}.txt", n + 1));
  }
  write_summary(stage.dir(), {{"command", "synth"},
                              {"config", to_json(c)},
                              {"shape", d.observed.shape().dims()},
                              {"observed_entries", d.observed.size()}});
  stage.commit();
  return 0;
}

int run_factorize(const RunConfig& c, bool complete) {
  const fs::path out = output_dir(c);
  const ObservationSet omega = read_input(c);
  validate_observations(c.family, omega);
  std::optional<ObservationSet> reference;
  if (!c.data.reference.empty()) {
    reference = read_observations(c.data.reference, c.data.reference_format);
    require(reference->shape() == omega.shape(), "data.reference: shape differs from data.observed");
  }
  const DcotModel init = initial_model(omega, c);
  const SimilarityModel sim = build_similarity(c.similarity, omega.shape());

  const SolveResult r = solve(omega, init, c.family, sim, c.solver);
  const DenseTensor z_hat = reconstruct(r.state.model);

  Staging stage(out);
  write_model(r.state.model, stage.dir());
  write_file(stage.dir() / "trace.csv", format_trace_csv(r.state.trace));
  json summary = {{"command", complete ? "complete" : "factorize"},
                  {"config", to_json(c)},
                  {"solver", model_stats(r)},
                  {"train_rmse", rmse(z_hat, omega)},
                  {"observed_entries", omega.size()}};
  if (reference) summary["reference_rmse"] = rmse(z_hat, *reference);
  if (complete) write_dense(z_hat, stage.dir() / "completed.dct");
  write_summary(stage.dir(), summary);
  stage.commit();
  return 0;
}

int run_evaluate(const RunConfig& c) {
  const fs::path out = output_dir(c);
  require(!c.data.reference.empty(), "data.reference: required");
  require(c.data.estimate.empty() != c.data.model.empty(), "data: give exactly one of estimate or model");
  const ObservationSet reference = read_observations(c.data.reference, c.data.reference_format);
  DenseTensor z_hat;
  if (!c.data.estimate.empty()) {
    z_hat = read_dense(c.data.estimate);
  } else {
    z_hat = reconstruct(read_model(c.data.model, reference.shape().order()));
  }
  if (!(z_hat.shape() == reference.shape()))
    throw DimensionError(fmt::format("estimate shape {} differs from reference shape {}", z_hat.shape().to_string(),
                                     reference.shape().to_string()));
  const double value = rmse(z_hat, reference);
  Staging stage(out);
  write_summary(stage.dir(), {{"command", "evaluate"},
                              {"config", to_json(c)},
                              {"rmse", value},
                              {"reference_entries", reference.size()}});
  stage.commit();
  return 0;
}

int run_grid(const RunConfig& c, unsigned threads) {
  const fs::path out = output_dir(c);
  const ObservationSet omega = read_input(c);
  validate_observations(c.family, omega);
  const Split split = holdout_split(omega, {c.train_fraction, c.seed});
  require(!split.train.empty() && !split.test.empty(), "split: train and validation sets must both be nonempty");
  const DcotModel init = initial_model(split.train, c);
  const SimilarityModel sim = build_similarity(c.similarity, omega.shape());
  const SmoothedLoss loss(c.family, sim, split.train);

  const GridResult g = grid_search(split.train, split.test, init, loss, c.solver, {c.grid.values, c.grid.per_block, threads});

  std::string csv = "lambda_g,lambda_h";
  for (Index n = 0; n < omega.shape().order(); ++n) csv += fmt::format(",lambda_u{}", n + 1);
  csv += ",validation_rmse,train_rmse,iterations,status\n";
  for (const auto& row : g.rows) {
    for (const double l : row.lambdas) csv += fmt::format("{},", l);
    csv += fmt::format("{},{},{},\"{}\"\n", row.validation_rmse, row.train_rmse, row.iterations, row.status);
  }
  const auto& best = g.best_row();
  Staging stage(out);
  write_file(stage.dir() / "grid.csv", csv);
  write_summary(stage.dir(), {{"command", "grid-search"},
                              {"config", to_json(c)},
                              {"best",
                               {{"lambdas", best.lambdas},
                                {"validation_rmse", best.validation_rmse},
                                {"train_rmse", best.train_rmse},
                                {"iterations", best.iterations}}},
                              {"points", g.rows.size()},
                              {"train_entries", split.train.size()},
                              {"validation_entries", split.test.size()}});
  stage.commit();
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::solver: return 3;
    case ErrorKind::io: return 4;
  }
  return 2;
}

std::string kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::solver: return "solver";
    case ErrorKind::io: return "io";
  }
  return "config";
}

int report(ErrorKind kind, const std::string& message) {
  std::cout << json{{"error", {{"kind", kind_name(kind)}, {"message", message}}}}.dump() << std::endl;
  return exit_code(kind);
}

int run(const Options& o) {
  RunConfig c = load_run_config(o.config);
  if (o.output) c.output = *o.output;
  if (o.seed) c.seed = *o.seed;
  if (o.format) c.data.format = tensor_format_from_string(*o.format);
  if (o.command == "synth") return run_synth(c);
  if (o.command == "factorize") return run_factorize(c, false);
  if (o.command == "complete") return run_factorize(c, true);
  if (o.command == "evaluate") return run_evaluate(c);
  return run_grid(c, o.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double core tensor factorization and completion"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "Generate planted data, truth and features"},
      {"factorize", "Fit the model to observed data"},
      {"complete", "Fit the model and write the completed tensor"},
      {"evaluate", "RMSE of an estimate against a reference"},
      {"grid-search", "Select penalty weights on a held-out split"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON run configuration")->required();
    sub->add_option("--output", o.output, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads for grid-search")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Overrides the config seed");
    sub->add_option("--format", o.format, "Observed tensor format")->check(CLI::IsMember({"coo", "dense"}));
    sub->callback([&o, name = name] { o.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report(ErrorKind::config, e.what());
  }

  try {
    return run(o);
  } catch (const Error& e) {
    log()->debug("{} error: {}", kind_name(e.kind()), e.what());
    return report(e.kind(), e.what());
  } catch (const std::bad_alloc&) {
    return report(ErrorKind::solver, "out of memory");
  } catch (const fs::filesystem_error& e) {
    return report(ErrorKind::io, e.what());
  } catch (const std::exception& e) {
    return report(ErrorKind::invalid_argument, e.what());
  }
}
