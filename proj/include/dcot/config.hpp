#pragma once

// JSON run configuration. Every section is optional; unknown keys are
// errors. Relative paths resolve against the config file's directory.
//
// {
//   "seed": 0,
//   "output": "runs/a",
//   "data": {"observed": "x.coo", "format": "coo", "reference": "truth.dct",
//            "reference_format": "dense", "estimate": "completed.dct", "model": "runs/a"},
//   "family": "gaussian", "epsilon": 1e-6,
//   "ranks": [3, 3, 3],
//   "partition": "mode=1: [1,2]@2=1, [3]",
//   "init": "hosvd",
//   "similarity": {"kind": "features", "features": ["f1.txt", null, "f3.txt"],
//                  "labels": ["l1.txt", null, null], "kernel": "gaussian", "xi": 1.0,
//                  "neighbor_cap": 32, "normalized": true, "zero_weight": "fallback",
//                  "same": 0.8, "diff": 0.2},
//   "penalties": {"core_g": {"kind": "frob_sq", "weight": 0.01}, "core_h": {...},
//                 "factors": [{...}, {...}, {...}]},
//   "solver": {"gamma": 0, "max_iters": 500, "tol_primal": null, "tol_step": 1e-8,
//              "lipschitz_safety": 1.1, "moduli": "per_block", "moduli_period": 10,
//              "tie_reducer": "mean", "update_h": true, "z_solver": "automatic",
//              "z_memory": 10, "z_max_inner": 50, "z_grad_tol": 1e-8},
//   "synth": {"shape": [20, 20, 20], "subject_core_scale": 1.0, "noise_sigma": 0.01,
//             "missing_fraction": 0.5, "clusters": 4, "cluster_spread": 0.1, "neighbor_cap": 3},
//   "split": {"train_fraction": 0.9},
//   "grid": {"values": [...], "per_block": false}
// }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcot/evaluation.hpp"
#include "dcot/io.hpp"
#include "dcot/loss.hpp"
#include "dcot/model.hpp"
#include "dcot/similarity.hpp"
#include "dcot/solver.hpp"

namespace dcot {

struct DataSpec {
  std::filesystem::path observed;
  TensorFormat format = TensorFormat::coo;
  std::filesystem::path reference;
  TensorFormat reference_format = TensorFormat::coo;
  std::filesystem::path estimate;  // dense tensor file
  std::filesystem::path model;     // directory with model files
};

enum class SimilarityKind { none, uniform, features };

struct SimilaritySpec {
  SimilarityKind kind = SimilarityKind::none;
  std::vector<std::optional<std::filesystem::path>> features;  // per mode
  std::vector<std::optional<std::filesystem::path>> labels;    // per mode
  Kernel kernel;
  Index neighbor_cap = 32;
  bool normalized = true;
  ZeroWeightPolicy zero_weight = ZeroWeightPolicy::fallback;
  double same = 0.8;
  double diff = 0.2;
};

struct SynthSection {
  std::vector<Index> shape;
  double subject_core_scale = 1.0;
  double noise_sigma = 0.0;
  double missing_fraction = 0.0;
  Index clusters = 4;
  double cluster_spread = 0.1;
  Index neighbor_cap = 3;
};

struct GridSection {
  std::vector<double> values = lambda_grid();
  bool per_block = false;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output;
  DataSpec data;
  LossFamily family;
  std::vector<Index> ranks;
  SubjectPartition partition;
  InitKind init = InitKind::hosvd;
  SimilaritySpec similarity;
  SolverConfig solver;
  std::optional<SynthSection> synth;
  double train_fraction = 0.9;
  GridSection grid;
};

/// Throws ConfigError on schema violations.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// The effective configuration with every default filled in.
nlohmann::json to_json(const RunConfig& config);

/// Similarity for data of this shape; files are read here.
SimilarityModel build_similarity(const SimilaritySpec& spec, const Shape& shape);

SynthSpec synth_spec(const RunConfig& config);

std::string to_string(InitKind kind);
std::string to_string(ModuliPolicy policy);
std::string to_string(ZSolverKind kind);
std::string to_string(TieReducer reducer);
std::string to_string(KernelKind kind);

}  // namespace dcot
