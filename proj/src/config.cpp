#include "dcot/config.hpp"

#include <set>

#include <fmt/format.h>

#include "dcot/error.hpp"

namespace dcot {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
}

std::string path_of(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

double get_positive(const json& j, const std::string& where) {
  const double v = get_number(j, where);
  if (!(v > 0.0)) throw ConfigError(where + ": must be positive");
  return v;
}

std::int64_t get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<std::int64_t>();
}

Index get_count(const json& j, const std::string& where, std::int64_t min = 1) {
  const auto v = get_int(j, where);
  if (v < min) throw ConfigError(fmt::format("{}: must be >= {}", where, min));
  return static_cast<Index>(v);
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

std::vector<Index> get_dims(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty array of positive integers");
  std::vector<Index> out;
  for (Index k = 0; k < j.size(); ++k) out.push_back(get_count(j[k], fmt::format("{}[{}]", where, k)));
  return out;
}

std::filesystem::path resolve(const json& j, const std::string& where, const std::filesystem::path& base) {
  const std::filesystem::path p = get_string(j, where);
  if (p.empty()) throw ConfigError(where + ": empty path");
  return p.is_absolute() ? p : base / p;
}

// Null means unset.
std::optional<std::filesystem::path> resolve_optional(const json& j, const std::string& where,
                                                     const std::filesystem::path& base) {
  if (j.is_null()) return std::nullopt;
  return resolve(j, where, base);
}

void set_path(const json& parent, const char* key, const std::string& where, const std::filesystem::path& base,
              std::filesystem::path& out) {
  if (!parent.contains(key)) return;
  if (auto p = resolve_optional(parent[key], where, base)) out = *p;
}

json path_json(const std::filesystem::path& p) { return p.empty() ? json(nullptr) : json(p.string()); }

template <class E, class F>
E get_enum(const json& j, const std::string& where, F&& from) {
  try {
    return from(get_string(j, where));
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

FamilyKind family_of(const std::string& s) {
  try {
    return family_from_string(s);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

InitKind init_of(const std::string& s) {
  if (s == "identity") return InitKind::identity;
  if (s == "random") return InitKind::random;
  if (s == "hosvd") return InitKind::hosvd;
  throw ConfigError("unknown init '" + s + "' (identity, random, hosvd)");
}

ModuliPolicy moduli_of(const std::string& s) {
  if (s == "per_block") return ModuliPolicy::per_block;
  if (s == "periodic") return ModuliPolicy::periodic;
  if (s == "fixed") return ModuliPolicy::fixed;
  throw ConfigError("unknown moduli policy '" + s + "' (per_block, periodic, fixed)");
}

ZSolverKind zsolver_of(const std::string& s) {
  if (s == "automatic") return ZSolverKind::automatic;
  if (s == "closed_form_gaussian") return ZSolverKind::closed_form_gaussian;
  if (s == "quasi_newton") return ZSolverKind::quasi_newton;
  throw ConfigError("unknown z_solver '" + s + "' (automatic, closed_form_gaussian, quasi_newton)");
}

TieReducer reducer_of(const std::string& s) {
  if (s == "mean") return TieReducer::mean;
  if (s == "representative") return TieReducer::representative;
  throw ConfigError("unknown tie_reducer '" + s + "' (mean, representative)");
}

KernelKind kernel_of(const std::string& s) {
  if (s == "gaussian") return KernelKind::gaussian;
  if (s == "euclid") return KernelKind::euclid;
  if (s == "truncated") return KernelKind::truncated;
  throw ConfigError("unknown kernel '" + s + "' (gaussian, euclid, truncated)");
}

SimilarityKind similarity_of(const std::string& s) {
  if (s == "none") return SimilarityKind::none;
  if (s == "uniform") return SimilarityKind::uniform;
  if (s == "features") return SimilarityKind::features;
  throw ConfigError("unknown similarity kind '" + s + "' (none, uniform, features)");
}

ZeroWeightPolicy zero_weight_of(const std::string& s) {
  if (s == "fallback") return ZeroWeightPolicy::fallback;
  if (s == "skip") return ZeroWeightPolicy::skip;
  throw ConfigError("unknown zero_weight policy '" + s + "' (fallback, skip)");
}

std::string to_string(SimilarityKind k) {
  switch (k) {
    case SimilarityKind::none: return "none";
    case SimilarityKind::uniform: return "uniform";
    case SimilarityKind::features: return "features";
  }
  return "none";
}

// Core slices along `mode` as sparse group lasso groups.
std::vector<std::vector<Index>> slice_groups(const Shape& shape, Index mode) {
  std::vector<std::vector<Index>> groups(shape.dim(mode));
  std::vector<Index> idx(shape.order());
  for (Index lin = 0; lin < shape.size(); ++lin) {
    shape.multi_index(lin, idx);
    groups[idx[mode]].push_back(lin);
  }
  return groups;
}

Penalty parse_penalty(const json& j, const std::string& where, const std::optional<Shape>& core) {
  check_keys(j, where, {"kind", "weight", "mix", "groups", "group_mode"});
  Penalty p;
  if (j.contains("kind"))
    p.kind = get_enum<PenaltyKind>(j["kind"], path_of(where, "kind"), [](const std::string& s) {
      try {
        return penalty_from_string(s);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    });
  if (j.contains("weight")) {
    p.weight = get_number(j["weight"], path_of(where, "weight"));
    if (!(p.weight >= 0.0)) throw ConfigError(path_of(where, "weight") + ": must be >= 0");
  }
  if (j.contains("mix")) p.mix = get_number(j["mix"], path_of(where, "mix"));
  if (j.contains("groups") && j.contains("group_mode"))
    throw ConfigError(where + ": give either groups or group_mode");
  if (j.contains("groups")) {
    const auto& g = j["groups"];
    if (!g.is_array()) throw ConfigError(path_of(where, "groups") + ": expected an array of arrays");
    for (Index k = 0; k < g.size(); ++k) {
      const std::string w = fmt::format("{}.groups[{}]", where, k);
      if (!g[k].is_array()) throw ConfigError(w + ": expected an array of offsets");
      std::vector<Index> group;
      for (Index i = 0; i < g[k].size(); ++i) group.push_back(get_count(g[k][i], fmt::format("{}[{}]", w, i), 0));
      p.groups.push_back(std::move(group));
    }
  }
  if (j.contains("group_mode")) {
    if (!core) throw ConfigError(path_of(where, "group_mode") + ": only valid for core penalties with ranks given");
    const Index mode = get_count(j["group_mode"], path_of(where, "group_mode"));
    if (mode > core->order()) throw ConfigError(path_of(where, "group_mode") + ": mode out of range");
    p.groups = slice_groups(*core, mode - 1);
  }
  if (p.kind != PenaltyKind::sparse_group_lasso && !p.groups.empty())
    throw ConfigError(where + ": groups only apply to sparse_group_lasso");
  if (!(p.mix >= 0.0 && p.mix <= 1.0)) throw ConfigError(path_of(where, "mix") + ": must lie in [0,1]");
  return p;
}

json penalty_json(const Penalty& p) {
  json j = {{"kind", to_string(p.kind)}, {"weight", p.weight}};
  if (p.kind == PenaltyKind::sparse_group_lasso) {
    j["mix"] = p.mix;
    j["groups"] = p.groups;
  }
  return j;
}

std::vector<std::optional<std::filesystem::path>> parse_path_list(const json& j, const std::string& where,
                                                                  const std::filesystem::path& base) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of paths (null for none)");
  std::vector<std::optional<std::filesystem::path>> out;
  for (Index k = 0; k < j.size(); ++k) {
    if (j[k].is_null())
      out.emplace_back();
    else
      out.emplace_back(resolve(j[k], fmt::format("{}[{}]", where, k), base));
  }
  return out;
}

json path_list_json(const std::vector<std::optional<std::filesystem::path>>& v) {
  json j = json::array();
  for (const auto& p : v) j.push_back(p ? json(p->string()) : json(nullptr));
  return j;
}

}  // namespace

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::identity: return "identity";
    case InitKind::random: return "random";
    case InitKind::hosvd: return "hosvd";
  }
  return "hosvd";
}

std::string to_string(ModuliPolicy policy) {
  switch (policy) {
    case ModuliPolicy::per_block: return "per_block";
    case ModuliPolicy::periodic: return "periodic";
    case ModuliPolicy::fixed: return "fixed";
  }
  return "per_block";
}

std::string to_string(ZSolverKind kind) {
  switch (kind) {
    case ZSolverKind::automatic: return "automatic";
    case ZSolverKind::closed_form_gaussian: return "closed_form_gaussian";
    case ZSolverKind::quasi_newton: return "quasi_newton";
  }
  return "automatic";
}

std::string to_string(TieReducer reducer) { return reducer == TieReducer::mean ? "mean" : "representative"; }

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::euclid: return "euclid";
    case KernelKind::truncated: return "truncated";
  }
  return "gaussian";
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base) {
  check_keys(j, "config", {"seed", "output", "data", "family", "epsilon", "ranks", "partition", "init", "similarity",
                           "penalties", "solver", "synth", "split", "grid"});
  RunConfig c;
  if (j.contains("seed")) {
    const auto s = get_int(j["seed"], "seed");
    if (s < 0) throw ConfigError("seed: must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  }
  set_path(j, "output", "output", base, c.output);

  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, "data", {"observed", "format", "reference", "reference_format", "estimate", "model"});
    set_path(d, "observed", "data.observed", base, c.data.observed);
    if (d.contains("format")) c.data.format = get_enum<TensorFormat>(d["format"], "data.format", tensor_format_from_string);
    set_path(d, "reference", "data.reference", base, c.data.reference);
    if (d.contains("reference_format"))
      c.data.reference_format =
          get_enum<TensorFormat>(d["reference_format"], "data.reference_format", tensor_format_from_string);
    set_path(d, "estimate", "data.estimate", base, c.data.estimate);
    set_path(d, "model", "data.model", base, c.data.model);
  }

  if (j.contains("family")) c.family.kind = get_enum<FamilyKind>(j["family"], "family", family_of);
  if (j.contains("epsilon")) c.family.epsilon = get_positive(j["epsilon"], "epsilon");
  if (j.contains("ranks")) c.ranks = get_dims(j["ranks"], "ranks");
  std::optional<Shape> core;
  if (!c.ranks.empty()) core = Shape(c.ranks);

  if (j.contains("partition")) {
    c.partition = parse_partition(get_string(j["partition"], "partition"));
    if (!c.partition.empty()) {
      if (!core) throw ConfigError("partition: needs ranks");
      try {
        c.partition.validate(*core);
      } catch (const Error& e) {
        throw ConfigError(std::string("partition: ") + e.what());
      }
    }
  }
  if (j.contains("init")) c.init = get_enum<InitKind>(j["init"], "init", init_of);

  if (j.contains("similarity")) {
    const auto& s = j["similarity"];
    check_keys(s, "similarity", {"kind", "features", "labels", "kernel", "xi", "neighbor_cap", "normalized",
                                 "zero_weight", "same", "diff"});
    auto& sp = c.similarity;
    if (s.contains("kind")) sp.kind = get_enum<SimilarityKind>(s["kind"], "similarity.kind", similarity_of);
    if (s.contains("features")) sp.features = parse_path_list(s["features"], "similarity.features", base);
    if (s.contains("labels")) sp.labels = parse_path_list(s["labels"], "similarity.labels", base);
    if (s.contains("kernel")) sp.kernel.kind = get_enum<KernelKind>(s["kernel"], "similarity.kernel", kernel_of);
    if (s.contains("xi")) sp.kernel.xi = get_positive(s["xi"], "similarity.xi");
    if (s.contains("neighbor_cap")) sp.neighbor_cap = get_count(s["neighbor_cap"], "similarity.neighbor_cap");
    if (s.contains("normalized")) sp.normalized = get_bool(s["normalized"], "similarity.normalized");
    if (s.contains("zero_weight"))
      sp.zero_weight = get_enum<ZeroWeightPolicy>(s["zero_weight"], "similarity.zero_weight", zero_weight_of);
    if (s.contains("same")) sp.same = get_number(s["same"], "similarity.same");
    if (s.contains("diff")) sp.diff = get_number(s["diff"], "similarity.diff");
    if (!(0.0 <= sp.diff && sp.diff <= sp.same && sp.same <= 1.0))
      throw ConfigError("similarity: need 0 <= diff <= same <= 1");
    if (sp.kind != SimilarityKind::features && (!sp.features.empty() || !sp.labels.empty()))
      throw ConfigError("similarity: features/labels need kind \"features\"");
    if (sp.kind == SimilarityKind::features) {
      if (sp.features.empty() && sp.labels.empty()) throw ConfigError("similarity: kind features needs features or labels");
      for (const auto* list : {&sp.features, &sp.labels})
        if (!list->empty() && !c.ranks.empty() && list->size() != c.ranks.size())
          throw ConfigError("similarity: features/labels need one entry per mode");
    }
  }

  if (j.contains("penalties")) {
    const auto& p = j["penalties"];
    check_keys(p, "penalties", {"core_g", "core_h", "factors"});
    if (p.contains("core_g")) c.solver.penalties.core_g = parse_penalty(p["core_g"], "penalties.core_g", core);
    if (p.contains("core_h")) c.solver.penalties.core_h = parse_penalty(p["core_h"], "penalties.core_h", core);
    if (p.contains("factors")) {
      const auto& f = p["factors"];
      if (!f.is_array()) throw ConfigError("penalties.factors: expected an array (one entry per mode)");
      if (!f.empty() && !c.ranks.empty() && f.size() != c.ranks.size())
        throw ConfigError("penalties.factors: need one entry per mode (or none)");
      for (Index k = 0; k < f.size(); ++k)
        c.solver.penalties.factors.push_back(parse_penalty(f[k], fmt::format("penalties.factors[{}]", k), std::nullopt));
    }
    if (core) {
      try {
        c.solver.penalties.core_g.validate(core->size());
        c.solver.penalties.core_h.validate(core->size());
      } catch (const Error& e) {
        throw ConfigError(std::string("penalties: ") + e.what());
      }
    }
  }

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    check_keys(s, "solver", {"gamma", "enforce_gamma_bound", "lipschitz_z_min", "max_iters", "tol_primal", "tol_step",
                             "lipschitz_safety", "moduli", "moduli_period", "tie_reducer", "update_h", "z_solver",
                             "z_memory", "z_max_inner", "z_grad_tol", "divergence_factor"});
    auto& sc = c.solver;
    if (s.contains("gamma")) {
      sc.gamma = get_number(s["gamma"], "solver.gamma");
      if (!(sc.gamma >= 0.0)) throw ConfigError("solver.gamma: must be >= 0");
    }
    if (s.contains("enforce_gamma_bound"))
      sc.enforce_gamma_bound = get_bool(s["enforce_gamma_bound"], "solver.enforce_gamma_bound");
    if (!sc.enforce_gamma_bound && !(sc.gamma > 0.0))
      throw ConfigError("solver.gamma: must be positive when enforce_gamma_bound is false");
    if (s.contains("lipschitz_z_min") && !s["lipschitz_z_min"].is_null())
      sc.lipschitz_z_min = get_positive(s["lipschitz_z_min"], "solver.lipschitz_z_min");
    if (s.contains("max_iters")) sc.max_iters = static_cast<int>(get_count(s["max_iters"], "solver.max_iters", 0));
    if (s.contains("tol_primal") && !s["tol_primal"].is_null()) {
      sc.tol_primal = get_number(s["tol_primal"], "solver.tol_primal");
      if (!(*sc.tol_primal >= 0.0)) throw ConfigError("solver.tol_primal: must be >= 0");
    }
    if (s.contains("tol_step")) {
      sc.tol_step = get_number(s["tol_step"], "solver.tol_step");
      if (!(sc.tol_step >= 0.0)) throw ConfigError("solver.tol_step: must be >= 0");
    }
    if (s.contains("lipschitz_safety")) {
      sc.lipschitz_safety = get_number(s["lipschitz_safety"], "solver.lipschitz_safety");
      if (!(sc.lipschitz_safety >= 1.0)) throw ConfigError("solver.lipschitz_safety: must be >= 1");
    }
    if (s.contains("moduli")) sc.moduli = get_enum<ModuliPolicy>(s["moduli"], "solver.moduli", moduli_of);
    if (s.contains("moduli_period"))
      sc.moduli_period = static_cast<int>(get_count(s["moduli_period"], "solver.moduli_period"));
    if (s.contains("tie_reducer")) sc.tie_reducer = get_enum<TieReducer>(s["tie_reducer"], "solver.tie_reducer", reducer_of);
    if (s.contains("update_h")) sc.update_h = get_bool(s["update_h"], "solver.update_h");
    if (s.contains("z_solver")) sc.z_solver.kind = get_enum<ZSolverKind>(s["z_solver"], "solver.z_solver", zsolver_of);
    if (s.contains("z_memory")) sc.z_solver.memory = static_cast<int>(get_count(s["z_memory"], "solver.z_memory"));
    if (s.contains("z_max_inner"))
      sc.z_solver.max_inner = static_cast<int>(get_count(s["z_max_inner"], "solver.z_max_inner"));
    if (s.contains("z_grad_tol")) sc.z_solver.grad_tol = get_positive(s["z_grad_tol"], "solver.z_grad_tol");
    if (s.contains("divergence_factor")) {
      sc.divergence_factor = get_number(s["divergence_factor"], "solver.divergence_factor");
      if (!(sc.divergence_factor > 1.0)) throw ConfigError("solver.divergence_factor: must exceed 1");
    }
    if (sc.z_solver.kind == ZSolverKind::closed_form_gaussian && c.family.kind != FamilyKind::gaussian)
      throw ConfigError("solver.z_solver: closed_form_gaussian needs family gaussian");
  }

  if (j.contains("synth")) {
    const auto& s = j["synth"];
    check_keys(s, "synth", {"shape", "subject_core_scale", "noise_sigma", "missing_fraction", "clusters",
                            "cluster_spread", "neighbor_cap"});
    SynthSection sy;
    if (!s.contains("shape")) throw ConfigError("synth.shape: required");
    sy.shape = get_dims(s["shape"], "synth.shape");
    if (s.contains("subject_core_scale")) sy.subject_core_scale = get_number(s["subject_core_scale"], "synth.subject_core_scale");
    if (s.contains("noise_sigma")) sy.noise_sigma = get_number(s["noise_sigma"], "synth.noise_sigma");
    if (s.contains("missing_fraction")) sy.missing_fraction = get_number(s["missing_fraction"], "synth.missing_fraction");
    if (s.contains("clusters")) sy.clusters = get_count(s["clusters"], "synth.clusters");
    if (s.contains("cluster_spread")) sy.cluster_spread = get_number(s["cluster_spread"], "synth.cluster_spread");
    if (s.contains("neighbor_cap")) sy.neighbor_cap = get_count(s["neighbor_cap"], "synth.neighbor_cap");
    c.synth = sy;
    if (c.ranks.empty()) throw ConfigError("synth: needs ranks");
    try {
      synth_spec(c).validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("synth: ") + e.what());
    }
  }

  if (j.contains("split")) {
    const auto& s = j["split"];
    check_keys(s, "split", {"train_fraction"});
    if (s.contains("train_fraction")) c.train_fraction = get_number(s["train_fraction"], "split.train_fraction");
    if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw ConfigError("split.train_fraction: must lie in (0,1)");
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, "grid", {"values", "per_block"});
    if (g.contains("values")) {
      const auto& v = g["values"];
      if (!v.is_array() || v.empty()) throw ConfigError("grid.values: expected a nonempty array");
      c.grid.values.clear();
      for (Index k = 0; k < v.size(); ++k) {
        const double x = get_number(v[k], fmt::format("grid.values[{}]", k));
        if (!(x >= 0.0)) throw ConfigError(fmt::format("grid.values[{}]: must be >= 0", k));
        c.grid.values.push_back(x);
      }
    }
    if (g.contains("per_block")) c.grid.per_block = get_bool(g["per_block"], "grid.per_block");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output"] = path_json(c.output);
  j["data"] = {{"observed", path_json(c.data.observed)},   {"format", to_string(c.data.format)},
               {"reference", path_json(c.data.reference)}, {"reference_format", to_string(c.data.reference_format)},
               {"estimate", path_json(c.data.estimate)},   {"model", path_json(c.data.model)}};
  j["family"] = to_string(c.family.kind);
  j["epsilon"] = c.family.epsilon;
  j["ranks"] = c.ranks;
  j["partition"] = format_partition(c.partition);
  j["init"] = to_string(c.init);
  const auto& s = c.similarity;
  j["similarity"] = {{"kind", to_string(s.kind)},
                     {"features", path_list_json(s.features)},
                     {"labels", path_list_json(s.labels)},
                     {"kernel", to_string(s.kernel.kind)},
                     {"xi", s.kernel.xi},
                     {"neighbor_cap", s.neighbor_cap},
                     {"normalized", s.normalized},
                     {"zero_weight", s.zero_weight == ZeroWeightPolicy::fallback ? "fallback" : "skip"},
                     {"same", s.same},
                     {"diff", s.diff}};
  json factors = json::array();
  for (const auto& p : c.solver.penalties.factors) factors.push_back(penalty_json(p));
  j["penalties"] = {{"core_g", penalty_json(c.solver.penalties.core_g)},
                    {"core_h", penalty_json(c.solver.penalties.core_h)},
                    {"factors", factors}};
  const auto& sc = c.solver;
  j["solver"] = {{"gamma", sc.gamma},
                 {"enforce_gamma_bound", sc.enforce_gamma_bound},
                 {"lipschitz_z_min", sc.lipschitz_z_min ? json(*sc.lipschitz_z_min) : json(nullptr)},
                 {"max_iters", sc.max_iters},
                 {"tol_primal", sc.tol_primal ? json(*sc.tol_primal) : json(nullptr)},
                 {"tol_step", sc.tol_step},
                 {"lipschitz_safety", sc.lipschitz_safety},
                 {"moduli", to_string(sc.moduli)},
                 {"moduli_period", sc.moduli_period},
                 {"tie_reducer", to_string(sc.tie_reducer)},
                 {"update_h", sc.update_h},
                 {"z_solver", to_string(sc.z_solver.kind)},
                 {"z_memory", sc.z_solver.memory},
                 {"z_max_inner", sc.z_solver.max_inner},
                 {"z_grad_tol", sc.z_solver.grad_tol},
                 {"divergence_factor", sc.divergence_factor}};
  if (c.synth) {
    const auto& sy = *c.synth;
    j["synth"] = {{"shape", sy.shape},
                  {"subject_core_scale", sy.subject_core_scale},
                  {"noise_sigma", sy.noise_sigma},
                  {"missing_fraction", sy.missing_fraction},
                  {"clusters", sy.clusters},
                  {"cluster_spread", sy.cluster_spread},
                  {"neighbor_cap", sy.neighbor_cap}};
  }
  j["split"] = {{"train_fraction", c.train_fraction}};
  j["grid"] = {{"values", c.grid.values}, {"per_block", c.grid.per_block}};
  return j;
}

SimilarityModel build_similarity(const SimilaritySpec& spec, const Shape& shape) {
  switch (spec.kind) {
    case SimilarityKind::none: {
      return SimilarityModel::unsmoothed(shape);
    }
    case SimilarityKind::uniform: {
      SimilarityModel sim = SimilarityModel::uniform(shape, spec.normalized);
      sim.neighbor_cap = spec.neighbor_cap;
      sim.zero_weight = spec.zero_weight;
      return sim;
    }
    case SimilarityKind::features:
      break;
  }
  const Index order = shape.order();
  for (const auto* list : {&spec.features, &spec.labels})
    if (!list->empty() && list->size() != order)
      throw ConfigError(fmt::format("similarity: {} entries for a tensor of order {}", list->size(), order));
  SimilarityModel sim;
  sim.neighbor_cap = spec.neighbor_cap;
  sim.normalized = spec.normalized;
  sim.zero_weight = spec.zero_weight;
  for (Index n = 0; n < order; ++n) {
    const Index d = shape.dim(n);
    ModeSimilarity ms{n, DenseMatrix(d, d, 1.0), DenseMatrix(d, d, 1.0)};
    if (!spec.features.empty() && spec.features[n]) {
      const auto features = read_features(*spec.features[n]);
      if (features.size() != d)
        throw IoError(fmt::format("{}: {} rows for a mode of size {}", spec.features[n]->string(), features.size(), d));
      ms = mode_similarity(n, features, spec.kernel, default_bandwidths(features));
    }
    if (!spec.labels.empty() && spec.labels[n]) {
      const auto labels = read_labels(*spec.labels[n]);
      if (labels.size() != d)
        throw IoError(fmt::format("{}: {} labels for a mode of size {}", spec.labels[n]->string(), labels.size(), d));
      ms.c = label_consistency(labels, spec.same, spec.diff);
    }
    sim.per_mode.push_back(std::move(ms));
  }
  return sim;
}

SynthSpec synth_spec(const RunConfig& c) {
  if (!c.synth) throw ConfigError("synth: section missing");
  SynthSpec s;
  s.shape = Shape(c.synth->shape);
  s.ranks = c.ranks;
  s.partition = c.partition;
  s.subject_core_scale = c.synth->subject_core_scale;
  s.noise = {c.family.kind, c.synth->noise_sigma};
  s.missing_fraction = c.synth->missing_fraction;
  s.seed = c.seed;
  s.clusters = c.synth->clusters;
  s.cluster_spread = c.synth->cluster_spread;
  s.neighbor_cap = c.synth->neighbor_cap;
  return s;
}

}  // namespace dcot
