#pragma once

// Command dispatch behind the apavoid tool: typed parameter checking, report
// assembly and the json / csv / human emitters.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "apavoid/ap_detect.hpp"
#include "apavoid/bounds.hpp"
#include "apavoid/cantor.hpp"
#include "apavoid/dimension.hpp"
#include "apavoid/errors.hpp"
#include "apavoid/extremal.hpp"
#include "apavoid/orientation.hpp"
#include "apavoid/parallel.hpp"
#include "apavoid/patch.hpp"
#include "apavoid/serialize.hpp"

#ifndef APAVOID_VERSION
#define APAVOID_VERSION "0.0.0"
#endif

namespace apavoid {

enum class OutputFormat { json, csv, human };

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "human") return OutputFormat::human;
  throw usage_error("unknown output format '" + s + "'");
}

enum class ParamType { integer, rational, flag, text, rational_list };

struct ParamSpec {
  std::string name;
  ParamType type;
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
};

namespace detail {

inline std::vector<ParamSpec> source_params() {
  return {{"set", ParamType::rational_list, "inline 1D point list, e.g. 0,1,3"},
          {"input", ParamType::text, "point file"},
          {"input-format", ParamType::text, "json or plain (default: by extension)"},
          {"grid", ParamType::integer, "use the lattice {0..n-1}^d"},
          {"grid-dim", ParamType::integer, "lattice dimension (default 2)"},
          {"scale", ParamType::rational, "lattice spacing (default 1/(n-1))"},
          {"cantor-product", ParamType::flag, "use C x C for a discretised construction C"},
          {"cantor-k", ParamType::integer, "construction k (default 3)"},
          {"cantor-eps", ParamType::rational, "construction epsilon (default 1/10)"},
          {"cantor-c", ParamType::rational, "construction ratio (default 3/20)"},
          {"cantor-depth", ParamType::integer, "construction depth (default 4)"}};
}

inline std::vector<ParamSpec> with_source(std::vector<ParamSpec> own) {
  for (auto& p : source_params()) own.push_back(std::move(p));
  return own;
}

}  // namespace detail

inline const std::vector<CommandSpec>& command_schema() {
  using T = ParamType;
  static const std::vector<CommandSpec> schema = {
      {"detect",
       "search a point set for a (k, eps)-AP",
       detail::with_source({{"k", T::integer, "progression length"},
                            {"eps", T::rational, "tolerance"},
                            {"tuple", T::flag, "treat the set as one tuple and report its distortion"},
                            {"lm", T::flag, "also apply the consecutive-gap-ratio test to the tuple"}})},
      {"search-rk",
       "largest progression-free subset of {1..N}",
       {{"N", T::integer, "range size"},
        {"ns", T::rational_list, "list of N for a scaling table"},
        {"k", T::integer, "progression length"},
        {"eps", T::rational, "tolerance"},
        {"method", T::text, "exact (default), greedy or random"},
        {"exact-limit", T::integer, "largest N searched exactly in tables (default 64)"}}},
      {"construct",
       "build the nested-interval construction",
       {{"k", T::integer, "progression length"},
        {"eps", T::rational, "tolerance"},
        {"depth", T::integer, "number of levels"},
        {"c", T::rational, "constant ratio (default: increasing schedule)"},
        {"discretize", T::text, "endpoints, midpoints or grid"},
        {"per-interval", T::integer, "points per interval for grid"}}},
      {"certify",
       "check the hole inequality level by level",
       {{"k", T::integer, "progression length"},
        {"eps", T::rational, "tolerance"},
        {"depth", T::integer, "number of levels"},
        {"c", T::rational, "constant ratio (default: increasing schedule)"},
        {"verify", T::flag, "also search the discretised set exhaustively"},
        {"discretize", T::text, "endpoints (default) or midpoints"}}},
      {"estimate-dim",
       "box-counting slope, optionally with Assouad probes",
       detail::with_source({{"k", T::integer, "construction k"},
                            {"eps", T::rational, "construction epsilon"},
                            {"depth", T::integer, "construction depth"},
                            {"c", T::rational, "construction ratio"},
                            {"r-min", T::rational, "smallest mesh"},
                            {"r-max", T::rational, "largest mesh"},
                            {"scales", T::integer, "number of meshes (default: depth, or 8)"},
                            {"probe", T::flag, "run aligned Assouad probes on the construction"}})},
      {"bounds",
       "evaluate a dimension formula",
       {{"thm1", T::flag, "upper bound for sets avoiding (k, eps)-APs"},
        {"thm3", T::flag, "dimension reached by the construction"},
        {"thm4", T::flag, "upper bound for sets avoiding (k, eps, e)-patches"},
        {"moran", T::flag, "log 2 / log(1/c)"},
        {"k", T::integer, "progression length"},
        {"eps", T::rational, "tolerance"},
        {"d", T::integer, "ambient dimension"},
        {"m", T::integer, "patch dimension"},
        {"c", T::rational, "ratio"},
        {"quotient", T::flag, "alternative reading of the patch bound"}}},
      {"patch",
       "search for an arithmetic patch, or fit one to an ordered assignment",
       detail::with_source({{"k", T::integer, "patch side"},
                            {"eps", T::rational, "tolerance"},
                            {"axes", T::rational_list, "orientation from coordinate axes, e.g. 0,1"},
                            {"direction", T::rational_list, "single direction vector (normalised)"},
                            {"assign", T::flag, "fit the input rows, in order, to the patch sites"},
                            {"metric", T::text, "euclidean (default) or chebyshev, for --assign"},
                            {"multi-limit", T::integer, "largest set searched for m >= 2 (default 256)"}})},
      {"sweep",
       "patch search along equally spaced planar directions",
       detail::with_source({{"k", T::integer, "patch side"},
                            {"eps", T::rational, "tolerance"},
                            {"directions", T::integer, "number of directions (default 32)"}})},
      {"audit",
       "compare occupied grid cubes with the deletion bound",
       detail::with_source({{"k", T::integer, "patch side"},
                            {"eps", T::rational, "tolerance"},
                            {"axes", T::rational_list, "orientation axes (default 0)"},
                            {"direction", T::rational_list, "single direction; must be a coordinate axis"},
                            {"levels", T::integer, "number of levels (default 3)"},
                            {"corner", T::rational_list, "cube corner (default origin)"},
                            {"side", T::rational, "cube side (default 1)"}})},
  };
  return schema;
}

inline const CommandSpec* find_command(const std::string& name) {
  for (const auto& c : command_schema())
    if (c.name == name) return &c;
  return nullptr;
}

struct CommandRequest {
  std::string subcommand;
  std::map<std::string, std::string> parameters;  // flags hold "true"
  OutputFormat format = OutputFormat::json;
  unsigned threads = 0;  // 0: APAVOID_THREADS or 1
  std::optional<std::uint64_t> seed;
  bool timing = false;
};

/// Everything except wall_seconds is a function of the request, seed and version.
struct RunReport {
  std::string subcommand;
  std::map<std::string, std::string> parameters;
  json payload;
  json statistics = json::object();
  std::string version = APAVOID_VERSION;
  std::optional<std::uint64_t> seed;
  std::optional<double> wall_seconds;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

inline json report_json(const RunReport& r) {
  json j;
  j["toolkit"] = "apavoid";
  j["version"] = r.version;
  j["request"] = {{"subcommand", r.subcommand}, {"parameters", r.parameters}};
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  j["payload"] = r.payload;
  j["statistics"] = r.statistics;
  if (r.wall_seconds) j["wall_seconds"] = *r.wall_seconds;
  return j;
}

inline RunReport report_from_json(const json& j) {
  try {
    RunReport r;
    r.version = j.at("version").get<std::string>();
    r.subcommand = j.at("request").at("subcommand").get<std::string>();
    r.parameters = j.at("request").at("parameters").get<std::map<std::string, std::string>>();
    if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
    r.payload = j.at("payload");
    r.statistics = j.at("statistics");
    if (j.contains("wall_seconds")) r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw parse_error(std::string("malformed report: ") + e.what());
  }
}

namespace detail {

/// Typed view of the request parameters; malformed values are usage errors.
class Params {
 public:
  Params(const CommandSpec& spec, const std::map<std::string, std::string>& values) : spec_(spec), values_(values) {
    for (const auto& [name, value] : values_) {
      const ParamSpec* p = find(name);
      if (!p) throw usage_error("unknown parameter --" + name + " for " + spec_.name);
      check(*p, value);
    }
  }

  bool has(const std::string& name) const { return values_.count(name) > 0; }
  bool flag(const std::string& name) const { return has(name) && values_.at(name) == "true"; }

  long integer(const std::string& name) const { return as_integer(name, require(name)); }
  long integer(const std::string& name, long fallback) const { return has(name) ? integer(name) : fallback; }

  Rational rational(const std::string& name) const { return parse_rational(require(name)); }
  Rational rational(const std::string& name, const Rational& fallback) const {
    return has(name) ? rational(name) : fallback;
  }

  std::string text(const std::string& name) const { return require(name); }
  std::string text(const std::string& name, const std::string& fallback) const {
    return has(name) ? values_.at(name) : fallback;
  }

  std::vector<Rational> list(const std::string& name) const { return as_list(require(name)); }

  std::vector<long> integer_list(const std::string& name) const {
    std::vector<long> out;
    for (const auto& r : list(name)) {
      if (denominator(r) != 1) throw usage_error("--" + name + " needs integers");
      out.push_back(numerator(r).convert_to<long>());
    }
    return out;
  }

 private:
  const ParamSpec* find(const std::string& name) const {
    for (const auto& p : spec_.params)
      if (p.name == name) return &p;
    return nullptr;
  }

  const std::string& require(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw usage_error(spec_.name + " needs --" + name);
    return it->second;
  }

  static long as_integer(const std::string& name, const std::string& v) {
    std::size_t used = 0;
    long out = 0;
    try {
      out = std::stol(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) throw usage_error("--" + name + " expects an integer, got '" + v + "'");
    return out;
  }

  static std::vector<Rational> as_list(const std::string& v) {
    std::vector<Rational> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
    return out;
  }

  static void check(const ParamSpec& p, const std::string& v) {
    try {
      switch (p.type) {
        case ParamType::integer: as_integer(p.name, v); break;
        case ParamType::rational: parse_rational(v); break;
        case ParamType::rational_list: as_list(v); break;
        case ParamType::flag:
          if (v != "true") throw usage_error("--" + p.name + " is a flag");
          break;
        case ParamType::text: break;
      }
    } catch (const parse_error& e) {
      throw usage_error("--" + p.name + ": " + e.what());
    }
  }

  const CommandSpec& spec_;
  const std::map<std::string, std::string>& values_;
};

struct Context {
  Params params;
  unsigned threads;
  std::optional<std::uint64_t> seed;
  json statistics = json::object();
};

inline int to_int(long v, const char* what) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw domain_error(std::string(what) + " out of range");
  return static_cast<int>(v);
}

inline json witness_json(const APWitness& w) {
  return {{"a0", rational_json(w.a0)}, {"gap", rational_json(w.gap)}, {"k", w.k}};
}

inline json table(std::vector<std::string> columns, json rows) {
  return {{"columns", std::move(columns)}, {"rows", std::move(rows)}};
}

inline RatioSchedule schedule_from(const Params& p, long k, const Rational& eps, const char* c_name = "c") {
  if (p.has(c_name)) return RatioSchedule::constant(k, eps, p.rational(c_name));
  return RatioSchedule::increasing(k, eps);
}

inline json schedule_json(const MoranSet& set) {
  json ratios = json::array();
  for (int m = 1; m <= set.depth; ++m) ratios.push_back(rational_json(set.schedule.ratio(m)));
  return {{"kind", set.schedule.kind() == RatioSchedule::Kind::constant ? "constant" : "increasing"},
          {"ratios", ratios}};
}

inline PointFormat input_format(const Params& p) {
  const std::string path = p.text("input");
  std::string f = p.text("input-format", "");
  if (f.empty()) f = path.size() >= 5 && path.substr(path.size() - 5) == ".json" ? "json" : "plain";
  if (f == "json") return PointFormat::json;
  if (f == "plain") return PointFormat::plain;
  throw usage_error("unknown input format '" + f + "'");
}

/// Rows in source order (file order, or lexicographic for generated sets).
inline PointRows source_rows(const Params& p) {
  int given = p.has("set") + p.has("input") + p.has("grid") + p.flag("cantor-product");
  if (given != 1) throw usage_error("give exactly one of --set, --input, --grid, --cantor-product");
  PointRows out;
  if (p.has("set")) {
    out.dimension = 1;
    for (const auto& r : p.list("set")) out.rows.push_back({r});
    if (out.rows.empty()) throw domain_error("empty point set");
    return out;
  }
  if (p.has("input")) return load_point_rows(p.text("input"), input_format(p));
  if (p.has("grid")) {
    const long n = p.integer("grid");
    const long d = p.integer("grid-dim", 2);
    if (n < 1 || d < 1) throw domain_error("grid needs n >= 1 and dimension >= 1");
    if (std::pow(static_cast<double>(n), static_cast<double>(d)) > 1e6) throw resource_error("grid above 10^6 points");
    const Rational scale = p.rational("scale", n > 1 ? Rational(1, n - 1) : Rational(1));
    const PointSetD g = PointSetD::grid(static_cast<std::size_t>(d), n, scale);
    out.dimension = g.dimension();
    out.rows.assign(g.points().begin(), g.points().end());
    return out;
  }
  const long k = p.integer("cantor-k", 3);
  const Rational eps = p.rational("cantor-eps", Rational(1, 10));
  const auto schedule = RatioSchedule::constant(k, eps, p.rational("cantor-c", Rational(3, 20)));
  const PointSet1D c = discretize(build_moran_set(to_int(p.integer("cantor-depth", 4), "depth"), schedule));
  const PointSetD prod = PointSetD::product(c, c);
  out.dimension = 2;
  out.rows.assign(prod.points().begin(), prod.points().end());
  return out;
}

inline PointSetD source_set_d(const Params& p) {
  const PointRows rows = source_rows(p);
  return PointSetD(rows.dimension, rows.rows);
}

inline PointSet1D source_set_1d(const Params& p) {
  const PointRows rows = source_rows(p);
  if (rows.dimension != 1) throw domain_error("this operation needs a 1D point set");
  std::vector<Rational> pts;
  for (const auto& r : rows.rows) pts.push_back(r[0]);
  return PointSet1D(std::move(pts));
}

inline Orientation orientation_from(const Params& p, std::size_t d) {
  if (p.has("axes") && p.has("direction")) throw usage_error("give --axes or --direction, not both");
  if (p.has("direction")) {
    const auto v = p.list("direction");
    return Orientation::normalized(d, {PointD(v.begin(), v.end())});
  }
  std::vector<std::size_t> axes;
  if (p.has("axes")) {
    for (long a : p.integer_list("axes")) {
      if (a < 0) throw domain_error("axis index out of range");
      axes.push_back(static_cast<std::size_t>(a));
    }
  } else {
    axes.push_back(0);
  }
  return Orientation::axes(d, axes);
}

inline json orientation_json(const Orientation& e) { return points_json(std::span<const PointD>(e.vectors())); }

inline json patch_spec_json(const PatchSpec& s) {
  return {{"anchor", point_json(s.anchor)},
          {"delta", rational_json(s.delta)},
          {"k", s.k},
          {"orientation", orientation_json(s.orientation)}};
}

inline json run_detect(Context& ctx) {
  const auto& p = ctx.params;
  const int k = to_int(p.integer("k"), "k");
  const Rational eps = p.rational("eps");
  const PointSet1D set = source_set_1d(p);
  json out = {{"k", k}, {"epsilon", rational_json(eps)}, {"size", set.size()}};
  if (p.flag("tuple") || p.flag("lm")) {
    if (set.size() != static_cast<std::size_t>(k)) throw domain_error("tuple mode needs exactly k points");
    if (eps < 0) throw domain_error("epsilon must be non-negative");
    const auto d = minimax_distortion(set.points());
    out["epsilon_star"] = rational_json(d.epsilon_star);
    out["is_almost_ap"] = d.epsilon_star <= eps;
    out["witness"] = witness_json(d.witness);
    if (p.flag("lm")) out["is_lm_almost_ap"] = is_lm_almost_ap(set.points(), eps);
    return out;
  }
  const auto res = search_almost_ap(set, k, eps, {ctx.threads});
  ctx.statistics["nodes"] = res.nodes;
  out["found"] = res.match.has_value();
  if (res.match) {
    json idx = json::array(), tuple = json::array();
    for (auto i : res.match->indices) {
      idx.push_back(i);
      tuple.push_back(rational_json(set[i]));
    }
    out["indices"] = idx;
    out["tuple"] = tuple;
    out["witness"] = witness_json(res.match->witness);
  }
  return out;
}

inline json run_search_rk(Context& ctx) {
  const auto& p = ctx.params;
  const int k = to_int(p.integer("k"), "k");
  const Rational eps = p.rational("eps");
  const std::string method = p.text("method", "exact");
  if (method != "exact" && method != "greedy" && method != "random") throw usage_error("unknown method '" + method + "'");
  if (p.has("N") == p.has("ns")) throw usage_error("give exactly one of --N, --ns");
  ExtremalOptions opt;
  opt.threads = ctx.threads;
  opt.exact_limit = p.integer("exact-limit", opt.exact_limit);

  if (p.has("ns")) {
    if (method != "exact") throw usage_error("scaling tables use --method exact");
    const auto ns = p.integer_list("ns");
    json rows = json::array();
    for (const auto& row : rk_scaling_table(k, eps, ns, opt))
      rows.push_back({row.n, row.r, row.exact, row.log_ratio, static_cast<double>(row.thm1_upper),
                      row.thm3_lower ? json(static_cast<double>(*row.thm3_lower)) : json(nullptr)});
    ctx.statistics["rows"] = rows.size();
    return {{"k", k},
            {"epsilon", rational_json(eps)},
            {"table", table({"N", "r", "exact", "log_ratio", "thm1_upper", "thm3_lower"}, rows)}};
  }

  const long n = p.integer("N");
  ExtremalResult res;
  if (method == "exact") {
    res = exact_rk(n, k, eps, opt);
  } else if (method == "greedy") {
    res = greedy_rk(n, k, eps, GreedyStrategy::left_to_right);
  } else {
    if (!ctx.seed) throw usage_error("--method random needs --seed");
    res = greedy_rk(n, k, eps, GreedyStrategy::randomized, *ctx.seed);
  }
  ctx.statistics["nodes"] = res.nodes_explored;
  return {{"N", res.n},           {"k", res.k},         {"epsilon", rational_json(res.epsilon)},
          {"cardinality", res.cardinality}, {"exact", res.exact}, {"witness", res.witness}};
}

inline DiscretizeMode discretize_mode(const std::string& s) {
  if (s == "endpoints") return DiscretizeMode::endpoints;
  if (s == "midpoints") return DiscretizeMode::midpoints;
  if (s == "grid") return DiscretizeMode::grid;
  throw usage_error("unknown discretisation '" + s + "'");
}

inline MoranSet construction_from(const Params& p) {
  const long k = p.integer("k");
  const Rational eps = p.rational("eps");
  return build_theorem3_set(k, eps, to_int(p.integer("depth"), "depth"), schedule_from(p, k, eps));
}

inline json run_construct(Context& ctx) {
  const auto& p = ctx.params;
  const MoranSet set = construction_from(p);
  json intervals = json::array();
  for (const auto& iv : set.finest()) intervals.push_back(interval_json(iv));
  json out = {{"k", set.schedule.k()},
              {"epsilon", rational_json(set.schedule.epsilon())},
              {"depth", set.depth},
              {"schedule", schedule_json(set)},
              {"limit_ratio", rational_json(set.schedule.limit())},
              {"intervals", intervals}};
  if (p.has("discretize")) {
    const PointSet1D pts = discretize(set, discretize_mode(p.text("discretize")), to_int(p.integer("per-interval", 2), "per-interval"));
    out["points"] = points_json(pts.points());
  }
  ctx.statistics["intervals"] = set.finest().size();
  return out;
}

inline json run_certify(Context& ctx) {
  const auto& p = ctx.params;
  const MoranSet set = construction_from(p);
  const auto cert = lemma1_certify(set);
  json rows = json::array();
  for (const auto& h : cert.levels)
    rows.push_back({h.level, rational_json(h.hole_fraction), rational_json(h.threshold), h.pass});
  json out = {{"k", cert.k},
              {"epsilon", rational_json(cert.epsilon)},
              {"valid", cert.valid()},
              {"table", table({"level", "hole_fraction", "threshold", "pass"}, rows)}};
  if (p.flag("verify")) {
    const auto mode = discretize_mode(p.text("discretize", "endpoints"));
    if (mode == DiscretizeMode::grid) throw unsupported_mode("grid samples are not inside the limit set; use endpoints or midpoints");
    const PointSet1D pts = discretize(set, mode);
    const auto v = verify_avoidance(pts, to_int(cert.k, "k"), cert.epsilon, {ctx.threads});
    json ver = {{"pass", v.pass}, {"points", pts.size()}};
    if (v.counterexample) ver["counterexample"] = points_json(std::span<const Rational>(*v.counterexample));
    if (v.witness) ver["witness"] = witness_json(*v.witness);
    out["verification"] = ver;
    ctx.statistics["nodes"] = v.nodes;
  }
  return out;
}

inline json diagnostics_json(const ScalingDiagnostics& diag) {
  json rows = json::array();
  for (const auto& s : diag.samples) rows.push_back({s.log_inv_r, s.log_count});
  json scales = json::array(), counts = json::array();
  for (const auto& s : diag.samples) {
    scales.push_back(rational_json(s.r));
    counts.push_back(s.count);
  }
  return {{"slope", diag.slope},
          {"intercept", diag.intercept},
          {"residual_norm", diag.residual_norm},
          {"r_min", rational_json(diag.r_min)},
          {"r_max", rational_json(diag.r_max)},
          {"exact_scales", diag.exact_scales},
          {"scales", scales},
          {"counts", counts},
          {"table", table({"log_inv_r", "log_count"}, rows)}};
}

inline json assouad_json(const AssouadReport& rep) {
  return {{"probes", rep.probes.size()},
          {"max_exponent", rep.max_exponent ? json(*rep.max_exponent) : json(nullptr)},
          {"warnings", rep.warnings}};
}

inline json run_estimate_dim(Context& ctx) {
  const auto& p = ctx.params;
  const bool construction = p.has("k") || p.has("depth");
  if (construction) {
    const MoranSet set = construction_from(p);
    if (set.depth < 3) throw domain_error("estimate-dim needs depth >= 3");
    // One scale per level by default, so the meshes are the interval lengths.
    const int scales = to_int(p.integer("scales", set.depth), "scales");
    const Rational r_max = p.rational("r-max", set.levels[1].front().length());
    const Rational r_min = p.rational("r-min", set.finest().front().length());
    json out = diagnostics_json(box_dimension_estimate(set, r_min, r_max, scales));
    if (set.schedule.kind() == RatioSchedule::Kind::constant)
      out["moran_dimension"] = real_json(moran_dimension(set.schedule.constant_ratio()).value);
    if (p.flag("probe")) out["assouad"] = assouad_json(assouad_probe(set, aligned_samples(set)));
    ctx.statistics["scales"] = scales;
    return out;
  }
  if (p.flag("probe")) throw usage_error("--probe needs a construction (--k, --eps, --depth)");
  const int scales = to_int(p.integer("scales", 8), "scales");
  const PointRows rows = source_rows(p);
  const Rational r_min = p.rational("r-min"), r_max = p.rational("r-max");
  ctx.statistics["scales"] = scales;
  if (rows.dimension == 1) {
    std::vector<Rational> pts;
    for (const auto& r : rows.rows) pts.push_back(r[0]);
    return diagnostics_json(box_dimension_estimate(PointSet1D(std::move(pts)), r_min, r_max, scales));
  }
  return diagnostics_json(box_dimension_estimate(PointSetD(rows.dimension, rows.rows), r_min, r_max, scales));
}

inline json run_bounds(Context& ctx) {
  const auto& p = ctx.params;
  const int chosen = p.flag("thm1") + p.flag("thm3") + p.flag("thm4") + p.flag("moran");
  if (chosen != 1) throw usage_error("give exactly one of --thm1, --thm3, --thm4, --moran");
  BoundValue v;
  if (p.flag("thm1")) v = thm1_upper_bound(p.integer("k"), p.rational("eps"));
  if (p.flag("thm3")) v = thm3_lower_bound(p.integer("k"), p.rational("eps"));
  if (p.flag("thm4"))
    v = thm4_upper_bound(p.integer("d"), p.integer("m"), p.integer("k"), p.rational("eps"), p.flag("quotient"));
  if (p.flag("moran")) v = moran_dimension(p.rational("c"));
  json out = {{"formula", to_string(v.formula)}, {"value", real_json(v.value)}};
  if (v.k) out["k"] = *v.k;
  if (v.d) out["d"] = *v.d;
  if (v.m) out["m"] = *v.m;
  if (v.epsilon) out["epsilon"] = rational_json(*v.epsilon);
  // moran echoes c; thm3 carries the inverse limit ratio 1/c_inf.
  if (v.ratio) out[v.formula == BoundFormula::moran ? "c" : "inverse_ratio"] = rational_json(*v.ratio);
  return out;
}

inline PatchMetric metric_from(const std::string& s) {
  if (s == "euclidean") return PatchMetric::euclidean;
  if (s == "chebyshev") return PatchMetric::chebyshev;
  throw usage_error("unknown metric '" + s + "'");
}

inline json run_patch(Context& ctx) {
  const auto& p = ctx.params;
  const int k = to_int(p.integer("k"), "k");
  const PointRows rows = source_rows(p);
  const Orientation e = orientation_from(p, rows.dimension);
  if (p.flag("assign")) {
    if (p.has("eps")) throw usage_error("--assign reports the distortion; drop --eps");
    const PatchFit fit = patch_distortion(rows.rows, e, k, metric_from(p.text("metric", "euclidean")));
    json out = {{"metric", to_string(fit.metric)}, {"epsilon", fit.epsilon}, {"spec", patch_spec_json(fit.spec)}};
    if (fit.exact_epsilon) out["exact_epsilon"] = rational_json(*fit.exact_epsilon);
    return out;
  }
  if (p.has("metric")) throw usage_error("--metric applies to --assign only");
  const Rational eps = p.rational("eps");
  PatchSearchOptions opt;
  opt.threads = ctx.threads;
  opt.multi_limit = static_cast<std::size_t>(p.integer("multi-limit", static_cast<long>(opt.multi_limit)));
  const PointSetD set(rows.dimension, rows.rows);
  const auto w = contains_patch(set, k, eps, e, opt);
  json out = {{"k", k}, {"epsilon", rational_json(eps)}, {"orientation", orientation_json(e)}, {"found", w.has_value()}};
  if (w) {
    json pts = json::array();
    for (auto i : w->matching) pts.push_back(point_json(set[i]));
    out["witness"] = {{"spec", patch_spec_json(w->spec)}, {"matching", w->matching}, {"points", pts},
                      {"distortion", w->epsilon}};
  }
  ctx.statistics["points"] = set.size();
  return out;
}

inline json run_sweep(Context& ctx) {
  const auto& p = ctx.params;
  const int k = to_int(p.integer("k"), "k");
  const Rational eps = p.rational("eps");
  const PointSetD set = source_set_d(p);
  if (set.dimension() != 2) throw domain_error("sweep directions are planar; need a 2D set");
  const auto dirs = equally_spaced_directions(to_int(p.integer("directions", 32), "directions"));
  std::vector<Orientation> orientations;
  std::vector<Real> angles;
  for (const auto& [theta, e] : dirs) {
    angles.push_back(theta);
    orientations.push_back(e);
  }
  PatchSearchOptions opt;
  opt.threads = ctx.threads;
  const SweepReport rep = direction_sweep(set, k, eps, orientations, opt, angles);
  json rows = json::array();
  for (std::size_t j = 0; j < rep.entries.size(); ++j) {
    const auto& en = rep.entries[j];
    rows.push_back({j, static_cast<double>(*en.angle), en.witness.has_value(),
                    en.witness ? json(rational_json(en.witness->spec.delta)) : json(nullptr)});
  }
  ctx.statistics["points"] = set.size();
  return {{"k", k},
          {"epsilon", rational_json(eps)},
          {"with_witness", rep.with_witness},
          {"without_witness", rep.without_witness},
          {"table", table({"direction", "angle", "found", "delta"}, rows)}};
}

inline json run_audit(Context& ctx) {
  const auto& p = ctx.params;
  const int k = to_int(p.integer("k"), "k");
  const Rational eps = p.rational("eps");
  const PointSetD set = source_set_d(p);
  const Orientation e = orientation_from(p, set.dimension());
  Cube cube{PointD(set.dimension(), Rational(0)), p.rational("side", Rational(1))};
  if (p.has("corner")) cube.corner = p.list("corner");
  const auto audit = grid_deletion_audit(set, cube, k, eps, e, to_int(p.integer("levels", 3), "levels"));
  json rows = json::array(), details = json::array();
  for (const auto& l : audit.levels) {
    rows.push_back({l.level, l.bound, l.observed});
    details.push_back({{"level", l.level},
                       {"parents", l.parents},
                       {"max_in_parent", l.max_in_parent},
                       {"fully_occupied_collections", l.fully_occupied_collections}});
  }
  return {{"d", audit.d},
          {"m", audit.m},
          {"k", audit.k},
          {"epsilon", rational_json(audit.epsilon)},
          {"epsilon_prime", real_json(audit.epsilon_prime)},
          {"q", audit.q.str()},
          {"cubes_per_side", audit.cubes_per_side},
          {"faces", audit.faces},
          {"deletions_per_face", audit.deletions_per_face},
          {"per_parent_bound", audit.per_parent_bound},
          {"within_bound", audit.within_bound()},
          {"levels", details},
          {"table", table({"level", "bound", "observed"}, rows)}};
}

}  // namespace detail

/// Validates against the schema, then dispatches. Throws the library error
/// classes; map them with exit_code_for.
inline RunReport run_command(const CommandRequest& request) {
  const CommandSpec* spec = find_command(request.subcommand);
  if (!spec) throw usage_error("unknown subcommand '" + request.subcommand + "'");
  const auto start = std::chrono::steady_clock::now();
  detail::Context ctx{detail::Params(*spec, request.parameters), resolve_threads(request.threads), request.seed};

  RunReport report;
  report.subcommand = request.subcommand;
  report.parameters = request.parameters;
  report.seed = request.seed;
  const std::string& s = request.subcommand;
  if (s == "detect") report.payload = detail::run_detect(ctx);
  if (s == "search-rk") report.payload = detail::run_search_rk(ctx);
  if (s == "construct") report.payload = detail::run_construct(ctx);
  if (s == "certify") report.payload = detail::run_certify(ctx);
  if (s == "estimate-dim") report.payload = detail::run_estimate_dim(ctx);
  if (s == "bounds") report.payload = detail::run_bounds(ctx);
  if (s == "patch") report.payload = detail::run_patch(ctx);
  if (s == "sweep") report.payload = detail::run_sweep(ctx);
  if (s == "audit") report.payload = detail::run_audit(ctx);
  report.statistics = ctx.statistics;
  if (request.timing)
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

inline bool is_tabular(const RunReport& r) { return r.payload.is_object() && r.payload.contains("table"); }

namespace detail {

inline std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_real(v.get<double>(), 12);
  if (v.is_number()) return v.dump();
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace detail

/// Header row, then the table rows in payload order.
inline void emit_csv(const RunReport& report, std::ostream& out) {
  if (!is_tabular(report)) throw domain_error(report.subcommand + " report is not tabular");
  const json& t = report.payload.at("table");
  const auto row_out = [&](const json& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::csv_cell(row[i]);
    out << "\n";
  };
  row_out(t.at("columns"));
  for (const auto& row : t.at("rows")) row_out(row);
}

inline void emit_csv(const RunReport& report, const std::string& path) {
  if (!is_tabular(report)) throw domain_error(report.subcommand + " report is not tabular");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw domain_error("cannot write '" + path + "'");
  emit_csv(report, out);
}

namespace detail {

inline std::string human_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_real(v.get<double>(), 12);
  return v.dump();
}

inline bool all_scalar(const json& a) {
  for (const auto& x : a)
    if (x.is_structured()) return false;
  return true;
}

inline void human_value(std::ostream& out, const std::string& key, const json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (v.is_object() && v.contains("columns") && v.contains("rows")) {
    out << pad << key << ":\n" << pad << "  ";
    for (std::size_t i = 0; i < v["columns"].size(); ++i) out << (i ? "  " : "") << human_scalar(v["columns"][i]);
    out << "\n";
    for (const auto& row : v["rows"]) {
      out << pad << "  ";
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "  " : "") << (row[i].is_null() ? "-" : human_scalar(row[i]));
      out << "\n";
    }
  } else if (v.is_object()) {
    out << pad << key << ":\n";
    for (const auto& [k, x] : v.items()) human_value(out, k, x, indent + 2);
  } else if (v.is_array() && all_scalar(v)) {
    out << pad << key << ": ";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << human_scalar(v[i]);
    out << "\n";
  } else if (v.is_array()) {
    out << pad << key << ":\n";
    for (std::size_t i = 0; i < v.size(); ++i) human_value(out, "[" + std::to_string(i) + "]", v[i], indent + 2);
  } else {
    out << pad << key << ": " << human_scalar(v) << "\n";
  }
}

}  // namespace detail

inline void emit_human(const RunReport& report, std::ostream& out) {
  out << "apavoid " << report.version << " " << report.subcommand << "\n";
  for (const auto& [k, v] : report.payload.items()) detail::human_value(out, k, v, 0);
  if (!report.statistics.empty()) detail::human_value(out, "statistics", report.statistics, 0);
  if (report.seed) out << "seed: " << *report.seed << "\n";
  if (report.wall_seconds) out << "wall_seconds: " << format_real(*report.wall_seconds, 6) << "\n";
}

inline void emit_json(const RunReport& report, std::ostream& out) { out << report_json(report).dump(2) << "\n"; }

/// 0 success; 2 domain; 3 resource; 64 usage; 65 malformed input; 1 anything else.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const usage_error*>(&e)) return 64;
  if (dynamic_cast<const parse_error*>(&e)) return 65;
  if (dynamic_cast<const resource_error*>(&e)) return 3;
  if (dynamic_cast<const std::domain_error*>(&e)) return 2;
  return 1;
}

}  // namespace apavoid
