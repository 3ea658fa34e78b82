#include "infops/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "infops/attribution.hpp"
#include "infops/campaign.hpp"
#include "infops/centrality.hpp"
#include "infops/community.hpp"
#include "infops/diffusion.hpp"
#include "infops/error.hpp"
#include "infops/graph.hpp"
#include "infops/hawkes.hpp"
#include "infops/moderation.hpp"
#include "infops/objective.hpp"
#include "infops/opinion.hpp"
#include "infops/random.hpp"

namespace infops {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"centrality",        "communities",  "simulate",  "opinions",
                                              "optimize-seeds",    "optimize-campaign", "run-campaign",
                                              "shadowban",         "hawkes-damp",  "attribute"};
  return names;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// RunConfig

RunConfig::RunConfig(json doc) : doc_(std::move(doc)) {
  if (!doc_.is_object()) throw ParseError("run config must be a JSON object", 0);
}

RunConfig RunConfig::parse(std::string_view text) {
  try {
    return RunConfig(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid run config: ") + e.what(), 0);
  }
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void RunConfig::set(std::string_view dotted, json value) {
  json* node = &doc_;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key(dotted.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (key.empty()) throw InvalidArgument("empty key in config path '" + std::string(dotted) + "'");
    if (dot == std::string_view::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    json& child = (*node)[key];
    if (!child.is_object()) child = json::object();
    node = &child;
    start = dot + 1;
  }
}

std::uint64_t RunConfig::seed() const {
  const auto it = doc_.find("seed");
  return it != doc_.end() && it->is_number_unsigned() ? it->get<std::uint64_t>() : 0;
}

fs::path RunConfig::output_dir() const {
  const auto it = doc_.find("output_dir");
  return it != doc_.end() && it->is_string() ? fs::path(it->get<std::string>()) : fs::path("out");
}

std::string RunConfig::format() const {
  const auto it = doc_.find("format");
  return it != doc_.end() && it->is_string() ? it->get<std::string>() : "json";
}

std::vector<std::string> RunConfig::stages() const {
  std::vector<std::string> out;
  const auto it = doc_.find("stages");
  if (it == doc_.end()) return out;
  if (it->is_string()) return {it->get<std::string>()};
  if (it->is_array()) {
    for (const auto& s : *it) out.push_back(s.is_string() ? s.get<std::string>() : s.dump());
  }
  return out;
}

std::string RunConfig::hash() const {
  json canon = doc_;
  canon.erase("output_dir");
  return sha256_hex(canon.dump());
}

// ---------------------------------------------------------------------------
// Config resolution. The same code path collects violations for validate()
// and produces the parameters used by run().

namespace {

std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

class Section {
 public:
  Section(const json& doc, std::string name, std::vector<std::string>& errors)
      : name_(std::move(name)), errors_(errors) {
    const auto it = doc.find(name_);
    if (it != doc.end()) {
      if (it->is_object()) {
        sec_ = &*it;
      } else {
        fail("section must be a JSON object");
      }
    }
  }

  bool has(const std::string& key) const { return sec_ && sec_->contains(key); }
  const json& raw(const std::string& key) const { return sec_->at(key); }
  const std::string& name() const { return name_; }
  std::size_t error_count() const { return errors_.size(); }

  void fail(const std::string& msg) const { errors_.push_back(name_ + ": " + msg); }

  double number(const std::string& key, double def, double lo, double hi, bool lo_open = false,
                bool hi_open = false) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number()) {
      fail(key + " must be a number");
      return def;
    }
    const double x = v.get<double>();
    const bool ok = (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
    if (!ok || !std::isfinite(x)) {
      fail(key + " = " + fmt(x) + " must lie in " + (lo_open ? "(" : "[") + fmt(lo) + ", " + fmt(hi) +
           (hi_open ? ")" : "]"));
      return def;
    }
    return x;
  }

  std::size_t count(const std::string& key, std::size_t def, std::size_t min = 0) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min)) {
      fail(key + " must be an integer >= " + std::to_string(min));
      return def;
    }
    return v.get<std::size_t>();
  }

  std::string choice(const std::string& key, const std::string& def, std::initializer_list<const char*> options) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      for (const char* o : options) {
        if (s == o) return s;
      }
    }
    std::string list;
    for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
    fail(key + " must be one of " + list + ", got " + v.dump());
    return def;
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    if (!raw(key).is_boolean()) {
      fail(key + " must be true or false");
      return def;
    }
    return raw(key).get<bool>();
  }

  std::vector<NodeId> nodes(const std::string& key, std::size_t n, std::vector<NodeId> def) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    std::vector<NodeId> out;
    if (!v.is_array()) {
      fail(key + " must be an array of node ids");
      return def;
    }
    std::set<NodeId> seen;
    for (const auto& x : v) {
      if (!x.is_number_unsigned() || x.get<std::size_t>() >= n) {
        fail(key + " contains " + x.dump() + ", not a node id below " + std::to_string(n));
        return def;
      }
      if (!seen.insert(x.get<NodeId>()).second) {
        fail(key + " lists node " + x.dump() + " twice");
        return def;
      }
      out.push_back(x.get<NodeId>());
    }
    return out;
  }

  std::optional<Objective> objective(const std::string& key, const std::string& def) const {
    std::string text = def;
    if (has(key)) {
      if (!raw(key).is_string()) {
        fail(key + " must be an objective name");
        return std::nullopt;
      }
      text = raw(key).get<std::string>();
    }
    try {
      return Objective::parse(text);
    } catch (const Error& e) {
      fail(e.what());
      return std::nullopt;
    }
  }

 private:
  std::string name_;
  std::vector<std::string>& errors_;
  const json* sec_ = nullptr;
};

struct LoadedGraph {
  Graph graph;
  std::optional<Partition> truth;
  std::string source;
};

std::optional<LoadedGraph> resolve_graph(const RunConfig& config, std::vector<std::string>& errors) {
  if (!config.doc().contains("graph")) {
    errors.push_back("graph: section missing (give \"path\" or \"generator\")");
    return std::nullopt;
  }
  Section s(config.doc(), "graph", errors);
  const std::size_t before = s.error_count();
  const double rate = s.number("rate", 1.0, 0.0, INFINITY, true);
  const std::uint64_t gseed = s.has("seed") && s.raw("seed").is_number_unsigned()
                                  ? s.raw("seed").get<std::uint64_t>()
                                  : derive_seed(config.seed(), 0);
  std::optional<Graph> built;
  std::optional<Partition> truth;
  std::string source;
  try {
    if (s.has("path")) {
      if (!s.raw("path").is_string()) {
        s.fail("path must be a string");
        return std::nullopt;
      }
      const auto path = s.raw("path").get<std::string>();
      if (!fs::exists(path)) {
        s.fail("file '" + path + "' does not exist");
        return std::nullopt;
      }
      built = load_edge_list_file(path);
      source = "file";
    } else if (s.has("generator")) {
      const auto kind = s.choice("generator", "", {"planted", "erdos-renyi", "tree", "complete", "path", "star"});
      if (kind == "planted") {
        const auto k = s.count("k", 3, 1);
        const auto size = s.count("size", 15, 1);
        const double p_in = s.number("p_in", 0.9, 0.0, 1.0);
        const double p_out = s.number("p_out", 0.02, 0.0, 1.0);
        if (s.error_count() == before && !(p_out < p_in)) s.fail("p_out must be below p_in");
        if (s.error_count() != before) return std::nullopt;
        auto planted = generate_planted_partition(k, size, p_in, p_out, gseed);
        built = std::move(planted.graph);
        truth = std::move(planted.truth);
      } else if (kind == "erdos-renyi") {
        const auto n = s.count("n", 20, 1);
        const double p = s.number("p", 0.1, 0.0, 1.0);
        const bool directed = s.flag("directed", false);
        if (s.error_count() != before) return std::nullopt;
        built = generate_erdos_renyi(n, p, gseed, directed);
      } else if (kind == "tree") {
        const auto degree = s.count("degree", 3, 1);
        const auto depth = s.count("depth", 3, 0);
        if (s.error_count() != before) return std::nullopt;
        built = generate_regular_tree(degree, depth);
      } else if (kind == "complete" || kind == "path") {
        const auto n = s.count("n", 10, 1);
        if (s.error_count() != before) return std::nullopt;
        built = kind == "complete" ? complete_graph(n) : path_graph(n);
      } else if (kind == "star") {
        const auto leaves = s.count("leaves", 5, 1);
        if (s.error_count() != before) return std::nullopt;
        built = star_graph(leaves);
      } else {
        return std::nullopt;
      }
      source = kind;
    } else {
      s.fail("needs \"path\" or \"generator\"");
      return std::nullopt;
    }
  } catch (const Error& e) {
    s.fail(e.what());
    return std::nullopt;
  }
  if (s.error_count() != before) return std::nullopt;
  if (rate != 1.0) {
    std::vector<double> rates(built->edge_count());
    for (std::size_t e = 0; e < rates.size(); ++e) rates[e] = built->edge(e).rate * rate;
    built = built->with_rates(rates);
  }
  return LoadedGraph{std::move(*built), std::move(truth), std::move(source)};
}

struct OpinionSetup {
  OpinionState theta0;
  ShiftFunction shift;
  StubbornSet stubborn;
  double T = 10.0;
  IntegrationOptions integration;
  std::optional<std::pair<double, double>> display;
};

OpinionSetup resolve_opinions(const RunConfig& config, const Graph& g, std::vector<std::string>& errors) {
  Section s(config.doc(), "opinions", errors);
  OpinionSetup o;
  const std::size_t n = g.node_count();
  o.T = s.number("T", 10.0, 0.0, INFINITY);
  o.integration.h = s.number("h", 0.01, 0.0, INFINITY, true);
  o.integration.sample_every = s.count("sample_every", 10, 1);
  o.integration.control_every = s.count("control_every", 10, 1);

  o.theta0.assign(n, 0.5);
  if (!s.has("theta0")) {
    Rng rng(derive_seed(config.seed(), 100));
    for (auto& x : o.theta0) x = rng.uniform();
  } else if (const json& t = s.raw("theta0"); t.is_array()) {
    if (t.size() != n) {
      s.fail("theta0 has " + std::to_string(t.size()) + " entries for " + std::to_string(n) + " nodes");
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!t[i].is_number() || !(t[i].get<double>() >= 0.0 && t[i].get<double>() <= 1.0)) {
          s.fail("theta0[" + std::to_string(i) + "] must lie in [0, 1]");
          break;
        }
        o.theta0[i] = t[i].get<double>();
      }
    }
  } else if (t.is_object() && t.contains("uniform") && t["uniform"].is_array() && t["uniform"].size() == 2 &&
             t["uniform"][0].is_number() && t["uniform"][1].is_number()) {
    const double lo = t["uniform"][0].get<double>(), hi = t["uniform"][1].get<double>();
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0)) {
      s.fail("theta0.uniform bounds must satisfy 0 <= lo <= hi <= 1");
    } else {
      Rng rng(derive_seed(config.seed(), 100));
      for (auto& x : o.theta0) x = rng.uniform(lo, hi);
    }
  } else {
    s.fail("theta0 must be an array or {\"uniform\": [lo, hi]}");
  }

  if (s.has("shift")) {
    const json wrapped{{"opinions.shift", s.raw("shift")}};
    Section shift_sec(wrapped, "opinions.shift", errors);
    const auto kind = shift_sec.choice("kind", "linear", {"linear", "bounded"});
    const double omega = shift_sec.number("omega", 1.0, 0.0, INFINITY, true);
    const double eps = shift_sec.number("epsilon", 0.2, 0.0, 1.0);
    o.shift = kind == "bounded" ? ShiftFunction::bounded(omega, eps) : ShiftFunction::linear(omega);
  }

  if (s.has("stubborn")) {
    const json& st = s.raw("stubborn");
    if (!st.is_object()) {
      s.fail("stubborn must map node ids to pinned opinions");
    } else {
      for (const auto& [key, value] : st.items()) {
        std::size_t id = 0;
        const auto r = std::from_chars(key.data(), key.data() + key.size(), id);
        if (r.ec != std::errc{} || r.ptr != key.data() + key.size() || id >= n) {
          s.fail("stubborn key '" + key + "' is not a node id");
        } else if (!value.is_number() || !(value.get<double>() >= 0.0 && value.get<double>() <= 1.0)) {
          s.fail("stubborn opinion of node " + key + " must lie in [0, 1]");
        } else {
          o.stubborn.pinned[id] = value.get<double>();
          o.theta0[id] = value.get<double>();
        }
      }
    }
  }

  if (s.has("display")) {
    const json& d = s.raw("display");
    if (d.is_array() && d.size() == 2 && d[0].is_number() && d[1].is_number() &&
        d[0].get<double>() != d[1].get<double>()) {
      o.display = std::pair{d[0].get<double>(), d[1].get<double>()};
    } else {
      s.fail("display must be [lo, hi] with lo != hi");
    }
  }
  return o;
}

std::optional<CampaignPlan> plan_from(const Section& s, const Graph& g) {
  if (!s.has("plan")) return std::nullopt;
  const json& p = s.raw("plan");
  try {
    CampaignPlan plan;
    if (p.is_string()) {
      std::ifstream in(p.get<std::string>(), std::ios::binary);
      if (!in) {
        s.fail("plan file '" + p.get<std::string>() + "' cannot be opened");
        return std::nullopt;
      }
      std::ostringstream buf;
      buf << in.rdbuf();
      plan = CampaignPlan::from_json(buf.str());
    } else {
      plan = CampaignPlan::from_json(p.dump());
    }
    plan.validate(g);
    return plan;
  } catch (const Error& e) {
    s.fail(std::string("plan: ") + e.what());
    return std::nullopt;
  }
}

// Everything a run needs, resolved from the config.
struct Resolved {
  std::vector<std::string> stages;
  std::optional<LoadedGraph> graph;
  std::optional<OpinionSetup> opinions;
};

Resolved resolve(const RunConfig& config, std::vector<std::string>& errors) {
  Resolved r;
  const auto& doc = config.doc();
  if (doc.contains("seed") && !doc["seed"].is_number_unsigned()) errors.push_back("seed must be an unsigned integer");
  if (doc.contains("output_dir") && !doc["output_dir"].is_string()) errors.push_back("output_dir must be a string");
  if (const auto f = config.format(); f != "json" && f != "csv") errors.push_back("format must be json or csv");

  const auto requested = config.stages();
  if (requested.empty()) errors.push_back("stages: no stage selected");
  for (const auto& s : requested) {
    if (std::find(stage_names().begin(), stage_names().end(), s) == stage_names().end()) {
      errors.push_back("stages: unknown stage '" + s + "'");
    }
  }
  for (const auto& s : stage_names()) {
    if (std::find(requested.begin(), requested.end(), s) != requested.end()) r.stages.push_back(s);
  }
  auto wants = [&](const char* s) { return std::find(r.stages.begin(), r.stages.end(), s) != r.stages.end(); };

  r.graph = resolve_graph(config, errors);
  if (!r.graph) return r;
  const Graph& g = r.graph->graph;
  const std::size_t n = g.node_count();
  if (n == 0) {
    errors.push_back("graph: no nodes");
    return r;
  }

  if (wants("centrality")) {
    Section s(doc, "centrality", errors);
    if (s.has("measures")) {
      static const std::set<std::string> known{"degree",      "h-index",  "closeness", "betweenness",
                                               "eigenvector", "pagerank", "bonacich",  "rumor"};
      const json& m = s.raw("measures");
      if (!m.is_array() || m.empty()) s.fail("measures must be a nonempty array");
      for (const auto& x : m) {
        if (!x.is_string() || !known.contains(x.get<std::string>())) s.fail("unknown measure " + x.dump());
        if (x == "rumor" && !s.has("infected")) s.fail("rumor centrality needs \"infected\"");
        if (x == "bonacich" && !s.has("alpha")) s.fail("bonacich centrality needs \"alpha\"");
      }
    }
    s.choice("direction", "total", {"in", "out", "total"});
    s.number("damping", 0.85, 0.0, 1.0, false, true);
    s.nodes("infected", n, {});
    if (s.has("alpha")) {
      const double alpha = s.number("alpha", 0.0, 0.0, INFINITY);
      const double rho = spectral_radius(binary_adjacency(g));
      if (rho > 0.0 && !(alpha * rho < 1.0)) {
        s.fail("alpha = " + fmt(alpha) + " must be below 1/rho(A) = " + fmt(1.0 / rho));
      }
    }
    s.number("beta", 1.0, -INFINITY, INFINITY);
  }

  if (wants("communities")) {
    Section s(doc, "communities", errors);
    const auto method = s.choice("method", "spectral", {"spectral", "louvain"});
    const auto kmin = s.count("k_min", 2, 1);
    const auto kmax = s.count("k_max", std::min<std::size_t>(8, n), 1);
    const auto k = s.count("k", 0, 0);
    if (method == "spectral") {
      if (k > n) s.fail("k exceeds the node count");
      if (k == 0 && (kmin > kmax || kmax > n)) s.fail("need k_min <= k_max <= node count");
    }
    if (g.edge_count() == 0) s.fail("modularity is undefined on a graph without edges");
  }

  if (wants("simulate")) {
    Section s(doc, "simulate", errors);
    const auto model = s.choice("model", "ic", {"ic", "lt", "sir", "sir-ode", "hawkes"});
    s.nodes("seeds", n, {0});
    s.number("p", 0.1, 0.0, 1.0);
    s.count("steps", 50, 1);
    s.number("beta", 0.5, 0.0, INFINITY);
    s.number("gamma", 0.2, 0.0, INFINITY);
    s.number("T", 10.0, 0.0, INFINITY);
    s.number("dt", 0.01, 0.0, INFINITY, true);
    s.number("i0", 0.01, 0.0, 1.0);
    if (model == "hawkes") {
      HawkesParams hp{s.number("mu", 0.1, 0.0, INFINITY), s.number("alpha", 0.1, 0.0, INFINITY),
                      s.number("beta_decay", 1.0, 0.0, INFINITY, true)};
      try {
        check_hawkes_stability(g, hp);
      } catch (const Error& e) {
        s.fail(e.what());
      }
    }
  }

  const bool needs_opinions = wants("opinions") || wants("optimize-campaign") || wants("run-campaign") ||
                              wants("shadowban") || wants("attribute");
  if (needs_opinions) r.opinions = resolve_opinions(config, g, errors);

  if (wants("optimize-seeds")) {
    Section s(doc, "optimize-seeds", errors);
    const auto method = s.choice("method", "greedy", {"greedy", "degree-discount"});
    const auto model = s.choice("model", "ic", {"ic", "lt"});
    s.count("budget", 3, 1);
    s.number("p", 0.1, 0.0, 1.0);
    s.count("replications", 1000, 1);
    if (method == "greedy" && model == "lt") {
      try {
        DiffusionParams::linear_threshold(g).validate(g);
      } catch (const Error& e) {
        s.fail(e.what());
      }
    }
  }

  bool plan_available = false;
  if (wants("optimize-campaign")) {
    Section s(doc, "optimize-campaign", errors);
    const auto agents = s.count("agents", 1, 1);
    const auto budget = s.count("budget", 3, 0);
    const auto method = s.choice("method", "auto", {"auto", "linear", "rollout"});
    s.number("agent_rate", 1.0, 0.0, INFINITY);
    s.count("rollout_steps", 100, 1);
    const auto obj = s.objective("objective", "final-mean");
    if (obj && !obj->on_opinions()) s.fail("objective must be final-mean or final-variance");
    if (budget > agents * n) s.fail("budget exceeds agents * node count");
    if (method == "linear") {
      if (obj && obj->kind != ObjectiveKind::FinalMean) s.fail("linear method supports final-mean only");
      if (r.opinions && r.opinions->shift.kind != ShiftKind::Linear) s.fail("linear method needs a linear shift");
    }
    if (s.has("policy")) {
      const json& p = s.raw("policy");
      const bool ok = p == "nudging" || (p.is_object() && p.contains("constant") && p["constant"].is_number() &&
                                         p["constant"].get<double>() >= 0.0 && p["constant"].get<double>() <= 1.0);
      if (!ok) s.fail("policy must be \"nudging\" or {\"constant\": c} with c in [0, 1]");
    }
    plan_available = true;
  }

  if (wants("run-campaign")) {
    Section s(doc, "run-campaign", errors);
    const auto obj = s.objective("objective", "final-mean");
    if (obj && !obj->on_opinions()) s.fail("objective must be final-mean or final-variance");
    if (s.has("plan")) {
      plan_available = plan_from(s, g).has_value() || plan_available;
    } else if (!plan_available) {
      s.fail("no campaign plan (set run-campaign.plan or add the optimize-campaign stage)");
    }
    s.number("T", r.opinions ? r.opinions->T : 10.0, 0.0, INFINITY);
  }

  if (wants("shadowban")) {
    Section s(doc, "shadowban", errors);
    s.number("budget", 1.0, 0.0, INFINITY);
    const auto obj = s.objective("objective", "final-variance-min");
    if (obj && !obj->on_opinions()) s.fail("objective must be final-mean or final-variance");
    s.flag("last_only", false);
    s.flag("with_campaign", false);
    s.number("T", r.opinions ? r.opinions->T : 10.0, 0.0, INFINITY);
  }

  if (wants("hawkes-damp")) {
    Section s(doc, "hawkes-damp", errors);
    HawkesParams hp{s.number("mu", 0.1, 0.0, INFINITY), s.number("alpha", 0.1, 0.0, INFINITY),
                    s.number("beta_decay", 1.0, 0.0, INFINITY, true)};
    s.number("damp", 0.5, 0.0, 1.0);
    s.number("T", 10.0, 0.0, INFINITY);
    s.count("replications", 200, 1);
    try {
      check_hawkes_stability(g, hp);
    } catch (const Error& e) {
      s.fail(e.what());
    }
  }

  if (wants("attribute")) {
    Section s(doc, "attribute", errors);
    const auto obj = s.objective("objective", "final-mean");
    if (obj && !obj->on_opinions()) s.fail("objective must be final-mean or final-variance");
    const auto mode = s.choice("mode", "exact", {"exact", "mc"});
    s.count("samples", 200, 1);
    s.number("T", r.opinions ? r.opinions->T : 10.0, 0.0, INFINITY);
    if (s.has("plan")) {
      if (auto plan = plan_from(s, g); plan && mode == "exact" && plan->agents.size() > kMaxExactActors) {
        s.fail("exact mode supports at most " + std::to_string(kMaxExactActors) + " agents");
      }
    } else if (!plan_available) {
      s.fail("no campaign plan (set attribute.plan, run-campaign.plan, or add optimize-campaign)");
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Execution

class Runner {
 public:
  Runner(const RunConfig& config, Resolved resolved, std::ostream* log)
      : config_(config),
        r_(std::move(resolved)),
        g_(r_.graph->graph),
        log_(log),
        hash_(config.hash()),
        seed_(config.seed()),
        out_(config.output_dir()),
        csv_(config.format() == "csv") {}

  RunResult execute() {
    RunResult result;
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) {
      result.exit_code = kExitStageFailed;
      result.error = "cannot create output directory " + out_.string() + ": " + ec.message();
      return result;
    }
    for (const auto& stage : r_.stages) {
      if (log_) *log_ << "[infops] stage " << stage << "\n";
      try {
        run_stage(stage);
      } catch (const std::exception& e) {
        result.exit_code = kExitStageFailed;
        result.failed_stage = stage;
        result.error = e.what();
        break;
      }
    }
    result.artifacts = artifacts_;
    write_manifest(result);
    return result;
  }

 private:
  Section section(const std::string& name) const { return Section(config_.doc(), name, scratch_); }

  std::uint64_t stage_seed(const std::string& stage) const {
    const auto it = std::find(stage_names().begin(), stage_names().end(), stage);
    return derive_seed(seed_, 1 + static_cast<std::uint64_t>(it - stage_names().begin()));
  }

  void write_file(const std::string& stage, const std::string& name, const std::string& content) {
    std::ofstream f(out_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + (out_ / name).string());
    f << content;
    if (!f) throw Error("write failed for " + (out_ / name).string());
    artifacts_.push_back({name, stage, sha256_hex(content)});
  }

  void write_json(const std::string& stage, const std::string& name, json doc) {
    doc["config_sha256"] = hash_;
    doc["seed"] = seed_;
    write_file(stage, name, doc.dump(2) + "\n");
  }

  std::string csv_header() const { return "# config_sha256=" + hash_ + " seed=" + std::to_string(seed_) + "\n"; }

  void write_manifest(const RunResult& result) {
    json doc;
    doc["config_sha256"] = hash_;
    doc["seed"] = seed_;
    doc["status"] = result.exit_code == kExitOk ? "ok" : "failed";
    if (!result.failed_stage.empty()) {
      doc["failed_stage"] = result.failed_stage;
      doc["error"] = result.error;
    }
    doc["graph"] = {{"nodes", g_.node_count()},
                    {"edges", g_.edge_count()},
                    {"source", r_.graph->source},
                    {"sha256", sha256_hex(format_edge_list(g_))}};
    doc["stages"] = r_.stages;
    doc["artifacts"] = json::array();
    for (const auto& a : artifacts_) doc["artifacts"].push_back({{"path", a.path}, {"stage", a.stage}, {"sha256", a.sha256}});
    std::ofstream f(out_ / "manifest.json", std::ios::binary | std::ios::trunc);
    f << doc.dump(2) << "\n";
  }

  double display(double x) const {
    if (!r_.opinions || !r_.opinions->display) return x;
    const auto [lo, hi] = *r_.opinions->display;
    return lo + (hi - lo) * x;
  }

  // Mean and quantile bands per sample, the plot-ready form of a trajectory.
  std::string quantile_csv(const OpinionTrajectory& traj) const {
    std::ostringstream out;
    out << csv_header() << "t,mean,variance,q05,q25,q50,q75,q95\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      std::vector<double> xs = traj.states[k];
      const auto stats = opinion_statistics(xs);
      std::sort(xs.begin(), xs.end());
      auto q = [&](double p) {
        const double pos = p * static_cast<double>(xs.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, xs.size() - 1);
        return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
      };
      const double scale = r_.opinions && r_.opinions->display
                               ? r_.opinions->display->second - r_.opinions->display->first
                               : 1.0;
      out << fmt(traj.times[k]) << ',' << fmt(display(stats.mean)) << ',' << fmt(stats.variance * scale * scale);
      for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) out << ',' << fmt(display(q(p)));
      out << '\n';
    }
    return out.str();
  }

  json trajectory_json(const OpinionTrajectory& traj) const {
    json doc;
    doc["times"] = traj.times;
    json states = json::array();
    for (const auto& st : traj.states) {
      json row = json::array();
      for (double x : st) row.push_back(display(x));
      states.push_back(std::move(row));
    }
    doc["states"] = std::move(states);
    if (!traj.agent_content.empty() && !traj.agent_content.front().empty()) {
      json content = json::array();
      for (const auto& c : traj.agent_content) {
        json row = json::array();
        for (double x : c) row.push_back(display(x));
        content.push_back(std::move(row));
      }
      doc["agent_content"] = std::move(content);
    }
    if (r_.opinions && r_.opinions->display) {
      doc["display"] = {r_.opinions->display->first, r_.opinions->display->second};
    }
    return doc;
  }

  void run_stage(const std::string& stage) {
    if (stage == "centrality") return centrality_stage();
    if (stage == "communities") return communities_stage();
    if (stage == "simulate") return simulate_stage();
    if (stage == "opinions") return opinions_stage();
    if (stage == "optimize-seeds") return seeds_stage();
    if (stage == "optimize-campaign") return optimize_campaign_stage();
    if (stage == "run-campaign") return run_campaign_stage();
    if (stage == "shadowban") return shadowban_stage();
    if (stage == "hawkes-damp") return hawkes_damp_stage();
    if (stage == "attribute") return attribute_stage();
    throw InvalidArgument("unknown stage " + stage);
  }

  void centrality_stage() {
    const auto s = section("centrality");
    std::vector<std::string> measures{"degree", "h-index", "closeness", "betweenness", "eigenvector", "pagerank"};
    if (s.has("measures")) measures = s.raw("measures").get<std::vector<std::string>>();
    const auto dir = s.choice("direction", "total", {"in", "out", "total"});
    std::vector<CentralityScores> results;
    for (const auto& m : measures) {
      if (m == "degree") {
        results.push_back(degree_centrality(
            g_, dir == "in" ? DegreeDirection::In : dir == "out" ? DegreeDirection::Out : DegreeDirection::Total));
      } else if (m == "h-index") {
        results.push_back(h_index(g_));
      } else if (m == "closeness") {
        results.push_back(closeness(g_));
      } else if (m == "betweenness") {
        results.push_back(betweenness(g_));
      } else if (m == "eigenvector") {
        results.push_back(eigenvector_centrality(g_));
      } else if (m == "pagerank") {
        results.push_back(pagerank(g_, s.number("damping", 0.85, 0.0, 1.0)));
      } else if (m == "bonacich") {
        results.push_back(bonacich(g_, s.number("alpha", 0.0, 0.0, INFINITY), s.number("beta", 1.0, -INFINITY, INFINITY)));
      } else if (m == "rumor") {
        const auto infected = s.nodes("infected", g_.node_count(), {});
        results.push_back(rumor_centrality(g_, infected));
      }
    }
    if (csv_) {
      std::ostringstream out;
      out << csv_header() << "node";
      for (const auto& r : results) out << ',' << r.measure;
      out << '\n';
      for (NodeId v = 0; v < g_.node_count(); ++v) {
        out << v;
        for (const auto& r : results) {
          out << ',';
          if (r.nodes.empty()) {
            out << fmt(r.values[v]);
          } else if (auto it = std::find(r.nodes.begin(), r.nodes.end(), v); it != r.nodes.end()) {
            out << fmt(r.values[static_cast<std::size_t>(it - r.nodes.begin())]);
          }
        }
        out << '\n';
      }
      write_file("centrality", "centrality.csv", out.str());
      return;
    }
    json doc;
    doc["results"] = json::array();
    for (const auto& r : results) {
      json entry{{"measure", r.measure}, {"params", r.params}, {"scores", r.values}};
      if (!r.nodes.empty()) entry["nodes"] = r.nodes;
      doc["results"].push_back(std::move(entry));
    }
    write_json("centrality", "centrality.json", std::move(doc));
  }

  void communities_stage() {
    const auto s = section("communities");
    const auto method = s.choice("method", "spectral", {"spectral", "louvain"});
    Partition p;
    json doc;
    doc["method"] = method;
    if (method == "louvain") {
      p = greedy_modularity(g_);
    } else if (const auto k = s.count("k", 0); k > 0) {
      p = spectral_clustering(g_, k, stage_seed("communities"));
    } else {
      const auto sel = select_k(g_, s.count("k_min", 2), s.count("k_max", std::min<std::size_t>(8, g_.node_count())),
                                stage_seed("communities"));
      p = sel.partition;
      doc["modularity_by_k"] = sel.scores;
    }
    doc["k"] = p.k;
    doc["modularity"] = modularity(g_, p);
    doc["labels"] = p.labels;
    if (r_.graph->truth) doc["nmi_vs_planted"] = normalized_mutual_information(p, *r_.graph->truth);
    if (csv_) {
      std::ostringstream out;
      out << csv_header() << "# k=" << p.k << " modularity=" << fmt(doc["modularity"].get<double>()) << "\n";
      out << "node,label\n";
      for (NodeId v = 0; v < p.labels.size(); ++v) out << v << ',' << p.labels[v] << '\n';
      write_file("communities", "partition.csv", out.str());
    } else {
      write_json("communities", "partition.json", std::move(doc));
    }
  }

  void write_cascade(const Cascade& c, const std::string& model) {
    if (csv_) {
      std::ostringstream out;
      out << csv_header() << "step,susceptible,infected,recovered\n";
      for (std::size_t t = 0; t < c.steps(); ++t) {
        const auto k = c.counts(t);
        out << t << ',' << k.susceptible << ',' << k.infected << ',' << k.recovered << '\n';
      }
      write_file("simulate", "cascade.csv", out.str());
      return;
    }
    json doc;
    doc["model"] = model;
    json times = json::array();
    for (const auto& a : c.activation_time) times.push_back(a ? json(*a) : json(nullptr));
    doc["activation_time"] = std::move(times);
    json counts = json::array();
    for (std::size_t t = 0; t < c.steps(); ++t) {
      const auto k = c.counts(t);
      counts.push_back({{"step", t}, {"susceptible", k.susceptible}, {"infected", k.infected}, {"recovered", k.recovered}});
    }
    doc["counts"] = std::move(counts);
    doc["reach"] = c.reach();
    doc["peak_infected"] = c.peak_infected();
    write_json("simulate", "cascade.json", std::move(doc));
  }

  void simulate_stage() {
    const auto s = section("simulate");
    const auto model = s.choice("model", "ic", {"ic", "lt", "sir", "sir-ode", "hawkes"});
    const auto seeds = s.nodes("seeds", g_.node_count(), {0});
    const auto seed = stage_seed("simulate");
    if (model == "ic") {
      const auto params = DiffusionParams::independent_cascade(g_, s.number("p", 0.1, 0.0, 1.0));
      write_cascade(simulate_ic(g_, params, seeds, seed), model);
    } else if (model == "lt") {
      write_cascade(simulate_lt(g_, DiffusionParams::linear_threshold(g_), seeds, seed), model);
    } else if (model == "sir") {
      write_cascade(simulate_sir_network(g_, s.number("beta", 0.5, 0.0, INFINITY), s.number("gamma", 0.2, 0.0, INFINITY),
                                         seeds, s.count("steps", 50), seed),
                    model);
    } else if (model == "sir-ode") {
      const double i0 = s.number("i0", 0.01, 0.0, 1.0);
      const auto series = simulate_sir_ode(s.number("beta", 0.5, 0.0, INFINITY), s.number("gamma", 0.2, 0.0, INFINITY),
                                           1.0 - i0, i0, 0.0, s.number("T", 10.0, 0.0, INFINITY),
                                           s.number("dt", 0.01, 0.0, INFINITY));
      std::ostringstream out;
      out << csv_header() << "t,s,i,r\n";
      for (const auto& p : series) out << fmt(p.t) << ',' << fmt(p.s) << ',' << fmt(p.i) << ',' << fmt(p.r) << '\n';
      write_file("simulate", "sir.csv", out.str());
    } else {
      const HawkesParams hp{s.number("mu", 0.1, 0.0, INFINITY), s.number("alpha", 0.1, 0.0, INFINITY),
                            s.number("beta_decay", 1.0, 0.0, INFINITY)};
      const auto log = simulate_hawkes(g_, hp, s.number("T", 10.0, 0.0, INFINITY), seed);
      std::ostringstream out;
      out << csv_header() << "time,node\n";
      for (const auto& e : log.events) out << fmt(e.time) << ',' << e.node << '\n';
      write_file("simulate", "events.csv", out.str());
      const auto summary = hawkes_total_events(log);
      write_json("simulate", "hawkes_summary.json",
                 {{"total_events", summary.count},
                  {"peak_rate", summary.peak_rate},
                  {"peak_start", summary.peak_start},
                  {"branching_ratio", hawkes_branching_ratio(g_, hp)}});
    }
  }

  void write_trajectory(const std::string& stage, const std::string& stem, const OpinionTrajectory& traj, json extra) {
    write_file(stage, stem + "_quantiles.csv", quantile_csv(traj));
    if (csv_) {
      std::ostringstream out;
      out << csv_header() << "t";
      for (NodeId v = 0; v < g_.node_count(); ++v) out << ",n" << v;
      out << '\n';
      for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << fmt(traj.times[k]);
        for (double x : traj.states[k]) out << ',' << fmt(display(x));
        out << '\n';
      }
      write_file(stage, stem + ".csv", out.str());
      if (!extra.empty()) write_json(stage, stem + "_summary.json", std::move(extra));
    } else {
      json doc = trajectory_json(traj);
      doc.update(extra);
      write_json(stage, stem + ".json", std::move(doc));
    }
  }

  void opinions_stage() {
    const auto& o = *r_.opinions;
    const auto traj = integrate(g_, o.theta0, o.shift, o.stubborn, {}, o.T, o.integration);
    const auto stats = opinion_statistics(traj.final_state());
    write_trajectory("opinions", "trajectory", traj, {{"final_mean", stats.mean}, {"final_variance", stats.variance}});
  }

  void seeds_stage() {
    const auto s = section("optimize-seeds");
    const auto method = s.choice("method", "greedy", {"greedy", "degree-discount"});
    const auto model = s.choice("model", "ic", {"ic", "lt"});
    const auto budget = s.count("budget", 3, 1);
    const double p = s.number("p", 0.1, 0.0, 1.0);
    const auto reps = s.count("replications", 1000, 1);
    const auto params =
        model == "ic" ? DiffusionParams::independent_cascade(g_, p) : DiffusionParams::linear_threshold(g_);
    SeedSelection sel = method == "greedy" ? greedy_seed_selection(g_, params, budget, reps, stage_seed("optimize-seeds"))
                                           : degree_discount(g_, budget, p);
    if (method != "greedy") {
      sel.spread = expected_spread(g_, params, sel.seeds, reps, stage_seed("optimize-seeds")).mean;
    }
    write_json("optimize-seeds", "seeds.json",
               {{"method", method},
                {"model", model},
                {"seeds", sel.seeds},
                {"marginal_gains", sel.marginal_gains},
                {"expected_spread", sel.spread}});
  }

  void optimize_campaign_stage() {
    const auto s = section("optimize-campaign");
    const auto& o = *r_.opinions;
    const auto agents = s.count("agents", 1, 1);
    const auto budget = s.count("budget", 3);
    const auto objective = *s.objective("objective", "final-mean");
    auto method = s.choice("method", "auto", {"auto", "linear", "rollout"});
    if (method == "auto") {
      method = o.shift.kind == ShiftKind::Linear && objective.kind == ObjectiveKind::FinalMean ? "linear" : "rollout";
    }
    const double rate = s.number("agent_rate", 1.0, 0.0, INFINITY);
    CampaignOptimum best;
    if (method == "linear") {
      LinearCampaignOptions opts;
      opts.agent_rate = rate;
      opts.stubborn = o.stubborn;
      best = optimize_targets_linear(g_, o.theta0, agents, budget, objective, o.shift, opts);
    } else {
      RolloutCampaignOptions opts;
      opts.agent_rate = rate;
      if (s.has("policy") && s.raw("policy").is_object()) {
        opts.policy = ConstantContent{s.raw("policy")["constant"].get<double>()};
      }
      opts.rollout_steps = s.count("rollout_steps", 100, 1);
      opts.run.integration = o.integration;
      opts.run.stubborn = o.stubborn;
      best = optimize_targets_rollout(g_, o.theta0, agents, budget, objective, o.shift, opts);
    }
    plan_ = best.plan;
    json doc = json::parse(best.plan.to_json());
    doc["objective"] = objective.name();
    doc["method"] = method;
    doc["value"] = best.value;
    doc["history"] = best.history;
    write_json("optimize-campaign", "plan.json", std::move(doc));
  }

  CampaignPlan plan_for(const std::string& stage) {
    const Section own = section(stage);
    if (auto p = plan_from(own, g_)) return *p;
    if (stage == "attribute") {
      if (auto p = plan_from(section("run-campaign"), g_)) return *p;
    }
    if (plan_) return *plan_;
    throw InvalidArgument(stage + ": no campaign plan available");
  }

  void run_campaign_stage() {
    const auto s = section("run-campaign");
    const auto& o = *r_.opinions;
    const auto objective = *s.objective("objective", "final-mean");
    const auto plan = plan_for("run-campaign");
    CampaignRunOptions opts{o.integration, o.stubborn};
    const double T = s.number("T", o.T, 0.0, INFINITY);
    const auto run = run_campaign(g_, o.theta0, plan, o.shift, objective, T, opts);
    const auto baseline = integrate(g_, o.theta0, o.shift, o.stubborn, {}, T, o.integration);
    write_trajectory("run-campaign", "campaign", run.trajectory,
                     {{"objective", objective.name()},
                      {"value", run.value},
                      {"baseline_value", evaluate(objective, baseline)}});
  }

  void shadowban_stage() {
    const auto s = section("shadowban");
    const auto& o = *r_.opinions;
    const auto objective = *s.objective("objective", "final-variance-min");
    const double budget = s.number("budget", 1.0, 0.0, INFINITY);
    ModerationOptions opts;
    opts.integration = o.integration;
    opts.stubborn = o.stubborn;
    if (s.flag("with_campaign", false)) {
      for (const auto& a : plan_for("run-campaign").agents) {
        if (const auto* c = std::get_if<ConstantContent>(&a.policy)) opts.agents.push_back({a.rate, a.targets, c->value});
      }
    }
    const double T = s.number("T", o.T, 0.0, INFINITY);
    const auto run = run_moderated(g_, o.theta0, o.shift, objective, budget, T, opts);
    const auto free_run = integrate(g_, o.theta0, o.shift, o.stubborn, opts.agents, T, o.integration);
    write_file("shadowban", "policy.csv", csv_header() + format_policy_csv(g_, run, s.flag("last_only", false)));
    write_json("shadowban", "moderation.json",
               {{"objective", objective.name()},
                {"budget", budget},
                {"value", run.value},
                {"unmoderated_value", evaluate(objective, free_run)},
                {"control_steps", run.policies.size()}});
  }

  void hawkes_damp_stage() {
    const auto s = section("hawkes-damp");
    const HawkesParams hp{s.number("mu", 0.1, 0.0, INFINITY), s.number("alpha", 0.1, 0.0, INFINITY),
                          s.number("beta_decay", 1.0, 0.0, INFINITY)};
    const double damp = s.number("damp", 0.5, 0.0, 1.0);
    const auto res = hawkes_damping(g_, hp, damp, s.number("T", 10.0, 0.0, INFINITY), s.count("replications", 200, 1),
                                    stage_seed("hawkes-damp"));
    write_json("hawkes-damp", "damping.json",
               {{"damp", damp},
                {"baseline_mean", res.baseline_mean},
                {"baseline_stderr", res.baseline_std_error},
                {"damped_mean", res.damped_mean},
                {"damped_stderr", res.damped_std_error}});
  }

  void attribute_stage() {
    const auto s = section("attribute");
    const auto& o = *r_.opinions;
    const auto objective = *s.objective("objective", "final-mean");
    const auto plan = plan_for("attribute");
    AttributionOptions opts;
    opts.mode = s.choice("mode", "exact", {"exact", "mc"}) == "mc" ? ShapleyMode::MonteCarlo : ShapleyMode::Exact;
    opts.samples = s.count("samples", 200, 1);
    opts.seed = stage_seed("attribute");
    opts.run = {o.integration, o.stubborn};
    const auto att = attribute_campaign(g_, o.theta0, plan, o.shift, objective, s.number("T", o.T, 0.0, INFINITY), opts);
    json doc = json::parse(att.to_json());
    doc["objective"] = objective.name();
    write_json("attribute", "attribution.json", std::move(doc));
  }

  const RunConfig& config_;
  Resolved r_;
  const Graph& g_;
  std::ostream* log_;
  std::string hash_;
  std::uint64_t seed_;
  fs::path out_;
  bool csv_;
  std::vector<Artifact> artifacts_;
  std::optional<CampaignPlan> plan_;
  mutable std::vector<std::string> scratch_;  // parameters were validated up front
};

}  // namespace

std::vector<std::string> validate(const RunConfig& config) {
  std::vector<std::string> errors;
  resolve(config, errors);
  return errors;
}

RunResult run(const RunConfig& config, std::ostream* log) {
  RunResult result;
  auto resolved = resolve(config, result.violations);
  if (!result.violations.empty()) {
    result.exit_code = kExitInvalid;
    return result;
  }
  return Runner(config, std::move(resolved), log).execute();
}

}  // namespace infops
