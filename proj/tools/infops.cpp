// infops command-line front end. Every subcommand is a pipeline run with a
// single stage; flags override the config file, which overrides defaults.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "infops/error.hpp"
#include "infops/pipeline.hpp"

namespace {

using nlohmann::json;

json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

json parse_list(const std::string& text) {
  json out = json::array();
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(parse_scalar(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

enum class Kind { Scalar, List, Flag };

struct Binding {
  std::string path;
  Kind kind;
  std::string text;
  bool flag = false;
  CLI::Option* option = nullptr;
};

struct Command {
  CLI::App* app = nullptr;
  std::string stage;  // empty for pipeline / validate
  std::vector<std::unique_ptr<Binding>> bindings;
  std::string graph;

  void bind(const std::string& flag, const std::string& path, const std::string& help, Kind kind = Kind::Scalar) {
    auto b = std::make_unique<Binding>();
    b->path = path;
    b->kind = kind;
    if (kind == Kind::Flag) {
      b->option = app->add_flag(flag, b->flag, help);
    } else {
      b->option = app->add_option(flag, b->text, help);
    }
    bindings.push_back(std::move(b));
  }

  void apply(infops::RunConfig& config) const {
    if (!graph.empty()) config.set("graph", json{{"path", graph}});
    for (const auto& b : bindings) {
      if (b->option->count() == 0) continue;
      switch (b->kind) {
        case Kind::Scalar: config.set(b->path, parse_scalar(b->text)); break;
        case Kind::List: config.set(b->path, parse_list(b->text)); break;
        case Kind::Flag: config.set(b->path, b->flag); break;
      }
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infops: network influence analysis, simulation and campaign/moderation optimization"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format;
  std::vector<std::string> overrides;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--set", overrides, "override a config field, e.g. --set opinions.T=20");
  app.add_flag("-q,--quiet", quiet, "no progress on stderr");

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& stage, const std::string& help) -> Command& {
    auto c = std::make_unique<Command>();
    c->app = app.add_subcommand(name, help);
    c->stage = stage;
    if (name != "validate" && name != "pipeline") {
      c->app->add_option("-g,--graph", c->graph, "edge-list file (src,dst[,rate] lines)");
    }
    commands.push_back(std::move(c));
    return *commands.back();
  };

  auto& cen = add("centrality", "centrality", "node centrality scores");
  cen.bind("--measures", "centrality.measures", "comma list: degree,h-index,closeness,betweenness,eigenvector,pagerank,bonacich,rumor", Kind::List);
  cen.bind("--direction", "centrality.direction", "degree direction: in, out, total");
  cen.bind("--damping", "centrality.damping", "PageRank damping");
  cen.bind("--alpha", "centrality.alpha", "Bonacich attenuation");
  cen.bind("--beta", "centrality.beta", "Bonacich scale");
  cen.bind("--infected", "centrality.infected", "infected node ids for rumor centrality", Kind::List);

  auto& com = add("communities", "communities", "community detection");
  com.bind("--method", "communities.method", "spectral or louvain");
  com.bind("--k", "communities.k", "fixed number of clusters (spectral)");
  com.bind("--k-min", "communities.k_min", "smallest k tried");
  com.bind("--k-max", "communities.k_max", "largest k tried");

  auto& sim = add("simulate", "simulate", "diffusion cascade, SIR or Hawkes simulation");
  sim.bind("--model", "simulate.model", "ic, lt, sir, sir-ode, hawkes");
  sim.bind("--seeds", "simulate.seeds", "seed node ids", Kind::List);
  sim.bind("--p", "simulate.p", "IC edge probability");
  sim.bind("--steps", "simulate.steps", "SIR network steps");
  sim.bind("--beta", "simulate.beta", "SIR infection rate");
  sim.bind("--gamma", "simulate.gamma", "SIR recovery rate");
  sim.bind("--mu", "simulate.mu", "Hawkes baseline");
  sim.bind("--alpha", "simulate.alpha", "Hawkes excitation");
  sim.bind("--beta-decay", "simulate.beta_decay", "Hawkes decay");
  sim.bind("--T", "simulate.T", "horizon");

  auto& op = add("opinions", "opinions", "opinion dynamics integration");
  op.bind("--T", "opinions.T", "horizon");
  op.bind("--step", "opinions.h", "RK4 step size h");
  op.bind("--shift", "opinions.shift.kind", "linear or bounded");
  op.bind("--omega", "opinions.shift.omega", "shift gain");
  op.bind("--epsilon", "opinions.shift.epsilon", "confidence bound");

  auto& os = add("optimize-seeds", "optimize-seeds", "influence-maximizing seed set");
  os.bind("--budget", "optimize-seeds.budget", "number of seeds");
  os.bind("--method", "optimize-seeds.method", "greedy or degree-discount");
  os.bind("--model", "optimize-seeds.model", "ic or lt");
  os.bind("--p", "optimize-seeds.p", "IC edge probability");
  os.bind("--replications", "optimize-seeds.replications", "Monte Carlo replications");

  auto& oc = add("optimize-campaign", "optimize-campaign", "greedy agent target assignment");
  oc.bind("--agents", "optimize-campaign.agents", "number of agents");
  oc.bind("--budget", "optimize-campaign.budget", "assignment budget");
  oc.bind("--objective", "optimize-campaign.objective", "final-mean[-max|-min], final-variance-max|min");
  oc.bind("--method", "optimize-campaign.method", "auto, linear, rollout");

  auto& rc = add("run-campaign", "run-campaign", "closed-loop campaign run from a plan");
  rc.bind("--plan", "run-campaign.plan", "plan JSON file");
  rc.bind("--objective", "run-campaign.objective", "objective");

  auto& sb = add("shadowban", "shadowban", "edge-visibility moderation run");
  sb.bind("--budget", "shadowban.budget", "suppression budget B");
  sb.bind("--objective", "shadowban.objective", "objective the platform optimizes");
  sb.bind("--last-only", "shadowban.last_only", "dump only the last policy", Kind::Flag);

  auto& hd = add("hawkes-damp", "hawkes-damp", "excitation damping experiment");
  hd.bind("--mu", "hawkes-damp.mu", "baseline");
  hd.bind("--alpha", "hawkes-damp.alpha", "excitation");
  hd.bind("--beta-decay", "hawkes-damp.beta_decay", "decay");
  hd.bind("--damp", "hawkes-damp.damp", "damping factor in [0, 1]");
  hd.bind("--T", "hawkes-damp.T", "horizon");
  hd.bind("--replications", "hawkes-damp.replications", "paired replications");

  auto& at = add("attribute", "attribute", "Shapley attribution of campaign agents");
  at.bind("--plan", "attribute.plan", "plan JSON file");
  at.bind("--objective", "attribute.objective", "objective");
  at.bind("--mode", "attribute.mode", "exact or mc");
  at.bind("--samples", "attribute.samples", "permutations in mc mode");

  auto& pl = add("pipeline", "", "run the stages listed in the config");
  pl.bind("--stages", "stages", "comma list of stages", Kind::List);
  auto& va = add("validate", "", "check a config without running it");
  va.bind("--stages", "stages", "comma list of stages", Kind::List);

  CLI11_PARSE(app, argc, argv);

  try {
    infops::RunConfig config;
    if (!config_path.empty()) config = infops::RunConfig::load(config_path);

    const Command* cmd = nullptr;
    for (const auto& c : commands) {
      if (c->app->parsed()) cmd = c.get();
    }
    if (!cmd->stage.empty()) config.set("stages", json::array({cmd->stage}));
    cmd->apply(config);
    if (cmd->app->get_name() == "pipeline" && !config.doc().contains("stages")) {
      config.set("stages", json::array({"centrality", "communities", "opinions", "optimize-campaign", "run-campaign",
                                        "attribute"}));
    }
    if (seed) config.set("seed", *seed);
    if (!out_dir.empty()) config.set("output_dir", out_dir);
    if (!format.empty()) config.set("format", format);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got '" << o << "'\n";
        return infops::kExitInvalid;
      }
      config.set(o.substr(0, eq), parse_scalar(o.substr(eq + 1)));
    }

    if (cmd->app->get_name() == "validate") {
      const auto report = infops::validate(config);
      for (const auto& v : report) std::cout << v << "\n";
      if (report.empty()) std::cout << "config is valid\n";
      return report.empty() ? infops::kExitOk : infops::kExitInvalid;
    }

    const auto result = infops::run(config, quiet ? nullptr : &std::cerr);
    for (const auto& v : result.violations) std::cerr << "invalid config: " << v << "\n";
    if (!result.error.empty()) std::cerr << "stage " << result.failed_stage << " failed: " << result.error << "\n";
    for (const auto& a : result.artifacts) std::cout << (config.output_dir() / a.path).string() << "  " << a.sha256 << "\n";
    if (result.violations.empty()) std::cout << (config.output_dir() / "manifest.json").string() << "\n";
    return result.exit_code;
  } catch (const infops::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return infops::kExitInvalid;
  }
}
