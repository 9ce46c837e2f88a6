#include "gchroma/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "gchroma/colouring.hpp"
#include "gchroma/graphon.hpp"
#include "gchroma/io.hpp"
#include "gchroma/properties.hpp"
#include "gchroma/rng.hpp"
#include "gchroma/sampler.hpp"

namespace gchroma {

namespace {

using io::json;

struct RunConfig {
  std::string graphon;
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  int seeds = 5;
  int multistart = 64;
  std::string out;
  std::string format;
  std::string family;
  json params;
  std::string strategies = "balanced,greedy-decomp,optimal-decomp";
  std::string strategy = "balanced";
  int trials = 200;
  std::string suites;
  std::string decomposition;
  int restarts = 20;
  std::size_t blocks = 0;
  std::string qmatrix;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class T>
T config_value(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw std::invalid_argument("");
    } else {
      if (!v.is_number_integer()) throw std::invalid_argument("");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.get<long long>() < 0) throw std::invalid_argument("");
      }
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

void apply_config(RunConfig& c, const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (k == "graphon") c.graphon = config_value<std::string>(v, k);
    else if (k == "n") c.n = config_value<std::size_t>(v, k);
    else if (k == "seed") c.seed = config_value<std::uint64_t>(v, k);
    else if (k == "seeds") c.seeds = config_value<int>(v, k);
    else if (k == "multistart") c.multistart = config_value<int>(v, k);
    else if (k == "out") c.out = config_value<std::string>(v, k);
    else if (k == "format") c.format = config_value<std::string>(v, k);
    else if (k == "family") c.family = config_value<std::string>(v, k);
    else if (k == "params") c.params = v.is_string() ? io::parse_text(v.get<std::string>(), "params") : v;
    else if (k == "strategies") c.strategies = config_value<std::string>(v, k);
    else if (k == "strategy") c.strategy = config_value<std::string>(v, k);
    else if (k == "trials") c.trials = config_value<int>(v, k);
    else if (k == "suites") c.suites = config_value<std::string>(v, k);
    else if (k == "decomposition") c.decomposition = config_value<std::string>(v, k);
    else if (k == "restarts") c.restarts = config_value<int>(v, k);
    else if (k == "blocks") c.blocks = config_value<std::size_t>(v, k);
    else if (k == "qmatrix") c.qmatrix = config_value<std::string>(v, k);
    else throw UsageError("unknown config key '" + k + "'");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void check_ranges(const RunConfig& c) {
  if (c.n < 1 || c.n > kMaxVertices) throw UsageError("n must lie in [1, " + std::to_string(kMaxVertices) + "]");
  if (c.seeds < 1) throw UsageError("seeds must be positive");
  if (c.multistart < 1) throw UsageError("multistart must be positive");
  if (c.trials < 0) throw UsageError("trials must be nonnegative");
  if (c.restarts < 1) throw UsageError("restarts must be positive");
  if (!c.format.empty() && c.format != "json" && c.format != "csv") throw UsageError("format must be json or csv");
}

OptimizerConfig optimizer(const RunConfig& c) {
  OptimizerConfig o;
  o.multistart = c.multistart;
  return o;
}

BlockGraphon load_block(const RunConfig& c) {
  if (c.graphon.empty()) throw UsageError("--graphon is required");
  return io::require_block(io::load_graphon(c.graphon), c.blocks);
}

bool is_figure_block(const BlockGraphon& W) {
  const auto F = BlockGraphon::figure_block();
  return W.masses == F.masses && W.P == F.P;
}

Decomposition named_decomposition(const std::string& name, const BlockGraphon& W, const RunConfig& c) {
  if (name.empty() || name == "phistar") return phi_star(W, optimizer(c)).witness;
  if (name == "trivial") return Decomposition::trivial(W.masses);
  if (name == "greedy" || name == "optimal") {
    if (!is_figure_block(W)) throw UsageError("the '" + name + "' decomposition exists only for figure-block");
    return name == "greedy" ? figure_greedy_decomposition() : figure_optimal_decomposition();
  }
  auto d = io::decomposition_from_json(io::read_json_file(name));
  d.validate(W.masses);
  return d;
}

Colouring run_strategy(const std::string& s, const SampledGraph& g, const BlockGraphon& W, const RunConfig& c,
                       const Decomposition* optimal, std::uint64_t colour_seed) {
  ColouringOptions opt;
  opt.restarts = c.restarts;
  opt.seed = colour_seed;
  if (s == "balanced") return balanced_colour(g, W, opt);
  if (s == "dsatur") return dsatur(g);
  if (s == "greedy-decomp") return strategy_colour(g, named_decomposition("greedy", W, c), W, colour_seed, opt);
  if (s == "optimal-decomp") return strategy_colour(g, *optimal, W, colour_seed, opt);
  if (s == "decomposition") {
    if (c.decomposition.empty()) throw UsageError("strategy 'decomposition' needs --decomposition");
    return strategy_colour(g, named_decomposition(c.decomposition, W, c), W, colour_seed, opt);
  }
  throw UsageError("unknown strategy '" + s + "'");
}

json support_json(const std::vector<int>& s) {
  json a = json::array();
  for (int i : s) a.push_back(i);
  return a;
}

// -- commands ----------------------------------------------------------------

void cmd_phi(const RunConfig& c, std::ostream& os) {
  const auto W = load_block(c);
  const auto z = phi_witness(W);
  json j = {{"command", "phi"}, {"graphon", c.graphon}, {"k", W.size()}, {"phi", io::r12(z.value)},
            {"witness_support", support_json(z.support)}};
  os << j.dump(2) << '\n';
}

void cmd_phistar(const RunConfig& c, std::ostream& os) {
  const auto W = load_block(c);
  OptimizerConfig o = optimizer(c);
  o.seed = rng::derive_seed(c.seed, rng::Stream::kOptimizer, 0);
  const auto r = phi_star(W, o);
  const QMatrix Q = q_of(W);
  const auto b = w_star_bounds(W.masses, Q);
  json j = {{"command", "phistar"},
            {"graphon", c.graphon},
            {"k", W.size()},
            {"value", io::r12(r.value)},
            {"phi", io::r12(phi(W))},
            {"decomposition", io::to_json(r.witness)},
            {"bounds", {{"lower", io::r12(b.lower)}, {"upper", io::r12(b.upper)}}},
            {"balanced_optimal", balanced_optimality_check(W.masses, Q)}};
  os << j.dump(2) << '\n';
}

void cmd_closed_form(const RunConfig& c, std::ostream& os) {
  const json& p = c.params;
  if (!p.is_object()) throw UsageError("--params must be a JSON object");
  auto num = [&](const char* key) {
    if (!p.contains(key) || !p.at(key).is_number()) throw UsageError(std::string("params need numeric '") + key + "'");
    return p.at(key).get<double>();
  };
  auto vec = [&](const char* key) {
    if (!p.contains(key)) throw UsageError(std::string("params need array '") + key + "'");
    Vec v;
    for (const auto& x : p.at(key)) {
      if (!x.is_number()) throw UsageError(std::string("params '") + key + "' must hold numbers");
      v.push_back(x.get<double>());
    }
    return v;
  };
  json j = {{"command", "closed-form"}, {"family", c.family}};
  if (c.family == "block1") {
    for (const auto& [k, v] : p.items()) {
      if (k != "lengths" && k != "p" && k != "p0") throw UsageError("unknown params key '" + k + "'");
    }
    const Vec l = vec("lengths");
    j["value"] = io::r12(closed_form_block1(l, num("p"), num("p0")));
    j["graphon"] = io::to_json(block1_graphon(l, num("p"), num("p0")));
  } else if (c.family == "block2") {
    for (const auto& [k, v] : p.items()) {
      if (k != "p_vec" && k != "p") throw UsageError("unknown params key '" + k + "'");
    }
    const Vec pv = vec("p_vec");
    j["value"] = io::r12(closed_form_block2(pv, num("p")));
    j["graphon"] = io::to_json(block2_graphon(pv, num("p")));
  } else {
    throw UsageError("--family must be block1 or block2");
  }
  os << j.dump(2) << '\n';
}

void cmd_simulate(const RunConfig& c, std::ostream& os) {
  const auto W = load_block(c);
  const auto strategies = split_list(c.strategies);
  if (strategies.empty()) throw UsageError("no strategies given");
  OptimizerConfig o = optimizer(c);
  const auto ps = phi_star(W, o);
  const double prediction = chi_prediction_from_coefficient(ps.value, static_cast<double>(c.n));
  struct Row {
    std::uint64_t seed;
    std::string strategy;
    int colours;
  };
  std::vector<Row> rows;
  for (int s = 0; s < c.seeds; ++s) {
    const std::uint64_t gs = c.seed + static_cast<std::uint64_t>(s);
    const auto g = sample_gnw(c.n, W, gs);
    for (std::size_t t = 0; t < strategies.size(); ++t) {
      const auto col = run_strategy(strategies[t], g, W, c, &ps.witness, gs);
      if (!verify_colouring(g, col)) throw std::runtime_error("strategy '" + strategies[t] + "' produced an improper colouring");
      rows.push_back({gs, strategies[t], col.num_colours});
    }
  }
  if (c.format == "json") {
    json a = json::array();
    for (const auto& r : rows) {
      a.push_back({{"seed", r.seed},
                   {"n", c.n},
                   {"strategy", r.strategy},
                   {"colours_used", r.colours},
                   {"prediction", io::r12(prediction)},
                   {"ratio", io::r12(r.colours / prediction)}});
    }
    json j = {{"command", "simulate"}, {"graphon", c.graphon}, {"phi_star", io::r12(ps.value)}, {"rows", a}};
    os << j.dump(2) << '\n';
    return;
  }
  os << "seed,n,strategy,colours_used,prediction,ratio\n";
  for (const auto& r : rows) {
    os << r.seed << ',' << c.n << ',' << r.strategy << ',' << r.colours << ',' << fmt12(prediction) << ','
       << fmt12(r.colours / prediction) << '\n';
  }
}

bool cmd_properties(const RunConfig& c, std::ostream& os) {
  json j = {{"command", "properties"}, {"seed", c.seed}, {"trials", c.trials}};
  if (!c.qmatrix.empty()) {
    const QMatrix Q = QMatrix::from_rows(io::matrix_from_json(io::read_json_file(c.qmatrix)));
    std::vector<int> all(Q.size());
    for (std::size_t i = 0; i < Q.size(); ++i) all[i] = static_cast<int>(i);
    j["qmatrix"] = {{"k", Q.size()}, {"pseudodefinite", pseudodefinite_check(Q, all)}};
  }
  const auto results = run_property_suites(c.seed, c.trials, split_list(c.suites));
  json a = json::array();
  bool all = true;
  for (const auto& r : results) {
    json s = {{"name", r.name},
              {"instances", r.instances},
              {"failures", r.failures},
              {"worst_violation", io::r12(r.worst)},
              {"pass", r.passed()}};
    if (!r.first_failure.empty()) s["first_failure"] = r.first_failure;
    a.push_back(s);
    all = all && r.passed();
  }
  j["suites"] = a;
  j["all_pass"] = all;
  os << j.dump(2) << '\n';
  return all;
}

void cmd_sample(const RunConfig& c, std::ostream& os) {
  const auto W = load_block(c);
  const auto g = sample_gnw(c.n, W, c.seed);
  if (c.format.empty()) {
    write_edge_list(os, g);
    return;
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t j = i + 1; j < g.n; ++j) {
      if (g.adjacency.test(i, j)) edges.emplace_back(i, j);
    }
  }
  if (c.format == "csv") {
    os << "i,j\n";
    for (auto [i, j] : edges) os << i << ',' << j << '\n';
    return;
  }
  json e = json::array();
  for (auto [i, j] : edges) e.push_back({i, j});
  json j = {{"command", "sample"}, {"n", g.n}, {"seed", g.seed}, {"blocks", g.blocks}, {"edges", e}};
  os << j.dump() << '\n';
}

void cmd_split(const RunConfig& c, std::ostream& os) {
  const auto W = load_block(c);
  const auto d = named_decomposition(c.decomposition, W, c);
  const auto g = sample_gnw(c.n, W, c.seed);
  const auto parts = decomposition_split(g, d, W, c.seed);
  json a = json::array();
  for (std::size_t t = 0; t < parts.size(); ++t) {
    a.push_back({{"alpha", io::r12(d.parts[t].alpha)},
                 {"weights", io::r12(d.parts[t].measure.weights)},
                 {"size", parts[t].size()},
                 {"vertices", parts[t]}});
  }
  json j = {{"command", "split"}, {"graphon", c.graphon}, {"n", c.n}, {"seed", c.seed}, {"parts", a}};
  os << j.dump(2) << '\n';
}

void cmd_colour(const RunConfig& c, std::ostream& os) {
  const auto W = load_block(c);
  const auto g = sample_gnw(c.n, W, c.seed);
  std::optional<Decomposition> optimal;
  if (c.strategy == "optimal-decomp") optimal = phi_star(W, optimizer(c)).witness;
  const auto col = run_strategy(c.strategy, g, W, c, optimal ? &*optimal : nullptr, c.seed);
  if (!verify_colouring(g, col)) throw std::runtime_error("improper colouring");
  if (c.format == "csv") {
    os << "vertex,colour\n";
    for (std::size_t v = 0; v < col.assignment.size(); ++v) os << v << ',' << col.assignment[v] << '\n';
    return;
  }
  if (c.format.empty()) {
    write_colouring(os, col);
    return;
  }
  json j = {{"command", "colour"}, {"graphon", c.graphon}, {"n", c.n},       {"seed", c.seed},
            {"strategy", c.strategy}, {"colours", col.num_colours}, {"assignment", col.assignment}};
  os << j.dump() << '\n';
}

void apply_thread_cap() {
  const char* env = std::getenv("GRAPHON_CHROMA_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw UsageError("GRAPHON_CHROMA_THREADS must be a positive integer");
  omp_set_num_threads(static_cast<int>(v));
}

void print_error(std::ostream& err, const std::string& msg) { err << json{{"error", msg}}.dump() << '\n'; }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chromatic coefficients of block graphons and colouring experiments on sampled graphs",
               "graphon_chroma"};
  app.require_subcommand(1);
  RunConfig flags;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> given;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run manifest; flags override its values");
    given.emplace_back(sub->add_option("--out", flags.out, "Write results to this file"),
                       [&](RunConfig& c) { c.out = flags.out; });
    given.emplace_back(sub->add_option("--format", flags.format, "json or csv"),
                       [&](RunConfig& c) { c.format = flags.format; });
    given.emplace_back(sub->add_option("--seed", flags.seed, "Master seed"), [&](RunConfig& c) { c.seed = flags.seed; });
  };
  auto graphon_opts = [&](CLI::App* sub) {
    given.emplace_back(sub->add_option("--graphon", flags.graphon, "figure-block, W_L, W_R, constant:p or a JSON file"),
                       [&](RunConfig& c) { c.graphon = flags.graphon; });
    given.emplace_back(sub->add_option("--blocks", flags.blocks, "Use the k-block upper approximation (W_L)"),
                       [&](RunConfig& c) { c.blocks = flags.blocks; });
    given.emplace_back(sub->add_option("--multistart", flags.multistart, "Optimiser multistart count"),
                       [&](RunConfig& c) { c.multistart = flags.multistart; });
  };
  auto sampling_opts = [&](CLI::App* sub) {
    given.emplace_back(sub->add_option("--n", flags.n, "Number of vertices"), [&](RunConfig& c) { c.n = flags.n; });
    given.emplace_back(sub->add_option("--restarts", flags.restarts, "Extractions per colour class"),
                       [&](RunConfig& c) { c.restarts = flags.restarts; });
    given.emplace_back(sub->add_option("--decomposition", flags.decomposition,
                                       "phistar, trivial, greedy, optimal or a JSON file"),
                       [&](RunConfig& c) { c.decomposition = flags.decomposition; });
  };

  auto* phi_cmd = app.add_subcommand("phi", "Balanced-strategy coefficient phi(W)");
  auto* phistar_cmd = app.add_subcommand("phistar", "Optimal finite-type coefficient phi*(W) with its decomposition");
  auto* closed_cmd = app.add_subcommand("closed-form", "Closed-form coefficient for the block1/block2 families");
  auto* sim_cmd = app.add_subcommand("simulate", "Colour sampled graphs and compare with the prediction");
  auto* prop_cmd = app.add_subcommand("properties", "Randomised property suites");
  auto* sample_cmd = app.add_subcommand("sample", "Sample G(n,W) and print its edge list");
  auto* split_cmd = app.add_subcommand("split", "Split a sampled graph by a decomposition");
  auto* colour_cmd = app.add_subcommand("colour", "Colour one sampled graph");
  for (auto* s : {phi_cmd, phistar_cmd, closed_cmd, sim_cmd, prop_cmd, sample_cmd, split_cmd, colour_cmd}) common(s);
  for (auto* s : {phi_cmd, phistar_cmd, sim_cmd, sample_cmd, split_cmd, colour_cmd}) graphon_opts(s);
  for (auto* s : {sim_cmd, sample_cmd, split_cmd, colour_cmd}) sampling_opts(s);
  std::string params_text;
  given.emplace_back(closed_cmd->add_option("--family", flags.family, "block1 or block2"),
                     [&](RunConfig& c) { c.family = flags.family; });
  given.emplace_back(closed_cmd->add_option("--params", params_text, "JSON parameters"),
                     [&](RunConfig& c) { c.params = io::parse_text(params_text, "--params"); });
  given.emplace_back(sim_cmd->add_option("--seeds", flags.seeds, "Number of graph seeds (seed, seed+1, ...)"),
                     [&](RunConfig& c) { c.seeds = flags.seeds; });
  given.emplace_back(sim_cmd->add_option("--strategies", flags.strategies,
                                         "Comma list of balanced, dsatur, greedy-decomp, optimal-decomp, decomposition"),
                     [&](RunConfig& c) { c.strategies = flags.strategies; });
  given.emplace_back(colour_cmd->add_option("--strategy", flags.strategy, "One colouring strategy"),
                     [&](RunConfig& c) { c.strategy = flags.strategy; });
  given.emplace_back(prop_cmd->add_option("--trials", flags.trials, "Instances per suite"),
                     [&](RunConfig& c) { c.trials = flags.trials; });
  given.emplace_back(prop_cmd->add_option("--suites", flags.suites, "Comma list of suites (default all)"),
                     [&](RunConfig& c) { c.suites = flags.suites; });
  given.emplace_back(prop_cmd->add_option("--qmatrix", flags.qmatrix, "Validate this Q matrix (JSON rows)"),
                     [&](RunConfig& c) { c.qmatrix = flags.qmatrix; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, e.what());
    return 2;
  }

  try {
    apply_thread_cap();
    RunConfig cfg;
    if (sim_cmd->parsed()) cfg.format = "csv";
    if (!config_path.empty()) apply_config(cfg, io::read_json_file(config_path));
    for (auto& [opt, copy] : given) {
      if (opt->count() > 0) copy(cfg);
    }
    check_ranges(cfg);

    std::ofstream file;
    if (!cfg.out.empty()) {
      file.open(cfg.out);
      if (!file) throw UsageError("cannot write '" + cfg.out + "'");
    }
    std::ostream& os = cfg.out.empty() ? out : file;
    bool ok = true;
    if (phi_cmd->parsed()) cmd_phi(cfg, os);
    else if (phistar_cmd->parsed()) cmd_phistar(cfg, os);
    else if (closed_cmd->parsed()) cmd_closed_form(cfg, os);
    else if (sim_cmd->parsed()) cmd_simulate(cfg, os);
    else if (prop_cmd->parsed()) ok = cmd_properties(cfg, os);
    else if (sample_cmd->parsed()) cmd_sample(cfg, os);
    else if (split_cmd->parsed()) cmd_split(cfg, os);
    else if (colour_cmd->parsed()) cmd_colour(cfg, os);
    os.flush();
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    print_error(err, e.what());
    return 1;
  }
}

}  // namespace gchroma
