#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "parsim/actor.hpp"
#include "parsim/config.hpp"
#include "parsim/errors.hpp"
#include "parsim/harness.hpp"
#include "parsim/life.hpp"
#include "parsim/network.hpp"
#include "parsim/perfmodel.hpp"
#include "parsim/traffic.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kValidation = 3;
constexpr int kWorkload = 4;

struct WorkloadFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::int64_t> repeats;
};

std::vector<parsim::ConfigEntry> config_entries(const Globals& g) {
  if (g.config.empty()) return {};
  return parsim::load_key_values(g.config);
}

// --- traffic ----------------------------------------------------------------

struct TrafficArgs {
  std::string network;
  std::optional<std::int64_t> junctions;
  std::optional<std::int64_t> roads;
  std::optional<std::int64_t> minutes;
  std::uint32_t shards = 1;
  std::string mode = "deterministic";
};

int traffic_run(const Globals& g, const TrafficArgs& a) {
  parsim::traffic::TrafficConfig cfg;
  parsim::network::GeneratorOptions gen;
  for (const auto& e : config_entries(g)) {
    if (e.key == "junctions") {
      gen.junctions = static_cast<std::size_t>(parsim::parse_integer(e.value, e.key));
    } else if (e.key == "roads") {
      gen.roads = static_cast<std::size_t>(parsim::parse_integer(e.value, e.key));
    } else {
      parsim::traffic::apply_setting(cfg, e.key, e.value);
    }
  }
  if (g.seed) cfg.rng_seed = *g.seed;
  gen.seed = cfg.rng_seed;
  if (a.junctions) gen.junctions = static_cast<std::size_t>(*a.junctions);
  if (a.roads) gen.roads = static_cast<std::size_t>(*a.roads);
  if (a.minutes) cfg.max_minutes = *a.minutes;
  cfg.validate();

  const parsim::network::RoadNetwork net = a.network.empty()
                                               ? parsim::network::generate_network(gen)
                                               : parsim::network::load_network(a.network);
  parsim::traffic::SimOptions opts;
  opts.shards = a.shards;
  opts.mode = a.mode == "parallel" ? parsim::actor::ExecutionMode::parallel
                                   : parsim::actor::ExecutionMode::deterministic;
  opts.on_summary = [](const std::string& line) { std::cout << line << std::flush; };
  parsim::traffic::TrafficSimulation sim(net, cfg, opts);

  parsim::traffic::TrafficResult res;
  try {
    res = sim.run();
  } catch (const parsim::actor::DeadlockError& e) {
    throw WorkloadFailure(e.what());
  }
  if (!g.out.empty()) {
    parsim::traffic::write_final_stats(res.stats, net, g.out);
  } else {
    std::cout << parsim::traffic::format_final_stats(res.stats, net);
  }
  return 0;
}

// --- life -------------------------------------------------------------------

struct LifeArgs {
  std::optional<std::int64_t> L;
  std::optional<double> rho;
  std::optional<std::int64_t> maxstep;
  std::optional<std::int64_t> printfreq;
  std::string dims;
  std::string mode = "serial";
};

int life_run(const Globals& g, const LifeArgs& a) {
  parsim::life::LifeConfig cfg;
  std::string mode = a.mode;
  for (const auto& e : config_entries(g)) {
    if (e.key == "L") cfg.L = parsim::parse_integer(e.value, e.key);
    else if (e.key == "rho") cfg.rho = parsim::parse_real(e.value, e.key);
    else if (e.key == "seed") cfg.seed = static_cast<std::uint64_t>(parsim::parse_integer(e.value, e.key));
    else if (e.key == "maxstep") cfg.maxstep = parsim::parse_integer(e.value, e.key);
    else if (e.key == "printfreq") cfg.printfreq = parsim::parse_integer(e.value, e.key);
    else if (e.key == "dims") cfg.dims = parsim::life::parse_dims(e.value);
    else if (e.key == "mode") mode = e.value;
    else throw parsim::ValidationError("unknown life setting '" + e.key + "'");
  }
  if (a.L) cfg.L = *a.L;
  if (a.rho) cfg.rho = *a.rho;
  if (g.seed) cfg.seed = *g.seed;
  if (a.maxstep) cfg.maxstep = *a.maxstep;
  if (a.printfreq) cfg.printfreq = *a.printfreq;
  if (!a.dims.empty()) cfg.dims = parsim::life::parse_dims(a.dims);
  if (mode != "serial" && mode != "parallel") {
    throw parsim::ValidationError("mode must be serial or parallel");
  }

  const auto m = mode == "parallel" ? parsim::life::Mode::parallel : parsim::life::Mode::serial;
  const parsim::life::LifeResult res = parsim::life::run_life(cfg, m, &std::cout);
  std::cout << "steps=" << res.live_history.size() << " initial=" << res.initial_live
            << " final=" << res.final_grid.live_count()
            << " seconds_per_iteration=" << num(res.seconds_per_iteration) << '\n';
  if (!g.out.empty()) parsim::life::write_grid_file(res.final_grid, g.out);
  return 0;
}

// --- scale ------------------------------------------------------------------

struct ScaleArgs {
  std::string workload = "life";
  std::string sizes;
  std::string procs;
  std::optional<std::int64_t> maxstep;
  std::optional<double> rho;
  std::optional<std::int64_t> minutes;
  std::string plot;
  bool svg = false;
};

std::vector<std::int64_t> as_i64(const std::vector<long long>& v) { return {v.begin(), v.end()}; }

int scale(const Globals& g, const std::string& kind, const ScaleArgs& a) {
  parsim::harness::ExperimentPlan plan;
  plan.kind = parsim::harness::parse_scaling_kind(kind);
  for (const auto& e : config_entries(g)) {
    if (e.key == "workload") plan.workload = parsim::harness::parse_workload(e.value);
    else if (e.key == "sizes") plan.sizes = as_i64(parsim::parse_integer_list(e.value, e.key));
    else if (e.key == "procs") plan.proc_counts = as_i64(parsim::parse_integer_list(e.value, e.key));
    else if (e.key == "repeats") plan.repeats = parsim::parse_integer(e.value, e.key);
    else if (e.key == "seed") plan.seed = static_cast<std::uint64_t>(parsim::parse_integer(e.value, e.key));
    else if (e.key == "maxstep") plan.life.maxstep = parsim::parse_integer(e.value, e.key);
    else if (e.key == "rho") plan.life.rho = parsim::parse_real(e.value, e.key);
    else if (e.key == "minutes") plan.traffic.minutes = parsim::parse_integer(e.value, e.key);
    else throw parsim::ValidationError("unknown scale setting '" + e.key + "'");
  }
  if (!a.workload.empty()) plan.workload = parsim::harness::parse_workload(a.workload);
  if (!a.sizes.empty()) plan.sizes = as_i64(parsim::parse_integer_list(a.sizes, "sizes"));
  if (!a.procs.empty()) plan.proc_counts = as_i64(parsim::parse_integer_list(a.procs, "procs"));
  if (g.repeats) plan.repeats = *g.repeats;
  if (g.seed) plan.seed = *g.seed;
  if (a.maxstep) plan.life.maxstep = *a.maxstep;
  if (a.rho) plan.life.rho = *a.rho;
  if (a.minutes) plan.traffic.minutes = *a.minutes;
  plan.output = g.out;

  const parsim::harness::ExperimentResult res = parsim::harness::run_experiment(plan, &std::cerr);
  if (plan.output.empty()) parsim::harness::write_csv(res, std::cout);
  if (!a.plot.empty()) {
    for (const auto& path : parsim::harness::emit_plot_data(res, a.plot, a.svg)) {
      std::cerr << "wrote " << path << '\n';
    }
  }
  for (const auto& r : res.rows) {
    if (!r.ok) throw WorkloadFailure("one or more repeats failed");
  }
  return 0;
}

// --- model ------------------------------------------------------------------

struct ModelArgs {
  double f = 0.0;
  std::string p = "1";
  double L = 0, o = 0, g = 0;
  std::string k = "1";
  double w = 0, l = 0;
  std::int64_t h = 0;
  std::string strategy = "block";
  std::int64_t n = 1;
  std::int64_t b = 1;
};

int model(const std::string& law, const ModelArgs& a) {
  namespace pm = parsim::perfmodel;
  if (law == "amdahl" || law == "gustafson") {
    std::cout << "p speedup\n";
    for (long long p : parsim::parse_integer_list(a.p, "p")) {
      const double s = law == "amdahl" ? pm::amdahl_speedup(a.f, p) : pm::gustafson_speedup(a.f, p);
      std::cout << p << ' ' << num(s) << '\n';
    }
    if (law == "amdahl" && a.f > 0.0) std::cout << "# limit 1/f = " << num(1.0 / a.f) << '\n';
  } else if (law == "logp") {
    std::cout << "k cost\n";
    for (long long k : parsim::parse_integer_list(a.k, "k")) {
      std::cout << k << ' ' << num(pm::logp_cost({a.L, a.o, a.g, 1}, k)) << '\n';
    }
  } else if (law == "bsp") {
    std::cout << num(pm::bsp_superstep_cost({a.w, a.h, a.g, a.l})) << '\n';
  } else if (law == "partition") {
    const auto ps = parsim::parse_integer_list(a.p, "p");
    if (ps.size() != 1) throw parsim::ValidationError("partition takes a single --p");
    const auto owners = pm::partition_indices(pm::parse_partition_strategy(a.strategy), a.n, ps[0], a.b);
    std::cout << '[';
    for (std::size_t i = 0; i < owners.size(); ++i) std::cout << (i ? "," : "") << owners[i];
    std::cout << "]\n";
  }
  return 0;
}

// --- report -----------------------------------------------------------------

int report(const std::string& in, const std::string& plot, bool svg) {
  const parsim::harness::ExperimentResult res = parsim::harness::read_csv_file(in);
  const double worst = parsim::harness::aggregate_discrepancy(res);
  parsim::harness::write_plot_table(res, std::cout);
  std::cout << "# max aggregate discrepancy " << num(worst) << '\n';
  if (!plot.empty()) {
    for (const auto& path : parsim::harness::emit_plot_data(res, plot, svg)) {
      std::cerr << "wrote " << path << '\n';
    }
  }
  if (worst > 1e-9) throw parsim::ValidationError("embedded aggregates do not match the rows");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel simulation workbench: traffic, life, scaling experiments and cost models"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "key=value settings file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "root RNG seed");
  app.add_option("--out", g.out, "output path");
  app.add_option("--repeats", g.repeats, "repeats per configuration")->check(CLI::PositiveNumber);

  std::function<int()> action;

  auto* traffic = app.add_subcommand("traffic", "road-traffic simulation");
  traffic->require_subcommand(1);
  auto* traffic_run_cmd = traffic->add_subcommand("run", "run one simulation");
  TrafficArgs ta;
  traffic_run_cmd->add_option("--network", ta.network, "network file")->check(CLI::ExistingFile);
  traffic_run_cmd->add_option("--junctions", ta.junctions, "generated junction count");
  traffic_run_cmd->add_option("--roads", ta.roads, "generated road count");
  traffic_run_cmd->add_option("--minutes", ta.minutes, "simulated minutes");
  traffic_run_cmd->add_option("--shards", ta.shards, "actor shards")->check(CLI::PositiveNumber);
  traffic_run_cmd->add_option("--mode", ta.mode)->check(CLI::IsMember({"deterministic", "parallel"}));
  traffic_run_cmd->callback([&] { action = [&] { return traffic_run(g, ta); }; });

  auto* life = app.add_subcommand("life", "cellular-automaton benchmark");
  life->require_subcommand(1);
  auto* life_run_cmd = life->add_subcommand("run", "run one simulation");
  LifeArgs la;
  life_run_cmd->add_option("--L", la.L, "grid side");
  life_run_cmd->add_option("--rho", la.rho, "initial density");
  life_run_cmd->add_option("--maxstep", la.maxstep);
  life_run_cmd->add_option("--printfreq", la.printfreq);
  life_run_cmd->add_option("--dims", la.dims, "process grid RxC");
  life_run_cmd->add_option("--mode", la.mode)->check(CLI::IsMember({"serial", "parallel"}));
  life_run_cmd->callback([&] { action = [&] { return life_run(g, la); }; });

  auto* scale_cmd = app.add_subcommand("scale", "strong or weak scaling experiment");
  std::string kind;
  ScaleArgs sa;
  scale_cmd->add_option("kind", kind)->required()->check(CLI::IsMember({"strong", "weak"}));
  scale_cmd->add_option("--workload", sa.workload)->check(CLI::IsMember({"life", "traffic"}));
  scale_cmd->add_option("--sizes", sa.sizes, "comma-separated sizes");
  scale_cmd->add_option("--procs", sa.procs, "comma-separated proc counts");
  scale_cmd->add_option("--maxstep", sa.maxstep, "life steps");
  scale_cmd->add_option("--rho", sa.rho, "life density");
  scale_cmd->add_option("--minutes", sa.minutes, "traffic minutes");
  scale_cmd->add_option("--plot", sa.plot, "plot data base path");
  scale_cmd->add_flag("--svg", sa.svg, "also write an SVG chart");
  scale_cmd->callback([&] { action = [&] { return scale(g, kind, sa); }; });

  auto* model_cmd = app.add_subcommand("model", "performance-law calculator");
  std::string law;
  ModelArgs ma;
  model_cmd->set_help_flag("--help", "Print this help message and exit");
  model_cmd->add_option("law", law)->required()->check(
      CLI::IsMember({"amdahl", "gustafson", "logp", "bsp", "partition"}));
  model_cmd->add_option("--f", ma.f, "serial fraction");
  model_cmd->add_option("--p", ma.p, "processor count(s)");
  model_cmd->add_option("--L", ma.L, "LogP latency");
  model_cmd->add_option("--o", ma.o, "LogP overhead");
  model_cmd->add_option("--g", ma.g, "gap");
  model_cmd->add_option("--k", ma.k, "LogP message count(s)");
  model_cmd->add_option("--w", ma.w, "BSP local work");
  model_cmd->add_option("--h", ma.h, "BSP fan-out");
  model_cmd->add_option("--l", ma.l, "BSP barrier cost");
  model_cmd->add_option("--strategy", ma.strategy)->check(CLI::IsMember({"block", "cyclic", "block_cyclic"}));
  model_cmd->add_option("--n", ma.n, "index count");
  model_cmd->add_option("--b", ma.b, "block size");
  model_cmd->callback([&] { action = [&] { return model(law, ma); }; });

  auto* report_cmd = app.add_subcommand("report", "re-aggregate a scaling CSV");
  std::string in;
  std::string plot;
  bool svg = false;
  report_cmd->add_option("--in", in, "scaling CSV")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--plot", plot, "plot data base path");
  report_cmd->add_flag("--svg", svg);
  report_cmd->callback([&] { action = [&] { return report(in, plot, svg); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    return action();
  } catch (const WorkloadFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kWorkload;
  } catch (const parsim::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const parsim::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kWorkload;
  }
}
