#include "parsim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "parsim/actor.hpp"
#include "parsim/errors.hpp"
#include "parsim/hash.hpp"
#include "parsim/life.hpp"
#include "parsim/network.hpp"
#include "parsim/perfmodel.hpp"
#include "parsim/traffic.hpp"

namespace parsim::harness {

namespace {

constexpr const char* kHeader = "workload,kind,size,p,repeat,seconds,status,stddev,speedup,efficiency";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t hash_text(const std::string& s, std::uint64_t h = kFnvOffsetBasis) {
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}, h);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

CellOutcome run_life_cell(const LifeParams& lp, std::int64_t L, std::int64_t p, std::uint64_t seed) {
  life::LifeConfig cfg;
  cfg.L = L;
  cfg.rho = lp.rho;
  cfg.seed = seed;
  cfg.maxstep = lp.maxstep;
  cfg.printfreq = std::max<std::int64_t>(1, lp.maxstep);
  const auto [r, c] = life_dims(L, p);
  cfg.dims = {r, c};
  const life::LifeResult res = life::run_life(cfg, p == 1 ? life::Mode::serial : life::Mode::parallel);

  std::uint64_t h = kFnvOffsetBasis;
  for (std::int64_t v : res.live_history) h = fnv1a64_u64(static_cast<std::uint64_t>(v), h);
  const auto& g = res.final_grid;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    const auto row = g.raw().subspan((i + 1) * g.stride() + 1, g.cols());
    h = fnv1a64(row, h);
  }
  return {res.seconds, h};
}

CellOutcome run_traffic_cell(const TrafficParams& tp, std::int64_t junctions, std::int64_t p,
                             std::uint64_t seed) {
  network::GeneratorOptions gen;
  gen.junctions = static_cast<std::size_t>(junctions);
  gen.roads = static_cast<std::size_t>(junctions * tp.roads_per_junction);
  gen.seed = seed;
  const network::RoadNetwork net = network::generate_network(gen);

  traffic::TrafficConfig cfg;
  cfg.max_minutes = tp.minutes;
  cfg.rng_seed = seed;
  traffic::SimOptions opts;
  opts.shards = static_cast<std::uint32_t>(p);
  opts.mode = p == 1 ? actor::ExecutionMode::deterministic : actor::ExecutionMode::parallel;
  traffic::TrafficSimulation sim(net, cfg, opts);

  const auto start = std::chrono::steady_clock::now();
  const traffic::TrafficResult res = sim.run();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::uint64_t h =
      hash_text(traffic::format_final_stats(res.stats, net), hash_text(res.summary_text));
  return {seconds, h};
}

}  // namespace

ScalingKind parse_scaling_kind(const std::string& name) {
  if (name == "strong") return ScalingKind::strong;
  if (name == "weak") return ScalingKind::weak;
  throw ValidationError("unknown scaling kind '" + name + "'");
}

Workload parse_workload(const std::string& name) {
  if (name == "life") return Workload::life;
  if (name == "traffic") return Workload::traffic;
  throw ValidationError("unknown workload '" + name + "'");
}

std::string to_string(ScalingKind k) { return k == ScalingKind::strong ? "strong" : "weak"; }
std::string to_string(Workload w) { return w == Workload::life ? "life" : "traffic"; }

void ExperimentPlan::validate() const {
  if (repeats < 1) throw ValidationError("repeats must be >= 1");
  if (sizes.empty() || proc_counts.empty()) throw ValidationError("plan needs sizes and proc counts");
  if (kind == ScalingKind::strong && sizes.size() != 1) {
    throw ValidationError("strong scaling takes exactly one size");
  }
  if (kind == ScalingKind::weak && proc_counts.size() != 1) {
    throw ValidationError("weak scaling takes exactly one proc count");
  }
  for (auto s : sizes) {
    if (s < 1) throw ValidationError("sizes must be >= 1");
  }
  for (auto p : proc_counts) {
    if (p < 1) throw ValidationError("proc counts must be >= 1");
  }
  if (life.maxstep < 0) throw ValidationError("maxstep must be >= 0");
  if (!(life.rho >= 0.0 && life.rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
  if (traffic.minutes < 0) throw ValidationError("minutes must be >= 0");
  if (traffic.roads_per_junction < 1) throw ValidationError("roads per junction must be >= 1");
}

std::uint64_t repeat_seed(std::uint64_t root, std::uint64_t cell, std::uint64_t repeat) noexcept {
  return derive_seed(root, fnv1a64_u64(repeat, fnv1a64_u64(cell)));
}

std::pair<int, int> life_dims(std::int64_t L, std::int64_t p) {
  if (L < 1 || p < 1) throw ValidationError("L and p must be >= 1");
  std::optional<std::pair<int, int>> best;
  for (std::int64_t r = 1; r <= p; ++r) {
    if (p % r != 0) continue;
    const std::int64_t c = p / r;
    if (L % r != 0 || L % c != 0) continue;
    if (!best || std::llabs(r - c) < std::llabs(best->first - best->second)) {
      best = std::pair<int, int>{static_cast<int>(r), static_cast<int>(c)};
    }
  }
  if (!best) {
    throw ValidationError("no process grid with " + std::to_string(p) + " blocks divides L=" +
                          std::to_string(L));
  }
  return *best;
}

CellRunner default_runner(const ExperimentPlan& plan) {
  if (plan.workload == Workload::life) {
    return [lp = plan.life](std::int64_t size, std::int64_t p, std::uint64_t seed) {
      return run_life_cell(lp, size, p, seed);
    };
  }
  return [tp = plan.traffic](std::int64_t size, std::int64_t p, std::uint64_t seed) {
    return run_traffic_cell(tp, size, p, seed);
  };
}

ExperimentResult run_experiment(const ExperimentPlan& plan, std::ostream* log) {
  return run_experiment(plan, default_runner(plan), log);
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const CellRunner& runner,
                                std::ostream* log) {
  plan.validate();
  ExperimentResult result;
  result.kind = plan.kind;
  result.workload = plan.workload;

  std::uint64_t cell = 0;
  for (std::int64_t size : plan.sizes) {
    for (std::int64_t p : plan.proc_counts) {
      for (std::int64_t r = 0; r < plan.repeats; ++r) {
        Row row{size, p, r, 0.0, true, 0, {}};
        try {
          const CellOutcome out =
              runner(size, p, repeat_seed(plan.seed, cell, static_cast<std::uint64_t>(r)));
          row.seconds = out.seconds;
          row.digest = out.digest;
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = e.what();
        }
        if (log != nullptr) {
          *log << to_string(plan.workload) << ' ' << to_string(plan.kind) << " size=" << size
               << " p=" << p << " repeat=" << r;
          if (row.ok) {
            *log << " seconds=" << fmt(row.seconds) << '\n';
          } else {
            *log << " failed: " << row.error << '\n';
          }
        }
        result.rows.push_back(std::move(row));
      }
      ++cell;
    }
  }
  result.aggregates = compute_aggregates(result.rows, plan.kind);
  if (!plan.output.empty()) write_csv_file(result, plan.output);
  return result;
}

std::vector<Aggregate> compute_aggregates(const std::vector<Row>& rows, ScalingKind kind) {
  std::vector<Aggregate> out;
  std::vector<std::vector<double>> samples;
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> index;
  for (const Row& row : rows) {
    const auto key = std::make_pair(row.size, row.p);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back(Aggregate{row.size, row.p, 0, 0, 0.0, 0.0, std::nullopt, std::nullopt});
      samples.emplace_back();
    }
    Aggregate& a = out[it->second];
    if (row.ok) {
      ++a.ok_count;
      samples[it->second].push_back(row.seconds);
    } else {
      ++a.failed_count;
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (samples[k].empty()) continue;
    const perfmodel::SampleStats st = perfmodel::sample_stats(samples[k]);
    out[k].mean = st.mean;
    out[k].stddev = st.stddev;
  }
  if (kind != ScalingKind::strong) return out;

  for (std::size_t k = 0; k < out.size(); ++k) {
    Aggregate& a = out[k];
    const auto base = index.find({a.size, 1});
    if (a.failed() || base == index.end() || out[base->second].failed()) continue;
    perfmodel::RunRecord run;
    run.serial_time = out[base->second].mean;
    run.processors = a.p;
    run.samples = samples[k];
    run.repeats = static_cast<std::int64_t>(samples[k].size());
    try {
      const perfmodel::SpeedupResult s = perfmodel::measured_speedup(run);
      a.speedup = s.speedup;
      a.efficiency = s.speedup / static_cast<double>(a.p);
    } catch (const std::domain_error&) {
      // Zero-duration samples leave the speedup undefined.
    }
  }
  return out;
}

void write_csv(const ExperimentResult& result, std::ostream& out) {
  const std::string prefix = to_string(result.workload) + ',' + to_string(result.kind) + ',';
  out << kHeader << '\n';
  for (const Row& r : result.rows) {
    out << prefix << r.size << ',' << r.p << ',' << r.repeat << ',' << (r.ok ? fmt(r.seconds) : "")
        << ',' << (r.ok ? "ok" : "failed") << ",,,\n";
  }
  for (const Aggregate& a : result.aggregates) {
    out << prefix << a.size << ',' << a.p << ",-1," << (a.failed() ? "" : fmt(a.mean))
        << ",aggregate," << (a.failed() ? "" : fmt(a.stddev)) << ','
        << (a.speedup ? fmt(*a.speedup) : "") << ',' << (a.efficiency ? fmt(*a.efficiency) : "")
        << '\n';
  }
}

void write_csv_file(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(result, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

ExperimentResult read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw ParseError(1, std::string("expected header '") + kHeader + "'");
  }
  ExperimentResult result;
  std::size_t n = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) throw ParseError(n, "expected 10 fields");
    try {
      if (first) {
        result.workload = parse_workload(f[0]);
        result.kind = parse_scaling_kind(f[1]);
        first = false;
      }
      const std::int64_t size = std::stoll(f[2]);
      const std::int64_t p = std::stoll(f[3]);
      const std::int64_t repeat = std::stoll(f[4]);
      const std::string& status = f[6];
      if (status == "aggregate") {
        Aggregate a{size, p, 0, 0, 0.0, 0.0, std::nullopt, std::nullopt};
        if (!f[5].empty()) {
          a.mean = std::stod(f[5]);
          a.stddev = std::stod(f[7]);
          a.ok_count = 1;
        }
        if (!f[8].empty()) a.speedup = std::stod(f[8]);
        if (!f[9].empty()) a.efficiency = std::stod(f[9]);
        result.aggregates.push_back(a);
      } else if (status == "ok" || status == "failed") {
        Row r{size, p, repeat, 0.0, status == "ok", 0, {}};
        if (r.ok) r.seconds = std::stod(f[5]);
        result.rows.push_back(r);
      } else {
        throw ParseError(n, "unknown status '" + status + "'");
      }
    } catch (const std::logic_error&) {
      throw ParseError(n, "malformed number");
    } catch (const ValidationError& e) {
      throw ParseError(n, e.what());
    }
  }
  // Restore per-configuration counts from the raw rows.
  for (Aggregate& a : result.aggregates) {
    a.ok_count = 0;
    for (const Row& r : result.rows) {
      if (r.size != a.size || r.p != a.p) continue;
      (r.ok ? a.ok_count : a.failed_count) += 1;
    }
  }
  return result;
}

ExperimentResult read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

double aggregate_discrepancy(const ExperimentResult& embedded) {
  const std::vector<Aggregate> fresh = compute_aggregates(embedded.rows, embedded.kind);
  if (fresh.size() != embedded.aggregates.size()) {
    throw ValidationError("aggregate rows do not match the raw configurations");
  }
  double worst = 0.0;
  auto diff_opt = [&](const std::optional<double>& a, const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) throw ValidationError("speedup columns disagree");
    if (a) worst = std::max(worst, std::fabs(*a - *b));
  };
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    const Aggregate& a = fresh[k];
    const Aggregate& b = embedded.aggregates[k];
    if (a.size != b.size || a.p != b.p) {
      throw ValidationError("aggregate rows do not match the raw configurations");
    }
    if (a.failed() != b.failed()) throw ValidationError("failed configurations disagree");
    worst = std::max({worst, std::fabs(a.mean - b.mean), std::fabs(a.stddev - b.stddev)});
    diff_opt(a.speedup, b.speedup);
    diff_opt(a.efficiency, b.efficiency);
  }
  return worst;
}

namespace {

std::int64_t x_of(const ExperimentResult& r, const Aggregate& a) {
  return r.kind == ScalingKind::strong ? a.p : a.size;
}

std::vector<Aggregate> series(const ExperimentResult& r) {
  std::vector<Aggregate> s;
  for (const auto& a : r.aggregates) {
    if (!a.failed()) s.push_back(a);
  }
  std::stable_sort(s.begin(), s.end(),
                   [&](const Aggregate& a, const Aggregate& b) { return x_of(r, a) < x_of(r, b); });
  return s;
}

}  // namespace

void write_plot_table(const ExperimentResult& result, std::ostream& out) {
  if (result.aggregates.empty()) throw ValidationError("no configurations to plot");
  const bool strong = result.kind == ScalingKind::strong;
  out << "# workload=" << to_string(result.workload) << " kind=" << to_string(result.kind) << '\n';
  out << "# " << (strong ? "p" : "size") << " mean stddev speedup efficiency\n";
  for (const Aggregate& a : series(result)) {
    out << x_of(result, a) << ' ' << fmt(a.mean) << ' ' << fmt(a.stddev) << ' '
        << (a.speedup ? fmt(*a.speedup) : "-") << ' ' << (a.efficiency ? fmt(*a.efficiency) : "-")
        << '\n';
  }
  for (const Aggregate& a : result.aggregates) {
    if (a.failed()) out << "# failed: size=" << a.size << " p=" << a.p << '\n';
  }
}

void write_plot_svg(const ExperimentResult& result, std::ostream& out) {
  const std::vector<Aggregate> s = series(result);
  constexpr double W = 640, H = 400, left = 70, right = 20, top = 40, bottom = 50;
  double xmin = 0, xmax = 1, ymax = 0;
  if (!s.empty()) {
    xmin = static_cast<double>(x_of(result, s.front()));
    xmax = static_cast<double>(x_of(result, s.back()));
  }
  if (xmax <= xmin) xmax = xmin + 1;
  for (const auto& a : s) ymax = std::max(ymax, a.mean + a.stddev);
  if (ymax <= 0) ymax = 1;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - y / ymax * (H - top - bottom); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << to_string(result.workload)
      << ' ' << to_string(result.kind) << " scaling: mean wall time</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\""
      << H - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
      << (result.kind == ScalingKind::strong ? "processors" : "size") << "</text>\n";
  out << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
      << ")\" text-anchor=\"middle\">seconds</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = ymax * k / 4;
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
        << fmt(std::round(y * 1e4) / 1e4) << "</text>\n";
  }
  std::string points;
  for (const auto& a : s) {
    const double x = px(static_cast<double>(x_of(result, a)));
    out << "<text x=\"" << x << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">"
        << x_of(result, a) << "</text>\n";
    out << "<line x1=\"" << x << "\" y1=\"" << py(std::max(0.0, a.mean - a.stddev)) << "\" x2=\"" << x
        << "\" y2=\"" << py(a.mean + a.stddev) << "\" stroke=\"gray\"/>\n";
    out << "<circle cx=\"" << x << "\" cy=\"" << py(a.mean) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    points += std::to_string(x) + ',' + std::to_string(py(a.mean)) + ' ';
  }
  out << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"" << points << "\"/>\n";
  out << "</svg>\n";
}

std::vector<std::string> emit_plot_data(const ExperimentResult& result, const std::string& base,
                                        bool svg) {
  std::vector<std::string> written;
  const std::string dat = base + ".dat";
  {
    std::ofstream out(dat, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + dat + "' for writing");
    write_plot_table(result, out);
    if (!out) throw std::runtime_error("write to '" + dat + "' failed");
  }
  written.push_back(dat);
  if (svg) {
    const std::string path = base + ".svg";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_plot_svg(result, out);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
    written.push_back(path);
  }
  return written;
}

}  // namespace parsim::harness
