#pragma once

#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "urnsync/acceptance.hpp"
#include "urnsync/asymptotics.hpp"
#include "urnsync/clt.hpp"
#include "urnsync/config.hpp"
#include "urnsync/io/records.hpp"
#include "urnsync/io/table.hpp"
#include "urnsync/moments.hpp"
#include "urnsync/montecarlo.hpp"
#include "urnsync/parallel.hpp"
#include "urnsync/trajectory.hpp"

namespace urnsync {

/// Where a run writes its records. An empty path means the `out` stream.
struct OutputTargets {
  std::string out;
  std::string full_out;
  std::string summary_out;
  unsigned threads = 1;
};

namespace detail {

inline RecordSchedule record_schedule(const ExperimentConfig& c) {
  if (!c.record_times.empty()) {
    for (auto t : c.record_times)
      if (t > c.horizon)
        throw std::invalid_argument("record time " + std::to_string(t) + " exceeds horizon " +
                                    std::to_string(c.horizon));
    return RecordSchedule{c.record_times};
  }
  if (c.log_per_decade > 0) return RecordSchedule::log_spaced(c.horizon, c.log_per_decade);
  return RecordSchedule::every(c.record_every, c.horizon);
}

/// Render first, then write, so a failed run leaves no partial file.
inline void emit(const io::Table& table, const ExperimentConfig& c, const std::string& path, std::ostream& fallback,
                 io::Format format) {
  io::Metadata meta;
  meta.config = c;
  std::ostringstream buf;
  io::serialize_records(buf, table, meta, format);
  if (path.empty()) {
    fallback << buf.str();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + path + "'");
  f << buf.str();
  if (!f) throw std::runtime_error("failed writing output file '" + path + "'");
}

inline std::string derived_path(const std::string& out, const std::string& tag, io::Format format) {
  return out + "." + tag + (format == io::Format::csv ? ".csv" : ".jsonl");
}

inline void run_simulate(const ExperimentConfig& c, const OutputTargets& o, std::ostream& out) {
  const auto p = c.params();
  const auto format = io::parse_format(c.resolved_format());
  const auto schedule = record_schedule(c);
  EnsembleSpec spec{p, c.replicas, c.horizon, c.seed, schedule.times(), estimator::all, o.threads, c.budget,
                    c.budget_override};
  validate(spec);
  if (c.ensemble || c.replicas > 1) {
    if (c.full) throw std::invalid_argument("--full applies to single trajectories only");
    emit(io::ensemble_table(run_replicas(spec)), c, o.out, out, format);
    return;
  }
  std::string full_path = o.full_out;
  if (c.full && full_path.empty()) {
    if (o.out.empty()) throw std::invalid_argument("--full needs --out or --full-out");
    full_path = derived_path(o.out, "full", format);
  }
  const auto rec = run_trajectory(p, c.horizon, UniformSource(c.seed), c.replica, RecordPolicy{schedule, c.full});
  emit(io::trajectory_table(rec), c, o.out, out, format);
  if (c.full) emit(io::trajectory_full_table(rec), c, full_path, out, format);
}

inline void run_moments(const ExperimentConfig& c, const OutputTargets& o, std::ostream& out) {
  const auto p = c.params();
  const auto schedule = record_schedule(c);
  emit(io::moments_table(finite_n_moments(p, c.horizon), limit_moments(p, c.horizon), schedule.times()), c, o.out,
       out, io::parse_format(c.resolved_format()));
}

[[nodiscard]] inline std::string ratio_flag(const std::vector<SeriesPoint>& series) {
  try {
    const auto d = critical_diagnostic(series);
    if (d.bounded) return "bounded";
    return d.ratio_means.back() > d.ratio_means[d.ratio_means.size() - 2] ? "growing" : "shrinking";
  } catch (const std::invalid_argument&) {
    return "n/a";
  }
}

[[nodiscard]] inline io::AsymptoticsRecord asymptotics_record(const ExperimentConfig& c, double alpha) {
  const ModelParams p(static_cast<std::size_t>(c.n), c.a, c.b, alpha);
  if (c.t_lo < 1 || c.t_hi <= c.t_lo) throw std::invalid_argument("need 1 <= t_lo < t_hi");
  const auto dense = c.finite ? finite_n_moments(p, c.t_hi).x : limit_moments(p, c.t_hi);
  const auto series = log_subsample(dense, c.t_lo, c.t_hi, c.per_decade);
  io::AsymptoticsRecord r;
  r.alpha = alpha;
  r.regime = classify_regime(alpha);
  r.fit = fit_power_law(series, {static_cast<double>(c.t_lo), static_cast<double>(c.t_hi)});
  r.ratio_flag = ratio_flag(series);
  return r;
}

inline void run_asymptotics(const ExperimentConfig& c, const OutputTargets& o, std::ostream& out) {
  (void)c.params();
  std::vector<io::AsymptoticsRecord> recs;
  const auto alphas = c.alphas.empty() ? std::vector<double>{c.alpha} : c.alphas;
  for (double a : alphas) recs.push_back(asymptotics_record(c, a));
  emit(io::asymptotics_table(recs), c, o.out, out, io::parse_format(c.resolved_format()));
}

inline void run_clt(const ExperimentConfig& c, const OutputTargets& o, std::ostream& out) {
  CltConfig cfg{c.params(), c.replicas, c.horizon, c.seed, o.threads, {}};
  const auto format = io::parse_format(c.resolved_format());
  const auto rep = clt_moment_test(cfg);
  emit(io::clt_table(rep), c, o.out, out, format);
  if (!o.summary_out.empty()) emit(io::clt_summary_table(rep), c, o.summary_out, out, io::Format::csv);
}

} // namespace detail

/// Execute one resolved configuration. Returns the process exit status.
inline int run_experiment(const ExperimentConfig& c, const OutputTargets& o, std::ostream& out) {
  if (o.threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (c.command == "simulate") detail::run_simulate(c, o, out);
  else if (c.command == "moments") detail::run_moments(c, o, out);
  else if (c.command == "asymptotics") detail::run_asymptotics(c, o, out);
  else if (c.command == "clt") detail::run_clt(c, o, out);
  else if (c.command == "verify") {
    std::ostringstream buf;
    const bool ok = print_acceptance(run_acceptance({c.quick, o.threads}), buf);
    out << buf.str();
    if (!o.out.empty()) {
      std::ofstream f(o.out);
      if (!f) throw std::runtime_error("cannot open output file '" + o.out + "'");
      f << buf.str();
    }
    return ok ? 0 : 2;
  } else {
    throw std::invalid_argument("unknown command '" + c.command + "'");
  }
  return 0;
}

/// Parse `args` (without the program name) and run. Exit status: 0 success,
/// 1 usage or validation error, 2 failed acceptance checks (verify).
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-field interacting Polya urn experiments", "urnsync"};
  app.set_version_flag("--version", version_string);
  app.require_subcommand(0, 1);

  ExperimentConfig v; // parse targets only
  OutputTargets o;
  o.threads = default_threads();
  std::string config_path;
  // (config field setter, option) for every option that maps onto the config
  std::vector<std::pair<std::function<void(ExperimentConfig&)>, CLI::Option*>> bound;
  auto bind = [&](CLI::Option* opt, auto member) {
    bound.emplace_back([&v, member](ExperimentConfig& c) { c.*member = v.*member; }, opt);
    return opt;
  };

  app.add_option("--config", config_path, "JSON config file or a prior output whose metadata is reused");
  app.add_option("--out", o.out, "Output file (default: stdout)");
  app.add_option("--full-out", o.full_out, "Per-urn output file for --full");
  app.add_option("--summary-out", o.summary_out, "CSV summary file for clt");
  app.add_option("--threads", o.threads, "Worker threads");
  bind(app.add_option("--n", v.n, "Number of urns"), &ExperimentConfig::n);
  bind(app.add_option("--a", v.a, "Initial red balls per urn"), &ExperimentConfig::a);
  bind(app.add_option("--b", v.b, "Initial white balls per urn"), &ExperimentConfig::b);
  bind(app.add_option("--alpha", v.alpha, "Interaction strength in [0,1]"), &ExperimentConfig::alpha);
  bind(app.add_option("--horizon", v.horizon, "Number of steps T"), &ExperimentConfig::horizon);
  bind(app.add_option("--replicas", v.replicas, "Independent replicas R"), &ExperimentConfig::replicas);
  bind(app.add_option("--seed", v.seed, "Random seed"), &ExperimentConfig::seed);
  bind(app.add_option("--format", v.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"})),
       &ExperimentConfig::format);
  bind(app.add_option("--record-every", v.record_every, "Record every k steps"), &ExperimentConfig::record_every);
  bind(app.add_option("--record-times", v.record_times, "Explicit record times")->delimiter(','),
       &ExperimentConfig::record_times);
  bind(app.add_option("--log-per-decade", v.log_per_decade, "Log-spaced record times per decade"),
       &ExperimentConfig::log_per_decade);
  bind(app.add_flag("--full", v.full, "Also record full per-urn vectors"), &ExperimentConfig::full);
  bind(app.add_flag("--ensemble", v.ensemble, "Ensemble estimates even for one replica"),
       &ExperimentConfig::ensemble);
  bind(app.add_option("--replica", v.replica, "Replica index of a single trajectory"), &ExperimentConfig::replica);
  bind(app.add_option("--alphas", v.alphas, "Alpha sweep for asymptotics")->delimiter(','),
       &ExperimentConfig::alphas);
  bind(app.add_option("--t-lo", v.t_lo, "Fit window start"), &ExperimentConfig::t_lo);
  bind(app.add_option("--t-hi", v.t_hi, "Fit window end"), &ExperimentConfig::t_hi);
  bind(app.add_option("--per-decade", v.per_decade, "Fit samples per decade"), &ExperimentConfig::per_decade);
  bind(app.add_flag("--finite", v.finite, "Fit the finite-N recursion instead of the N->inf limit"),
       &ExperimentConfig::finite);
  bind(app.add_option("--budget", v.budget, "Urn-step budget N*R*T"), &ExperimentConfig::budget);
  bind(app.add_flag("--budget-override", v.budget_override, "Run beyond the budget"),
       &ExperimentConfig::budget_override);
  bind(app.add_flag("--quick", v.quick, "verify: acceptance criteria only"), &ExperimentConfig::quick);

  std::vector<CLI::App*> subs;
  for (const auto& name : known_commands()) {
    auto* s = app.add_subcommand(name, "Run the " + name + " workflow");
    s->fallthrough();
    subs.push_back(s);
  }

  std::vector<const char*> argv{"urnsync"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version_string << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) from_json(load_config_json(config_path), cfg);
    for (auto& [apply, opt] : bound)
      if (opt->count() > 0) apply(cfg);
    bool named = false;
    for (auto* s : subs)
      if (s->parsed()) {
        cfg.command = s->get_name();
        named = true;
      }
    if (!named && config_path.empty()) {
      err << "error: a subcommand (" << "simulate, moments, asymptotics, clt, verify) or --config is required\n";
      return 1;
    }
    return run_experiment(cfg, o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace urnsync
