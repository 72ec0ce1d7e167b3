// relevo: fit content-evolution models to event logs, predict relation
// state, schedule and score replica-refresh policies, and run the Monte
// Carlo engine. See README.md for file formats.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "relevo/errors.hpp"
#include "relevo/evolution.hpp"
#include "relevo/fitting.hpp"
#include "relevo/model_io.hpp"
#include "relevo/policy.hpp"
#include "relevo/simulator.hpp"

namespace {

using namespace relevo;

double parse_time_arg(const std::string& text) {
  if (const auto t = parse_iso8601(text)) return *t;
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("cannot parse time argument: " + text);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw ConfigError("empty grid argument");
  return out;
}

std::string output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("RELEVO_OUT_DIR")) return env;
  return ".";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
}

// The first relation that actually receives insertions, falling back to
// the first overall.
std::string default_relation(const ModelSet& ms) {
  for (const auto& [name, model] : ms.relations) {
    if (!model.insertion.is_zero()) return name;
  }
  return ms.relations.begin()->first;
}

std::string rejection_level(const KsResult& ks) {
  // Smallest alpha at which the fit is rejected, Table-4 style.
  if (ks.rejected(0.005)) return "<0.005";
  for (double alpha : {0.01, 0.05, 0.1}) {
    if (ks.rejected(alpha)) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.3f", alpha);
      return buf;
    }
  }
  return ">0.100";
}

struct FitRow {
  std::string label;
  double lambda_mean = 0.0;  // average events/day of the fitted intensity
  KsResult ks;
  bool compound = false;
};

int cmd_fit(const std::string& log_path, double window_seconds,
            const std::string& segments_path, const std::string& variant, bool compound,
            const std::string& out_flag) {
  const std::string out = output_dir(out_flag);
  ensure_dir(out);
  const EventLog raw = load_event_log(log_path).filtered(EventOp::kInsert);
  if (raw.events.size() < 2) throw TooFewEvents("log has fewer than two insertion events");
  const EventLog batched = batch_events(raw, window_seconds / kSecondsPerDay);

  std::optional<SegmentationSpec> seg;
  if (!segments_path.empty()) seg = load_segmentation(segments_path);

  std::vector<FitRow> rows;
  const auto add_row = [&](const std::string& label, const EventLog& log, bool use_rpc,
                           bool use_compound) {
    FitRow row;
    row.label = label;
    row.compound = use_compound;
    IntensityFunction intensity = use_rpc ? fit_rpc(log, *seg)
                                          : IntensityFunction::constant(fit_homogeneous(log));
    const double span = log.events.back().time - log.events.front().time;
    row.lambda_mean = intensity.integrate(log.events.front().time, log.events.back().time) / span;
    row.ks = ks_test(rescale_interarrivals(log, intensity), exp1_cdf);
    rows.push_back(row);
    return intensity;
  };

  add_row("homogeneous", raw, false, false);
  add_row("homogeneous+compound", batched, false, true);
  if (seg) {
    add_row("rpc", raw, true, false);
    add_row("rpc+compound", batched, true, true);
  }

  // The requested variant becomes the written model config.
  const bool want_rpc = variant == "rpc";
  if (want_rpc && !seg) throw ConfigError("--variant rpc needs --segments");
  const EventLog& chosen_log = compound ? batched : raw;
  ModelSet ms;
  RelationModel rel;
  rel.name = "R";
  rel.insertion = want_rpc ? fit_rpc(chosen_log, *seg)
                           : IntensityFunction::constant(fit_homogeneous(chosen_log));
  if (compound) rel.batch = fit_batch_distribution(chosen_log);
  ms.reference_time = chosen_log.events.back().time;
  ms.relations.emplace("R", std::move(rel));
  ms.graph.add_relation("R");
  save_model_set(out + "/model.json", ms);

  std::ostringstream report;
  report << "model,n,d_n,threshold_0.100,threshold_0.050,threshold_0.010,threshold_0.005,"
            "rejection_level,mean_rate_per_day\n";
  for (const auto& row : rows) {
    report << row.label << ',' << row.ks.n << ',' << row.ks.d_n;
    for (double alpha : {0.1, 0.05, 0.01, 0.005}) report << ',' << row.ks.thresholds.at(alpha);
    report << ',' << rejection_level(row.ks) << ',' << row.lambda_mean << '\n';
  }
  write_file(out + "/fit_report.csv", report.str());
  std::cout << report.str();
  std::cout << "model written to " << out << "/model.json\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& at, const std::string& what,
                const std::string& relation_flag, const std::string& attribute, bool mc,
                int replications, std::uint64_t seed, const std::string& out_flag) {
  const ModelSet ms = load_model_set(model_path);
  const TimePoint s = ms.reference_time;
  const TimePoint f = parse_time_arg(at);
  if (f < s) throw ConfigError("--at precedes the model reference time");

  std::vector<std::string> relations;
  if (!relation_flag.empty()) {
    relations.push_back(relation_flag);
  } else {
    for (const auto& [name, model] : ms.relations) {
      (void)model;
      relations.push_back(name);
    }
  }

  std::ostringstream csv;
  std::vector<SimQuery> queries;
  std::vector<std::string> row_prefix;

  if (what == "cardinality") {
    csv << "relation,at,analytic";
    for (const auto& name : relations) {
      row_prefix.push_back(name);
      queries.push_back({SimQuery::Kind::kCardinality, name, "", "", nullptr});
    }
  } else if (what == "histogram") {
    if (attribute.empty()) throw ConfigError("--what histogram needs --attribute");
    csv << "relation,attribute,value,at,analytic";
    for (const auto& name : relations) {
      const Histogram h = expected_histogram(ms, name, attribute, s, f);
      for (const auto& [value, count] : h) {
        (void)count;
        row_prefix.push_back(name + ',' + attribute + ',' + value);
        queries.push_back({SimQuery::Kind::kHistogramValue, name, attribute, value, nullptr});
      }
    }
  } else if (what == "first-alteration") {
    csv << "relation,at,analytic";
    for (const auto& name : relations) {
      row_prefix.push_back(name);
      queries.push_back({SimQuery::Kind::kFirstAlteration, name, "", "", nullptr});
    }
  } else {
    throw ConfigError("unknown --what: " + what);
  }

  std::vector<Summary> sim;
  if (mc) {
    csv << ",mc_mean,mc_se";
    SimConfig cfg;
    cfg.models = ms;
    cfg.t_end = f;
    cfg.replications = replications;
    cfg.seed = seed;
    sim = run_summaries(cfg, queries);
  }
  csv << '\n';

  for (size_t i = 0; i < queries.size(); ++i) {
    double analytic = 0.0;
    const SimQuery& q = queries[i];
    switch (q.kind) {
      case SimQuery::Kind::kCardinality:
        analytic = expected_cardinality(ms, q.relation, s, f);
        break;
      case SimQuery::Kind::kHistogramValue:
        analytic = expected_histogram(ms, q.relation, q.attribute, s, f).at(q.value);
        break;
      case SimQuery::Kind::kFirstAlteration:
        analytic = first_alteration(ms, q.relation, s, f);
        break;
      default:
        break;
    }
    csv << row_prefix[i] << ',' << format_iso8601(f) << ',' << analytic;
    if (mc) csv << ',' << sim[i].mean << ',' << sim[i].std_error;
    csv << '\n';
  }

  if (out_flag.empty()) {
    std::cout << csv.str();
  } else {
    write_file(out_flag, csv.str());
    std::cout << "prediction written to " << out_flag << '\n';
  }
  return 0;
}

int cmd_policy_eval(const std::string& model_path, const std::string& cost_path,
                    const std::string& policies_arg, const std::string& m_grid_arg,
                    const std::string& alpha_arg, const std::string& from,
                    const std::string& to, const std::string& relation_flag,
                    const std::string& trace_path, const std::string& out_flag) {
  const ModelSet ms = load_model_set(model_path);
  CostSpec cost = load_cost_spec(cost_path);
  const std::string out = output_dir(out_flag);
  ensure_dir(out);

  const std::string relation =
      relation_flag.empty() ? default_relation(ms) : relation_flag;
  const TimePoint t0 = from.empty() ? ms.reference_time : parse_time_arg(from);
  const TimePoint t_end = parse_time_arg(to);
  if (t_end <= t0) throw ConfigError("--to must come after --from");

  const std::vector<double> m_grid = parse_grid(m_grid_arg);
  const std::vector<double> alphas = alpha_arg.empty() ? std::vector<double>{cost.alpha}
                                                       : parse_grid(alpha_arg);
  std::vector<std::string> policy_names;
  {
    std::stringstream ss(policies_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item != "usp" && item != "threshold" && item != "fa") {
        throw UnknownPolicy("unknown policy: " + item);
      }
      policy_names.push_back(item);
    }
  }
  if (policy_names.empty()) throw UnknownPolicy("no policies requested");

  std::optional<EventLog> trace;
  if (!trace_path.empty()) trace = load_event_log(trace_path);

  const auto& model = ms.relation(relation);
  const double lambda_ref = model.insertion.integrate(t0, t_end) / (t_end - t0);

  std::ostringstream csv;
  csv << "policy,M,param,alpha,refresh_count,transcription,obsolescence,total\n";
  std::map<std::string, std::ostringstream> plots;
  for (const auto& name : policy_names) {
    plots[name] << "M,alpha,refresh_count,transcription,obsolescence,total\n";
  }

  for (const auto& name : policy_names) {
    for (double m : m_grid) {
      Policy policy;
      double param;
      if (name == "usp") {
        policy = UspPolicy{m};
        param = usp_interval(lambda_ref, m);
      } else if (name == "threshold") {
        param = threshold_from_M(lambda_ref, m);
        policy = ThresholdPolicy{param};
      } else {
        param = fa_pi_from_M(m);
        policy = FirstAlterationPolicy{param};
      }
      const Schedule schedule = generate_schedule(policy, ms, relation, cost, t0, t_end);
      for (double alpha : alphas) {
        CostSpec spec = cost;
        spec.alpha = alpha;
        const ScheduleCost result =
            trace ? evaluate_schedule_trace(schedule, spec, *trace)
                  : evaluate_schedule(schedule, spec, ms, relation);
        csv << name << ',' << m << ',' << param << ',' << alpha << ','
            << result.refresh_count << ',' << result.transcription << ','
            << result.obsolescence << ',' << result.total << '\n';
        plots[name] << m << ',' << alpha << ',' << result.refresh_count << ','
                    << result.transcription << ',' << result.obsolescence << ','
                    << result.total << '\n';
      }
    }
  }

  write_file(out + "/policy_eval.csv", csv.str());
  for (const auto& [name, data] : plots) {
    write_file(out + "/plot_" + name + ".csv", data.str());
  }
  std::cout << csv.str();
  std::cout << "reports written to " << out << '\n';
  return 0;
}

int cmd_simulate(const std::string& config_path, std::int64_t seed_override,
                 int trace_limit, const std::string& out_flag) {
  SimConfig cfg = load_sim_config(config_path);
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  const std::string out = output_dir(out_flag);
  ensure_dir(out);

  std::vector<SimQuery> queries;
  std::vector<std::string> labels;
  for (const auto& [name, model] : cfg.models.relations) {
    (void)model;
    queries.push_back({SimQuery::Kind::kCardinality, name, "", "", nullptr});
    labels.push_back("cardinality." + name);
    queries.push_back({SimQuery::Kind::kSurvival, name, "", "", nullptr});
    labels.push_back("survival." + name);
  }
  const std::vector<Summary> summaries = run_summaries(cfg, queries);

  std::ostringstream summary;
  summary << "{\n  \"replications\": " << cfg.replications << ",\n  \"seed\": " << cfg.seed
          << ",\n  \"t_end\": " << cfg.t_end << ",\n  \"statistics\": {\n";
  for (size_t i = 0; i < queries.size(); ++i) {
    summary << "    \"" << labels[i] << "\": {\"mean\": " << summaries[i].mean
            << ", \"std_error\": " << summaries[i].std_error << "}";
    summary << (i + 1 < queries.size() ? ",\n" : "\n");
  }
  summary << "  }\n}\n";
  write_file(out + "/summary.json", summary.str());

  // Full traces for the first few replications, for inspection.
  SimConfig trace_cfg = cfg;
  trace_cfg.replications = std::min(cfg.replications, std::max(trace_limit, 0));
  if (trace_cfg.replications > 0) {
    const std::vector<SimTrace> traces = run(trace_cfg);
    for (const auto& trace : traces) {
      save_trace_csv(out + "/trace_" + std::to_string(trace.replication) + ".csv", trace);
    }
  }
  std::cout << summary.str();
  std::cout << "simulation output written to " << out << '\n';
  return 0;
}

int cmd_validate(const std::string& model_path, const std::string& log_path,
                 const std::string& relation_flag, const std::string& out_flag) {
  const ModelSet ms = load_model_set(model_path);
  const std::string relation =
      relation_flag.empty() ? default_relation(ms) : relation_flag;
  const EventLog log = load_event_log(log_path).filtered(EventOp::kInsert);
  const KsResult ks = ks_test(rescale_interarrivals(log, ms.relation(relation).insertion),
                              exp1_cdf);

  std::ostringstream report;
  report << "relation,n,d_n,threshold_0.100,threshold_0.050,threshold_0.010,threshold_0.005,"
            "rejection_level\n";
  report << relation << ',' << ks.n << ',' << ks.d_n;
  for (double alpha : {0.1, 0.05, 0.01, 0.005}) report << ',' << ks.thresholds.at(alpha);
  report << ',' << rejection_level(ks) << '\n';
  if (!out_flag.empty()) write_file(out_flag, report.str());
  std::cout << report.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"content-evolution modeling and replica-refresh scheduling"};
  app.require_subcommand(1);

  // fit
  std::string fit_log, fit_segments, fit_variant = "homogeneous", fit_out;
  double fit_window = 60.0;
  bool fit_compound = false;
  auto* fit = app.add_subcommand("fit", "fit insertion models to an event log");
  fit->add_option("--log", fit_log, "event-log CSV")->required();
  fit->add_option("--window", fit_window, "batching window, seconds (default 60)");
  fit->add_option("--segments", fit_segments, "weekly segmentation JSON (enables RPC fits)");
  fit->add_option("--variant", fit_variant, "written model: homogeneous|rpc")
      ->check(CLI::IsMember({"homogeneous", "rpc"}));
  fit->add_flag("--compound", fit_compound, "write the compound (batched) variant");
  fit->add_option("--out", fit_out, "output directory (default $RELEVO_OUT_DIR or .)");

  // predict
  std::string pr_model, pr_at, pr_what = "cardinality", pr_relation, pr_attribute, pr_out;
  bool pr_mc = false;
  int pr_reps = 10000;
  std::uint64_t pr_seed = 0;
  auto* predict = app.add_subcommand("predict", "analytic predictions at a future time");
  predict->add_option("--model", pr_model, "model-config JSON")->required();
  predict->add_option("--at", pr_at, "prediction time (ISO-8601 or model days)")->required();
  predict->add_option("--what", pr_what, "cardinality|histogram|first-alteration")
      ->check(CLI::IsMember({"cardinality", "histogram", "first-alteration"}));
  predict->add_option("--relation", pr_relation, "restrict to one relation");
  predict->add_option("--attribute", pr_attribute, "attribute for histogram predictions");
  predict->add_flag("--mc", pr_mc, "add Monte Carlo mean and standard error columns");
  predict->add_option("--replications", pr_reps, "Monte Carlo replications (default 10000)");
  predict->add_option("--seed", pr_seed, "Monte Carlo seed");
  predict->add_option("--out", pr_out, "output CSV (default stdout)");

  // policy-eval
  std::string pe_model, pe_cost, pe_policies = "usp,threshold,fa", pe_grid = "1";
  std::string pe_alpha, pe_from, pe_to, pe_relation, pe_trace, pe_out;
  auto* pe = app.add_subcommand("policy-eval", "score refresh policies over a parameter grid");
  pe->add_option("--model", pe_model, "model-config JSON")->required();
  pe->add_option("--cost", pe_cost, "cost-spec JSON")->required();
  pe->add_option("--policies", pe_policies, "comma list of usp,threshold,fa");
  pe->add_option("--M-grid", pe_grid, "comma list of USP multipliers M");
  pe->add_option("--alpha", pe_alpha, "comma list of alpha values (default: cost spec's)");
  pe->add_option("--from", pe_from, "horizon start (default model reference time)");
  pe->add_option("--to", pe_to, "horizon end")->required();
  pe->add_option("--relation", pe_relation, "relation (default: first)");
  pe->add_option("--trace", pe_trace, "event log: score realized costs instead of expected");
  pe->add_option("--out", pe_out, "output directory (default $RELEVO_OUT_DIR or .)");

  // simulate
  std::string sim_config, sim_out;
  std::int64_t sim_seed = -1;
  int sim_trace_limit = 1;
  auto* sim = app.add_subcommand("simulate", "run the Monte Carlo engine");
  sim->add_option("--config", sim_config, "sim-config JSON")->required();
  sim->add_option("--seed", sim_seed, "override the config seed");
  sim->add_option("--trace-limit", sim_trace_limit, "replications to dump as CSV (default 1)");
  sim->add_option("--out", sim_out, "output directory (default $RELEVO_OUT_DIR or .)");

  // validate
  std::string va_model, va_log, va_relation, va_out;
  auto* va = app.add_subcommand("validate", "KS-test a model against an event log");
  va->add_option("--model", va_model, "model-config JSON")->required();
  va->add_option("--log", va_log, "event-log CSV")->required();
  va->add_option("--relation", va_relation, "relation (default: first)");
  va->add_option("--out", va_out, "report CSV path (also printed)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      return cmd_fit(fit_log, fit_window, fit_segments, fit_variant, fit_compound, fit_out);
    }
    if (predict->parsed()) {
      return cmd_predict(pr_model, pr_at, pr_what, pr_relation, pr_attribute, pr_mc, pr_reps,
                         pr_seed, pr_out);
    }
    if (pe->parsed()) {
      return cmd_policy_eval(pe_model, pe_cost, pe_policies, pe_grid, pe_alpha, pe_from, pe_to,
                             pe_relation, pe_trace, pe_out);
    }
    if (sim->parsed()) return cmd_simulate(sim_config, sim_seed, sim_trace_limit, sim_out);
    if (va->parsed()) return cmd_validate(va_model, va_log, va_relation, va_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
