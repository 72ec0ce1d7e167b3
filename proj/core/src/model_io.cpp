#include "relevo/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relevo/errors.hpp"

namespace relevo {
namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError("expected numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError("expected numeric field '" + key + "'");
  return j[key].get<double>();
}

// Times in configs: a number is fractional model days, a string is ISO-8601.
double parse_time_value(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    if (const auto t = parse_iso8601(j.get<std::string>())) return *t;
    throw ConfigError("cannot parse " + what + " timestamp: " + j.get<std::string>());
  }
  throw ConfigError(what + " must be a number of days or an ISO-8601 string");
}

// Segment boundaries: fractional days, or "Dow HH:MM" for weekly phases.
double parse_boundary(const json& j, bool weekly) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string text = j.get<std::string>();
    if (weekly) {
      if (const auto p = parse_week_phase(text)) return *p;
    }
    if (const auto t = parse_iso8601(text)) return *t;
    throw ConfigError("cannot parse segment boundary: " + text);
  }
  throw ConfigError("segment boundary must be a number or a time string");
}

double parse_hours(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    int h = 0, m = 0;
    if (std::sscanf(j.get<std::string>().c_str(), "%d:%d", &h, &m) == 2) {
      return h + m / 60.0;
    }
  }
  throw ConfigError("cannot parse " + what + " as hours");
}

int parse_dow(const json& j) {
  if (j.is_number_integer()) {
    const int d = j.get<int>();
    if (d < 0 || d > 6) throw ConfigError("weekday index out of range");
    return d;
  }
  if (j.is_string()) {
    if (const auto d = parse_weekday(j.get<std::string>())) return *d;
  }
  throw ConfigError("cannot parse weekday");
}

IntensityFunction intensity_from(const json& j) {
  if (j.is_number()) return IntensityFunction::constant(j.get<double>());
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError("intensity spec needs a 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "constant") return IntensityFunction::constant(require_number(j, "rate"));

  const bool recurrent = type == "recurrent";
  if (!recurrent && type != "piecewise") throw ConfigError("unknown intensity type: " + type);
  const double period = recurrent ? number_or(j, "period_days", 7.0) : 0.0;
  const bool weekly = recurrent && std::fabs(period - 7.0) < 1e-12;
  if (!j.contains("segments") || !j["segments"].is_array() || j["segments"].empty()) {
    throw ConfigError("piecewise intensity needs segments");
  }
  std::vector<Segment> segments;
  for (const auto& s : j["segments"]) {
    Segment seg;
    seg.start = parse_boundary(s.at("start"), weekly);
    seg.end = parse_boundary(s.at("end"), weekly);
    // A week-phase end at or before the start wraps ("Sun 00:00" to
    // "Mon 00:00" means the end of the cycle).
    if (recurrent && seg.end <= seg.start) seg.end += period;
    if (!s.contains("coeffs") || !s["coeffs"].is_array()) {
      throw ConfigError("segment needs a coeffs array");
    }
    for (const auto& c : s["coeffs"]) seg.coeffs.push_back(c.get<double>());
    segments.push_back(std::move(seg));
  }
  return recurrent ? IntensityFunction::recurrent(period, std::move(segments))
                   : IntensityFunction::piecewise(std::move(segments));
}

json intensity_to(const IntensityFunction& f) {
  json j;
  if (const auto rate = f.constant_rate()) {
    j["type"] = "constant";
    j["rate"] = *rate;
    return j;
  }
  j["type"] = f.is_recurrent() ? "recurrent" : "piecewise";
  if (f.is_recurrent()) j["period_days"] = f.period();
  json segs = json::array();
  for (const auto& seg : f.segments()) {
    segs.push_back({{"start", seg.start}, {"end", seg.end}, {"coeffs", seg.coeffs}});
  }
  j["segments"] = std::move(segs);
  return j;
}

BatchDistribution batch_from(const json& j) {
  std::vector<std::pair<int, double>> support;
  if (j.is_array()) {
    for (const auto& entry : j) {
      support.emplace_back(entry.at(0).get<int>(), entry.at(1).get<double>());
    }
  } else if (j.is_object()) {
    for (const auto& [size, p] : j.items()) {
      support.emplace_back(std::stoi(size), p.get<double>());
    }
  } else {
    throw ConfigError("batch distribution must be an array of [size, prob] or an object");
  }
  return BatchDistribution(std::move(support));
}

json batch_to(const BatchDistribution& b) {
  json j = json::array();
  for (const auto& [size, p] : b.support()) j.push_back({size, p});
  return j;
}

AttributeModel attribute_model_from(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  IntensityFunction gamma = j.contains("intensity") ? intensity_from(j["intensity"])
                                                    : IntensityFunction::constant(1.0);
  if (type == "binary") {
    return BinaryLumpAttribute{require_number(j, "theta"), require_number(j, "theta_prime"),
                               std::move(gamma)};
  }
  if (type == "walk") {
    return RandomWalkAttribute{require_number(j, "delta"), require_number(j, "sigma2"),
                               std::move(gamma)};
  }
  if (type == "markov") {
    std::vector<std::string> states = j.at("states").get<std::vector<std::string>>();
    std::vector<double> exits = j.at("exit_rates").get<std::vector<double>>();
    const auto& rows = j.at("transition_probs");
    Matrix probs(states.size(), states.size());
    if (!rows.is_array() || rows.size() != states.size()) {
      throw ConfigError("transition_probs must be a square matrix");
    }
    for (size_t u = 0; u < states.size(); ++u) {
      if (rows[u].size() != states.size()) {
        throw ConfigError("transition_probs must be a square matrix");
      }
      for (size_t v = 0; v < states.size(); ++v) probs(u, v) = rows[u][v].get<double>();
    }
    return MarkovAttribute(std::move(states), std::move(exits), std::move(probs),
                           std::move(gamma));
  }
  if (type == "overwrite") {
    std::vector<std::string> states = j.at("states").get<std::vector<std::string>>();
    std::vector<double> omega = j.at("omega").get<std::vector<double>>();
    std::vector<double> exits = j.at("exit_rates").get<std::vector<double>>();
    return OverwriteAttribute(std::move(states), std::move(omega), std::move(exits),
                              std::move(gamma));
  }
  throw ConfigError("unknown attribute model type: " + type);
}

json attribute_model_to(const AttributeModel& model) {
  json j;
  j["intensity"] = intensity_to(model_gamma(model));
  if (const auto* b = std::get_if<BinaryLumpAttribute>(&model)) {
    j["type"] = "binary";
    j["theta"] = b->theta;
    j["theta_prime"] = b->theta_prime;
  } else if (const auto* w = std::get_if<RandomWalkAttribute>(&model)) {
    j["type"] = "walk";
    j["delta"] = w->delta;
    j["sigma2"] = w->sigma2;
  } else if (const auto* o = std::get_if<OverwriteAttribute>(&model)) {
    j["type"] = "overwrite";
    j["states"] = o->states();
    j["omega"] = o->omega();
    j["exit_rates"] = o->exit_rates();
  } else {
    const auto& m = std::get<MarkovAttribute>(model);
    j["type"] = "markov";
    j["states"] = m.states();
    std::vector<double> exits;
    json rows = json::array();
    for (size_t u = 0; u < m.state_count(); ++u) {
      exits.push_back(m.exit_rate(u));
      std::vector<double> row(m.state_count(), 0.0);
      for (size_t v = 0; v < m.state_count(); ++v) {
        row[v] = m.exit_rate(u) > 0.0 ? m.generator()(u, v) / m.exit_rate(u) : 0.0;
      }
      row[u] = 0.0;
      rows.push_back(row);
    }
    j["exit_rates"] = exits;
    j["transition_probs"] = std::move(rows);
  }
  return j;
}

std::map<std::string, double> histogram_from(const json& j) {
  std::map<std::string, double> out;
  for (const auto& [value, count] : j.items()) out[value] = count.get<double>();
  return out;
}

RelationModel relation_from(const std::string& name, const json& j) {
  RelationModel m;
  m.name = name;
  if (j.contains("insertion")) m.insertion = intensity_from(j["insertion"]);
  if (j.contains("deletion")) m.deletion = intensity_from(j["deletion"]);
  if (j.contains("batch")) m.batch = batch_from(j["batch"]);
  if (j.contains("deletion_batch")) m.deletion_batch = batch_from(j["deletion_batch"]);
  m.cardinality = number_or(j, "cardinality", 0.0);
  if (j.contains("lifespan")) {
    GeneralLifespan life;
    for (const auto& knot : j["lifespan"].at("cdf")) {
      life.cdf_knots.emplace_back(knot.at(0).get<double>(), knot.at(1).get<double>());
    }
    if (j["lifespan"].contains("ages")) {
      life.ages = j["lifespan"]["ages"].get<std::vector<double>>();
    }
    life.validate();
    life.sketch_ages();  // oversized tables collapse to 256 quantiles
    m.lifespan = std::move(life);
  }
  if (j.contains("attributes")) {
    for (const auto& [attr_name, spec_json] : j["attributes"].items()) {
      AttributeSpec spec{attribute_model_from(spec_json.at("model")), {}, {}};
      if (spec_json.contains("histogram")) spec.histogram = histogram_from(spec_json["histogram"]);
      if (spec_json.contains("insertion_values")) {
        spec.insertion_values = histogram_from(spec_json["insertion_values"]);
      }
      m.attributes.emplace(attr_name, std::move(spec));
    }
  }
  if (j.contains("dependent_counts")) {
    m.dependent_counts = histogram_from(j["dependent_counts"]);
  }
  return m;
}

json relation_to(const RelationModel& m) {
  json j;
  j["insertion"] = intensity_to(m.insertion);
  j["deletion"] = intensity_to(m.deletion);
  if (!m.batch.is_unit()) j["batch"] = batch_to(m.batch);
  if (!m.deletion_batch.is_unit()) j["deletion_batch"] = batch_to(m.deletion_batch);
  j["cardinality"] = m.cardinality;
  if (m.lifespan) {
    json life;
    life["cdf"] = json::array();
    for (const auto& [age, p] : m.lifespan->cdf_knots) life["cdf"].push_back({age, p});
    life["ages"] = m.lifespan->ages;
    j["lifespan"] = std::move(life);
  }
  if (!m.attributes.empty()) {
    json attrs;
    for (const auto& [name, spec] : m.attributes) {
      json a;
      a["model"] = attribute_model_to(spec.model);
      if (!spec.histogram.empty()) a["histogram"] = spec.histogram;
      if (!spec.insertion_values.empty()) a["insertion_values"] = spec.insertion_values;
      attrs[name] = std::move(a);
    }
    j["attributes"] = std::move(attrs);
  }
  if (!m.dependent_counts.empty()) j["dependent_counts"] = m.dependent_counts;
  return j;
}

ModelSet model_set_from(const json& j) {
  ModelSet ms;
  if (j.contains("reference_time")) {
    ms.reference_time = parse_time_value(j["reference_time"], "reference_time");
  }
  if (!j.contains("relations") || !j["relations"].is_object()) {
    throw ConfigError("model config needs a 'relations' object");
  }
  for (const auto& [name, rel] : j["relations"].items()) {
    ms.relations.emplace(name, relation_from(name, rel));
    ms.graph.add_relation(name);
  }
  if (j.contains("graph") && j["graph"].contains("edges")) {
    for (const auto& e : j["graph"]["edges"]) {
      ms.graph.add_edge(e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                        e.contains("multiplicity") ? e["multiplicity"].get<int>() : 1);
    }
  }
  ms.validate();
  return ms;
}

json model_set_to(const ModelSet& ms) {
  json j;
  j["reference_time"] = ms.reference_time;
  json rels;
  for (const auto& [name, model] : ms.relations) rels[name] = relation_to(model);
  j["relations"] = std::move(rels);
  json edges = json::array();
  for (const auto& from : ms.graph.relations()) {
    for (const auto& [to, w] : ms.graph.direct_edges(from)) {
      edges.push_back({{"from", from}, {"to", to}, {"multiplicity", w}});
    }
  }
  j["graph"] = {{"edges", std::move(edges)}};
  return j;
}

ObsolescenceWeight weight_from(const json& j) {
  ObsolescenceWeight w;
  const double a1 = number_or(j, "a1", 1.0);
  const double a2 = number_or(j, "a2", 1.0);
  if (j.contains("work_hours") && !j["work_hours"].empty()) {
    std::vector<WeeklyBlock> blocks;
    for (const auto& b : j["work_hours"]) {
      blocks.push_back({parse_dow(b.at("dow")), parse_hours(b.at("start"), "start"),
                        parse_hours(b.at("end"), "end")});
    }
    w.a = weekly_weight(blocks, a1, a2);
  } else {
    w.a = IntensityFunction::constant(a1);
  }
  w.flat = number_or(j, "flat", 0.0);
  return w;
}

CostSpec cost_spec_from(const json& j) {
  CostSpec spec;
  spec.alpha = number_or(j, "alpha", 0.0);
  if (spec.alpha < 0.0 || spec.alpha > 1.0) throw ConfigError("alpha must lie in [0,1]");
  spec.setup_c = number_or(j, "setup_c", 0.0);
  spec.beta = number_or(j, "beta", 0.0);
  spec.g_ins = weight_from(j);
  spec.g_del = j.contains("g_del") ? weight_from(j["g_del"]) : spec.g_ins;
  if (j.contains("metrics")) {
    for (const auto& [attr, mj] : j["metrics"].items()) {
      const std::string type = mj.at("type").get<std::string>();
      if (type == "unit") {
        spec.metrics.emplace(attr, UnitCostMetric{});
      } else if (type == "squared_error") {
        SquaredErrorMetric sq;
        sq.k = number_or(mj, "k", 1.0);
        sq.legacy_walk_moment = mj.contains("legacy_walk_moment") && mj["legacy_walk_moment"].get<bool>();
        spec.metrics.emplace(attr, sq);
      } else if (type == "matrix") {
        const auto& rows = mj.at("costs");
        Matrix costs(rows.size(), rows.size());
        for (size_t u = 0; u < rows.size(); ++u) {
          if (rows[u].size() != rows.size()) throw ConfigError("cost matrix must be square");
          for (size_t v = 0; v < rows.size(); ++v) costs(u, v) = rows[u][v].get<double>();
          if (costs(u, u) != 0.0) throw ConfigError("cost matrix diagonal must be zero");
        }
        spec.metrics.emplace(attr, CostMatrixMetric{std::move(costs)});
      } else {
        throw ConfigError("unknown metric type: " + type);
      }
    }
  }
  return spec;
}

json weight_to(const ObsolescenceWeight& w) {
  json j;
  j["intensity"] = intensity_to(w.a);
  j["flat"] = w.flat;
  return j;
}

json cost_spec_to(const CostSpec& spec) {
  json j;
  j["alpha"] = spec.alpha;
  j["setup_c"] = spec.setup_c;
  j["beta"] = spec.beta;
  j["g_ins_resolved"] = weight_to(spec.g_ins);
  j["g_del_resolved"] = weight_to(spec.g_del);
  json metrics;
  for (const auto& [attr, metric] : spec.metrics) {
    json mj;
    if (std::holds_alternative<UnitCostMetric>(metric)) {
      mj["type"] = "unit";
    } else if (const auto* sq = std::get_if<SquaredErrorMetric>(&metric)) {
      mj["type"] = "squared_error";
      mj["k"] = sq->k;
      mj["legacy_walk_moment"] = sq->legacy_walk_moment;
    } else {
      const auto& cm = std::get<CostMatrixMetric>(metric);
      mj["type"] = "matrix";
      json rows = json::array();
      for (size_t u = 0; u < cm.costs.rows(); ++u) {
        std::vector<double> row(cm.costs.cols());
        for (size_t v = 0; v < cm.costs.cols(); ++v) row[v] = cm.costs(u, v);
        rows.push_back(row);
      }
      mj["costs"] = std::move(rows);
    }
    metrics[attr] = std::move(mj);
  }
  if (!metrics.is_null()) j["metrics"] = std::move(metrics);
  return j;
}

}  // namespace

IntensityFunction parse_intensity(const std::string& json_text) {
  return intensity_from(parse_json(json_text));
}

std::string serialize_intensity(const IntensityFunction& f) { return intensity_to(f).dump(2); }

ModelSet parse_model_set(const std::string& json_text) {
  return model_set_from(parse_json(json_text));
}

std::string serialize_model_set(const ModelSet& ms) { return model_set_to(ms).dump(2); }

ModelSet load_model_set(const std::string& path) { return parse_model_set(read_file(path)); }

void save_model_set(const std::string& path, const ModelSet& ms) {
  write_file(path, serialize_model_set(ms) + "\n");
}

CostSpec parse_cost_spec(const std::string& json_text) {
  return cost_spec_from(parse_json(json_text));
}

std::string serialize_cost_spec(const CostSpec& spec) { return cost_spec_to(spec).dump(2); }

CostSpec load_cost_spec(const std::string& path) { return parse_cost_spec(read_file(path)); }

void save_cost_spec(const std::string& path, const CostSpec& spec) {
  write_file(path, serialize_cost_spec(spec) + "\n");
}

SegmentationSpec parse_segmentation(const std::string& json_text) {
  const json j = parse_json(json_text);
  SegmentationSpec seg;
  if (!j.contains("blocks") || !j["blocks"].is_array()) {
    throw ConfigError("segmentation needs a 'blocks' array");
  }
  for (const auto& b : j["blocks"]) {
    SegmentationBlock block;
    if (!b.contains("days") || !b["days"].is_array()) {
      throw ConfigError("segmentation block needs a 'days' array");
    }
    for (const auto& d : b["days"]) block.days[static_cast<size_t>(parse_dow(d))] = true;
    block.start_hours = b.contains("start") ? parse_hours(b["start"], "start") : 0.0;
    block.end_hours = b.contains("end") ? parse_hours(b["end"], "end") : 24.0;
    seg.blocks.push_back(block);
  }
  seg.validate();
  return seg;
}

SegmentationSpec load_segmentation(const std::string& path) {
  return parse_segmentation(read_file(path));
}

SimConfig parse_sim_config(const std::string& json_text, const std::string& base_dir) {
  const json j = parse_json(json_text);
  SimConfig cfg;
  if (j.contains("model")) {
    cfg.models = model_set_from(j["model"]);
  } else if (j.contains("model_path")) {
    std::string path = j["model_path"].get<std::string>();
    if (!path.empty() && path[0] != '/') path = base_dir + "/" + path;
    cfg.models = load_model_set(path);
  } else {
    throw ConfigError("sim config needs 'model' or 'model_path'");
  }
  if (j.contains("t_end")) {
    cfg.t_end = parse_time_value(j["t_end"], "t_end");
  } else if (j.contains("horizon_days")) {
    cfg.t_end = cfg.models.reference_time + require_number(j, "horizon_days");
  } else {
    throw ConfigError("sim config needs 't_end' or 'horizon_days'");
  }
  cfg.replications = static_cast<int>(number_or(j, "replications", 1));
  if (cfg.replications < 1) throw ConfigError("replications must be positive");
  cfg.seed = static_cast<std::uint64_t>(number_or(j, "seed", 0));
  cfg.threads = static_cast<int>(number_or(j, "threads", 0));
  cfg.check_integrity = j.contains("check_integrity") && j["check_integrity"].get<bool>();
  return cfg;
}

SimConfig load_sim_config(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const std::string base = slash == std::string::npos ? "." : path.substr(0, slash);
  return parse_sim_config(read_file(path), base);
}

EventLog load_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open event log: " + path);
  EventLog log;
  log.source = path;
  std::string line;
  bool first = true;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (first) {
      first = false;
      if (!fields.empty() && fields[0] == "timestamp") continue;  // header
    }
    if (fields.empty()) continue;
    Event e;
    if (const auto t = parse_iso8601(fields[0])) {
      e.time = *t;
    } else {
      try {
        size_t pos = 0;
        e.time = std::stod(fields[0], &pos);
        if (pos != fields[0].size()) throw std::invalid_argument(fields[0]);
      } catch (const std::exception&) {
        throw ConfigError("bad timestamp on line " + std::to_string(line_no) + ": " + fields[0]);
      }
    }
    if (fields.size() > 1 && !fields[1].empty()) e.count = std::stoi(fields[1]);
    if (fields.size() > 2 && !fields[2].empty()) {
      const std::string& op = fields[2];
      if (op == "insert" || op == "i") {
        e.op = EventOp::kInsert;
      } else if (op == "delete" || op == "d") {
        e.op = EventOp::kDelete;
      } else if (op == "modify" || op == "m") {
        e.op = EventOp::kModify;
      } else {
        throw ConfigError("unknown op on line " + std::to_string(line_no) + ": " + op);
      }
    }
    log.events.push_back(e);
  }
  log.validate();
  return log;
}

void save_event_log(const std::string& path, const EventLog& log) {
  std::ostringstream out;
  out << "timestamp,count,op\n";
  for (const auto& e : log.events) {
    const char* op = e.op == EventOp::kInsert ? "insert"
                     : e.op == EventOp::kDelete ? "delete"
                                                : "modify";
    out << format_iso8601(e.time) << ',' << e.count << ',' << op << '\n';
  }
  write_file(path, out.str());
}

void save_trace_csv(const std::string& path, const SimTrace& trace) {
  std::ostringstream out;
  out << "time,relation,op,tuple,attribute,old_value,new_value,batch\n";
  for (const auto& e : trace.events) {
    const auto& rel = trace.relation_names[static_cast<size_t>(e.relation)];
    out << format_iso8601(e.time) << ',' << rel << ',' << static_cast<char>(e.op) << ','
        << e.tuple << ',';
    if (e.attribute >= 0) {
      out << trace.attribute_names[static_cast<size_t>(e.relation)][static_cast<size_t>(
                 e.attribute)]
          << ',' << e.old_value << ',' << e.new_value;
    } else {
      out << ",,";
    }
    out << ',';
    if (e.batch >= 0) out << e.batch;
    out << '\n';
  }
  write_file(path, out.str());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
  if (!out) throw ConfigError("failed writing file: " + path);
}

}  // namespace relevo
