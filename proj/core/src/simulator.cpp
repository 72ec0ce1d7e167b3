#include "relevo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <queue>
#include <thread>
#include <unordered_map>

#include "relevo/errors.hpp"
#include "relevo/rng.hpp"

namespace relevo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int checked_count(double x, const std::string& what) {
  const double r = std::round(x);
  if (std::fabs(x - r) > 1e-6 || r < 0.0) {
    throw ConfigError("simulation needs an integral nonnegative " + what);
  }
  return static_cast<int>(r);
}

double numeric_label(const std::string& label) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(label, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != label.size()) throw ConfigError("numeric value label expected, got '" + label + "'");
  return v;
}

// Static per-attribute info resolved once per run.
struct AttrInfo {
  std::string name;
  const AttributeModel* model = nullptr;
  const IntensityFunction* gamma = nullptr;
  bool finite = false;
  std::vector<std::string> states;
  std::vector<std::pair<double, int>> initial_pool;  // (value, count), expansion order
  std::vector<double> insert_values;                 // insertion-value support
  std::vector<double> insert_cum;                    // cumulative probabilities
};

struct RelInfo {
  std::string name;
  const RelationModel* model = nullptr;
  std::vector<std::pair<int, int>> parents;  // (relation index, multiplicity)
  std::vector<AttrInfo> attrs;
  int initial_count = 0;
};

// Relations in an order where referenced relations come first, so initial
// wiring finds its parents seeded.
std::vector<RelInfo> resolve_relations(const ModelSet& ms) {
  ms.validate();
  std::vector<std::string> names;
  for (const auto& [name, model] : ms.relations) {
    (void)model;
    names.push_back(name);
  }
  std::vector<std::string> order;
  std::map<std::string, bool> placed;
  // Repeatedly place relations whose referenced relations are all placed;
  // acyclicity (validated above) guarantees progress.
  while (order.size() < names.size()) {
    for (const auto& name : names) {
      if (placed[name]) continue;
      bool ready = true;
      if (ms.graph.has_relation(name)) {
        for (const auto& [parent, w] : ms.graph.direct_edges(name)) {
          (void)w;
          if (!placed[parent]) {
            ready = false;
            break;
          }
        }
      }
      if (ready) {
        order.push_back(name);
        placed[name] = true;
      }
    }
  }

  std::map<std::string, int> index;
  for (size_t i = 0; i < order.size(); ++i) index[order[i]] = static_cast<int>(i);

  std::vector<RelInfo> rels;
  for (const auto& name : order) {
    RelInfo info;
    info.name = name;
    info.model = &ms.relation(name);
    info.initial_count = checked_count(info.model->cardinality, "cardinality of " + name);
    if (ms.graph.has_relation(name)) {
      for (const auto& [parent, w] : ms.graph.direct_edges(name)) {
        info.parents.emplace_back(index[parent], w);
      }
    }
    for (const auto& [attr_name, spec] : info.model->attributes) {
      AttrInfo a;
      a.name = attr_name;
      a.model = &spec.model;
      a.gamma = &model_gamma(spec.model);
      a.finite = has_finite_domain(spec.model);
      if (a.finite) {
        a.states = model_states(spec.model);
        if (info.initial_count > 0) {
          if (spec.histogram.empty()) {
            throw MissingHistogram("simulation needs the histogram of " + name + "." + attr_name);
          }
          int total = 0;
          for (size_t v = 0; v < a.states.size(); ++v) {
            const auto it = spec.histogram.find(a.states[v]);
            if (it == spec.histogram.end()) continue;
            const int count = checked_count(it->second, "histogram count");
            if (count > 0) a.initial_pool.emplace_back(static_cast<double>(v), count);
            total += count;
          }
          if (total != info.initial_count) {
            throw ConfigError("histogram of " + attr_name + " does not populate " + name);
          }
        }
        const std::vector<double> dist = spec.insertion_distribution();
        double cum = 0.0;
        for (size_t v = 0; v < dist.size(); ++v) {
          a.insert_values.push_back(static_cast<double>(v));
          cum += dist[v];
          a.insert_cum.push_back(cum);
        }
      } else {
        int total = 0;
        for (const auto& [label, count_raw] : spec.histogram) {
          const int count = checked_count(count_raw, "histogram count");
          if (count > 0) a.initial_pool.emplace_back(numeric_label(label), count);
          total += count;
        }
        if (!spec.histogram.empty() && total != info.initial_count) {
          throw ConfigError("histogram of " + attr_name + " does not populate " + name);
        }
        double cum = 0.0;
        if (!spec.insertion_values.empty()) {
          double total_p = 0.0;
          for (const auto& [label, p] : spec.insertion_values) total_p += p;
          for (const auto& [label, p] : spec.insertion_values) {
            a.insert_values.push_back(numeric_label(label));
            cum += p / total_p;
            a.insert_cum.push_back(cum);
          }
        }
      }
      info.attrs.push_back(std::move(a));
    }
    rels.push_back(std::move(info));
  }
  return rels;
}

struct EngineEvent {
  TimePoint time;
  std::uint64_t order;  // queue insertion order; ties resolve deterministically
  enum class Kind : char { kInsert, kDeath, kModify } kind;
  int rel;
  std::uint64_t tuple;
  int attr;

  bool operator>(const EngineEvent& other) const {
    if (time != other.time) return time > other.time;
    return order > other.order;
  }
};

struct LiveTuple {
  std::uint64_t id = 0;
  std::size_t record = 0;  // index into the trace's TupleRecord vector
  std::vector<double> values;
  std::vector<std::pair<int, std::uint64_t>> parents;   // (rel, id)
  std::vector<std::pair<int, std::uint64_t>> children;  // (rel, id)
};

class Engine {
 public:
  Engine(const SimConfig& cfg, const std::vector<RelInfo>& rels, std::uint64_t replication)
      : cfg_(cfg),
        rels_(rels),
        s_(cfg.models.reference_time),
        f_(cfg.t_end),
        rng_(cfg.seed, replication) {
    trace_.replication = replication;
    trace_.tuples.resize(rels_.size());
    trace_.first_alteration.assign(rels_.size(), kInf);
    live_.resize(rels_.size());
    live_ids_.resize(rels_.size());
    next_id_.resize(rels_.size(), 0);
    for (const auto& r : rels_) {
      trace_.relation_names.push_back(r.name);
      std::vector<std::string> attr_names;
      for (const auto& a : r.attrs) attr_names.push_back(a.name);
      trace_.attribute_names.push_back(std::move(attr_names));
    }
  }

  SimTrace run(bool record_events) {
    record_events_ = record_events;
    for (size_t r = 0; r < rels_.size(); ++r) {
      for (int i = 0; i < rels_[r].initial_count; ++i) {
        create_tuple(static_cast<int>(r), s_, /*initial_index=*/i, /*batch=*/-1);
      }
    }
    for (size_t r = 0; r < rels_.size(); ++r) schedule_insertion(static_cast<int>(r), s_);
    while (!queue_.empty()) {
      const EngineEvent ev = queue_.top();
      queue_.pop();
      if (ev.time > f_) break;
      dispatch(ev);
      if (cfg_.check_integrity) check_integrity();
    }
    for (size_t r = 0; r < rels_.size(); ++r) {
      for (auto& [id, tup] : live_[r]) {
        (void)id;
        trace_.tuples[r][tup.record].final_values = tup.values;
      }
    }
    return std::move(trace_);
  }

 private:
  double initial_value(const AttrInfo& attr, int tuple_index) const {
    int seen = 0;
    for (const auto& [value, count] : attr.initial_pool) {
      seen += count;
      if (tuple_index < seen) return value;
    }
    return attr.initial_pool.empty() ? 0.0 : attr.initial_pool.back().first;
  }

  double inserted_value(const AttrInfo& attr) {
    if (attr.insert_values.empty()) return 0.0;
    const double u = rng_.uniform01();
    for (size_t i = 0; i < attr.insert_cum.size(); ++i) {
      if (u < attr.insert_cum[i]) return attr.insert_values[i];
    }
    return attr.insert_values.back();
  }

  bool create_tuple(int rel, TimePoint t, int initial_index, int batch) {
    const RelInfo& info = rels_[rel];

    std::vector<std::pair<int, std::uint64_t>> parents;
    for (const auto& [parent_rel, multiplicity] : info.parents) {
      const auto& ids = live_ids_[parent_rel];
      if (ids.size() < static_cast<size_t>(multiplicity)) {
        if (initial_index >= 0) {
          throw ConfigError("initial population of " + rels_[parent_rel].name +
                            " is too small for the multiplicity of " + info.name);
        }
        ++trace_.skipped_insertions;
        return false;
      }
      if (initial_index >= 0) {
        // Tuple i references parents i*w .. i*w + w - 1 (mod |S|): distinct
        // per tuple, and the referenced set has exactly min(|S|, |R| w)
        // members.
        for (int j = 0; j < multiplicity; ++j) {
          const size_t slot =
              (static_cast<size_t>(initial_index) * multiplicity + j) % ids.size();
          parents.emplace_back(parent_rel, ids[slot]);
        }
      } else {
        std::vector<size_t> picked;  // without replacement
        while (picked.size() < static_cast<size_t>(multiplicity)) {
          const size_t slot = static_cast<size_t>(rng_.below(ids.size()));
          if (std::find(picked.begin(), picked.end(), slot) == picked.end()) {
            picked.push_back(slot);
          }
        }
        for (size_t slot : picked) parents.emplace_back(parent_rel, ids[slot]);
      }
    }

    const std::uint64_t id = next_id_[rel]++;
    LiveTuple tup;
    tup.id = id;
    tup.parents = parents;
    tup.values.reserve(info.attrs.size());
    for (const auto& attr : info.attrs) {
      tup.values.push_back(initial_index >= 0 ? initial_value(attr, initial_index)
                                              : inserted_value(attr));
    }

    TupleRecord record;
    record.id = id;
    record.birth = t;
    record.initial = initial_index >= 0;
    record.initial_values = tup.values;
    tup.record = trace_.tuples[rel].size();
    trace_.tuples[rel].push_back(std::move(record));

    for (const auto& [prel, pid] : parents) {
      live_[prel].at(pid).children.emplace_back(rel, id);
    }
    live_ids_[rel].push_back(id);
    const size_t record_index = trace_.tuples[rel].size() - 1;
    live_[rel].emplace(id, std::move(tup));

    schedule_death(rel, id, t, initial_index >= 0, record_index);
    for (size_t a = 0; a < info.attrs.size(); ++a) {
      schedule_modification(rel, id, static_cast<int>(a), t);
    }
    if (record_events_ && initial_index < 0) {
      trace_.events.push_back({t, rel, SimOp::kInsert, id, -1, 0.0, 0.0, batch});
    }
    return true;
  }

  void schedule_insertion(int rel, TimePoint from) {
    const auto tau = NonhomExp(rels_[rel].model->insertion, from).sample(rng_, f_ - from);
    if (!tau) return;
    queue_.push({from + *tau, order_++, EngineEvent::Kind::kInsert, rel, 0, -1});
  }

  void schedule_death(int rel, std::uint64_t id, TimePoint t, bool is_initial,
                      size_t record_index) {
    const RelationModel& model = *rels_[rel].model;
    std::optional<Duration> remaining;
    if (model.memoryless()) {
      remaining = NonhomExp(model.deletion, t).sample(rng_, f_ - t);
    } else {
      // Remaining life from the conditional lifetime distribution given the
      // tuple's age. Initial ages cycle through the (possibly sketched) table.
      const GeneralLifespan& life = *model.lifespan;
      double age = 0.0;
      if (is_initial && !life.ages.empty()) age = life.ages[record_index % life.ages.size()];
      const double at_age = life.cdf(age);
      if (at_age >= 1.0) {
        remaining = 0.0;
      } else {
        const double target = at_age + rng_.uniform01() * (1.0 - at_age);
        remaining = std::max(0.0, life.quantile(target) - age);
      }
      if (t + *remaining > f_) remaining.reset();
    }
    if (!remaining) return;
    queue_.push({t + *remaining, order_++, EngineEvent::Kind::kDeath, rel, id, -1});
  }

  void schedule_modification(int rel, std::uint64_t id, int attr, TimePoint t) {
    const AttrInfo& info = rels_[rel].attrs[attr];
    const LiveTuple& tup = live_[rel].at(id);
    const double rate = exit_rate_of(info, tup.values[attr]);
    if (rate <= 0.0) return;
    const double target = rng_.exponential() / rate;
    const auto tau = info.gamma->invert(t, target, f_ - t);
    if (!tau) return;
    queue_.push({t + *tau, order_++, EngineEvent::Kind::kModify, rel, id, attr});
  }

  // Clock rate of the next transition event at the current value. Overwrite
  // clocks run at the unfolded rate: a fired event may redraw the same value.
  static double exit_rate_of(const AttrInfo& info, double value) {
    if (const auto* m = std::get_if<MarkovAttribute>(info.model)) {
      return m->exit_rate(static_cast<size_t>(value));
    }
    if (const auto* o = std::get_if<OverwriteAttribute>(info.model)) {
      return o->exit_rates()[static_cast<size_t>(value)];
    }
    if (const auto* b = std::get_if<BinaryLumpAttribute>(info.model)) {
      return value == 0.0 ? b->theta : b->theta_prime;
    }
    return 1.0;  // random walk
  }

  double transition_value(const AttrInfo& info, double value) {
    if (const auto* m = std::get_if<MarkovAttribute>(info.model)) {
      return static_cast<double>(m->sample_jump(static_cast<size_t>(value), rng_));
    }
    if (const auto* o = std::get_if<OverwriteAttribute>(info.model)) {
      const auto& omega = o->omega();
      double u = rng_.uniform01();
      for (size_t v = 0; v < omega.size(); ++v) {
        u -= omega[v];
        if (u < 0.0) return static_cast<double>(v);
      }
      return static_cast<double>(omega.size() - 1);
    }
    if (std::get_if<BinaryLumpAttribute>(info.model)) {
      return value == 0.0 ? 1.0 : 0.0;
    }
    const auto& walk = std::get<RandomWalkAttribute>(*info.model);
    return value + walk.delta + std::sqrt(walk.sigma2) * rng_.normal();
  }

  void dispatch(const EngineEvent& ev) {
    switch (ev.kind) {
      case EngineEvent::Kind::kInsert: {
        const int size = rels_[ev.rel].model->batch.sample(rng_);
        for (int i = 0; i < size; ++i) {
          create_tuple(ev.rel, ev.time, /*initial_index=*/-1, batch_counter_);
        }
        ++batch_counter_;
        alteration_seen(ev.rel, ev.time);
        schedule_insertion(ev.rel, ev.time);
        break;
      }
      case EngineEvent::Kind::kDeath:
        // Stale once the tuple died in an earlier cascade.
        if (live_[ev.rel].count(ev.tuple)) delete_cascade(ev.rel, ev.tuple, ev.time);
        break;
      case EngineEvent::Kind::kModify: {
        const auto it = live_[ev.rel].find(ev.tuple);
        if (it == live_[ev.rel].end()) break;
        LiveTuple& tup = it->second;
        const double old_value = tup.values[ev.attr];
        const double new_value = transition_value(rels_[ev.rel].attrs[ev.attr], old_value);
        tup.values[ev.attr] = new_value;
        if (record_events_) {
          trace_.events.push_back(
              {ev.time, ev.rel, SimOp::kModify, ev.tuple, ev.attr, old_value, new_value, -1});
        }
        if (old_value != new_value) alteration_seen(ev.rel, ev.time);
        schedule_modification(ev.rel, ev.tuple, ev.attr, ev.time);
        break;
      }
    }
  }

  void delete_cascade(int rel, std::uint64_t id, TimePoint t) {
    const auto it = live_[rel].find(id);
    if (it == live_[rel].end()) return;  // deleted earlier in this cascade
    LiveTuple tup = std::move(it->second);
    live_[rel].erase(it);
    auto& ids = live_ids_[rel];
    *std::find(ids.begin(), ids.end(), id) = ids.back();
    ids.pop_back();

    TupleRecord& record = trace_.tuples[rel][tup.record];
    record.death = t;
    record.final_values = tup.values;
    if (record_events_) {
      trace_.events.push_back({t, rel, SimOp::kDelete, id, -1, 0.0, 0.0, -1});
    }
    alteration_seen(rel, t);
    for (const auto& [child_rel, child_id] : tup.children) {
      delete_cascade(child_rel, child_id, t);
    }
  }

  void alteration_seen(int rel, TimePoint t) {
    auto& first = trace_.first_alteration[rel];
    first = std::min(first, t);
  }

  void check_integrity() const {
    for (size_t r = 0; r < rels_.size(); ++r) {
      for (const auto& [id, tup] : live_[r]) {
        (void)id;
        for (const auto& [prel, pid] : tup.parents) {
          if (!live_[prel].count(pid)) {
            throw Error("referential integrity violated: live tuple references a dead parent");
          }
        }
      }
    }
  }

  const SimConfig& cfg_;
  const std::vector<RelInfo>& rels_;
  TimePoint s_, f_;
  RngStream rng_;
  SimTrace trace_;
  std::priority_queue<EngineEvent, std::vector<EngineEvent>, std::greater<>> queue_;
  std::vector<std::unordered_map<std::uint64_t, LiveTuple>> live_;
  std::vector<std::vector<std::uint64_t>> live_ids_;
  std::vector<std::uint64_t> next_id_;
  std::uint64_t order_ = 0;
  int batch_counter_ = 0;
  bool record_events_ = true;
};

double metric_between(const ModificationMetric& metric, const AttributeModel& model,
                      const std::vector<std::string>& states, double old_value,
                      double new_value) {
  if (std::holds_alternative<UnitCostMetric>(metric)) {
    return old_value != new_value ? 1.0 : 0.0;
  }
  if (const auto* cm = std::get_if<CostMatrixMetric>(&metric)) {
    if (!has_finite_domain(model)) {
      throw UnsupportedModel("cost matrices need a finite domain");
    }
    return cm->costs(static_cast<size_t>(old_value), static_cast<size_t>(new_value));
  }
  const auto& sq = std::get<SquaredErrorMetric>(metric);
  double from = old_value, to = new_value;
  if (has_finite_domain(model)) {
    from = numeric_label(states[static_cast<size_t>(old_value)]);
    to = numeric_label(states[static_cast<size_t>(new_value)]);
  }
  const double diff = to - from;
  return sq.k * diff * diff;
}

}  // namespace

int SimTrace::relation_index(const std::string& name) const {
  const auto it = std::find(relation_names.begin(), relation_names.end(), name);
  if (it == relation_names.end()) throw MissingRelation("relation not in trace: " + name);
  return static_cast<int>(it - relation_names.begin());
}

double trace_statistic(const SimTrace& trace, const SimQuery& query, const SimConfig& cfg) {
  const TimePoint s = cfg.models.reference_time;
  const TimePoint f = cfg.t_end;
  const int rel = trace.relation_index(query.relation);
  const auto& tuples = trace.tuples[static_cast<size_t>(rel)];

  const auto attr_index = [&](const std::string& name) {
    const auto& names = trace.attribute_names[static_cast<size_t>(rel)];
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw MissingAttributeModel("attribute not in trace: " + name);
    return static_cast<size_t>(it - names.begin());
  };

  switch (query.kind) {
    case SimQuery::Kind::kCardinality: {
      double n = 0.0;
      for (const auto& t : tuples) n += t.alive_at(f) ? 1.0 : 0.0;
      return n;
    }
    case SimQuery::Kind::kHistogramValue: {
      const size_t a = attr_index(query.attribute);
      const auto& spec = cfg.models.relation(query.relation).attributes.at(query.attribute);
      double wanted;
      if (has_finite_domain(spec.model)) {
        const auto& states = model_states(spec.model);
        const auto it = std::find(states.begin(), states.end(), query.value);
        if (it == states.end()) throw UnknownValue("value outside the domain: " + query.value);
        wanted = static_cast<double>(it - states.begin());
      } else {
        wanted = numeric_label(query.value);
      }
      double n = 0.0;
      for (const auto& t : tuples) {
        if (t.alive_at(f) && t.final_values[a] == wanted) n += 1.0;
      }
      return n;
    }
    case SimQuery::Kind::kSurvival: {
      double initial = 0.0, surviving = 0.0;
      for (const auto& t : tuples) {
        if (!t.initial) continue;
        initial += 1.0;
        surviving += t.alive_at(f) ? 1.0 : 0.0;
      }
      return initial == 0.0 ? 1.0 : surviving / initial;
    }
    case SimQuery::Kind::kFirstAlteration:
      return trace.first_alteration[static_cast<size_t>(rel)] <= f ? 1.0 : 0.0;
    case SimQuery::Kind::kUnmodified:
    case SimQuery::Kind::kModifiedSurvivors: {
      double unmodified = 0.0, modified = 0.0;
      for (const auto& t : tuples) {
        if (!t.initial || !t.alive_at(f)) continue;
        (t.final_values == t.initial_values ? unmodified : modified) += 1.0;
      }
      return query.kind == SimQuery::Kind::kUnmodified ? unmodified : modified;
    }
    case SimQuery::Kind::kTransferredTuples: {
      // What one refresh at f would ship: surviving arrivals, modified
      // survivors, and deleted initial tuples.
      double transferred = 0.0;
      for (const auto& t : tuples) {
        if (!t.initial) {
          transferred += t.alive_at(f) ? 1.0 : 0.0;
        } else if (t.alive_at(f)) {
          transferred += t.final_values != t.initial_values ? 1.0 : 0.0;
        } else {
          transferred += 1.0;
        }
      }
      return transferred;
    }
    case SimQuery::Kind::kInsertionObsolescence: {
      if (!query.cost) throw ConfigError("obsolescence query needs a cost spec");
      double total = 0.0;
      for (const auto& t : tuples) {
        if (!t.initial && t.birth > s && t.birth <= f && t.alive_at(f)) {
          total += query.cost->g_ins.g(s, f, t.birth);
        }
      }
      return total;
    }
    case SimQuery::Kind::kDeletionObsolescence: {
      if (!query.cost) throw ConfigError("obsolescence query needs a cost spec");
      double total = 0.0;
      for (const auto& t : tuples) {
        if (t.initial && t.death <= f) total += query.cost->g_del.g(s, f, t.death);
      }
      return total;
    }
    case SimQuery::Kind::kModificationObsolescence: {
      if (!query.cost) throw ConfigError("obsolescence query needs a cost spec");
      const auto& model = cfg.models.relation(query.relation);
      double total = 0.0;
      for (const auto& [attr, metric] : query.cost->metrics) {
        const auto& spec = model.attributes.at(attr);
        const size_t a = attr_index(attr);
        const std::vector<std::string> states =
            has_finite_domain(spec.model) ? model_states(spec.model)
                                          : std::vector<std::string>{};
        for (const auto& t : tuples) {
          if (!t.initial || !t.alive_at(f)) continue;
          total += metric_between(metric, spec.model, states, t.initial_values[a],
                                  t.final_values[a]);
        }
      }
      return total;
    }
  }
  throw Error("unhandled query kind");
}

std::vector<SimTrace> run(const SimConfig& cfg) {
  if (cfg.replications < 1) throw ConfigError("at least one replication required");
  const std::vector<RelInfo> rels = resolve_relations(cfg.models);
  std::vector<SimTrace> traces;
  traces.reserve(static_cast<size_t>(cfg.replications));
  for (int r = 0; r < cfg.replications; ++r) {
    traces.push_back(Engine(cfg, rels, static_cast<std::uint64_t>(r)).run(true));
  }
  return traces;
}

Summary summarize(const std::vector<SimTrace>& traces, const SimQuery& query,
                  const SimConfig& cfg) {
  if (traces.empty()) throw EmptyTraces("summarize needs at least one trace");
  std::vector<double> stats;
  stats.reserve(traces.size());
  for (const auto& t : traces) stats.push_back(trace_statistic(t, query, cfg));
  Summary s;
  s.n = stats.size();
  for (double x : stats) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : stats) ss += (x - s.mean) * (x - s.mean);
    s.std_error = std::sqrt(ss / (static_cast<double>(s.n) * static_cast<double>(s.n - 1)));
  }
  return s;
}

std::vector<Summary> run_summaries(const SimConfig& cfg, const std::vector<SimQuery>& queries) {
  if (cfg.replications < 1) throw ConfigError("at least one replication required");
  const std::vector<RelInfo> rels = resolve_relations(cfg.models);
  const size_t reps = static_cast<size_t>(cfg.replications);

  // stats[q][r]; filled by stripe, reduced in replication order so results
  // do not depend on the thread count.
  std::vector<std::vector<double>> stats(queries.size(), std::vector<double>(reps, 0.0));
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, reps);

  const auto worker = [&](unsigned stripe) {
    for (size_t r = stripe; r < reps; r += threads) {
      const SimTrace trace = Engine(cfg, rels, static_cast<std::uint64_t>(r)).run(false);
      if (trace.skipped_insertions > 0) {
        throw ConfigError("insertions dropped: parent relations too small");
      }
      for (size_t q = 0; q < queries.size(); ++q) {
        stats[q][r] = trace_statistic(trace, queries[q], cfg);
      }
    }
  };

  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          worker(t);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<Summary> out;
  for (size_t q = 0; q < queries.size(); ++q) {
    Summary s;
    s.n = reps;
    for (double x : stats[q]) s.mean += x;
    s.mean /= static_cast<double>(reps);
    if (reps > 1) {
      double ss = 0.0;
      for (double x : stats[q]) ss += (x - s.mean) * (x - s.mean);
      s.std_error = std::sqrt(ss / (static_cast<double>(reps) * static_cast<double>(reps - 1)));
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace relevo
