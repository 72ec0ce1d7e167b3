#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "relevo/cost.hpp"
#include "relevo/relation.hpp"

namespace relevo {

// Full-history Monte Carlo of a model set: compound insertions, intrinsic
// deletions with referential-integrity cascades, and per-tuple attribute
// modification clocks. Event-driven with exact interarrival sampling, so
// the oracle carries no discretization error.
struct SimConfig {
  ModelSet models;
  TimePoint t_end = 0.0;  // horizon end; the start is models.reference_time
  int replications = 1;
  std::uint64_t seed = 0;
  int threads = 0;              // 0 = hardware concurrency
  bool check_integrity = false;  // revalidate references after every event
};

enum class SimOp : char { kInsert = 'I', kDelete = 'D', kModify = 'M' };

// Finite-domain values are state indices; random-walk values are raw.
struct SimEvent {
  TimePoint time = 0.0;
  int relation = -1;
  SimOp op = SimOp::kInsert;
  std::uint64_t tuple = 0;
  int attribute = -1;  // kModify only
  double old_value = 0.0;
  double new_value = 0.0;
  int batch = -1;  // insertion batch id
};

struct TupleRecord {
  std::uint64_t id = 0;
  TimePoint birth = 0.0;
  TimePoint death = std::numeric_limits<double>::infinity();  // +inf = alive at the horizon
  bool initial = false;                                       // existed at the reference time
  std::vector<double> initial_values;
  std::vector<double> final_values;

  bool alive_at(TimePoint t) const { return death > t; }
};

struct SimTrace {
  std::vector<std::string> relation_names;
  std::vector<std::vector<std::string>> attribute_names;  // per relation
  std::vector<SimEvent> events;
  std::vector<std::vector<TupleRecord>> tuples;  // per relation, every tuple ever
  // Time of the first insertion, deletion, or value change per relation;
  // +inf when the relation never changed.
  std::vector<double> first_alteration;
  std::uint64_t replication = 0;
  // Insertions dropped because a parent relation had too few live tuples to
  // reference; nonzero values flag a structurally unstable configuration.
  std::uint64_t skipped_insertions = 0;

  int relation_index(const std::string& name) const;
};

// Per-replication statistic extracted from a trace, evaluated over
// (reference_time, t_end].
struct SimQuery {
  enum class Kind {
    kCardinality,       // tuples alive at the horizon
    kHistogramValue,    // alive tuples whose `attribute` equals `value`
    kSurvival,          // fraction of initial tuples alive (1 if none)
    kFirstAlteration,   // 1 if any insertion/deletion/value change happened
    kUnmodified,        // initial tuples alive with all values unchanged (Y-)
    kModifiedSurvivors, // initial tuples alive with some value changed (Y+)
    kTransferredTuples, // refresh transfer size: arrivals + modified + deleted
    kInsertionObsolescence,
    kDeletionObsolescence,
    kModificationObsolescence,
  };
  Kind kind = Kind::kCardinality;
  std::string relation;
  std::string attribute;  // kHistogramValue
  std::string value;      // kHistogramValue
  const CostSpec* cost = nullptr;  // obsolescence kinds
};

double trace_statistic(const SimTrace& trace, const SimQuery& query, const SimConfig& cfg);

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

// Runs all replications, returning full traces. Deterministic per
// (seed, replication index). Memory grows with replications; use
// run_summaries for large counts.
std::vector<SimTrace> run(const SimConfig& cfg);

Summary summarize(const std::vector<SimTrace>& traces, const SimQuery& query,
                  const SimConfig& cfg);

// Streaming form: per-replication statistics are accumulated without keeping
// traces, replications run across threads, and results are independent of
// the thread count.
std::vector<Summary> run_summaries(const SimConfig& cfg, const std::vector<SimQuery>& queries);

}  // namespace relevo
