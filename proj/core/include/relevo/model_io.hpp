#pragma once

#include <string>

#include "relevo/cost.hpp"
#include "relevo/fitting.hpp"
#include "relevo/relation.hpp"
#include "relevo/simulator.hpp"

namespace relevo {

// JSON model-config and cost-spec serialization plus the event-log and
// trace CSV formats. All functions throw ConfigError with a field path on
// malformed input. Times in files are ISO-8601 UTC timestamps or plain
// fractional model days; recurrent segment boundaries also accept
// "Dow HH:MM" week phases.

IntensityFunction parse_intensity(const std::string& json_text);
std::string serialize_intensity(const IntensityFunction& f);

ModelSet parse_model_set(const std::string& json_text);
std::string serialize_model_set(const ModelSet& ms);
ModelSet load_model_set(const std::string& path);
void save_model_set(const std::string& path, const ModelSet& ms);

CostSpec parse_cost_spec(const std::string& json_text);
std::string serialize_cost_spec(const CostSpec& spec);
CostSpec load_cost_spec(const std::string& path);
void save_cost_spec(const std::string& path, const CostSpec& spec);

SegmentationSpec parse_segmentation(const std::string& json_text);
SegmentationSpec load_segmentation(const std::string& path);

// Simulation run description: {"model": <model-config object> or
// "model_path", "horizon_days" or "t_end", "replications", "seed",
// "threads", "check_integrity"}. Relative model paths resolve against
// `base_dir`.
SimConfig parse_sim_config(const std::string& json_text, const std::string& base_dir = ".");
SimConfig load_sim_config(const std::string& path);

// Event-log CSV: header `timestamp,count,op`; ISO-8601 UTC timestamps (or
// fractional model days); `count` defaults to 1 and `op` to insert.
EventLog load_event_log(const std::string& path);
void save_event_log(const std::string& path, const EventLog& log);

// Per-event trace CSV for debugging simulator output.
void save_trace_csv(const std::string& path, const SimTrace& trace);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace relevo
