#pragma once

#include "synth/afr.hpp"
#include "synth/config.hpp"
#include "synth/linearize.hpp"
#include "synth/noc.hpp"
#include "synth/reach.hpp"
#include "synth/sim.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace synth {

// Equilibrium through stacked prediction for one config.
struct ModelChain {
  std::vector<WtgUnit> units;
  std::vector<ReachResult> reach;  // empty when the linearization came from the cache
  std::vector<WtgLinearModel> lin;
  AfrContinuous afr;
  AfrDiscrete disc;
  StackedPrediction sp;
  NocConfig noc;                   // x0 sized to the AFR state
  std::uint64_t key = 0;
  bool cache_hit = false;

  std::vector<std::pair<std::string, double>> timings;
};

// cache_path empty: never read or write a cache.
ModelChain build_model_chain(const ScenarioConfig& cfg, const std::string& cache_path = "");

// Linear AFR replay of a schedule from the trigger under one realization.
Trajectories linear_replay(const ModelChain& mc, const Schedule& s, const Realization& w);

struct RunReport {
  Mode mode = Mode::robust;
  std::string out_dir;
  std::vector<std::pair<std::string, double>> timings;
  bool cache_hit = false;
  std::vector<IntervalVector> theta, s, o;
  bool has_schedule = false;
  Schedule schedule;
  Metrics closed_loop;
  double trigger_time = -1.0;
  bool has_replay = false;     // worst-case linear replay of the schedule
  Margin replay_margin;
  Metrics replay;
  bool pass = false;           // no violation flag in any metrics block
  std::vector<std::string> artifacts;
  std::vector<std::string> notices;

  std::string text() const;
};

struct PipelineOptions {
  std::string out_dir;         // empty: cfg.out_dir
  bool write_artifacts = true;
};

// Stage failures rethrow with the stage name and the last artifact written.
RunReport run_pipeline(const ScenarioConfig& cfg, const PipelineOptions& opt = {});

}  // namespace synth
