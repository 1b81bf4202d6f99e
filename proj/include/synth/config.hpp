#pragma once

#include "synth/interval.hpp"
#include "synth/models.hpp"
#include "synth/noc.hpp"
#include "synth/reach.hpp"
#include "synth/sim.hpp"

#include <string>
#include <vector>

namespace synth {

enum class Mode { robust, nominal, no_support };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);  // throws SynthError(config)

struct WtgConfig {
  std::string name;
  DfigParams params;
  Dispatch dispatch;
};

struct SimConfig {
  double horizon_s = 15.0;
  double step_s = 1e-3;
  int record_stride = 10;
};

struct ScenarioConfig {
  DieselParams diesel;
  std::vector<WtgConfig> wtgs;
  Interval u_bound{0.0, 0.1};
  double t_s = 0.1;
  double horizon_s = 10.0;  // T
  int z = 100;
  NocConfig noc;            // x0 left empty; sized by the pipeline
  double x0_dw_d_hz = -0.11;
  SolveOptions solve;
  Disturbance disturbance;
  SimConfig sim;
  ReachOptions reach;
  std::string out_dir = "out";
  Mode mode = Mode::robust;
  std::vector<std::string> notices;  // defaults that were filled in
};

// Schema check of YAML text. Every failure is reported with its line in a
// single SynthError(config) whose message starts with "schema violation".
ScenarioConfig validate_config(const std::string& text, const std::string& origin = "<config>");
ScenarioConfig load_config(const std::string& path);

}  // namespace synth
