#pragma once

#include "synth/config.hpp"
#include "synth/linearize.hpp"
#include "synth/noc.hpp"
#include "synth/reach.hpp"
#include "synth/sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace synth {

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Everything that changes a WTG's linearization: machine, dispatch, input
// bound, horizon and reach settings, printed as exact hex floats.
std::uint64_t linearization_key(const ScenarioConfig& cfg);

void write_linearization(const std::string& path, std::uint64_t key, const std::vector<WtgLinearModel>& models);
// nullopt when the file is missing, unreadable or keyed differently.
std::optional<std::vector<WtgLinearModel>> read_linearization(const std::string& path, std::uint64_t key,
                                                              const ScenarioConfig& cfg);

// Shortest round-trip decimal form; fixed so reruns are byte-identical.
std::string num(double v);

void write_reach_csv(const std::string& path, const std::vector<ReachResult>& reach);
void write_schedule_csv(const std::string& path, const Schedule& s, double t_s);
void write_trajectories_csv(const std::string& path, const Trajectories& tr);
void write_plot_script(const std::string& path);
void write_text(const std::string& path, const std::string& body);

}  // namespace synth
