#include "synth/artifacts.hpp"
#include "synth/config.hpp"
#include "synth/error.hpp"
#include "synth/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <mutex>
#include <sstream>

namespace {

enum Exit : int { pass = 0, violation = 1, infeasible = 2, config_error = 3, internal_error = 4 };

int exit_for(const synth::SynthError& e) {
  switch (e.kind()) {
    case synth::ErrorKind::infeasible: return infeasible;
    case synth::ErrorKind::config: return config_error;
    default: return internal_error;
  }
}

std::mutex g_out;

void say(std::ostream& os, const std::string& s) {
  std::lock_guard<std::mutex> lock(g_out);
  os << s << std::flush;
}

synth::ScenarioConfig load(const std::string& path, const std::string& mode) {
  synth::ScenarioConfig cfg = synth::load_config(path);
  if (!mode.empty()) cfg.mode = synth::parse_mode(mode);
  return cfg;
}

int run_one(const std::string& path, const std::string& mode, const std::string& out) {
  try {
    synth::ScenarioConfig cfg = load(path, mode);
    for (const auto& n : cfg.notices) say(std::cerr, path + ": " + n + "\n");
    synth::PipelineOptions opt;
    opt.out_dir = out;
    const synth::RunReport rep = synth::run_pipeline(cfg, opt);
    std::ostringstream os;
    os << path << ": mode " << synth::mode_name(rep.mode) << ", C_U " << synth::num(rep.schedule.c_u) << ", nadir "
       << synth::num(rep.closed_loop.nadir_hz) << " Hz, " << (rep.pass ? "PASS" : "FAIL (limit violation)") << ", report "
       << (std::filesystem::path(rep.out_dir) / "report.txt").string() << "\n";
    say(std::cout, os.str());
    return rep.pass ? pass : violation;
  } catch (const synth::SynthError& e) {
    say(std::cerr, path + ": error: " + e.what() + "\n");
    return exit_for(e);
  } catch (const std::exception& e) {
    say(std::cerr, path + ": internal error: " + e.what() + "\n");
    return internal_error;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust frequency-support scheduling for wind-diesel microgrids"};
  app.require_subcommand(1);

  std::vector<std::string> run_configs;
  std::string mode, out;
  int jobs = 1;
  CLI::App* run = app.add_subcommand("run", "synthesize a schedule and verify it in closed loop");
  run->add_option("config", run_configs, "scenario file(s)")->required()->check(CLI::ExistingFile);
  run->add_option("--mode", mode, "robust | nominal | no-support")
      ->check(CLI::IsMember({"robust", "nominal", "no-support"}));
  run->add_option("--out", out, "output directory (one subdirectory per config when several are given)");
  run->add_option("--jobs", jobs, "configs run in parallel")->check(CLI::PositiveNumber);

  std::string check_config;
  CLI::App* check = app.add_subcommand("check", "validate a scenario file");
  check->add_option("config", check_config, "scenario file")->required();

  std::string lp_config, lp_mode, lp_out;
  CLI::App* lp = app.add_subcommand("export-lp", "write the scheduling MILP in LP format");
  lp->add_option("config", lp_config, "scenario file")->required();
  lp->add_option("--mode", lp_mode, "robust | nominal")->check(CLI::IsMember({"robust", "nominal"}));
  lp->add_option("--out", lp_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? pass : config_error;
  }

  if (*run) {
    std::vector<std::string> outs;
    for (const auto& c : run_configs) {
      if (run_configs.size() == 1) {
        outs.push_back(out);
      } else {
        const std::string base = out.empty() ? "out" : out;
        outs.push_back((std::filesystem::path(base) / std::filesystem::path(c).stem()).string());
      }
    }
    std::vector<int> codes(run_configs.size(), pass);
    std::size_t next = 0;
    while (next < run_configs.size()) {
      std::vector<std::future<int>> batch;
      const std::size_t end = std::min(run_configs.size(), next + static_cast<std::size_t>(jobs));
      for (std::size_t i = next; i < end; ++i) {
        batch.push_back(std::async(std::launch::async, run_one, run_configs[i], mode, outs[i]));
      }
      for (std::size_t i = next; i < end; ++i) codes[i] = batch[i - next].get();
      next = end;
    }
    // Most severe outcome wins.
    return *std::max_element(codes.begin(), codes.end());
  }

  if (*check) {
    try {
      const synth::ScenarioConfig cfg = synth::load_config(check_config);
      for (const auto& n : cfg.notices) std::cerr << n << "\n";
      std::cout << check_config << ": ok (" << cfg.wtgs.size() << " WTGs, Z " << cfg.z << ", t_s " << synth::num(cfg.t_s)
                << " s, mode " << synth::mode_name(cfg.mode) << ")\n";
      return pass;
    } catch (const synth::SynthError& e) {
      std::cerr << e.what() << "\n";
      return exit_for(e);
    }
  }

  try {
    synth::ScenarioConfig cfg = load(lp_config, lp_mode);
    if (cfg.mode == synth::Mode::no_support) {
      throw synth::SynthError(synth::ErrorKind::config, "export-lp: no-support mode has no MILP");
    }
    const synth::ModelChain mc = synth::build_model_chain(cfg);
    const synth::MilpInstance m = synth::build_milp(mc.sp, mc.disc, mc.noc, cfg.mode == synth::Mode::robust);
    if (lp_out.empty()) {
      synth::write_lp(std::cout, m);
    } else {
      std::ofstream os(lp_out, std::ios::binary | std::ios::trunc);
      if (!os) throw synth::SynthError(synth::ErrorKind::config, "cannot write '" + lp_out + "'");
      synth::write_lp(os, m);
    }
    return pass;
  } catch (const synth::SynthError& e) {
    std::cerr << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return internal_error;
  }
}
