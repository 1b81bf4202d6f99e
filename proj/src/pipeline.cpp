#include "synth/pipeline.hpp"

#include "synth/artifacts.hpp"
#include "synth/error.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace synth {

namespace fs = std::filesystem;

namespace {

class Stages {
 public:
  explicit Stages(std::vector<std::pair<std::string, double>>& timings) : timings_(timings) {}

  std::string last_artifact = "none";

  template <class F>
  auto run(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto done = [&] {
      timings_.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    };
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        done();
      } else {
        auto r = f();
        done();
        return r;
      }
    } catch (const SynthError& e) {
      throw SynthError(e.kind(), "stage '" + name + "' failed: " + e.what() + " (last good artifact: " + last_artifact + ")");
    } catch (const std::exception& e) {
      throw SynthError(ErrorKind::internal,
                       "stage '" + name + "' failed: " + e.what() + " (last good artifact: " + last_artifact + ")");
    }
  }

 private:
  std::vector<std::pair<std::string, double>>& timings_;
};

std::string iv(const Interval& x) { return "[" + num(x.lo()) + ", " + num(x.hi()) + "]"; }

const char* status_name(milp::Status s) {
  switch (s) {
    case milp::Status::optimal: return "optimal";
    case milp::Status::infeasible: return "infeasible";
    case milp::Status::time_limit: return "time_limit";
    case milp::Status::node_limit: return "node_limit";
  }
  return "?";
}

const char* row_kind_name(RowKind k) {
  switch (k) {
    case RowKind::dg_frequency: return "dg_frequency";
    case RowKind::wtg_speed_upper: return "wtg_speed_upper";
    case RowKind::wtg_speed_lower: return "wtg_speed_lower";
    case RowKind::big_m_link: return "big_m_link";
    case RowKind::activation_edge: return "activation_edge";
    case RowKind::activation_budget: return "activation_budget";
  }
  return "?";
}

void metrics_text(std::ostringstream& os, const Metrics& m) {
  os << "nadir_hz: " << num(m.nadir_hz) << "\n";
  os << "max_abs_dw_d_hz: " << num(m.max_dw_d_hz) << "\n";
  os << "dg_violation: " << (m.dg_violation ? "true" : "false") << "\n";
  if (m.dg_violation) os << "dg_first_violation_s: " << num(m.dg_first_violation_s) << "\n";
  for (std::size_t i = 0; i < m.max_dw_r.size(); ++i) {
    os << "wtg" << i + 1 << ".max_abs_dw_r_pu: " << num(m.max_dw_r[i]) << "\n";
    os << "wtg" << i + 1 << ".violation: " << (m.wtg_violation[i] ? "true" : "false") << "\n";
    if (m.wtg_violation[i]) os << "wtg" << i + 1 << ".first_violation_s: " << num(m.wtg_first_violation_s[i]) << "\n";
  }
}

void write_afr_json(const std::string& path, const ModelChain& mc) {
  using nlohmann::json;
  auto mat = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json r = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
      rows.push_back(r);
    }
    return rows;
  };
  json root;
  root["t_s"] = mc.disc.t_s;
  root["z"] = mc.disc.z;
  root["k_d"] = mc.afr.k_d;
  root["k_dw"] = mc.afr.k_dw;
  root["a_d"] = mat(mc.disc.a_d);
  root["b_d1"] = mat(mc.disc.b_d1);
  root["b_d2"] = mat(mc.disc.b_d2);
  root["b_d3"] = mat(mc.disc.b_d3);
  root["b_d4"] = mat(mc.disc.b_d4);
  root["x0"] = std::vector<double>(mc.noc.x0.data(), mc.noc.x0.data() + mc.noc.x0.size());
  write_text(path, root.dump(1) + "\n");
}

}  // namespace

ModelChain build_model_chain(const ScenarioConfig& cfg, const std::string& cache_path) {
  ModelChain mc;
  Stages st(mc.timings);
  mc.key = linearization_key(cfg);
  if (!cache_path.empty()) {
    if (auto cached = read_linearization(cache_path, mc.key, cfg)) {
      mc.lin = std::move(*cached);
      mc.cache_hit = true;
      for (std::size_t i = 0; i < cfg.wtgs.size(); ++i) mc.units.push_back({cfg.wtgs[i].params, mc.lin[i].eq});
    }
  }
  if (!mc.cache_hit) {
    st.run("equilibrium", [&] {
      for (const auto& w : cfg.wtgs) mc.units.push_back({w.params, solve_equilibrium(w.params, w.dispatch)});
    });
    st.run("reachability", [&] {
      for (const auto& u : mc.units) mc.reach.push_back(reach_nonlinear(u.params, u.eq, cfg.u_bound, cfg.horizon_s, cfg.reach));
    });
    st.run("error_bounds", [&] {
      for (std::size_t i = 0; i < mc.units.size(); ++i) {
        mc.lin.push_back(linearize_wtg(mc.units[i].eq, mc.units[i].params, mc.reach[i].theta));
      }
    });
  }
  st.run("afr", [&] {
    mc.afr = assemble_afr(cfg.diesel, mc.lin);
    mc.disc = discretize_zoh(mc.afr, cfg.t_s, cfg.z, mc.lin);
    mc.sp = stack_prediction(mc.disc, cfg.z);
  });
  mc.noc = cfg.noc;
  mc.noc.z = cfg.z;
  mc.noc.x0 = Eigen::VectorXd::Zero(mc.afr.dim());
  mc.noc.x0[0] = cfg.x0_dw_d_hz;
  return mc;
}

Trajectories linear_replay(const ModelChain& mc, const Schedule& s, const Realization& w) {
  const int z = s.z(), nw = s.num_wtgs();
  const Eigen::MatrixXd levels = schedule_levels(s, mc.noc.u_l);
  const Eigen::MatrixXd b = s.b.cast<double>();
  const std::vector<Eigen::VectorXd> xs = rollout(mc.disc, mc.noc.x0, levels, b, w);
  Trajectories tr;
  tr.x.resize(nw);
  tr.dp_g.resize(nw);
  tr.u_sp.resize(nw);
  for (int i = 0; i < nw; ++i) {
    tr.omega_eq.push_back(mc.lin[i].eq.x[xw::omega_r]);
    tr.inertia.push_back(mc.lin[i].params.inertia_s);
    tr.mech_torque.push_back(mc.lin[i].eq.mech_torque);
  }
  for (int k = 0; k <= z; ++k) {
    const Eigen::VectorXd& x = xs[k];
    tr.t.push_back(k * mc.disc.t_s);
    tr.dw_d.push_back(x[0]);
    tr.dp_m.push_back(x[1]);
    tr.dp_v.push_back(x[2]);
    for (int i = 0; i < nw; ++i) {
      const Eigen::VectorXd dx = x.segment(3 + kStateDim * i, kStateDim);
      const double u = k < z ? levels(k, i) : 0.0;
      WtgState a;
      for (int j = 0; j < kStateDim; ++j) a[j] = mc.lin[i].eq.x[j] + dx[j];
      tr.x[i].push_back(a);
      double dp = (mc.lin[i].lin.c_w * dx)(0) + mc.lin[i].lin.d_w(0, 0) * u;
      if (k < z && s.b(k, i) == 1 && k < static_cast<int>(w.o.size())) dp += w.o[k][i];
      tr.dp_g[i].push_back(dp);
      tr.u_sp[i].push_back(u);
    }
  }
  tr.trigger_time = 0.0;
  return tr;
}

std::string RunReport::text() const {
  std::ostringstream os;
  os << "[run]\n";
  os << "mode: " << mode_name(mode) << "\n";
  os << "out_dir: " << out_dir << "\n";
  os << "linearization_cache: " << (cache_hit ? "hit" : "miss") << "\n";
  os << "\n[stages]\n";
  for (const auto& [name, sec] : timings) os << name << "_s: " << num(sec) << "\n";
  os << "\n[linearization]\n";
  static const char* kTheta[] = {"omega_r", "omega_f", "x1", "x2", "x3", "x4", "u_sp"};
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int j = 0; j < 7; ++j) os << "wtg" << i + 1 << ".theta." << kTheta[j] << ": " << iv(theta[i][j]) << "\n";
    for (int j = 0; j < kStateDim; ++j) os << "wtg" << i + 1 << ".S" << j + 1 << ": " << iv(s[i][j]) << "\n";
    os << "wtg" << i + 1 << ".O: " << iv(o[i][0]) << "\n";
  }
  os << "\n[schedule]\n";
  if (has_schedule) {
    os << "c_u: " << num(schedule.c_u) << "\n";
    os << "status: " << status_name(schedule.status) << "\n";
    os << "gap: " << num(schedule.gap) << "\n";
    os << "bound: " << num(schedule.bound) << "\n";
    os << "nodes: " << schedule.nodes << "\n";
    os << "solve_s: " << num(schedule.seconds) << "\n";
    for (int i = 0; i < schedule.num_wtgs(); ++i) {
      os << "wtg" << i + 1 << ".levels: ";
      for (int k = 0; k < schedule.z(); ++k) os << schedule.u(k, i);
      os << "\n";
    }
  } else {
    os << "c_u: 0\nstatus: none\n";
  }
  os << "\n[closed_loop]\n";
  os << "trigger_s: " << num(trigger_time) << "\n";
  metrics_text(os, closed_loop);
  for (std::size_t i = 0; i < closed_loop.delivered_energy.size(); ++i) {
    os << "wtg" << i + 1 << ".delivered_energy_pu_s: " << num(closed_loop.delivered_energy[i]) << "\n";
    os << "wtg" << i + 1 << ".rotor_energy_pu_s: " << num(closed_loop.kinetic_energy[i]) << "\n";
  }
  if (has_replay) {
    os << "\n[worst_case_replay]\n";
    os << "margin: " << num(replay_margin.worst) << "\n";
    os << "row: " << row_kind_name(replay_margin.row.kind) << " wtg " << replay_margin.row.wtg << " k "
       << replay_margin.row.k << "\n";
    metrics_text(os, replay);
  }
  if (!notices.empty()) {
    os << "\n[notices]\n";
    for (const auto& n : notices) os << n << "\n";
  }
  os << "\n[artifacts]\n";
  for (const auto& a : artifacts) os << a << "\n";
  os << "\n[result]\npass: " << (pass ? "true" : "false") << "\n";
  return os.str();
}

RunReport run_pipeline(const ScenarioConfig& cfg, const PipelineOptions& opt) {
  RunReport rep;
  rep.mode = cfg.mode;
  rep.out_dir = opt.out_dir.empty() ? cfg.out_dir : opt.out_dir;
  rep.notices = cfg.notices;
  Stages st(rep.timings);
  const bool write = opt.write_artifacts;
  const fs::path dir(rep.out_dir);
  auto artifact = [&](const std::string& name) { return (dir / name).string(); };
  auto wrote = [&](const std::string& path) {
    rep.artifacts.push_back(path);
    st.last_artifact = path;
  };
  if (write) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw SynthError(ErrorKind::config, "cannot create output directory '" + rep.out_dir + "': " + ec.message());
  }

  // The hull CSV only exists for a computed chain, so its absence forces a recompute.
  const std::string cache = artifact("linearization.json");
  const bool try_cache = write && fs::exists(artifact("reach_hulls.csv"));
  ModelChain mc = build_model_chain(cfg, try_cache ? cache : "");
  rep.timings = mc.timings;
  rep.cache_hit = mc.cache_hit;
  for (const auto& m : mc.lin) {
    rep.theta.push_back(m.theta);
    rep.s.push_back(m.s);
    rep.o.push_back(m.o);
  }
  if (write) {
    if (!mc.cache_hit) {
      write_linearization(cache, mc.key, mc.lin);
      write_reach_csv(artifact("reach_hulls.csv"), mc.reach);
    }
    wrote(cache);
    wrote(artifact("reach_hulls.csv"));
    write_afr_json(artifact("afr.json"), mc);
    wrote(artifact("afr.json"));
  }

  const int nw = static_cast<int>(mc.units.size());
  const bool robust = cfg.mode == Mode::robust;
  if (cfg.mode == Mode::no_support) {
    rep.schedule = Schedule::zeros(cfg.z, nw);
  } else {
    MilpInstance m = st.run("milp_build", [&] { return build_milp(mc.sp, mc.disc, mc.noc, robust); });
    if (write) {
      std::ofstream os(artifact("model.lp"), std::ios::binary | std::ios::trunc);
      if (!os) throw SynthError(ErrorKind::internal, "cannot write " + artifact("model.lp"));
      write_lp(os, m);
      wrote(artifact("model.lp"));
    }
    rep.schedule = st.run("noc", [&] { return solve_noc(m, cfg.solve); });
    rep.has_schedule = true;
    if (write) {
      write_schedule_csv(artifact("schedule.csv"), rep.schedule, cfg.t_s);
      wrote(artifact("schedule.csv"));
    }
  }

  Trajectories tr = st.run("closed_loop", [&] {
    Scenario scn;
    scn.disturbance = cfg.disturbance;
    scn.trigger_hz = cfg.x0_dw_d_hz;
    scn.schedule = rep.schedule;
    scn.t_s = cfg.t_s;
    scn.u_l = cfg.noc.u_l;
    scn.horizon_s = cfg.sim.horizon_s;
    scn.step_s = cfg.sim.step_s;
    scn.record_stride = cfg.sim.record_stride;
    return simulate_closed_loop(scn, cfg.diesel, mc.units);
  });
  rep.closed_loop = metrics(tr, mc.noc);
  rep.trigger_time = tr.trigger_time;
  if (write) {
    write_trajectories_csv(artifact("trajectories.csv"), tr);
    wrote(artifact("trajectories.csv"));
  }

  // Both schedules are replayed against the full error set: the robust one
  // must hold, the nominal one shows what ignoring S and O costs.
  if (rep.has_schedule) {
    st.run("worst_case_replay", [&] {
      rep.replay_margin = worst_case_margin(mc.sp, mc.disc, mc.noc, rep.schedule, true);
      const Realization w = worst_case_realization(mc.sp, mc.disc, mc.noc, rep.replay_margin.row);
      Trajectories rt = linear_replay(mc, rep.schedule, w);
      if (tr.trigger_time >= 0.0) {
        for (double& t : rt.t) t += tr.trigger_time;
      }
      rep.replay = metrics(rt, mc.noc);
      rep.has_replay = true;
      if (write) {
        write_trajectories_csv(artifact("replay.csv"), rt);
        wrote(artifact("replay.csv"));
      }
    });
  }

  rep.pass = !rep.closed_loop.violation() && !(rep.has_replay && rep.replay.violation());
  if (write) {
    write_plot_script(artifact("plot.py"));
    wrote(artifact("plot.py"));
    rep.artifacts.push_back(artifact("report.txt"));
    write_text(artifact("report.txt"), rep.text());
  }
  return rep;
}

}  // namespace synth
