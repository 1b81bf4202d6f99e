#include "synth/config.hpp"

#include "synth/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace synth {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::robust: return "robust";
    case Mode::nominal: return "nominal";
    case Mode::no_support: return "no-support";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "robust") return Mode::robust;
  if (s == "nominal") return Mode::nominal;
  if (s == "no-support") return Mode::no_support;
  throw SynthError(ErrorKind::config, "unknown mode '" + s + "' (robust, nominal, no-support)");
}

namespace {

enum class Check { any, positive, nonnegative, negative };

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  std::vector<std::string> errors;
  std::vector<std::string> notices;

  std::string where(const YAML::Node& n) const {
    const YAML::Mark m = n.Mark();
    if (m.line < 0) return origin_;
    return origin_ + ":" + std::to_string(m.line + 1);
  }

  void error(const YAML::Node& n, const std::string& msg) { errors.push_back(where(n) + ": " + msg); }

  // Rejects keys outside `allowed`; a typo would otherwise silently become a default.
  void keys(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!map.IsMap()) {
      error(map, path + " must be a mapping");
      return;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
      const std::string k = kv.first.as<std::string>();
      if (!ok.count(k)) error(kv.first, "unknown key '" + (path.empty() ? k : path + "." + k) + "'");
    }
  }

  // `note` logs a notice when the default is used.
  void number(const YAML::Node& map, const std::string& path, const char* key, double& out, Check check,
              bool note = false) {
    const YAML::Node n = map[key];
    const std::string full = path + "." + key;
    if (!n) {
      if (note) notices.push_back("notice: " + full + " missing, default " + fmt(out));
      return;
    }
    double v = 0.0;
    try {
      v = n.as<double>();
    } catch (const YAML::Exception&) {
      error(n, full + " must be a number");
      return;
    }
    if (!std::isfinite(v)) {
      error(n, full + " must be finite");
      return;
    }
    switch (check) {
      case Check::positive:
        if (!(v > 0.0)) return error(n, full + " must be > 0, got " + fmt(v));
        break;
      case Check::nonnegative:
        if (!(v >= 0.0)) return error(n, full + " must be >= 0, got " + fmt(v));
        break;
      case Check::negative:
        if (!(v < 0.0)) return error(n, full + " must be < 0, got " + fmt(v));
        break;
      case Check::any: break;
    }
    out = v;
  }

  void integer(const YAML::Node& map, const std::string& path, const char* key, int& out, int min, bool note = false) {
    const YAML::Node n = map[key];
    const std::string full = path + "." + key;
    if (!n) {
      if (note) notices.push_back("notice: " + full + " missing, default " + std::to_string(out));
      return;
    }
    long v = 0;
    try {
      v = n.as<long>();
    } catch (const YAML::Exception&) {
      error(n, full + " must be an integer");
      return;
    }
    if (v < min || v > 1000000) return error(n, full + " must be in [" + std::to_string(min) + ", 1000000]");
    out = static_cast<int>(v);
  }

  void text(const YAML::Node& map, const std::string& path, const char* key, std::string& out) {
    const YAML::Node n = map[key];
    if (!n) return;
    if (!n.IsScalar()) return error(n, path + "." + key + " must be a string");
    out = n.as<std::string>();
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
  }

 private:
  std::string origin_;
};

void read_dfig(Reader& r, const YAML::Node& n, const std::string& path, DfigParams& p) {
  r.keys(n, path, {"inertia_s", "r_s_pu", "r_r_pu", "l_ls_pu", "l_lr_pu", "l_m_pu", "omega_base_rad_s",
                   "omega_sync_pu", "filter_cutoff_rad_s", "stator_flux_pu", "kp_torque", "ki_torque",
                   "kp_reactive", "ki_reactive", "kp_current", "ki_current", "power_base_mva"});
  if (!n.IsMap()) return;
  r.number(n, path, "inertia_s", p.inertia_s, Check::positive);
  r.number(n, path, "r_s_pu", p.r_s, Check::nonnegative);
  r.number(n, path, "r_r_pu", p.r_r, Check::nonnegative);
  r.number(n, path, "l_ls_pu", p.l_ls, Check::positive);
  r.number(n, path, "l_lr_pu", p.l_lr, Check::positive);
  r.number(n, path, "l_m_pu", p.l_m, Check::positive);
  r.number(n, path, "omega_base_rad_s", p.omega_base, Check::positive);
  r.number(n, path, "omega_sync_pu", p.omega_sync, Check::positive);
  r.number(n, path, "filter_cutoff_rad_s", p.filter_cutoff, Check::positive);
  r.number(n, path, "stator_flux_pu", p.stator_flux, Check::positive);
  r.number(n, path, "kp_torque", p.kp_torque, Check::positive);
  r.number(n, path, "ki_torque", p.ki_torque, Check::positive);
  r.number(n, path, "kp_reactive", p.kp_reactive, Check::positive);
  r.number(n, path, "ki_reactive", p.ki_reactive, Check::positive);
  r.number(n, path, "kp_current", p.kp_current, Check::positive);
  r.number(n, path, "ki_current", p.ki_current, Check::positive);
  r.number(n, path, "power_base_mva", p.power_base_mva, Check::positive);
}

}  // namespace

ScenarioConfig validate_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SynthError(ErrorKind::config, "schema violation:\n  " + origin + ":" + std::to_string(e.mark.line + 1) +
                                            ": " + e.msg);
  }
  Reader r(origin);
  ScenarioConfig c;
  if (!root.IsMap()) {
    throw SynthError(ErrorKind::config, "schema violation:\n  " + origin + ": top level must be a mapping");
  }
  r.keys(root, "", {"diesel", "dfig", "wtgs", "input_bound_pu", "sampling", "noc", "solver", "disturbance", "sim",
                    "reach", "output_dir", "mode"});

  if (const YAML::Node d = root["diesel"]) {
    r.keys(d, "diesel", {"inertia_s", "engine_tau_s", "governor_tau_s", "droop_pu", "freq_base_hz", "power_base_mva"});
    if (d.IsMap()) {
      r.number(d, "diesel", "inertia_s", c.diesel.inertia_s, Check::positive, true);
      r.number(d, "diesel", "engine_tau_s", c.diesel.engine_tau_s, Check::positive, true);
      r.number(d, "diesel", "governor_tau_s", c.diesel.governor_tau_s, Check::positive, true);
      r.number(d, "diesel", "droop_pu", c.diesel.droop_pu, Check::positive, true);
      r.number(d, "diesel", "freq_base_hz", c.diesel.freq_base_hz, Check::positive, true);
      r.number(d, "diesel", "power_base_mva", c.diesel.power_base_mva, Check::positive, true);
    }
  } else {
    r.notices.push_back("notice: diesel missing, defaults used");
  }

  DfigParams shared;
  if (const YAML::Node d = root["dfig"]) read_dfig(r, d, "dfig", shared);

  const YAML::Node w = root["wtgs"];
  if (!w) {
    r.errors.push_back(origin + ": missing required key 'wtgs'");
  } else if (!w.IsSequence() || w.size() == 0) {
    r.error(w, "wtgs must be a non-empty list");
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const YAML::Node u = w[i];
      const std::string path = "wtgs[" + std::to_string(i) + "]";
      r.keys(u, path, {"name", "dispatch_pu", "q_ref_pu", "v_ds_pu", "v_qs_pu", "dfig"});
      if (!u.IsMap()) continue;
      WtgConfig wc;
      wc.name = "wtg" + std::to_string(i + 1);
      wc.params = shared;
      r.text(u, path, "name", wc.name);
      if (!u["dispatch_pu"]) {
        r.error(u, path + ".dispatch_pu is required");
      } else {
        r.number(u, path, "dispatch_pu", wc.dispatch.p_g, Check::positive);
        if (wc.dispatch.p_g > 1.2) r.error(u["dispatch_pu"], path + ".dispatch_pu must be <= 1.2");
      }
      r.number(u, path, "q_ref_pu", wc.dispatch.q_ref, Check::any);
      r.number(u, path, "v_ds_pu", wc.dispatch.v_ds, Check::any);
      r.number(u, path, "v_qs_pu", wc.dispatch.v_qs, Check::positive);
      if (const YAML::Node d = u["dfig"]) read_dfig(r, d, path + ".dfig", wc.params);
      c.wtgs.push_back(wc);
    }
  }

  if (const YAML::Node b = root["input_bound_pu"]) {
    if (!b.IsSequence() || b.size() != 2) {
      r.error(b, "input_bound_pu must be [lo, hi]");
    } else {
      try {
        const double lo = b[0].as<double>(), hi = b[1].as<double>();
        if (!(lo == 0.0) || !(hi > 0.0)) r.error(b, "input_bound_pu must be [0, hi] with hi > 0");
        else c.u_bound = Interval(lo, hi);
      } catch (const YAML::Exception&) {
        r.error(b, "input_bound_pu entries must be numbers");
      }
    }
  } else {
    r.notices.push_back("notice: input_bound_pu missing, default [0, 0.1]");
  }

  bool z_given = false;
  const YAML::Node s = root["sampling"];
  if (s) {
    r.keys(s, "sampling", {"t_s_s", "horizon_s", "steps"});
    if (s.IsMap()) {
      r.number(s, "sampling", "t_s_s", c.t_s, Check::positive, true);
      r.number(s, "sampling", "horizon_s", c.horizon_s, Check::positive, true);
      z_given = static_cast<bool>(s["steps"]);
      r.integer(s, "sampling", "steps", c.z, 1);
    }
  } else {
    r.notices.push_back("notice: sampling missing, default t_s 0.1 s, T 10 s");
  }
  if (z_given) {
    if (std::fabs(c.z * c.t_s - c.horizon_s) > 1e-9 * c.horizon_s) {
      r.error(s["steps"], "sampling: steps * t_s_s = " + Reader::fmt(c.z * c.t_s) + " differs from horizon_s = " +
                              Reader::fmt(c.horizon_s));
    }
  } else {
    const double zr = c.horizon_s / c.t_s;
    const long zi = std::lround(zr);
    if (zi < 1 || std::fabs(zr - zi) > 1e-9 * zr) {
      r.errors.push_back(origin + ": sampling: horizon_s is not a multiple of t_s_s");
    } else {
      c.z = static_cast<int>(zi);
    }
  }

  if (const YAML::Node n = root["noc"]) {
    r.keys(n, "noc", {"dfd_lim_hz", "dfw_lim_pu", "u_l_pu", "u_bd_levels", "p_dis_max_mw", "x0_dw_d_hz",
                      "max_activations", "big_m"});
    if (n.IsMap()) {
      r.number(n, "noc", "dfd_lim_hz", c.noc.dfd_lim_hz, Check::positive, true);
      r.number(n, "noc", "dfw_lim_pu", c.noc.dfw_lim_pu, Check::positive, true);
      r.number(n, "noc", "u_l_pu", c.noc.u_l, Check::positive, true);
      r.integer(n, "noc", "u_bd_levels", c.noc.u_bd, 1, true);
      r.number(n, "noc", "p_dis_max_mw", c.noc.p_dis_max_mw, Check::nonnegative, true);
      r.number(n, "noc", "x0_dw_d_hz", c.x0_dw_d_hz, Check::negative, true);
      r.integer(n, "noc", "max_activations", c.noc.max_activations, 1, true);
      r.number(n, "noc", "big_m", c.noc.big_m, Check::nonnegative);
    }
  } else {
    r.notices.push_back("notice: noc missing, defaults used");
  }
  c.noc.z = c.z;
  if (c.noc.m() < c.noc.u_bd + 1.0) r.errors.push_back(origin + ": noc.big_m must be >= u_bd_levels + 1");
  if (c.noc.u_l * c.noc.u_bd > c.u_bound.hi() * (1.0 + 1e-12)) {
    r.errors.push_back(origin + ": noc: u_l_pu * u_bd_levels exceeds the input bound");
  }

  if (const YAML::Node n = root["solver"]) {
    r.keys(n, "solver", {"time_limit_s", "gap_tol"});
    if (n.IsMap()) {
      r.number(n, "solver", "time_limit_s", c.solve.time_limit_s, Check::positive);
      r.number(n, "solver", "gap_tol", c.solve.gap_tol, Check::nonnegative);
    }
  }

  if (const YAML::Node n = root["disturbance"]) {
    r.keys(n, "disturbance", {"magnitude_mw", "onset_s"});
    if (n.IsMap()) {
      r.number(n, "disturbance", "magnitude_mw", c.disturbance.magnitude_mw, Check::nonnegative, true);
      r.number(n, "disturbance", "onset_s", c.disturbance.onset_s, Check::nonnegative, true);
    }
  } else {
    c.disturbance.magnitude_mw = c.noc.p_dis_max_mw;
    r.notices.push_back("notice: disturbance missing, magnitude p_dis_max_mw at onset 1 s");
  }
  if (c.disturbance.magnitude_mw > c.noc.p_dis_max_mw * (1.0 + 1e-12)) {
    r.notices.push_back("notice: disturbance exceeds p_dis_max_mw; the schedule carries no guarantee for it");
  }

  if (const YAML::Node n = root["sim"]) {
    r.keys(n, "sim", {"horizon_s", "step_s", "record_stride"});
    if (n.IsMap()) {
      r.number(n, "sim", "horizon_s", c.sim.horizon_s, Check::positive);
      r.number(n, "sim", "step_s", c.sim.step_s, Check::positive);
      r.integer(n, "sim", "record_stride", c.sim.record_stride, 1);
    }
  }
  if (c.sim.horizon_s < c.disturbance.onset_s + c.horizon_s) {
    r.errors.push_back(origin + ": sim.horizon_s must cover disturbance onset plus the schedule horizon");
  }
  {
    const double q = c.t_s / c.sim.step_s;
    if (std::fabs(q - std::round(q)) > 1e-9 * q) r.errors.push_back(origin + ": sim.step_s must divide t_s_s");
  }

  if (const YAML::Node n = root["reach"]) {
    r.keys(n, "reach", {"dt_s", "order_cap", "max_fixpoint_iterations", "y_margin", "integral_pieces",
                        "curvature_factor", "verify_samples", "verify_seed"});
    if (n.IsMap()) {
      r.number(n, "reach", "dt_s", c.reach.dt, Check::positive);
      r.number(n, "reach", "order_cap", c.reach.order_cap, Check::positive);
      r.integer(n, "reach", "max_fixpoint_iterations", c.reach.max_fixpoint_iterations, 1);
      r.number(n, "reach", "y_margin", c.reach.y_margin, Check::nonnegative);
      r.integer(n, "reach", "integral_pieces", c.reach.integral_pieces, 1);
      r.number(n, "reach", "curvature_factor", c.reach.curvature_factor, Check::positive);
      r.integer(n, "reach", "verify_samples", c.reach.verify_samples, 0);
      int seed = static_cast<int>(c.reach.verify_seed);
      r.integer(n, "reach", "verify_seed", seed, 0);
      c.reach.verify_seed = static_cast<std::uint64_t>(seed);
    }
  }

  r.text(root, "", "output_dir", c.out_dir);
  if (const YAML::Node m = root["mode"]) {
    try {
      c.mode = parse_mode(m.as<std::string>());
    } catch (const std::exception& e) {
      r.error(m, e.what());
    }
  }

  if (!r.errors.empty()) {
    std::string msg = "schema violation (" + std::to_string(r.errors.size()) + "):";
    for (const auto& e : r.errors) msg += "\n  " + e;
    throw SynthError(ErrorKind::config, msg);
  }
  c.notices = std::move(r.notices);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SynthError(ErrorKind::config, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return validate_config(ss.str(), path);
}

}  // namespace synth
