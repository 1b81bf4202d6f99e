#include "synth/artifacts.hpp"

#include "synth/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace synth {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

void hexf(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a;", v);
  s += buf;
}

void open_out(std::ofstream& os, const std::string& path) {
  os.open(path, std::ios::binary | std::ios::trunc);
  if (!os) throw SynthError(ErrorKind::internal, "cannot write '" + path + "'");
}

json matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd matrix(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw std::runtime_error("shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw std::runtime_error("shape");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json intervals(const IntervalVector& v) {
  json a = json::array();
  for (const Interval& x : v) a.push_back({x.lo(), x.hi()});
  return a;
}

IntervalVector intervals(const json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw std::runtime_error("shape");
  IntervalVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = Interval(j[i][0].get<double>(), j[i][1].get<double>());
  return v;
}

template <std::size_t N>
json array(const std::array<double, N>& a) {
  return json(std::vector<double>(a.begin(), a.end()));
}

template <std::size_t N>
std::array<double, N> array(const json& j) {
  if (!j.is_array() || j.size() != N) throw std::runtime_error("shape");
  std::array<double, N> a{};
  for (std::size_t i = 0; i < N; ++i) a[i] = j[i].get<double>();
  return a;
}

}  // namespace

std::uint64_t linearization_key(const ScenarioConfig& cfg) {
  std::string s = "lin-v1;";
  for (const auto& w : cfg.wtgs) {
    const DfigParams& p = w.params;
    for (double v : {p.inertia_s, p.r_s, p.r_r, p.l_ls, p.l_lr, p.l_m, p.omega_base, p.omega_sync, p.filter_cutoff,
                     p.stator_flux, p.kp_torque, p.ki_torque, p.kp_reactive, p.ki_reactive, p.kp_current, p.ki_current,
                     p.power_base_mva, w.dispatch.p_g, w.dispatch.q_ref, w.dispatch.v_ds, w.dispatch.v_qs}) {
      hexf(s, v);
    }
    s += "|";
  }
  for (double v : {cfg.u_bound.lo(), cfg.u_bound.hi(), cfg.horizon_s, cfg.reach.dt, cfg.reach.input_hold,
                   cfg.reach.order_cap, cfg.reach.y_margin, cfg.reach.curvature_factor}) {
    hexf(s, v);
  }
  s += std::to_string(cfg.reach.max_fixpoint_iterations) + ";" + std::to_string(cfg.reach.integral_pieces) + ";" +
       std::to_string(cfg.reach.verify_samples) + ";" + std::to_string(cfg.reach.verify_seed);
  return fnv1a(s);
}

void write_linearization(const std::string& path, std::uint64_t key, const std::vector<WtgLinearModel>& models) {
  json root;
  root["key"] = hex64(key);
  json ws = json::array();
  for (const auto& m : models) {
    json w;
    w["a_w"] = matrix(m.lin.a_w);
    w["b_w"] = matrix(m.lin.b_w);
    w["c_w"] = matrix(m.lin.c_w);
    w["d_w"] = matrix(m.lin.d_w);
    w["s"] = intervals(m.s);
    w["o"] = intervals(m.o);
    w["theta"] = intervals(m.theta);
    w["eq"] = {{"x", array(m.eq.x)},
               {"y", array(m.eq.y)},
               {"speed_ref", m.eq.speed_ref},
               {"mech_torque", m.eq.mech_torque}};
    ws.push_back(w);
  }
  root["wtgs"] = ws;
  std::ofstream os;
  open_out(os, path);
  os << root.dump(1) << "\n";
}

std::optional<std::vector<WtgLinearModel>> read_linearization(const std::string& path, std::uint64_t key,
                                                              const ScenarioConfig& cfg) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const json root = json::parse(in);
    if (root.at("key").get<std::string>() != hex64(key)) return std::nullopt;
    const json& ws = root.at("wtgs");
    if (ws.size() != cfg.wtgs.size()) return std::nullopt;
    std::vector<WtgLinearModel> out;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const json& w = ws[i];
      WtgLinearModel m;
      m.params = cfg.wtgs[i].params;
      m.lin.a_w = matrix(w.at("a_w"), kStateDim, kStateDim);
      m.lin.b_w = matrix(w.at("b_w"), kStateDim, 1);
      m.lin.c_w = matrix(w.at("c_w"), 1, kStateDim);
      m.lin.d_w = matrix(w.at("d_w"), 1, 1);
      m.s = intervals(w.at("s"), kStateDim);
      m.o = intervals(w.at("o"), 1);
      m.theta = intervals(w.at("theta"), kSDim);
      const json& e = w.at("eq");
      m.eq.dispatch = cfg.wtgs[i].dispatch;
      m.eq.x = array<kStateDim>(e.at("x"));
      m.eq.y = array<kAlgDim>(e.at("y"));
      m.eq.speed_ref = e.at("speed_ref").get<double>();
      m.eq.mech_torque = e.at("mech_torque").get<double>();
      out.push_back(std::move(m));
    }
    return out;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void write_reach_csv(const std::string& path, const std::vector<ReachResult>& reach) {
  std::ofstream os;
  open_out(os, path);
  os << "wtg,k,t0,t1,var,lo,hi\n";
  for (std::size_t w = 0; w < reach.size(); ++w) {
    const ReachResult& r = reach[w];
    for (std::size_t k = 0; k < r.step_boxes.size(); ++k) {
      const double t0 = static_cast<double>(k) * r.dt, t1 = static_cast<double>(k + 1) * r.dt;
      for (std::size_t j = 0; j < r.step_boxes[k].size(); ++j) {
        os << w + 1 << "," << k << "," << num(t0) << "," << num(t1) << "," << j << "," << num(r.step_boxes[k][j].lo())
           << "," << num(r.step_boxes[k][j].hi()) << "\n";
      }
    }
  }
}

void write_schedule_csv(const std::string& path, const Schedule& s, double t_s) {
  std::ofstream os;
  open_out(os, path);
  os << "k,t";
  for (int i = 1; i <= s.num_wtgs(); ++i) os << ",u_" << i << ",b_" << i << ",v_" << i;
  os << "\n";
  for (int k = 0; k < s.z(); ++k) {
    os << k << "," << num(k * t_s);
    for (int i = 0; i < s.num_wtgs(); ++i) os << "," << s.u(k, i) << "," << s.b(k, i) << "," << s.v(k, i);
    os << "\n";
  }
}

void write_trajectories_csv(const std::string& path, const Trajectories& tr) {
  std::ofstream os;
  open_out(os, path);
  os << "t,dw_d_hz,dp_m,dp_v";
  for (int i = 1; i <= tr.num_wtgs(); ++i) os << ",dw_r_" << i << ",dp_g_" << i << ",u_sp_" << i;
  os << "\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << num(tr.t[k]) << "," << num(tr.dw_d[k]) << "," << num(tr.dp_m[k]) << "," << num(tr.dp_v[k]);
    for (int i = 0; i < tr.num_wtgs(); ++i) {
      os << "," << num(tr.x[i][k][xw::omega_r] - tr.omega_eq[i]) << "," << num(tr.dp_g[i][k]) << ","
         << num(tr.u_sp[i][k]);
    }
    os << "\n";
  }
}

void write_plot_script(const std::string& path) {
  static const char* kScript = R"PY(#!/usr/bin/env python3
"""Frequency, WTG power and schedule plots for one run directory."""
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}


def main(run_dir):
    run = Path(run_dir)
    tr = load(run / "trajectories.csv")
    fig, ax = plt.subplots(3, 1, figsize=(8, 9), sharex=True)
    ax[0].plot(tr["t"], tr["dw_d_hz"], label="closed loop")
    replay = run / "replay.csv"
    if replay.exists():
        rp = load(replay)
        ax[0].plot(rp["t"], rp["dw_d_hz"], "--", label="linear worst case (from trigger)")
    ax[0].set_ylabel("DG frequency deviation [Hz]")
    ax[0].legend()
    wtgs = sorted({k.split("_")[-1] for k in tr if k.startswith("dp_g_")})
    for i in wtgs:
        ax[1].plot(tr["t"], tr["dp_g_" + i], label="WTG " + i)
        ax[2].plot(tr["t"], tr["u_sp_" + i], label="WTG " + i)
    ax[1].set_ylabel("WTG power deviation [pu]")
    ax[2].set_ylabel("speed set-point offset [pu]")
    ax[2].set_xlabel("t [s]")
    for a in ax[1:]:
        a.legend()
    fig.tight_layout()
    fig.savefig(run / "frequency.png", dpi=120)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent)
)PY";
  write_text(path, kScript);
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream os;
  open_out(os, path);
  os << body;
}

}  // namespace synth
