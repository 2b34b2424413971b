// Copyright 2026 The qdyn developers.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "io.hpp"
#include "qdyn/noise.hpp"
#include "qdyn/observables.hpp"
#include "qdyn/qft.hpp"
#include "qdyn/qvolume.hpp"
#include "qdyn/sawtooth.hpp"
#include "qdyn/schrodinger.hpp"

namespace qdyn::app {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Common {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& cm) {
  cmd->add_option("--out-dir", cm.out_dir,
                  "Directory for the data CSV and JSON sidecar")
      ->envname("QDYN_OUT_DIR")
      ->capture_default_str();
  cmd->add_option("--seed", cm.seed, "Base random seed")
      ->capture_default_str();
  cmd->add_option("--threads", cm.threads,
                  "Worker thread cap; 0 uses all hardware threads")
      ->capture_default_str();
}

// Sawtooth map parameters as flags. The map is fixed by any two of k, T,
// and kT = k*T; a third value could silently disagree with the other two,
// so exactly two may be given.
struct MapOpts {
  int n = 0;
  long long m0 = 0;
  double k = 0, big_t = 0, kt = 0;
  CLI::Option* opt_k = nullptr;
  CLI::Option* opt_t = nullptr;
  CLI::Option* opt_kt = nullptr;

  void add(CLI::App* cmd) {
    cmd->add_option("--n", n, "Register width in qubits")->required();
    cmd->add_option("--m0", m0, "Initial action level (signed)")
        ->capture_default_str();
    opt_k = cmd->add_option("--k", k, "Kick strength k");
    opt_t = cmd->add_option("--T", big_t, "Rotation period T");
    opt_kt = cmd->add_option("--kT", kt, "Classicality parameter kT");
  }

  std::optional<SawtoothParams> resolve(
      std::vector<std::string>& errors, std::vector<std::string>& warnings,
      bool default_when_absent) const {
    const int given = (opt_k->count() > 0) + (opt_t->count() > 0) +
                      (opt_kt->count() > 0);
    std::optional<SawtoothParams> p;
    try {
      if (given == 0 && default_when_absent) {
        p = params_from_k_kT(n, 0.273, 1.5, m0);
      } else if (given != 2) {
        errors.push_back("provide exactly two of --k, --T, --kT");
      } else if (opt_k->count() && opt_t->count()) {
        p = params_from_k_T(n, k, big_t, m0);
      } else if (opt_k->count() && opt_kt->count()) {
        p = params_from_k_kT(n, k, kt, m0);
      } else {
        p = params_from_T_kT(n, big_t, kt, m0);
      }
    } catch (const DomainError& e) {
      errors.push_back(e.what());
    } catch (const CapacityError& e) {
      errors.push_back(e.what());
    }
    if (p) {
      if (auto w = regime_warning(p->kT())) warnings.push_back(*w);
      const Index half = dim_of(p->n_qubits) / 2;
      if (m0 < -half || m0 >= half)
        errors.push_back("--m0 outside the signed action range of the register");
    }
    if (!errors.empty()) return std::nullopt;
    return p;
  }

  json echo(const SawtoothParams& p) const {
    json j;
    j["n"] = p.n_qubits;
    j["k"] = p.k;
    j["T"] = p.T;
    j["kT"] = p.kT();
    j["m0"] = p.m0;
    return j;
  }
};

int fail_config(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  return 2;
}

// Writes <name>.csv (when rows are present), an optional companion text
// artifact, and the <name>.json sidecar that makes every CSV number
// reproducible: schema version, full normalized config, seed, gate counts,
// and wall time.
int finish(const Common& cm, const std::string& name,
           const std::vector<std::string>& header,
           const std::vector<io::Row>& rows, json config, json gate_counts,
           json summary, const std::vector<std::string>& warnings,
           Clock::time_point t0, const std::string& text_name = "",
           const std::string& text_body = "") {
  namespace fs = std::filesystem;
  const fs::path dir(cm.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << dir.string()
              << ": " << ec.message() << "\n";
    return 2;
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  config["seed"] = cm.seed;
  config["threads"] = cm.threads;
  config["out_dir"] = cm.out_dir;

  json outputs = json::array();
  if (!header.empty()) {
    const fs::path csv = dir / (name + ".csv");
    io::write_text_file(csv.string(), io::to_csv(header, rows));
    outputs.push_back(csv.filename().string());
  }
  if (!text_name.empty()) {
    io::write_text_file((dir / text_name).string(), text_body);
    outputs.push_back(text_name);
  }

  json side;
  side["schema_version"] = 1;
  side["subcommand"] = name;
  side["config"] = std::move(config);
  side["seed"] = cm.seed;
  side["gate_counts"] = std::move(gate_counts);
  side["summary"] = std::move(summary);
  side["warnings"] = warnings;
  side["outputs"] = outputs;
  side["wall_time_seconds"] =
      std::chrono::duration<double>(Clock::now() - t0).count();
  const fs::path sidecar = dir / (name + ".json");
  io::write_text_file(sidecar.string(), side.dump(2) + "\n");

  std::cout << "wrote";
  for (const auto& o : outputs) std::cout << ' ' << (dir / o.get<std::string>()).string();
  std::cout << ' ' << sidecar.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run_sawtooth_evolve(const Common& cm, const MapOpts& mo, int t) {
  const Clock::time_point t0 = Clock::now();
  std::vector<std::string> errors, warnings;
  if (t < 0) errors.push_back("--t must be non-negative");
  const auto p = mo.resolve(errors, warnings, false);
  if (!errors.empty()) return fail_config(errors);
  set_max_threads(cm.threads);

  const SignedActionMap sam{p->n_qubits};
  StateVectorD s = init_basis_state(p->n_qubits, sam.to_index(p->m0));
  evolve_quantum(s, *p, t);
  const ActionDistribution dist = action_distribution(s, p->m0);

  std::vector<io::Row> rows;
  long long peak_m = 0;
  double peak_w = -1;
  for (Index j = 0; j < dist.size(); ++j) {
    rows.push_back({dist.m_at(j), dist.w[j]});
    if (dist.w[j] > peak_w) {
      peak_w = dist.w[j];
      peak_m = dist.m_at(j);
    }
  }

  json config = mo.echo(*p);
  config["t"] = t;
  json gates;
  const std::size_t per_step = map_step_circuit(*p).ops.size();
  gates["ops_per_map_step"] = per_step;
  gates["total_ops"] = per_step * static_cast<std::size_t>(t);
  json summary;
  summary["peak_m"] = peak_m;
  summary["peak_w"] = peak_w;
  summary["second_moment"] = second_moment(dist);
  return finish(cm, "sawtooth-evolve", {"m", "w"}, rows, std::move(config),
                std::move(gates), std::move(summary), warnings, t0);
}

int run_husimi(const Common& cm, const MapOpts& mo, int t, long long n_theta,
               long long n_action, int avg_from, int avg_to,
               bool has_window) {
  const Clock::time_point t0 = Clock::now();
  std::vector<std::string> errors, warnings;
  if (t < 0) errors.push_back("--t must be non-negative");
  if (has_window) {
    if (avg_from < 0) errors.push_back("--avg-from must be non-negative");
    if (avg_to < avg_from)
      errors.push_back("--avg-to must not precede --avg-from");
  }
  if (n_theta < 0) errors.push_back("--n-theta must be non-negative");
  if (n_action < 0) errors.push_back("--n-action must be non-negative");
  const auto p = mo.resolve(errors, warnings, false);
  if (!errors.empty()) return fail_config(errors);
  set_max_threads(cm.threads);

  const HusimiSpec spec{n_theta, n_action};
  const SignedActionMap sam{p->n_qubits};
  StateVectorD s = init_basis_state(p->n_qubits, sam.to_index(p->m0));

  int steps_run = 0;
  HusimiGrid grid;
  if (has_window) {
    evolve_quantum(s, *p, avg_from);
    steps_run = avg_from;
    grid = husimi(s, spec);
    Eigen::MatrixXd acc = grid.values;
    for (int tt = avg_from + 1; tt <= avg_to; ++tt) {
      evolve_quantum(s, *p, 1);
      ++steps_run;
      acc += husimi(s, spec).values;
    }
    grid.values = acc / double(avg_to - avg_from + 1);
  } else {
    evolve_quantum(s, *p, t);
    steps_run = t;
    grid = husimi(s, spec);
  }
  if (grid.coarse_warning)
    warnings.push_back("husimi grid under-resolves the register levels");

  std::vector<io::Row> rows;
  rows.reserve(static_cast<std::size_t>(grid.n_action * grid.n_theta));
  for (Index i = 0; i < grid.n_action; ++i)
    for (Index j = 0; j < grid.n_theta; ++j)
      rows.push_back({grid.action_center(i), grid.theta_center(j),
                      grid.values(i, j)});

  json config = mo.echo(*p);
  config["t"] = t;
  config["n_theta"] = grid.n_theta;
  config["n_action"] = grid.n_action;
  if (has_window) {
    config["avg_from"] = avg_from;
    config["avg_to"] = avg_to;
  }
  json gates;
  const std::size_t per_step = map_step_circuit(*p).ops.size();
  gates["ops_per_map_step"] = per_step;
  gates["total_ops"] = per_step * static_cast<std::size_t>(steps_run);
  json summary;
  summary["sigma_theta"] = grid.sigma_theta;
  summary["sigma_action"] = grid.sigma_action;
  summary["cell_area"] = grid.cell_area;
  summary["total_mass"] = husimi_total(grid);
  return finish(cm, "husimi", {"action", "theta", "value"}, rows,
                std::move(config), std::move(gates), std::move(summary),
                warnings, t0);
}

int run_localization(const Common& cm, const MapOpts& mo, int t,
                     long long shots, int reps, const NoiseParams& np) {
  const Clock::time_point t0 = Clock::now();
  std::vector<std::string> errors, warnings;
  if (t < 0) errors.push_back("--t must be non-negative");
  if (shots < 1) errors.push_back("--shots must be positive");
  if (reps < 1) errors.push_back("--reps must be positive");
  try {
    validate(np);
  } catch (const DomainError& e) {
    errors.push_back(e.what());
  }
  const auto p = mo.resolve(errors, warnings, false);
  if (p && p->n_qubits > kMaxDensityQubits)
    errors.push_back("density evolution limits --n to 10");
  if (!errors.empty()) return fail_config(errors);
  set_max_threads(cm.threads);

  const LocalizationTable table = localization_experiment(
      *p, np, t, static_cast<std::uint64_t>(shots), reps, cm.seed);

  std::vector<io::Row> rows;
  for (std::size_t j = 0; j < table.m.size(); ++j)
    rows.push_back({table.m[j], table.w_noiseless[j], table.w_noisy_exact[j],
                    table.w_sampled_mean[j], table.w_sampled_std[j]});

  json config = mo.echo(*p);
  config["t"] = t;
  config["shots"] = shots;
  config["reps"] = reps;
  config["p_dephase"] = np.p_dephase;
  config["p_relax"] = np.p_relax;
  config["p_readout"] = np.p_readout;
  json gates;
  gates["ops_per_map_step"] = table.gates_per_step;
  gates["total_ops"] = table.gates_per_step * static_cast<std::size_t>(t);
  json summary;
  const std::size_t m0_slot =
      static_cast<std::size_t>(p->m0 - table.m.front());
  summary["w_noiseless_at_m0"] = table.w_noiseless[m0_slot];
  summary["w_noisy_exact_at_m0"] = table.w_noisy_exact[m0_slot];
  return finish(cm, "localization",
                {"m", "w_noiseless", "w_noisy_exact", "w_sampled_mean",
                 "w_sampled_std"},
                rows, std::move(config), std::move(gates), std::move(summary),
                warnings, t0);
}

int run_diffusion(const Common& cm, const MapOpts& mo, long long trajectories,
                  int t_max) {
  const Clock::time_point t0 = Clock::now();
  std::vector<std::string> errors, warnings;
  if (trajectories < 1) errors.push_back("--trajectories must be positive");
  if (t_max < 2) errors.push_back("--t-max must be at least 2");
  const auto p = mo.resolve(errors, warnings, false);
  if (!errors.empty()) return fail_config(errors);
  set_max_threads(cm.threads);

  const Rng rng(cm.seed);
  const DiffusionFit fit =
      diffusion_coefficient(*p, trajectories, t_max, rng);

  std::vector<io::Row> rows;
  for (int t = 1; t <= t_max; ++t)
    rows.push_back({t, fit.second_moments[static_cast<std::size_t>(t - 1)]});

  json config = mo.echo(*p);
  config["trajectories"] = trajectories;
  config["t_max"] = t_max;
  json gates;
  gates["total_ops"] = 0;  // classical ensemble, no circuit
  json summary;
  summary["d_coefficient"] = fit.d_coefficient;
  summary["r_squared"] = fit.r_squared;
  return finish(cm, "diffusion", {"t", "second_moment"}, rows,
                std::move(config), std::move(gates), std::move(summary),
                warnings, t0);
}

int run_fidelity(const Common& cm, const MapOpts& mo, double eps_k, int t_max,
                 long long shots) {
  const Clock::time_point t0 = Clock::now();
  std::vector<std::string> errors, warnings;
  if (!std::isfinite(eps_k)) errors.push_back("--eps-k must be finite");
  if (t_max < 0) errors.push_back("--t-max must be non-negative");
  if (shots < 0) errors.push_back("--shots must be non-negative");
  const auto p = mo.resolve(errors, warnings, false);
  if (!errors.empty()) return fail_config(errors);
  set_max_threads(cm.threads);

  const SignedActionMap sam{p->n_qubits};
  const StateVectorD psi0 =
      init_basis_state(p->n_qubits, sam.to_index(p->m0));
  const Rng master(cm.seed);

  std::vector<std::string> header = {"t", "sigma_z", "sigma_y", "f",
                                     "f_direct"};
  if (shots > 0) {
    header.push_back("sampled_sigma_z");
    header.push_back("sampled_sigma_y");
    header.push_back("sampled_f");
  }
  std::vector<io::Row> rows;
  double last_f = 1.0;
  for (int t = 0; t <= t_max; ++t) {
    const Circuit w = echo_circuit(*p, eps_k, t);
    RamseyResult r;
    if (shots > 0) {
      Rng rng = master.split(static_cast<std::uint64_t>(t));
      r = fidelity_ramsey(psi0, w, static_cast<std::uint64_t>(shots), &rng);
    } else {
      r = fidelity_ramsey(psi0, w);
    }
    const double fd = fidelity_direct(psi0, *p, eps_k, t);
    io::Row row = {t, r.sigma_z, r.sigma_y, r.f, fd};
    if (shots > 0) {
      row.push_back(r.sampled_sigma_z);
      row.push_back(r.sampled_sigma_y);
      row.push_back(r.sampled_f);
    }
    rows.push_back(std::move(row));
    last_f = r.f;
  }

  json config = mo.echo(*p);
  config["eps_k"] = eps_k;
  config["t_max"] = t_max;
  config["shots"] = shots;
  json gates;
  const std::size_t per_step = map_step_circuit(*p).ops.size();
  gates["ops_per_map_step"] = per_step;
  gates["echo_ops_at_t_max"] = 2 * per_step * static_cast<std::size_t>(t_max);
  json summary;
  summary["f_at_t_max"] = last_f;
  return finish(cm, "fidelity", header, rows, std::move(config),
                std::move(gates), std::move(summary), warnings, t0);
}

int run_schrodinger(const Common& cm, int n, double d, double eps, int steps,
                    double mass, double hbar, int ancilla_bits,
                    const std::string& potential, double omega, double x0,
                    double p0, double sigma, bool sigma_given) {
  const Clock::time_point t0 = Clock::now();
  std::vector<std::string> errors, warnings;
  if (potential != "none" && potential != "harmonic")
    errors.push_back("--potential must be one of: none, harmonic");
  if (!(omega > 0) || !std::isfinite(omega))
    errors.push_back("--omega must be positive and finite");
  const SpatialGrid grid{d, n};
  EvolutionSettings es;
  es.epsilon = eps;
  es.mass = mass;
  es.hbar = hbar;
  es.steps = steps;
  es.ancilla_bits = ancilla_bits;
  if (potential == "harmonic")
    es.potential = [mass, omega](double x, double) {
      return 0.5 * mass * omega * omega * x * x;
    };
  try {
    validate(grid);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  try {
    validate(es);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  double sig = sigma;
  if (!sigma_given)
    sig = potential == "harmonic" && mass * omega > 0
              ? std::sqrt(hbar / (2.0 * mass * omega))
              : 1.0;
  if (!(sig > 0) || !std::isfinite(sig))
    errors.push_back("--sigma must be positive and finite");
  if (!errors.empty()) return fail_config(errors);
  set_max_threads(cm.threads);

  const auto psi = [x0, p0, sig, hbar](double x) {
    const double gauss = std::exp(-(x - x0) * (x - x0) / (4.0 * sig * sig));
    return std::polar(gauss, p0 * x / hbar);
  };
  const DiscretizedWavefunction wf = discretize(psi, grid);
  const TrotterResult res = trotter_evolve(wf, es);

  std::vector<io::Row> rows;
  for (Index i = 0; i < res.wf.state.dim(); ++i) {
    const std::complex<double> a = res.wf.state[i];
    rows.push_back({grid.x(i), std::norm(a), a.real(), a.imag()});
  }

  json config;
  config["n"] = n;
  config["d"] = d;
  config["eps"] = eps;
  config["steps"] = steps;
  config["mass"] = mass;
  config["hbar"] = hbar;
  config["ancilla_bits"] = ancilla_bits;
  config["potential"] = potential;
  config["omega"] = omega;
  config["x0"] = x0;
  config["p0"] = p0;
  config["sigma"] = sig;
  json gates;
  gates["kinetic_gates"] = res.kinetic_gates;
  gates["potential_gates"] = res.potential_gates;
  json summary;
  const auto [mean, var] = position_moments(res.wf.state, grid);
  summary["position_mean"] = mean;
  summary["position_var"] = var;
  summary["band_mass_half"] = momentum_band_mass(res.wf.state, 0.5);
  return finish(cm, "schrodinger", {"x", "prob", "re", "im"}, rows,
                std::move(config), std::move(gates), std::move(summary),
                warnings, t0);
}

int run_qvolume(const Common& cm, int n, double eps, bool eps_given,
                bool estimate, const NoiseParams& np, int sequences,
                const std::vector<int>& depths) {
  const Clock::time_point t0 = Clock::now();
  std::vector<std::string> errors, warnings;
  if (eps_given == estimate)
    errors.push_back("pass exactly one of --eps or --estimate");
  if (n < 1) errors.push_back("--n must be positive");
  if (eps_given && (!(eps > 0) || !std::isfinite(eps)))
    errors.push_back("--eps must be positive and finite");
  json per_kappa = json::object();
  if (estimate) {
    if (n < 2 || n > kMaxDensityQubits)
      errors.push_back("--estimate supports --n between 2 and 10");
    if (sequences < 1) errors.push_back("--sequences must be positive");
    try {
      validate(np);
    } catch (const DomainError& e) {
      errors.push_back(e.what());
    }
    for (std::size_t i = 0; i < depths.size(); ++i) {
      if (depths[i] < 1) errors.push_back("--depths must be positive");
      if (i > 0 && depths[i] <= depths[i - 1])
        errors.push_back("--depths must be strictly increasing");
    }
    if (depths.size() < 2)
      errors.push_back("--depths needs at least two points");
  }
  if (!errors.empty()) return fail_config(errors);
  set_max_threads(cm.threads);

  QVolumeInput input;
  input.n_qubits = n;
  if (eps_given) {
    input = constant_eps(n, eps);
  } else {
    const Rng master(cm.seed);
    std::vector<double> table(static_cast<std::size_t>(n) + 1, 0.0);
    for (int kp = 2; kp <= n; ++kp) {
      const EpsEffEstimate est = estimate_eps_eff(
          kp, np, sequences, depths,
          master.split(static_cast<std::uint64_t>(kp)).seed());
      double value = est.eps;
      if (!(value > 0)) {
        value = 1e-15;
        warnings.push_back("estimated error at kappa " + std::to_string(kp) +
                           " was not positive; the volume table uses 1e-15");
      }
      table[static_cast<std::size_t>(kp)] = value;
      json row;
      row["eps"] = est.eps;
      row["ci_lo"] = est.ci_lo;
      row["ci_hi"] = est.ci_hi;
      row["amplitude"] = est.amplitude;
      row["gates"] = est.gates;
      row["mean_f"] = est.mean_f;
      per_kappa[std::to_string(kp)] = std::move(row);
    }
    table[1] = table[2];  // no two-qubit layer fits on one qubit
    input.eps_eff = [table](int kp) {
      return table[static_cast<std::size_t>(kp)];
    };
  }
  const QVolumeReport report = quantum_volume(input);

  std::vector<io::Row> rows;
  for (const auto& row : report.rows)
    rows.push_back({row.kappa, row.eps, row.depth, row.score});

  json config;
  config["n"] = n;
  if (eps_given) config["eps"] = eps;
  config["estimate"] = estimate;
  if (estimate) {
    config["p_dephase"] = np.p_dephase;
    config["p_relax"] = np.p_relax;
    config["p_readout"] = np.p_readout;
    config["sequences"] = sequences;
    config["depths"] = depths;
  }
  json gates;
  gates["ops_per_two_qubit_unitary"] = 25;
  json summary;
  summary["log2_vq"] = report.log2_vq;
  summary["vq"] = report.vq;
  summary["best_kappa"] = report.best_kappa;
  if (estimate) summary["eps_eff_estimates"] = std::move(per_kappa);
  return finish(cm, "qvolume", {"kappa", "eps", "depth", "score"}, rows,
                std::move(config), std::move(gates), std::move(summary),
                warnings, t0);
}

int run_dump_circuit(const Common& cm, const MapOpts& mo, bool map_step,
                     bool qft) {
  const Clock::time_point t0 = Clock::now();
  std::vector<std::string> errors, warnings;
  if (map_step == qft)
    errors.push_back("pass exactly one of --map-step or --qft");
  std::optional<SawtoothParams> p;
  if (map_step) {
    p = mo.resolve(errors, warnings, true);
  } else {
    try {
      check_qubit_count(mo.n);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) return fail_config(errors);
  set_max_threads(cm.threads);

  const Circuit c = map_step ? map_step_circuit(*p) : qft_circuit(mo.n);
  const std::string text = serialize_circuit(c);
  std::cout << text;

  int counts[6] = {0, 0, 0, 0, 0, 0};
  for (const auto& op : c.ops) counts[static_cast<int>(op.kind)]++;
  std::vector<io::Row> rows = {
      {"Hadamard", counts[static_cast<int>(GateKind::Hadamard)]},
      {"PhaseShift", counts[static_cast<int>(GateKind::PhaseShift)]},
      {"Cnot", counts[static_cast<int>(GateKind::Cnot)]},
      {"TwoQubitDiagonal",
       counts[static_cast<int>(GateKind::TwoQubitDiagonal)]},
      {"ControlledPhase",
       counts[static_cast<int>(GateKind::ControlledPhase)]},
      {"MultiControlledX",
       counts[static_cast<int>(GateKind::MultiControlledX)]}};

  json config;
  config["n"] = mo.n;
  config["map_step"] = map_step;
  config["qft"] = qft;
  if (p) config.update(mo.echo(*p));
  json gates;
  gates["total_ops"] = c.ops.size();
  json summary;
  summary["bit_reversal_at_end"] = c.bit_reversal_at_end;
  summary["global_phase"] = c.global_phase;
  return finish(cm, "dump-circuit", {"kind", "count"}, rows,
                std::move(config), std::move(gates), std::move(summary),
                warnings, t0, "dump-circuit.txt", text);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App cli{"Quantum map dynamics toolkit: localization, fidelity, and "
               "volume experiments with reproducible seeds"};
  cli.require_subcommand(1);

  // sawtooth-evolve ---------------------------------------------------------
  auto* sc_evolve = cli.add_subcommand(
      "sawtooth-evolve", "Evolve an action eigenstate and emit W_m");
  Common cm_evolve;
  MapOpts mo_evolve;
  int evolve_t = 1;
  mo_evolve.add(sc_evolve);
  sc_evolve->add_option("--t", evolve_t, "Number of map steps")
      ->capture_default_str();
  add_common(sc_evolve, cm_evolve);

  // husimi ------------------------------------------------------------------
  auto* sc_husimi = cli.add_subcommand(
      "husimi", "Phase-space distribution after map evolution");
  Common cm_husimi;
  MapOpts mo_husimi;
  int husimi_t = 1, avg_from = 0, avg_to = 0;
  long long n_theta = 0, n_action = 0;
  mo_husimi.add(sc_husimi);
  sc_husimi->add_option("--t", husimi_t, "Number of map steps")
      ->capture_default_str();
  sc_husimi->add_option("--n-theta", n_theta, "Angle cells; 0 uses 2^n")
      ->capture_default_str();
  sc_husimi->add_option("--n-action", n_action, "Action cells; 0 uses 2^n")
      ->capture_default_str();
  auto* opt_from = sc_husimi->add_option(
      "--avg-from", avg_from, "First step of a time-averaging window");
  auto* opt_to = sc_husimi->add_option(
      "--avg-to", avg_to, "Last step of a time-averaging window");
  opt_from->needs(opt_to);
  opt_to->needs(opt_from);
  add_common(sc_husimi, cm_husimi);

  // localization ------------------------------------------------------------
  auto* sc_loc = cli.add_subcommand(
      "localization",
      "Noiseless, noisy-exact, and sampled W_m for one configuration");
  Common cm_loc;
  MapOpts mo_loc;
  int loc_t = 1, loc_reps = 10;
  long long loc_shots = 1024;
  NoiseParams loc_np;
  mo_loc.add(sc_loc);
  sc_loc->add_option("--t", loc_t, "Number of map steps")
      ->capture_default_str();
  sc_loc->add_option("--shots", loc_shots, "Measurement shots per repetition")
      ->capture_default_str();
  sc_loc->add_option("--reps", loc_reps, "Sampling repetitions")
      ->capture_default_str();
  sc_loc->add_option("--p-dephase", loc_np.p_dephase,
                     "Per-touch dephasing weight")
      ->capture_default_str();
  sc_loc->add_option("--p-relax", loc_np.p_relax,
                     "Per-touch relaxation probability")
      ->capture_default_str();
  sc_loc->add_option("--p-readout", loc_np.p_readout,
                     "Per-bit readout flip probability")
      ->capture_default_str();
  add_common(sc_loc, cm_loc);

  // diffusion ---------------------------------------------------------------
  auto* sc_diff = cli.add_subcommand(
      "diffusion", "Classical ensemble second moment and diffusion fit");
  Common cm_diff;
  MapOpts mo_diff;
  long long diff_traj = 100000;
  int diff_tmax = 50;
  mo_diff.add(sc_diff);
  sc_diff->add_option("--trajectories", diff_traj, "Ensemble size")
      ->capture_default_str();
  sc_diff->add_option("--t-max", diff_tmax, "Map steps to follow")
      ->capture_default_str();
  add_common(sc_diff, cm_diff);

  // fidelity ----------------------------------------------------------------
  auto* sc_fid = cli.add_subcommand(
      "fidelity", "Interferometric fidelity decay under a kick perturbation");
  Common cm_fid;
  MapOpts mo_fid;
  double fid_eps_k = 0;
  int fid_tmax = 50;
  long long fid_shots = 0;
  mo_fid.add(sc_fid);
  sc_fid->add_option("--eps-k", fid_eps_k, "Kick perturbation strength")
      ->required();
  sc_fid->add_option("--t-max", fid_tmax, "Largest echo time")
      ->capture_default_str();
  sc_fid->add_option("--shots", fid_shots,
                     "Ancilla shots; 0 reports exact values only")
      ->capture_default_str();
  add_common(sc_fid, cm_fid);

  // schrodinger -------------------------------------------------------------
  auto* sc_sch = cli.add_subcommand(
      "schrodinger", "Split-step evolution of a packet on a grid register");
  Common cm_sch;
  int sch_n = 8, sch_steps = 100, sch_ancilla = 16;
  double sch_d = 16.0, sch_eps = 0.01, sch_mass = 1.0, sch_hbar = 1.0;
  double sch_omega = 1.0, sch_x0 = 0.0, sch_p0 = 0.0, sch_sigma = 1.0;
  std::string sch_potential = "harmonic";
  sc_sch->add_option("--n", sch_n, "Grid register width in qubits")
      ->capture_default_str();
  sc_sch->add_option("--d", sch_d, "Box half-width")->capture_default_str();
  sc_sch->add_option("--eps", sch_eps, "Time step")->capture_default_str();
  sc_sch->add_option("--steps", sch_steps, "Step count")
      ->capture_default_str();
  sc_sch->add_option("--mass", sch_mass, "Particle mass")
      ->capture_default_str();
  sc_sch->add_option("--hbar", sch_hbar, "Planck constant")
      ->capture_default_str();
  sc_sch->add_option("--ancilla-bits", sch_ancilla,
                     "Potential quantization bits")
      ->capture_default_str();
  sc_sch->add_option("--potential", sch_potential,
                     "Potential shape: none or harmonic")
      ->capture_default_str();
  sc_sch->add_option("--omega", sch_omega, "Harmonic frequency")
      ->capture_default_str();
  sc_sch->add_option("--x0", sch_x0, "Packet center")->capture_default_str();
  sc_sch->add_option("--p0", sch_p0, "Packet momentum")
      ->capture_default_str();
  auto* opt_sigma = sc_sch->add_option(
      "--sigma", sch_sigma, "Packet width; default matches the potential");
  add_common(sc_sch, cm_sch);

  // qvolume -----------------------------------------------------------------
  auto* sc_qv = cli.add_subcommand(
      "qvolume", "Achievable-volume table from given or estimated errors");
  Common cm_qv;
  int qv_n = 0, qv_sequences = 4;
  double qv_eps = 0;
  bool qv_estimate = false;
  NoiseParams qv_np;
  std::vector<int> qv_depths = {1, 2, 4, 8};
  sc_qv->add_option("--n", qv_n, "Register width in qubits")->required();
  auto* opt_eps =
      sc_qv->add_option("--eps", qv_eps, "Constant per-gate error rate");
  sc_qv->add_flag("--estimate", qv_estimate,
                  "Estimate per-width errors from noisy random circuits");
  sc_qv->add_option("--p-dephase", qv_np.p_dephase,
                    "Per-touch dephasing weight")
      ->capture_default_str();
  sc_qv->add_option("--p-relax", qv_np.p_relax,
                    "Per-touch relaxation probability")
      ->capture_default_str();
  sc_qv->add_option("--sequences", qv_sequences,
                    "Random sequences per width")
      ->capture_default_str();
  sc_qv->add_option("--depths", qv_depths, "Layer-count grid for the fit")
      ->delimiter(',')
      ->capture_default_str();
  add_common(sc_qv, cm_qv);

  // dump-circuit ------------------------------------------------------------
  auto* sc_dump = cli.add_subcommand(
      "dump-circuit", "Print and save a gate-level circuit listing");
  Common cm_dump;
  MapOpts mo_dump;
  bool dump_map = false, dump_qft = false;
  mo_dump.add(sc_dump);
  sc_dump->add_flag("--map-step", dump_map, "One map-iteration circuit");
  sc_dump->add_flag("--qft", dump_qft, "Fourier transform circuit");
  add_common(sc_dump, cm_dump);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sc_evolve->parsed())
      return run_sawtooth_evolve(cm_evolve, mo_evolve, evolve_t);
    if (sc_husimi->parsed())
      return run_husimi(cm_husimi, mo_husimi, husimi_t, n_theta, n_action,
                        avg_from, avg_to, opt_from->count() > 0);
    if (sc_loc->parsed())
      return run_localization(cm_loc, mo_loc, loc_t, loc_shots, loc_reps,
                              loc_np);
    if (sc_diff->parsed())
      return run_diffusion(cm_diff, mo_diff, diff_traj, diff_tmax);
    if (sc_fid->parsed())
      return run_fidelity(cm_fid, mo_fid, fid_eps_k, fid_tmax, fid_shots);
    if (sc_sch->parsed())
      return run_schrodinger(cm_sch, sch_n, sch_d, sch_eps, sch_steps,
                             sch_mass, sch_hbar, sch_ancilla, sch_potential,
                             sch_omega, sch_x0, sch_p0, sch_sigma,
                             opt_sigma->count() > 0);
    if (sc_qv->parsed())
      return run_qvolume(cm_qv, qv_n, qv_eps, opt_eps->count() > 0,
                         qv_estimate, qv_np, qv_sequences, qv_depths);
    if (sc_dump->parsed())
      return run_dump_circuit(cm_dump, mo_dump, dump_map, dump_qft);
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace qdyn::app
