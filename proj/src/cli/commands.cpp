#include "sivrelax/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sivrelax/bath.hpp"
#include "sivrelax/constants.hpp"
#include "sivrelax/csv.hpp"
#include "sivrelax/dynamics.hpp"
#include "sivrelax/fitting.hpp"
#include "sivrelax/orbach_singlet.hpp"
#include "sivrelax/orbach_triplet.hpp"
#include "sivrelax/spin_core.hpp"

namespace sivrelax::cli {

namespace {

// ---------------------------------------------------------------- helpers

struct CommandSpec {
  std::string name;
  std::string summary;
  std::string extension;
};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs = {
      {"esr-spectrum", "stick ESR spectrum for B near [111]: field_mT,intensity,site,transition", "csv"},
      {"orientation-sweep", "relaxation times vs field angle: theta_deg,t1a_s,t1b_s,t2_s", "csv"},
      {"temperature-sweep", "Arrhenius lines per orientation: orientation,T_K,t1_s,t2_s", "csv"},
      {"decay", "synthetic recovery curve: time_s,signal[,sigma]", "csv"},
      {"bath-sweep", "dipolar-bath T2 vs density: density_cm3,temperature_K,t2_s", "csv"},
      {"fit-biexp", "bi-exponential fit of a decay CSV (time_s,signal[,sigma])", "json"},
      {"fit-arrhenius", "Arrhenius fit of label,temperature_K,time_s[,sigma_s]", "json"},
      {"fit-id", "instantaneous-diffusion fit of theta2_rad,rate_per_s", "json"},
      {"fit-orientation", "overlap-ratio fit of observable,theta_deg,time_s[,sigma_s]", "json"},
  };
  return specs;
}

std::string num(double v) { return format_number(v); }

std::string time_cell(const RelaxTime& t) { return t.bounded() ? num(t.seconds()) : "inf"; }

Transition parse_transition(const std::string& s) {
  return s == "-1<->0" ? Transition::minus_zero : Transition::zero_plus;
}

/// Applies `f` to 0..n-1 on up to `threads` workers; results keep index
/// order, and the lowest-index exception is rethrown.
template <typename T>
std::vector<T> parallel_map(std::size_t n, int threads, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(n, 1));
  auto work = [&](std::size_t start) {
    for (std::size_t i = start; i < n; i += workers) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return g;
}

// ---------------------------------------------------------------- provenance

struct Provenance {
  std::string key, unit, source;
  std::function<double(const RunConfig&)> get;
};

const std::vector<Provenance>& provenance_table() {
  static const std::vector<Provenance> table = {
      {"d_ground_ghz", "GHz", "ground-state zero-field splitting from ESR line positions",
       [](const RunConfig& c) { return c.d_ground_ghz; }},
      {"g_parallel", "", "ground-state g along the defect axis",
       [](const RunConfig& c) { return c.g_parallel; }},
      {"g_perpendicular", "", "ground-state g perpendicular to the axis",
       [](const RunConfig& c) { return c.g_perpendicular; }},
      {"microwave_ghz", "GHz", "X-band measurement frequency",
       [](const RunConfig& c) { return c.microwave_ghz; }},
      {"activation_energy_mev", "meV", "activation energy shared by all T1 and T2 curves",
       [](const RunConfig& c) { return c.activation_energy_mev; }},
      {"overlap_ratio", "", "zero-field overlap ratio from the orientation fit",
       [](const RunConfig& c) { return c.overlap_ratio; }},
      {"t2_sd_s", "s", "13C spectral-diffusion limit of T2",
       [](const RunConfig& c) { return c.t2_sd_s; }},
      {"t2_id_s", "s", "instantaneous-diffusion limit of T2",
       [](const RunConfig& c) { return c.t2_id_s; }},
      {"misalignment_deg", "deg", "field misalignment from [111]",
       [](const RunConfig& c) { return c.misalignment_deg; }},
      {"polarization", "", "optical spin polarization into m_s=0",
       [](const RunConfig& c) { return c.polarization; }},
      {"temperature_k", "K", "reference temperature",
       [](const RunConfig& c) { return c.temperature_k; }},
  };
  return table;
}

std::string provenance_line(const std::string& command, const RunConfig& c) {
  static const RunConfig defaults;
  std::ostringstream s;
  s << "sivrelax " << command << " schema=" << kCsvSchemaVersion
    << " model=" << (c.model == ModelKind::singlet ? "singlet" : "triplet") << " seed=" << c.seed;
  for (const auto& p : provenance_table()) {
    const double v = p.get(c);
    s << " | " << p.key << "=" << num(v);
    if (!p.unit.empty()) s << ' ' << p.unit;
    s << " (" << (v == p.get(defaults) ? "default: " + p.source : std::string("config")) << ")";
  }
  return s.str();
}

// ---------------------------------------------------------------- model setup

GTensor g_tensor(const RunConfig& c) { return GTensor{c.g_parallel, c.g_perpendicular}; }

double field_at(const RunConfig& c, double theta) {
  if (c.field_mt > 0.0) return c.field_mt;
  return c.microwave_ghz / (kConstants.bohr_magneton_over_h * effective_g(g_tensor(c), theta));
}

OrbachParams orbach(const RunConfig& c, double rate_coefficient) {
  return OrbachParams{rate_coefficient, c.activation_energy_mev, c.temperature_k, c.microwave_ghz};
}

OrientationFitSettings singlet_settings(const RunConfig& c) {
  OrientationFitSettings s;
  s.activation_energy = c.activation_energy_mev;
  s.temperature = c.temperature_k;
  s.zeeman_freq = c.microwave_ghz;
  s.t2_id = c.include_backgrounds ? c.t2_id_s : 0.0;
  s.t2_sd = c.include_backgrounds ? c.t2_sd_s : 0.0;
  s.t2_transition = parse_transition(c.transition);
  return s;
}

double singlet_coefficient(const RunConfig& c) {
  return c.rate_coefficient ? *c.rate_coefficient : default_rate_coefficient(c);
}

TripletModelParams triplet_params(const RunConfig& c, double theta, double rate_coefficient) {
  TripletModelParams p;
  p.ground.zfs = ZfsTensor::axial(c.d_ground_ghz);
  p.ground.g = g_tensor(c);
  p.ground.field = FieldConfig{field_at(c, theta), theta, 0.0, SiteLabel::unspecified};
  p.excited_zfs = ZfsTensor{c.excited_d_ghz, c.excited_e_ghz, deg_to_rad(c.excited_axis_polar_deg), 0.0};
  p.orbach = orbach(c, rate_coefficient);
  return p;
}

DegeneracyPolicy policy(const RunConfig& c) {
  return c.degeneracy_policy == "raw" ? DegeneracyPolicy::raw : DegeneracyPolicy::average;
}

/// Triplet C matched to the singlet model's T1 curves over 5..85 degrees.
double triplet_coefficient(const RunConfig& c) {
  if (c.triplet_rate_coefficient) return *c.triplet_rate_coefficient;
  const double k = singlet_coefficient(c);
  const OrientationFitSettings s = singlet_settings(c);
  std::vector<double> thetas;
  std::vector<RelaxationTimes> reference;
  for (double deg = 5.0; deg <= 85.0 + 1e-9; deg += 5.0) {
    thetas.push_back(deg_to_rad(deg));
    reference.push_back(singlet_model_times(k, c.overlap_ratio, thetas.back(), s));
  }
  // Calibration sweeps theta itself, so the field follows each angle below.
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double unit_c = calibrate_triplet_rate(triplet_params(c, thetas[i], 1.0),
                                                 std::span(&thetas[i], 1),
                                                 std::span(&reference[i], 1));
    sum += std::log(unit_c);
    ++count;
  }
  return std::exp(sum / count);
}

struct OrientationRow {
  RelaxTime t1a = RelaxTime::unbounded();
  RelaxTime t1b = RelaxTime::unbounded();
  RelaxTime t2 = RelaxTime::unbounded();
};

RateMatrix3 model_rate_matrix(const RunConfig& c, double theta, double triplet_c) {
  if (c.model == ModelKind::singlet) {
    const OverlapTriple ov = mixed_overlaps(ZeroFieldOverlaps::from_ratio(c.overlap_ratio), theta);
    return singlet_rate_matrix(ov, orbach(c, singlet_coefficient(c)));
  }
  return triplet_rate_matrix(triplet_params(c, theta, triplet_c), policy(c)).rates;
}

// ---------------------------------------------------------------- commands

using Emit = std::function<void(std::ostream&)>;

Emit cmd_esr_spectrum(const RunConfig& c) {
  SpinSystemParams base;
  base.zfs = ZfsTensor::axial(c.d_ground_ghz);
  base.g = g_tensor(c);
  auto lines = esr_spectrum_111(base, c.microwave_ghz, deg_to_rad(c.misalignment_deg));
  std::stable_sort(lines.begin(), lines.end(), [](const SpectrumLine& a, const SpectrumLine& b) {
    return a.resonance.field_mt < b.resonance.field_mt;
  });
  return [lines, c](std::ostream& os) {
    CsvWriter w(os, {"field_mT", "intensity", "site", "transition"},
                provenance_line("esr-spectrum", c));
    for (const auto& l : lines) {
      w.row({num(l.resonance.field_mt), num(l.weight), to_string(l.site),
             transition_name(l.resonance.lower, l.resonance.upper)});
    }
  };
}

Emit cmd_orientation_sweep(const RunConfig& c, int threads) {
  const std::vector<double> degs = linear_grid(c.theta_min_deg, c.theta_max_deg, c.theta_steps);
  const OrientationFitSettings s = singlet_settings(c);
  const double k = singlet_coefficient(c);
  const double triplet_c = c.model == ModelKind::triplet ? triplet_coefficient(c) : 0.0;
  const Transition tr = parse_transition(c.transition);
  TripletT2Model t2_model;
  if (c.triplet_t2_model == "partial_coherence") {
    t2_model.kind = TripletT2Model::Kind::partial_coherence;
    t2_model.excited_lifetime = c.excited_lifetime_s;
  }

  const std::function<OrientationRow(std::size_t)> point = [&](std::size_t i) {
    const double theta = deg_to_rad(degs[i]);
    OrientationRow row;
    if (c.model == ModelKind::singlet) {
      const RelaxationTimes t = singlet_model_times(k, c.overlap_ratio, theta, s);
      row.t1a = t.t1_a;
      row.t1b = t.t1_b;
      row.t2 = singlet_model_t2(k, c.overlap_ratio, theta, s);
    } else {
      const TripletModelParams p = triplet_params(c, theta, triplet_c);
      const RelaxationTimes t = triplet_relaxation_times(p, policy(c));
      row.t1a = t.t1_a;
      row.t1b = t.t1_b;
      double rate = triplet_t2_model(p, tr, t2_model).rate();
      if (s.t2_id > 0.0) rate += 1.0 / s.t2_id;
      if (s.t2_sd > 0.0) rate += 1.0 / s.t2_sd;
      row.t2 = RelaxTime::from_rate(rate);
    }
    return row;
  };
  const auto rows = parallel_map<OrientationRow>(degs.size(), threads, point);
  return [rows, degs, c](std::ostream& os) {
    CsvWriter w(os, {"theta_deg", "t1a_s", "t1b_s", "t2_s"}, provenance_line("orientation-sweep", c));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      w.row({num(degs[i]), time_cell(rows[i].t1a), time_cell(rows[i].t1b), time_cell(rows[i].t2)});
    }
  };
}

Emit cmd_temperature_sweep(const RunConfig& c) {
  const std::vector<double> temps =
      linear_grid(c.temperature_min_k, c.temperature_max_k, c.temperature_steps);
  return [temps, c](std::ostream& os) {
    CsvWriter w(os, {"orientation", "T_K", "t1_s", "t2_s"}, provenance_line("temperature-sweep", c));
    for (std::size_t k = 0; k < c.orientation_labels.size(); ++k) {
      for (double t : temps) {
        w.row({c.orientation_labels[k], num(t),
               num(arrhenius_time(c.t1_sat_s[k], c.t1_prefactor_hz[k], c.activation_energy_mev, t)),
               num(arrhenius_time(c.t2_sat_s[k], c.t2_prefactor_hz[k], c.activation_energy_mev, t))});
      }
    }
  };
}

Emit cmd_decay(const RunConfig& c) {
  const double theta = deg_to_rad(c.theta_deg);
  const double triplet_c = c.model == ModelKind::triplet ? triplet_coefficient(c) : 0.0;
  const RateMatrix3 r = model_rate_matrix(c, theta, triplet_c);
  const std::vector<double> times = log_spaced(c.t_min_s, c.t_max_s, c.points);
  const Transition tr = parse_transition(c.transition);
  DecayCurve curve = c.recovery == "inversion"
                         ? inversion_recovery_curve(r, tr, c.polarization, times)
                         : saturation_recovery_curve(r, tr, c.polarization, times);
  curve = synthesize_noisy(curve, c.relative_noise, c.seed);
  return [curve, c](std::ostream& os) { write_decay_csv(os, curve, provenance_line("decay", c)); };
}

Emit cmd_bath_sweep(const RunConfig& c, int threads, std::ostream& err) {
  struct Job {
    double density, temperature;
  };
  std::vector<Job> jobs;
  for (double t : c.bath_temperatures_k) {
    for (double n : c.densities_cm3) jobs.push_back({n, t});
  }
  const EchoForm form = c.echo_form == "as_printed" ? EchoForm::as_printed : EchoForm::squared;
  const std::function<BathT2(std::size_t)> point = [&](std::size_t i) {
    PairBathParams p;
    p.density = jobs[i].density;
    p.flip_rate = 1.0 / arrhenius_time(c.bath_t_sat_s, c.bath_prefactor_hz,
                                       c.activation_energy_mev, jobs[i].temperature);
    p.g1z = c.g1z;
    p.g2z = c.g2z;
    p.t2_sd_background = c.include_backgrounds ? c.t2_sd_s : 0.0;
    return bath_t2(p, form);
  };
  const auto results = parallel_map<BathT2>(jobs.size(), threads, point);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (results[i].non_monotone) {
      err << "warning: non-monotone echo decay at n=" << num(jobs[i].density)
          << " cm^-3, T=" << num(jobs[i].temperature) << " K; first 1/e crossing reported\n";
    }
  }
  return [jobs, results, c](std::ostream& os) {
    CsvWriter w(os, {"density_cm3", "temperature_K", "t2_s"}, provenance_line("bath-sweep", c));
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      w.row({num(jobs[i].density), num(jobs[i].temperature), time_cell(results[i].t2)});
    }
  };
}

CsvTable fit_input(const RunConfig& c) {
  if (c.input.empty()) throw ConfigError("fit commands need the 'input' config key");
  return read_csv_file(c.input);
}

struct FitOutput {
  std::string json;
  bool converged = true;
};

FitOutput cmd_fit_biexp(const RunConfig& c) {
  const FitResult f = fit_biexponential(decay_from_table(fit_input(c)));
  return {f.to_json(), f.converged};
}

FitOutput cmd_fit_arrhenius(const RunConfig& c) {
  const CsvTable t = fit_input(c);
  const std::size_t cl = t.column("label"), ct = t.column("temperature_K"), cy = t.column("time_s");
  const bool has_sigma = t.has_column("sigma_s");
  std::vector<ArrheniusDataset> sets;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& label = t.rows[r][cl];
    auto it = std::find_if(sets.begin(), sets.end(), [&](const auto& d) { return d.label == label; });
    if (it == sets.end()) {
      sets.push_back(ArrheniusDataset{label, {}, std::nullopt});
      it = sets.end() - 1;
    }
    it->points.push_back({t.number(r, ct), t.number(r, cy), has_sigma ? t.number(r, t.column("sigma_s")) : 0.0});
  }
  const ArrheniusFit fit = fit_arrhenius(sets, c.share_ea);
  nlohmann::ordered_json j;
  j["joint"] = nlohmann::ordered_json::parse(fit.joint.to_json());
  j["datasets"] = nlohmann::ordered_json::array();
  bool converged = fit.joint.converged;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    auto d = nlohmann::ordered_json::parse(fit.per_dataset[k].to_json());
    d["label"] = sets[k].label;
    j["datasets"].push_back(d);
    converged = converged && fit.per_dataset[k].converged;
  }
  return {j.dump(2), converged};
}

FitOutput cmd_fit_id(const RunConfig& c) {
  const CsvTable t = fit_input(c);
  const std::size_t ca = t.column("theta2_rad"), cr = t.column("rate_per_s");
  std::vector<EchoRatePoint> pts;
  for (std::size_t r = 0; r < t.rows.size(); ++r) pts.push_back({t.number(r, ca), t.number(r, cr)});
  const FitResult f = fit_instantaneous_diffusion(pts);
  return {f.to_json(), f.converged};
}

FitOutput cmd_fit_orientation(const RunConfig& c) {
  const CsvTable t = fit_input(c);
  const std::size_t co = t.column("observable"), ca = t.column("theta_deg"), cy = t.column("time_s");
  const bool has_sigma = t.has_column("sigma_s");
  OrientationData data;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const OrientationPoint p{deg_to_rad(t.number(r, ca)), t.number(r, cy),
                             has_sigma ? t.number(r, t.column("sigma_s")) : 0.0};
    const std::string& obs = t.rows[r][co];
    if (obs == "t1a") {
      data.t1a.push_back(p);
    } else if (obs == "t1b") {
      data.t1b.push_back(p);
    } else if (obs == "t2") {
      data.t2.push_back(p);
    } else {
      throw std::invalid_argument("observable must be t1a, t1b or t2, got '" + obs + "'");
    }
  }
  const FitResult f = global_orientation_fit(data, singlet_settings(c));
  return {f.to_json(), f.converged};
}

void deliver(const CliOptions& o, const std::string& extension, const Emit& emit, std::ostream& out) {
  if (!o.out_dir) {
    emit(out);
    return;
  }
  std::filesystem::create_directories(*o.out_dir);
  const std::filesystem::path path = std::filesystem::path(*o.out_dir) / (o.command + "." + extension);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  emit(f);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : commands()) n.push_back(s.name);
    return n;
  }();
  return names;
}

std::string command_summary(const std::string& command) {
  for (const auto& s : commands()) {
    if (s.name == command) return s.summary;
  }
  return {};
}

double default_rate_coefficient(const RunConfig& c) {
  OrientationFitSettings s;
  s.activation_energy = 0.0;  // unit activation factor: rates equal prefactors
  s.temperature = c.temperature_k;
  s.zeeman_freq = c.microwave_ghz;
  const RelaxationTimes unit =
      singlet_model_times(1.0, c.overlap_ratio, deg_to_rad(c.misalignment_deg), s);
  const double fast = std::max(unit.rate_a, unit.rate_b);
  if (!(fast > 0.0)) throw NumericError("default rate coefficient: no relaxation at the misalignment angle");
  return 2.10e3 / fast;
}

int run(const CliOptions& options, std::ostream& out, std::ostream& err) {
  const auto spec = std::find_if(commands().begin(), commands().end(),
                                 [&](const CommandSpec& s) { return s.name == options.command; });
  try {
    if (spec == commands().end()) throw ConfigError("unknown command '" + options.command + "'");
    RunConfig c = options.config_path ? load_config(*options.config_path) : RunConfig{};
    if (options.seed) c.seed = *options.seed;
    if (options.model) {
      if (*options.model == "singlet") {
        c.model = ModelKind::singlet;
      } else if (*options.model == "triplet") {
        c.model = ModelKind::triplet;
      } else {
        throw ConfigError("--model must be singlet or triplet");
      }
    }
    if (options.threads < 1) throw ConfigError("--threads must be >= 1");
    validate(c);

    const std::string& name = options.command;
    if (name.rfind("fit-", 0) == 0) {
      FitOutput result;
      if (name == "fit-biexp") result = cmd_fit_biexp(c);
      if (name == "fit-arrhenius") result = cmd_fit_arrhenius(c);
      if (name == "fit-id") result = cmd_fit_id(c);
      if (name == "fit-orientation") result = cmd_fit_orientation(c);
      deliver(options, spec->extension, [&](std::ostream& os) { os << result.json << '\n'; }, out);
      if (!result.converged) {
        err << "error: fit did not converge\n";
        return kExitFit;
      }
      return kExitOk;
    }

    Emit emit;
    if (name == "esr-spectrum") emit = cmd_esr_spectrum(c);
    if (name == "orientation-sweep") emit = cmd_orientation_sweep(c, options.threads);
    if (name == "temperature-sweep") emit = cmd_temperature_sweep(c);
    if (name == "decay") emit = cmd_decay(c);
    if (name == "bath-sweep") emit = cmd_bath_sweep(c, options.threads, err);
    deliver(options, spec->extension, emit, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << '\n';
    return kExitFit;
  } catch (const std::exception& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace sivrelax::cli
