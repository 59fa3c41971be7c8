#include "sivrelax/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "sivrelax/constants.hpp"

namespace sivrelax {

// ---------------------------------------------------------------- FitResult

namespace {

std::size_t index_of(const FitResult& f, const std::string& name) {
  const auto it = std::find(f.names.begin(), f.names.end(), name);
  if (it == f.names.end()) throw std::out_of_range("FitResult: no parameter '" + name + "'");
  return static_cast<std::size_t>(it - f.names.begin());
}

}  // namespace

bool FitResult::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

double FitResult::value(const std::string& name) const { return values(index_of(*this, name)); }

double FitResult::sigma(const std::string& name) const { return sigmas(index_of(*this, name)); }

std::string FitResult::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["rss"] = rss;
  auto& params = j["parameters"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    nlohmann::ordered_json p;
    p["name"] = names[k];
    p["value"] = values(k);
    p["sigma"] = converged ? nlohmann::ordered_json(sigmas(k)) : nlohmann::ordered_json();
    params.push_back(p);
  }
  j["extras"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : extras) j["extras"][k] = v;
  j["notices"] = notices;
  return j.dump(2);
}

namespace {

/// Keeps the lowest residual sum; ties go to the lexicographically smaller
/// parameter vector so the choice never depends on start order.
bool better(const LsqResult& a, const LsqResult& b) {
  if (!std::isfinite(b.rss)) return std::isfinite(a.rss);
  if (a.rss != b.rss) return a.rss < b.rss;
  return std::lexicographical_compare(a.x.data(), a.x.data() + a.x.size(), b.x.data(),
                                      b.x.data() + b.x.size());
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) {
    g[k] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1));
  }
  return g;
}

// ---------------------------------------------------------------- decays

struct CurveData {
  Eigen::VectorXd t, y, w;
};

CurveData prepare(const DecayCurve& curve, std::size_t min_points) {
  curve.validate();
  if (curve.times.size() < min_points) {
    throw std::invalid_argument("decay fit needs at least " + std::to_string(min_points) +
                                " points");
  }
  if (!(curve.times.front() > 0.0)) throw std::invalid_argument("decay fit needs positive times");
  const auto n = static_cast<Eigen::Index>(curve.times.size());
  CurveData d{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd::Ones(n)};
  const bool weighted = curve.has_sigma() &&
                        std::all_of(curve.sigma.begin(), curve.sigma.end(),
                                    [](double s) { return s > 0.0; });
  for (Eigen::Index i = 0; i < n; ++i) {
    d.t(i) = curve.times[i];
    d.y(i) = curve.signal[i];
    if (weighted) d.w(i) = 1.0 / curve.sigma[i];
  }
  return d;
}

/// Linear amplitudes and offset for fixed time constants.
Eigen::VectorXd linear_amplitudes(const CurveData& d, const std::vector<double>& taus) {
  const Eigen::Index n = d.t.size();
  Eigen::MatrixXd a(n, static_cast<Eigen::Index>(taus.size()) + 1);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    a.col(k) = (-d.t.array() / taus[k]).exp().matrix();
  }
  a.col(a.cols() - 1).setOnes();
  const Eigen::MatrixXd aw = d.w.asDiagonal() * a;
  return aw.colPivHouseholderQr().solve(d.w.cwiseProduct(d.y));
}

/// Model sum_k a_k exp(-t / e^{s_k}) + c with parameters (a_1, s_1, ..., c).
LsqProblem exponential_problem(const CurveData& d, int terms) {
  LsqProblem p;
  p.residuals = [&d, terms](const Eigen::VectorXd& x) {
    Eigen::VectorXd m = Eigen::VectorXd::Constant(d.t.size(), x(2 * terms));
    for (int k = 0; k < terms; ++k) {
      m += x(2 * k) * (-d.t.array() * std::exp(-x(2 * k + 1))).exp().matrix();
    }
    return Eigen::VectorXd(d.w.cwiseProduct(m - d.y));
  };
  p.jacobian = [&d, terms](const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(d.t.size(), 2 * terms + 1);
    for (int k = 0; k < terms; ++k) {
      const Eigen::ArrayXd rate_t = d.t.array() * std::exp(-x(2 * k + 1));
      const Eigen::ArrayXd e = (-rate_t).exp();
      j.col(2 * k) = e.matrix();
      j.col(2 * k + 1) = (x(2 * k) * e * rate_t).matrix();
    }
    j.col(2 * terms).setOnes();
    return Eigen::MatrixXd(d.w.asDiagonal() * j);
  };
  return p;
}

LsqResult best_exponential_fit(const CurveData& d, int terms) {
  const std::vector<double> grid = log_grid(d.t(0), d.t(d.t.size() - 1), 8);
  std::vector<std::vector<double>> starts;
  if (terms == 1) {
    for (double tau : grid) starts.push_back({tau});
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t k = i + 1; k < grid.size(); ++k) starts.push_back({grid[i], grid[k]});
    }
  }
  const LsqProblem problem = exponential_problem(d, terms);
  LsqResult best;
  best.rss = std::numeric_limits<double>::infinity();
  for (const auto& taus : starts) {
    const Eigen::VectorXd lin = linear_amplitudes(d, taus);
    Eigen::VectorXd x0(2 * terms + 1);
    for (int k = 0; k < terms; ++k) {
      x0(2 * k) = lin(k);
      x0(2 * k + 1) = std::log(taus[k]);
    }
    x0(2 * terms) = lin(terms);
    const LsqResult r = levenberg_marquardt(problem, x0);
    if (better(r, best)) best = r;
  }
  return best;
}

FitResult exponential_result(const LsqResult& r, int terms) {
  FitResult f;
  f.model = terms == 1 ? "monoexponential" : "biexponential";
  f.rss = r.rss;
  f.iterations = r.iterations;
  f.converged = r.converged;
  std::vector<int> order(terms);
  for (int k = 0; k < terms; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return r.x(2 * a + 1) < r.x(2 * b + 1); });
  f.values.resize(2 * terms + 1);
  f.sigmas.resize(2 * terms + 1);
  for (int k = 0; k < terms; ++k) {
    const int src = order[k];
    const std::string idx = std::to_string(k + 1);
    const double tau = std::exp(r.x(2 * src + 1));
    f.names.push_back("a" + idx);
    f.names.push_back("tau" + idx);
    f.values(2 * k) = r.x(2 * src);
    f.values(2 * k + 1) = tau;
    f.sigmas(2 * k) = std::sqrt(std::max(0.0, r.covariance(2 * src, 2 * src)));
    f.sigmas(2 * k + 1) = tau * std::sqrt(std::max(0.0, r.covariance(2 * src + 1, 2 * src + 1)));
  }
  f.names.push_back("offset");
  f.values(2 * terms) = r.x(2 * terms);
  f.sigmas(2 * terms) = std::sqrt(std::max(0.0, r.covariance(2 * terms, 2 * terms)));
  return f;
}

double bic(double rss, std::size_t n, int k) {
  const double nn = static_cast<double>(n);
  return nn * std::log(std::max(rss, 1e-300) / nn) + k * std::log(nn);
}

}  // namespace

FitResult fit_monoexponential(const DecayCurve& curve) {
  const CurveData d = prepare(curve, 4);
  return exponential_result(best_exponential_fit(d, 1), 1);
}

FitResult fit_biexponential(const DecayCurve& curve) {
  const CurveData d = prepare(curve, 7);
  const LsqResult bi = best_exponential_fit(d, 2);
  const LsqResult mono = best_exponential_fit(d, 1);
  FitResult two = exponential_result(bi, 2);
  FitResult one = exponential_result(mono, 1);
  const std::size_t n = curve.times.size();
  two.extras["bic"] = bic(bi.rss, n, 5);
  one.extras["bic"] = bic(mono.rss, n, 3);

  const double separation = two.value("tau2") / two.value("tau1");
  if (separation < kBiexpMinSeparation) {
    one.notices.push_back("time constants within a factor 1.5; collapsed to one exponential");
    return one;
  }
  if (one.extras["bic"] <= two.extras["bic"]) {
    one.notices.push_back("information criterion prefers one exponential");
    return one;
  }
  return two;
}

// ---------------------------------------------------------------- Arrhenius

void ArrheniusDataset::validate() const {
  if (points.empty()) throw std::invalid_argument("Arrhenius dataset '" + label + "' is empty");
  for (const auto& p : points) {
    if (!(p.temperature > 0.0) || !(p.time > 0.0) || !(p.sigma >= 0.0)) {
      throw std::invalid_argument("Arrhenius dataset '" + label +
                                  "': temperatures and times must be positive");
    }
  }
  if (fixed_t_sat && !(*fixed_t_sat > 0.0)) {
    throw std::invalid_argument("Arrhenius dataset '" + label + "': fixed T_sat must be > 0");
  }
}

double arrhenius_time(double t_sat, double prefactor, double activation_mev, double temperature) {
  if (!(t_sat > 0.0) || !(prefactor >= 0.0)) {
    throw std::invalid_argument("arrhenius_time: need T_sat > 0 and A >= 0");
  }
  return 1.0 / (1.0 / t_sat + prefactor * activation_factor(activation_mev, temperature));
}

namespace {

struct ArrheniusLayout {
  // Index of ln(1/T_sat) per dataset, or -1 when fixed; index of ln A.
  std::vector<int> sat_index, amp_index;
  int size = 1;
};

ArrheniusLayout arrhenius_layout(const std::vector<ArrheniusDataset>& ds) {
  ArrheniusLayout l;
  for (const auto& d : ds) {
    l.sat_index.push_back(d.fixed_t_sat ? -1 : l.size++);
    l.amp_index.push_back(l.size++);
  }
  return l;
}

LsqProblem arrhenius_problem(const std::vector<ArrheniusDataset>& ds, const ArrheniusLayout& l) {
  LsqProblem p;
  p.residuals = [&ds, &l](const Eigen::VectorXd& x) {
    std::vector<double> r;
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const double sat_rate =
          l.sat_index[k] < 0 ? 1.0 / *ds[k].fixed_t_sat : std::exp(x(l.sat_index[k]));
      const double amp = std::exp(x(l.amp_index[k]));
      for (const auto& pt : ds[k].points) {
        const double model = sat_rate + amp * activation_factor(x(0), pt.temperature);
        const double weight = pt.sigma > 0.0 ? pt.time / pt.sigma : 1.0;
        r.push_back(weight * (std::log(model) + std::log(pt.time)));
      }
    }
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())));
  };
  return p;
}

/// Per-dataset (ln sat rate, ln A) at fixed E_a from a relative linear fit.
void arrhenius_linear_init(const ArrheniusDataset& d, double ea, double& ln_sat, double& ln_amp) {
  const auto n = static_cast<Eigen::Index>(d.points.size());
  double t_max = 0.0, e_max = 0.0;
  for (const auto& p : d.points) {
    t_max = std::max(t_max, p.time);
    e_max = std::max(e_max, activation_factor(ea, p.temperature));
  }
  double sat = d.fixed_t_sat ? 1.0 / *d.fixed_t_sat : 0.0;
  double amp = 0.0;
  if (d.fixed_t_sat) {
    double num = 0.0, den = 0.0;
    for (const auto& p : d.points) {
      const double e = activation_factor(ea, p.temperature) * p.time;
      num += e * (1.0 - sat * p.time);
      den += e * e;
    }
    amp = den > 0.0 ? num / den : 0.0;
  } else if (n >= 2) {
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, 0) = d.points[i].time;
      a(i, 1) = activation_factor(ea, d.points[i].temperature) * d.points[i].time;
    }
    const Eigen::Vector2d s = a.colPivHouseholderQr().solve(b);
    sat = s(0);
    amp = s(1);
  }
  if (!(sat > 0.0)) sat = 0.5 / t_max;
  if (!(amp > 0.0)) amp = 1e-3 * sat / std::max(e_max, 1e-300);
  ln_sat = std::log(sat);
  ln_amp = std::log(amp);
}

ArrheniusFit fit_arrhenius_joint(const std::vector<ArrheniusDataset>& ds) {
  const ArrheniusLayout layout = arrhenius_layout(ds);
  const LsqProblem problem = arrhenius_problem(ds, layout);
  std::size_t n_points = 0;
  for (const auto& d : ds) n_points += d.points.size();

  LsqResult best;
  best.rss = std::numeric_limits<double>::infinity();
  for (double ea : {8.0, 12.0, 16.0, 20.0, 25.0, 30.0}) {
    Eigen::VectorXd x0(layout.size);
    x0(0) = ea;
    for (std::size_t k = 0; k < ds.size(); ++k) {
      double ln_sat = 0.0, ln_amp = 0.0;
      arrhenius_linear_init(ds[k], ea, ln_sat, ln_amp);
      if (layout.sat_index[k] >= 0) x0(layout.sat_index[k]) = ln_sat;
      x0(layout.amp_index[k]) = ln_amp;
    }
    const LsqResult r = levenberg_marquardt(problem, x0);
    if (better(r, best)) best = r;
  }

  auto sd = [&](int i) { return std::sqrt(std::max(0.0, best.covariance(i, i))); };
  ArrheniusFit out;
  FitResult& j = out.joint;
  j.model = "arrhenius";
  j.rss = best.rss;
  j.iterations = best.iterations;
  j.converged = best.converged;
  std::vector<double> values{best.x(0)}, sigmas{sd(0)};
  j.names.push_back("E_a");
  const double ea_sigma = sd(0);

  for (std::size_t k = 0; k < ds.size(); ++k) {
    FitResult f;
    f.model = "arrhenius";
    f.rss = best.rss;
    f.iterations = best.iterations;
    f.converged = best.converged;
    f.names = {"E_a", "T_sat", "A"};
    const double t_sat = layout.sat_index[k] < 0 ? *ds[k].fixed_t_sat
                                                 : std::exp(-best.x(layout.sat_index[k]));
    const double t_sat_sd = layout.sat_index[k] < 0 ? 0.0 : t_sat * sd(layout.sat_index[k]);
    const double amp = std::exp(best.x(layout.amp_index[k]));
    const double amp_sd = amp * sd(layout.amp_index[k]);
    f.values = Eigen::Vector3d(best.x(0), t_sat, amp);
    f.sigmas = Eigen::Vector3d(ea_sigma, t_sat_sd, amp_sd);
    if (layout.sat_index[k] < 0) f.notices.push_back("T_sat held fixed");
    if (amp_sd > amp || t_sat_sd > t_sat) {
      f.notices.push_back("wide uncertainties: temperature span may not cover both regimes");
    }
    out.per_dataset.push_back(f);

    j.names.push_back("T_sat[" + ds[k].label + "]");
    j.names.push_back("A[" + ds[k].label + "]");
    values.insert(values.end(), {t_sat, amp});
    sigmas.insert(sigmas.end(), {t_sat_sd, amp_sd});
  }
  j.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  j.sigmas = Eigen::Map<Eigen::VectorXd>(sigmas.data(), static_cast<Eigen::Index>(sigmas.size()));
  j.extras["points"] = static_cast<double>(n_points);
  if (ea_sigma > 0.5 * std::abs(best.x(0))) {
    j.notices.push_back("wide uncertainty on E_a: temperature span may be insufficient");
  }
  return out;
}

}  // namespace

ArrheniusFit fit_arrhenius(const std::vector<ArrheniusDataset>& datasets, bool share_ea) {
  if (datasets.empty()) throw std::invalid_argument("fit_arrhenius: no datasets");
  for (const auto& d : datasets) d.validate();
  if (share_ea) return fit_arrhenius_joint(datasets);

  ArrheniusFit out;
  out.joint.model = "arrhenius-separate";
  out.joint.converged = true;
  for (const auto& d : datasets) {
    ArrheniusFit single = fit_arrhenius_joint({d});
    out.joint.converged = out.joint.converged && single.joint.converged;
    out.joint.rss += single.joint.rss;
    out.joint.iterations = std::max(out.joint.iterations, single.joint.iterations);
    out.per_dataset.push_back(single.per_dataset.front());
  }
  return out;
}

// ---------------------------------------------------------------- instantaneous diffusion

double hahn_echo_t2(double t2_sd, double t2_id, double theta2) {
  if (!(t2_sd > 0.0) || !(t2_id > 0.0)) throw std::invalid_argument("hahn_echo_t2: times must be > 0");
  const double s = std::sin(0.5 * theta2);
  return 1.0 / (1.0 / t2_sd + s * s / t2_id);
}

FitResult fit_instantaneous_diffusion(const std::vector<EchoRatePoint>& points) {
  std::set<double> angles, xs;
  for (const auto& p : points) {
    angles.insert(p.theta2);
    const double s = std::sin(0.5 * p.theta2);
    xs.insert(s * s);
  }
  if (angles.size() < 3) {
    throw std::invalid_argument("fit_instantaneous_diffusion: need at least 3 distinct angles");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = std::sin(0.5 * points[i].theta2);
    a(i, 0) = 1.0;
    a(i, 1) = s * s;
    b(i) = points[i].rate;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 2 || xs.size() < 2) {
    throw std::invalid_argument("fit_instantaneous_diffusion: angles give collinear design");
  }
  const Eigen::Vector2d coef = qr.solve(b);
  const double rss = (a * coef - b).squaredNorm();
  const Eigen::MatrixXd cov = linearized_covariance(a, rss);

  FitResult f;
  f.model = "instantaneous-diffusion";
  f.names = {"T2_SD", "T2_ID"};
  f.values = Eigen::Vector2d(1.0 / coef(0), 1.0 / coef(1));
  f.sigmas = Eigen::Vector2d(std::sqrt(std::max(0.0, cov(0, 0))) / (coef(0) * coef(0)),
                             std::sqrt(std::max(0.0, cov(1, 1))) / (coef(1) * coef(1)));
  f.rss = rss;
  f.iterations = 1;
  f.converged = coef(0) > 0.0 && coef(1) > 0.0;
  if (!f.converged) f.notices.push_back("non-positive rate coefficient");
  f.extras["rate_sd"] = coef(0);
  f.extras["rate_id"] = coef(1);
  return f;
}

// ---------------------------------------------------------------- orientation fit

RelaxationTimes singlet_model_times(double k, double ratio, double theta,
                                    const OrientationFitSettings& s) {
  const OverlapTriple ov = mixed_overlaps(ZeroFieldOverlaps::from_ratio(ratio), theta);
  const OrbachParams p{k, s.activation_energy, s.temperature, s.zeeman_freq};
  return relaxation_times_numeric(singlet_rate_matrix(ov, p));
}

RelaxTime singlet_model_t2(double k, double ratio, double theta, const OrientationFitSettings& s) {
  const OrbachParams p{k, s.activation_energy, s.temperature, s.zeeman_freq};
  return t2_singlet(ZeroFieldOverlaps::from_ratio(ratio), theta, p, s.t2_id, s.t2_sd,
                    s.t2_transition);
}

namespace {

constexpr double kRateFloor = 1e-300;
constexpr double kMaxLnRatio = 30.0;

double log_time(const RelaxTime& t) {
  return t.bounded() ? std::log(t.seconds()) : -std::log(kRateFloor);
}

std::size_t point_count(const OrientationData& d) {
  return d.t1a.size() + d.t1b.size() + d.t2.size();
}

bool all_have_sigma(const OrientationData& d) {
  for (const auto* set : {&d.t1a, &d.t1b, &d.t2}) {
    for (const auto& p : *set) {
      if (!(p.sigma > 0.0)) return false;
    }
  }
  return true;
}

Eigen::VectorXd orientation_residuals(const OrientationData& d, const OrientationFitSettings& s,
                                      double ln_k, double ln_ratio) {
  const double k = std::exp(ln_k);
  // Keep exploratory steps away from under/overflow; the model saturates long before.
  const double ratio = std::exp(std::clamp(ln_ratio, -kMaxLnRatio, kMaxLnRatio));
  Eigen::VectorXd r(static_cast<Eigen::Index>(point_count(d)));
  Eigen::Index i = 0;
  auto weight = [](const OrientationPoint& p) { return p.sigma > 0.0 ? p.time / p.sigma : 1.0; };
  for (const auto& p : d.t1a) {
    r(i++) = weight(p) * (log_time(singlet_model_times(k, ratio, p.theta, s).t1_a) - std::log(p.time));
  }
  for (const auto& p : d.t1b) {
    r(i++) = weight(p) * (log_time(singlet_model_times(k, ratio, p.theta, s).t1_b) - std::log(p.time));
  }
  for (const auto& p : d.t2) {
    r(i++) = weight(p) * (log_time(singlet_model_t2(k, ratio, p.theta, s)) - std::log(p.time));
  }
  return r;
}

/// ln K that matches the Orbach-only part on average; times scale as 1/K.
double initial_ln_k(const OrientationData& d, const OrientationFitSettings& s, double ratio) {
  OrientationFitSettings bare = s;
  bare.t2_id = bare.t2_sd = 0.0;
  double sum = 0.0;
  int count = 0;
  auto add = [&](const RelaxTime& unit, const OrientationPoint& p) {
    if (!unit.bounded()) return;
    sum += std::log(unit.seconds()) - std::log(p.time);
    ++count;
  };
  for (const auto& p : d.t1a) add(singlet_model_times(1.0, ratio, p.theta, s).t1_a, p);
  for (const auto& p : d.t1b) add(singlet_model_times(1.0, ratio, p.theta, s).t1_b, p);
  for (const auto& p : d.t2) add(singlet_model_t2(1.0, ratio, p.theta, bare), p);
  return count > 0 ? sum / count : 0.0;
}

LsqResult fit_k_at_ratio(const OrientationData& d, const OrientationFitSettings& s, double ratio) {
  const double ln_ratio = std::log(ratio);
  LsqProblem p;
  p.residuals = [&, ln_ratio](const Eigen::VectorXd& x) {
    return orientation_residuals(d, s, x(0), ln_ratio);
  };
  return levenberg_marquardt(p, Eigen::VectorXd::Constant(1, initial_ln_k(d, s, ratio)));
}

}  // namespace

std::vector<std::pair<double, double>> orientation_profile(const OrientationData& data,
                                                           const OrientationFitSettings& s,
                                                           const std::vector<double>& ratios) {
  std::vector<std::pair<double, double>> out;
  for (double r : ratios) out.emplace_back(r, fit_k_at_ratio(data, s, r).rss);
  return out;
}

FitResult global_orientation_fit(const OrientationData& data, const OrientationFitSettings& s) {
  const std::size_t n = point_count(data);
  if (n < 3) throw std::invalid_argument("global_orientation_fit: need at least 3 points");

  LsqProblem problem;
  problem.residuals = [&](const Eigen::VectorXd& x) {
    return orientation_residuals(data, s, x(0), x(1));
  };
  LsqResult best;
  best.rss = std::numeric_limits<double>::infinity();
  for (double ratio : log_grid(1.0, 1000.0, 8)) {
    const Eigen::Vector2d x0(initial_ln_k(data, s, ratio), std::log(ratio));
    const LsqResult r = levenberg_marquardt(problem, x0);
    if (better(r, best)) best = r;
  }

  FitResult f;
  f.model = "singlet-orientation";
  f.names = {"K", "ratio"};
  const double k = std::exp(best.x(0));
  const double ratio = std::exp(std::clamp(best.x(1), -kMaxLnRatio, kMaxLnRatio));
  f.values = Eigen::Vector2d(k, ratio);
  f.sigmas = Eigen::Vector2d(k * std::sqrt(std::max(0.0, best.covariance(0, 0))),
                             ratio * std::sqrt(std::max(0.0, best.covariance(1, 1))));
  f.rss = best.rss;
  f.iterations = best.iterations;
  f.converged = best.converged;
  if (best.x(1) >= kMaxLnRatio) {
    f.notices.push_back("ratio ran to the upper clamp; the data only bound it from below");
  }

  if (s.profile_lower_bound && n > 2) {
    // 95% one-parameter threshold: chi-square when sigmas are known, else
    // scaled by the residual variance.
    const double delta = all_have_sigma(data) ? 3.84 : 3.84 * best.rss / static_cast<double>(n - 2);
    f.extras["profile_threshold"] = delta;
    double lower = ratio;
    double prev_r = ratio, prev_gap = 0.0;
    bool crossed = false;
    for (int step = 1;; ++step) {
      const double r = ratio * std::pow(10.0, -step / 50.0);
      if (r < 1.0) break;
      const double gap = fit_k_at_ratio(data, s, r).rss - best.rss;
      if (gap > delta) {
        // Interpolate the crossing in log ratio.
        const double frac = (delta - prev_gap) / (gap - prev_gap);
        lower = std::exp(std::log(prev_r) + frac * (std::log(r) - std::log(prev_r)));
        crossed = true;
        break;
      }
      prev_r = r;
      prev_gap = gap;
      lower = r;
    }
    if (!crossed) f.notices.push_back("profile did not cross the threshold above ratio 1");
    f.extras["ratio_lower_bound"] = lower;
  }
  return f;
}

}  // namespace sivrelax
