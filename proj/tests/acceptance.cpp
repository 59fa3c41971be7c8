// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sivrelax/bath.hpp"
#include "sivrelax/constants.hpp"
#include "sivrelax/fitting.hpp"
#include "sivrelax/orbach_singlet.hpp"
#include "sivrelax/orbach_triplet.hpp"
#include "sivrelax/spin_core.hpp"

using namespace sivrelax;

namespace {

constexpr double kEa = 16.8;        // meV
constexpr double kFreq = 9.7;       // GHz
constexpr double kRatio = 125.0;
constexpr double kFieldMt = 345.9;  // near g = 2 resonance at kFreq

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

OrbachParams orbach(double c, double temperature = 30.0, double freq = kFreq) {
  return OrbachParams{c, kEa, temperature, freq};
}

RateMatrix3 singlet(double ratio, double theta, const OrbachParams& p) {
  return singlet_rate_matrix(mixed_overlaps(ZeroFieldOverlaps::from_ratio(ratio), theta), p);
}

// ---------------------------------------------------------------- 1
Verdict esr_positions() {
  SpinSystemParams p;  // D = 0.94 GHz, g = 2.0042 / 2.0035
  p.field.theta = 0.0;
  std::vector<double> fields;
  for (const Resonance& r : resonance_fields(p, kFreq)) {
    if (r.upper - r.lower == 1 && r.transition_moment > 1e-6) fields.push_back(r.field_mt);
  }
  if (fields.size() != 2) return {false, "expected two allowed lines, got " + std::to_string(fields.size())};
  const double split = std::abs(fields[1] - fields[0]);
  return {std::abs(split - 67.0) <= 0.5, fmt("split %.3f mT (target 67.0 +- 0.5)", split)};
}

// ---------------------------------------------------------------- 2
Verdict mixing_matrix_checks() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
  double worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const Eigen::Matrix3d m = mixing_matrix(u(rng));
    worst = std::max({worst, (m.rowwise().sum().array() - 1.0).abs().maxCoeff(),
                      (m.colwise().sum().array() - 1.0).abs().maxCoeff()});
  }
  const Eigen::Matrix3d tet = mixing_matrix(std::acos(-1.0 / 3.0));
  const Eigen::RowVector3d want(1.0 / 9, 4.0 / 9, 4.0 / 9);
  double row_err = (tet.row(0) - want).cwiseAbs().maxCoeff();
  return {worst <= 1e-12 && row_err <= 1e-12,
          fmt("max stochastic deviation %.2e, row(-1) error %.2e", worst, row_err)};
}

// ---------------------------------------------------------------- 3
Verdict analytic_numeric() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double side = std::pow(10.0, -4.0 * u(rng));
    const ZeroFieldOverlaps zf{u(rng) + 0.01, side, side};
    const double theta = std::numbers::pi * u(rng);
    const OrbachParams p = orbach(1e5 * (u(rng) + 0.01), 20.0 + 40.0 * u(rng), 0.0);  // mu = 1
    const RelaxationTimes a = relaxation_times_analytic(zf, theta, p);
    const RelaxationTimes n = relaxation_times_numeric(singlet_rate_matrix(mixed_overlaps(zf, theta), p));
    worst = std::max({worst, rel(n.rate_a, a.rate_a), rel(n.rate_b, a.rate_b)});
  }
  return {worst <= 1e-10, fmt("max relative deviation %.2e over 1000 draws", worst)};
}

// ---------------------------------------------------------------- 4
Verdict approximation_regime() {
  double worst = 0.0;
  for (double ratio : {100.0, 125.0, 300.0, 1000.0}) {
    const ZeroFieldOverlaps zf = ZeroFieldOverlaps::from_ratio(ratio);
    for (double deg = 10.0; deg <= 80.0 + 1e-9; deg += 0.5) {
      const OrbachParams p = orbach(1.0, 30.0, 0.0);
      const RelaxationTimes exact = relaxation_times_analytic(zf, deg_to_rad(deg), p);
      const RelaxationTimes approx = relaxation_times_large_imbalance(zf, deg_to_rad(deg), p);
      worst = std::max({worst, rel(approx.rate_a, exact.rate_a), rel(approx.rate_b, exact.rate_b)});
    }
  }
  return {worst <= 0.02, fmt("max deviation %.3f%% for ratios 100..1000, 10..80 deg", 100.0 * worst)};
}

// ---------------------------------------------------------------- 5
Verdict anisotropy() {
  const OrbachParams p = orbach(6.42e5);
  const RelaxationTimes near = relaxation_times_numeric(singlet(kRatio, deg_to_rad(0.8), p));
  const RelaxationTimes off = relaxation_times_numeric(singlet(kRatio, deg_to_rad(5.8), p));
  const double factor = off.rate_a / near.rate_a;
  const RelaxationTimes axis = relaxation_times_numeric(singlet(kRatio, 0.0, p));
  const RelaxationTimes perp = relaxation_times_numeric(singlet(kRatio, std::numbers::pi / 2, p));
  const double span = axis.fast().seconds() / perp.fast().seconds();
  return {factor >= 30.0 && factor <= 300.0 && span > 1e3,
          fmt("(a) T1_a rate factor 0.8->5.8 deg %.1f in [30,300]; (b) span %.0f > 1000", factor, span)};
}

// ---------------------------------------------------------------- 6
Verdict t1_t2() {
  const double r = t1_t2_ratio(ZeroFieldOverlaps::from_ratio(kRatio), 0.0);
  return {r >= 2000.0 && r <= 8000.0, fmt("T1_a/T2 at 0 deg = %.0f (within 2x of 4000)", r)};
}

// ---------------------------------------------------------------- 7
Verdict arrhenius_recovery() {
  struct Curve {
    const char* label;
    double t_sat, prefactor, uncertainty;
  };
  const Curve curves[3] = {{"T1 [111]", 46.0, 2.10e3, 0.28e3},
                           {"T1 [-11-1]", 46.0, 378e3, 33e3},
                           {"T2", 0.48e-3, 1260e3, 152e3}};
  int passes = 0;
  double worst_ea = 0.0;
  for (int seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<ArrheniusDataset> sets;
    for (const Curve& c : curves) {
      ArrheniusDataset d;
      d.label = c.label;
      for (double t = 5.0; t <= 60.0 + 1e-9; t += 2.5) {
        const double clean = arrhenius_time(c.t_sat, c.prefactor, kEa, t);
        d.points.push_back({t, clean * (1.0 + noise(rng)), 0.0});
      }
      sets.push_back(d);
    }
    const ArrheniusFit fit = fit_arrhenius(sets, true);
    const double ea_err = std::abs(fit.joint.value("E_a") - kEa);
    worst_ea = std::max(worst_ea, ea_err);
    bool ok = fit.joint.converged && ea_err <= 1.5;
    for (const Curve& c : curves) {
      ok = ok && std::abs(fit.joint.value(std::string("A[") + c.label + "]") - c.prefactor) <= c.uncertainty;
    }
    passes += ok ? 1 : 0;
  }
  return {passes >= 95, fmt("%.0f/100 trials within tolerance (worst |dE_a| %.2f meV)", passes, worst_ea)};
}

// ---------------------------------------------------------------- 8
Verdict instantaneous_diffusion() {
  const double sd = 0.95e-3, id = 0.319e-3;
  std::vector<EchoRatePoint> pts;
  for (double deg : {30.0, 60.0, 90.0, 120.0, 150.0, 180.0}) {
    pts.push_back({deg_to_rad(deg), 1.0 / hahn_echo_t2(sd, id, deg_to_rad(deg))});
  }
  const FitResult f = fit_instantaneous_diffusion(pts);
  const double err = std::max(rel(f.value("T2_SD"), sd), rel(f.value("T2_ID"), id));
  const double t2 = hahn_echo_t2(sd, id, std::numbers::pi);
  const double harmonic = 1.0 / (1.0 / sd + 1.0 / id);
  const bool rounds = std::abs(t2 * 1e3 - 0.239) < 5e-4;
  return {err <= 1e-10 && rel(t2, harmonic) <= 1e-6 && rounds,
          fmt("recovery error %.1e; T2(pi) = %.4f ms, harmonic sum %.4f ms", err, t2 * 1e3, harmonic * 1e3)};
}

// ---------------------------------------------------------------- 9
double null_space_residual(const RateMatrix3& r, double mu) {
  const Eigen::Vector3d pi = boltzmann_populations(mu);
  const double scale = std::max(r.m.cwiseAbs().maxCoeff(), 1e-300);
  return (r.m * pi).cwiseAbs().maxCoeff() / scale;
}

Verdict conservation() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double col = 0.0, stat = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double temp = 5.0 + 55.0 * u(rng);
    const double freq = 1.0 + 39.0 * u(rng);
    const double mu = boltzmann_factor(freq, temp);
    const RateMatrix3 s = singlet(std::pow(10.0, 3.0 * u(rng)), std::numbers::pi * u(rng),
                                  OrbachParams{1e6, kEa, temp, freq});
    TripletModelParams t;
    t.ground.field = FieldConfig{kFieldMt, std::numbers::pi * u(rng), 2.0 * std::numbers::pi * u(rng),
                                 SiteLabel::unspecified};
    t.excited_zfs = ZfsTensor{0.1 + 10.0 * u(rng), u(rng), std::numbers::pi * u(rng), 0.0};
    t.orbach = OrbachParams{1e6, kEa, temp, freq};
    const RateMatrix3 tr = triplet_rate_matrix(t).rates;
    for (const RateMatrix3* r : {&s, &tr}) {
      const double scale = std::max(r->m.cwiseAbs().maxCoeff(), 1e-300);
      col = std::max(col, r->m.colwise().sum().cwiseAbs().maxCoeff() / scale);
      stat = std::max(stat, null_space_residual(*r, mu));
    }
  }
  return {col <= 1e-12 && stat <= 1e-12,
          fmt("max relative column sum %.1e, max null-space residual %.1e", col, stat)};
}

// ---------------------------------------------------------------- 10
Verdict triplet_limits() {
  double identity_err = 0.0, same_rate = 0.0, coaxial = 0.0;
  for (double deg : {0.0, 17.0, 54.7, 90.0}) {
    TripletModelParams p;
    p.ground.field = FieldConfig{kFieldMt, deg_to_rad(deg), 0.3, SiteLabel::unspecified};
    p.excited_zfs = p.ground.zfs;
    p.orbach = orbach(1e6);
    identity_err = std::max(identity_err, (triplet_overlap_table(p).table - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    same_rate = std::max(same_rate, triplet_rate_matrix(p).rates.m.cwiseAbs().maxCoeff());
  }
  for (double d_e : {1.0, 5.0, 7.0}) {
    TripletModelParams p;
    p.ground.field = FieldConfig{kFieldMt, 0.0, 0.0, SiteLabel::unspecified};
    p.excited_zfs = ZfsTensor::axial(d_e);
    p.orbach = orbach(1.0);
    const Eigen::Matrix3d m = triplet_rate_matrix(p).rates.m;
    coaxial = std::max(coaxial, (m - Eigen::Matrix3d(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff());
  }
  return {identity_err == 0.0 && same_rate == 0.0 && coaxial <= 1e-15,
          fmt("identity error %.1e, rates with equal tensors %.1e, coaxial flip rates %.1e",
              identity_err, same_rate, coaxial)};
}

// ---------------------------------------------------------------- 11
Verdict bath_limits() {
  double limit_err = std::abs(pair_echo_decay(2e4, 700.0, 0.0) - 1.0);
  for (double tau : {1e-6, 1e-4, 1e-3, 1e-2}) {
    limit_err = std::max(limit_err, std::abs(pair_echo_decay(0.0, 700.0, tau) - 1.0));
    limit_err = std::max(limit_err, std::abs(pair_echo_decay(2e4, 0.0, tau) - 1.0));
  }

  const double act = orbach(1.0).activation();  // exp(-E_a / kT) at 30 K
  const double flip = 1.0 / 46.0 + 378e3 * act;  // off-axis T1 at 30 K
  PairBathParams p;
  p.flip_rate = flip;
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double n : {1e15, 5e15, 1e16, 5e16, 1e17, 5e17, 1e18}) {
    p.density = n;
    const double t2 = bath_t2(p).t2.seconds();
    decreasing = decreasing && t2 < prev;
    prev = t2;
  }

  p.density = 5e16;
  const double with_bath = bath_t2(p).t2.seconds();
  const double change = 1.0 / with_bath - 1.0 / p.t2_sd_background;
  const double orbach_rate = 1260e3 * act;
  const double share = change / orbach_rate;
  return {limit_err <= 1e-12 && decreasing && share < 0.1,
          fmt("limits %.1e; bath adds %.0f /s vs Orbach T2 rate %.0f /s (share %.3f, need < 0.1)",
              limit_err, change, orbach_rate, share) +
              (decreasing ? "; T2 decreasing in density" : "; T2 NOT decreasing in density")};
}

// ---------------------------------------------------------------- 12
Verdict dynamics_consistency() {
  const double theta = deg_to_rad(85.0);
  const RateMatrix3 r = singlet(kRatio, theta, orbach(6.42e5));
  const RelaxationTimes rt = relaxation_times_numeric(r);
  const double fast = rt.fast().seconds(), slow = rt.slow().seconds();
  const DecayCurve clean =
      inversion_recovery_curve(r, Transition::zero_plus, 0.115, log_spaced(fast * 1e-2, slow * 20.0, 400));
  int passes = 0;
  double worst = 0.0;
  for (int seed = 1; seed <= 20; ++seed) {
    const FitResult f = fit_biexponential(synthesize_noisy(clean, 0.02, seed));
    if (!f.has("tau2")) continue;
    const double e = std::max(rel(f.value("tau1"), fast), rel(f.value("tau2"), slow));
    worst = std::max(worst, e);
    passes += e <= 0.05 ? 1 : 0;
  }
  return {passes >= 19, fmt("85 deg, tau ratio %.1f: %.0f/20 noisy fits within 5%% (worst %.1f%%)",
                            slow / fast, passes, 100.0 * worst)};
}

// ---------------------------------------------------------------- 13
Verdict triplet_t2_shape() {
  const double c_singlet = 6.42e5;
  std::vector<double> thetas;
  std::vector<RelaxationTimes> reference;
  std::vector<double> ref_t2;
  for (double deg = 5.0; deg <= 85.0 + 1e-9; deg += 5.0) {
    const double th = deg_to_rad(deg);
    thetas.push_back(th);
    reference.push_back(relaxation_times_numeric(singlet(kRatio, th, orbach(c_singlet))));
    ref_t2.push_back(t2_singlet(ZeroFieldOverlaps::from_ratio(kRatio), th, orbach(c_singlet), 0.0, 0.0).seconds());
  }
  std::vector<double> dist;
  std::string detail = "log-distance to singlet T2:";
  for (double d_e : {1.0, 3.0, 5.0, 7.0}) {
    TripletModelParams p;
    p.ground.field = FieldConfig{kFieldMt, 0.0, 0.0, SiteLabel::unspecified};
    p.excited_zfs = ZfsTensor::axial(d_e);
    p.orbach = orbach(1.0);
    p.orbach.rate_coefficient_c = calibrate_triplet_rate(p, thetas, reference);
    double sum = 0.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      p.ground.field.theta = thetas[k];
      const RelaxTime t2 = triplet_t2_model(p, Transition::zero_plus, TripletT2Model{});
      const double d = std::log(t2.seconds()) - std::log(ref_t2[k]);
      sum += d * d;
    }
    dist.push_back(sum);
    detail += fmt(" D_e=%.0f: %.2f", d_e, sum);
  }
  const bool ok = std::max(dist[2], dist[3]) < std::min(dist[0], dist[1]);
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"ESR positions", esr_positions},
      {"mixing matrix", mixing_matrix_checks},
      {"analytic vs numeric rates", analytic_numeric},
      {"large-imbalance approximation", approximation_regime},
      {"anisotropy magnitude", anisotropy},
      {"T1/T2 ratio", t1_t2},
      {"Arrhenius recovery", arrhenius_recovery},
      {"instantaneous diffusion", instantaneous_diffusion},
      {"rate-matrix conservation", conservation},
      {"triplet limits", triplet_limits},
      {"bath model", bath_limits},
      {"dynamics consistency", dynamics_consistency},
      {"triplet T2 shape", triplet_t2_shape},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
