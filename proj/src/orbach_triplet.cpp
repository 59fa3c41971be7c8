#include "sivrelax/orbach_triplet.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace sivrelax {

namespace {

using Groups = std::vector<std::vector<int>>;

Groups degenerate_groups(const EigenSystem3& es, double tol) {
  Groups groups{{0}};
  for (int k = 1; k < 3; ++k) {
    if (es.energies[k] - es.energies[k - 1] < tol) {
      groups.back().push_back(k);
    } else {
      groups.push_back({k});
    }
  }
  return groups;
}

bool has_degeneracy(const Groups& g) { return g.size() < 3; }

Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) z(i, j) = {gauss(rng), gauss(rng)};
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

Matrix3c random_block_unitary(const Groups& groups, std::mt19937_64& rng) {
  Matrix3c u = Matrix3c::Identity();
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    const Eigen::MatrixXcd block = haar_unitary(static_cast<int>(g.size()), rng);
    for (std::size_t a = 0; a < g.size(); ++a) {
      for (std::size_t b = 0; b < g.size(); ++b) u(g[a], g[b]) = block(a, b);
    }
  }
  return u;
}

void fill_from_amplitudes(const Matrix3c& amp, Eigen::Matrix3d& table, Eigen::Matrix3d& coupling) {
  table = amp.cwiseAbs2();
  for (int m = 0; m < 3; ++m) {
    for (int mp = 0; mp < 3; ++mp) {
      coupling(m, mp) = table.row(m).dot(table.row(mp));
    }
  }
}

bool same_tensor(const ZfsTensor& a, const ZfsTensor& b) {
  return a.axial_d == b.axial_d && a.rhombic_e == b.rhombic_e && a.axis_polar == b.axis_polar &&
         a.axis_azimuth == b.axis_azimuth;
}

std::pair<int, int> levels_of(Transition t) {
  return t == Transition::zero_plus ? std::pair{1, 2} : std::pair{0, 1};
}

}  // namespace

TripletOverlapTable triplet_overlap_table(const TripletModelParams& p, DegeneracyPolicy policy) {
  TripletOverlapTable out;
  out.ground = eigensolve(build_hamiltonian(p.ground), kTripletDegeneracyTolGhz);
  if (same_tensor(p.ground.zfs, p.excited_zfs)) {
    // Identical Hamiltonians share every eigenbasis, degenerate or not.
    out.excited = out.ground;
    return out;
  }
  out.excited = eigensolve(build_hamiltonian(p.excited()), kTripletDegeneracyTolGhz);
  out.amplitudes = out.ground.states.adjoint() * out.excited.states;
  fill_from_amplitudes(out.amplitudes, out.table, out.coupling);

  const Groups g_groups = degenerate_groups(out.ground, kTripletDegeneracyTolGhz);
  const Groups e_groups = degenerate_groups(out.excited, kTripletDegeneracyTolGhz);
  out.basis_sensitive = has_degeneracy(g_groups) || has_degeneracy(e_groups);
  if (!out.basis_sensitive || policy == DegeneracyPolicy::raw) return out;

  // Fixed seed so repeated evaluations agree exactly.
  std::mt19937_64 rng(0x51a7c0de5eedULL);
  Eigen::Matrix3d table_sum = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d coupling_sum = Eigen::Matrix3d::Zero();
  for (int s = 0; s < kDegenerateSamples; ++s) {
    const Matrix3c vg = out.ground.states * random_block_unitary(g_groups, rng);
    const Matrix3c ve = out.excited.states * random_block_unitary(e_groups, rng);
    Eigen::Matrix3d table, coupling;
    fill_from_amplitudes(vg.adjoint() * ve, table, coupling);
    table_sum += table;
    coupling_sum += coupling;
  }
  out.table = table_sum / kDegenerateSamples;
  out.coupling = coupling_sum / kDegenerateSamples;
  return out;
}

TripletRates triplet_rate_matrix(const TripletModelParams& p, DegeneracyPolicy policy,
                                 BalanceConvention conv) {
  validate(p.orbach);
  const TripletOverlapTable ov = triplet_overlap_table(p, policy);
  const double mu = boltzmann_factor(p.orbach.zeeman_freq, p.orbach.temperature);
  const double scale = p.orbach.rate_coefficient_c * p.orbach.activation();
  const double exponent_per_step = conv == BalanceConvention::symmetric ? 0.5 : 1.0;

  Eigen::Matrix3d transfer = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      transfer(i, j) = scale * ov.coupling(i, j) * std::pow(mu, exponent_per_step * (i - j));
    }
  }
  return TripletRates{RateMatrix3::from_transfer_rates(transfer), ov.basis_sensitive};
}

RelaxationTimes triplet_relaxation_times(const TripletModelParams& p, DegeneracyPolicy policy) {
  return relaxation_times_numeric(triplet_rate_matrix(p, policy).rates);
}

RelaxTime triplet_t2_model(const TripletModelParams& p, Transition transition,
                           const TripletT2Model& model) {
  validate(p.orbach);
  if (model.kind == TripletT2Model::Kind::partial_coherence && !(model.excited_lifetime >= 0.0)) {
    throw std::invalid_argument("triplet_t2_model: excited lifetime must be >= 0");
  }
  const TripletOverlapTable ov = triplet_overlap_table(p);
  const auto [m, mp] = levels_of(transition);
  const double ground_split = ov.ground.energies[m] - ov.ground.energies[mp];

  double retained = 0.0;
  for (int n = 0; n < 3; ++n) {
    for (int np = 0; np < 3; ++np) {
      const double weight = ov.table(m, n) * ov.table(mp, np);
      if (weight == 0.0) continue;
      const double mismatch_ghz =
          (ov.excited.energies[n] - ov.excited.energies[np]) - ground_split;
      if (model.kind == TripletT2Model::Kind::full_dephasing) {
        if (std::abs(mismatch_ghz) <= kDegeneracyTolGhz) retained += weight;
      } else {
        const double wt = 2.0 * std::numbers::pi * 1e9 * mismatch_ghz * model.excited_lifetime;
        retained += weight / (1.0 + wt * wt);
      }
    }
  }
  const double rate =
      p.orbach.rate_coefficient_c * p.orbach.activation() * std::max(0.0, 1.0 - retained);
  return RelaxTime::from_rate(rate);
}

double calibrate_triplet_rate(const TripletModelParams& p, std::span<const double> thetas,
                              std::span<const RelaxationTimes> reference) {
  if (thetas.size() != reference.size()) {
    throw std::invalid_argument("calibrate_triplet_rate: size mismatch");
  }
  TripletModelParams unit = p;
  unit.orbach.rate_coefficient_c = 1.0;
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    unit.ground.field.theta = thetas[k];
    const RelaxationTimes model = triplet_relaxation_times(unit);
    const std::pair<RelaxTime, RelaxTime> pairs[2] = {{model.t1_a, reference[k].t1_a},
                                                      {model.t1_b, reference[k].t1_b}};
    for (const auto& [mod, ref] : pairs) {
      if (!mod.bounded() || !ref.bounded()) continue;
      // T_model(C) = T_unit / C
      sum += std::log(mod.seconds()) - std::log(ref.seconds());
      ++count;
    }
  }
  if (count == 0) throw NumericError("calibrate_triplet_rate: no bounded points to match");
  return std::exp(sum / count);
}

}  // namespace sivrelax
