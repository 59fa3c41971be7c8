#include "sivrelax/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sivrelax/constants.hpp"

namespace sivrelax {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

Eigen::Matrix3d zfs_cartesian(const ZfsTensor& zfs) {
  Eigen::Matrix3d molecular = Eigen::Matrix3d::Zero();
  molecular(0, 0) = -zfs.axial_d / 3.0 + zfs.rhombic_e;
  molecular(1, 1) = -zfs.axial_d / 3.0 - zfs.rhombic_e;
  molecular(2, 2) = 2.0 * zfs.axial_d / 3.0;
  const Eigen::Matrix3d rot =
      (Eigen::AngleAxisd(zfs.axis_azimuth, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(zfs.axis_polar, Eigen::Vector3d::UnitY()))
          .toRotationMatrix();
  return rot * molecular * rot.transpose();
}

double level_gap(const SpinSystemParams& p, double field_mt, int i, int j, double target) {
  SpinSystemParams q = p;
  q.field.magnitude = field_mt;
  const EigenSystem3 es = eigensolve(build_hamiltonian(q));
  return es.energies[j] - es.energies[i] - target;
}

}  // namespace

std::string to_string(SiteLabel site) {
  switch (site) {
    case SiteLabel::k111: return "[111]";
    case SiteLabel::kBarBar1: return "[-1-11]";
    case SiteLabel::k1BarBar: return "[1-1-1]";
    case SiteLabel::kBar1Bar: return "[-11-1]";
    case SiteLabel::unspecified: break;
  }
  return "unspecified";
}

void validate(const SpinSystemParams& p) {
  auto in_g_range = [](double g) { return g >= 1.9 && g <= 2.1; };
  if (!in_g_range(p.g.g_parallel) || !in_g_range(p.g.g_perpendicular)) {
    throw std::invalid_argument("g tensor components must lie in [1.9, 2.1]");
  }
  if (!(p.field.magnitude >= 0.0)) {
    throw std::invalid_argument("field magnitude must be >= 0");
  }
  if (!(p.field.theta >= 0.0 && p.field.theta <= std::numbers::pi + 1e-12)) {
    throw std::invalid_argument("field angle theta must lie in [0, pi]");
  }
  if (!std::isfinite(p.zfs.axial_d) || !std::isfinite(p.zfs.rhombic_e)) {
    throw std::invalid_argument("ZFS parameters must be finite");
  }
}

const std::array<Matrix3c, 3>& spin1_operators() {
  static const std::array<Matrix3c, 3> ops = [] {
    using C = std::complex<double>;
    const C r(kInvSqrt2, 0.0);
    const C ir(0.0, kInvSqrt2);
    Matrix3c sx = Matrix3c::Zero();
    Matrix3c sy = Matrix3c::Zero();
    Matrix3c sz = Matrix3c::Zero();
    // S+ |-1> = sqrt2 |0>, S+ |0> = sqrt2 |+1>
    sx(0, 1) = sx(1, 0) = sx(1, 2) = sx(2, 1) = r;
    // S_y = (S+ - S-) / 2i
    sy(1, 0) = -ir;
    sy(0, 1) = ir;
    sy(2, 1) = -ir;
    sy(1, 2) = ir;
    sz(0, 0) = -1.0;
    sz(2, 2) = 1.0;
    return std::array<Matrix3c, 3>{sx, sy, sz};
  }();
  return ops;
}

Eigen::Vector3d field_direction(const FieldConfig& field) {
  return {std::sin(field.theta) * std::cos(field.phi), std::sin(field.theta) * std::sin(field.phi),
          std::cos(field.theta)};
}

Matrix3c build_hamiltonian(const SpinSystemParams& params) {
  validate(params);
  const auto& s = spin1_operators();
  const Eigen::Matrix3d d = zfs_cartesian(params.zfs);

  const Eigen::Vector3d b = field_direction(params.field) * params.field.magnitude;
  const Eigen::Vector3d gb(params.g.g_perpendicular * b.x(), params.g.g_perpendicular * b.y(),
                           params.g.g_parallel * b.z());
  const double gamma = kConstants.bohr_magneton_over_h;

  Matrix3c h = Matrix3c::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (d(i, j) != 0.0) h += d(i, j) * (s[i] * s[j]);
    }
    h += gamma * gb(i) * s[i];
  }
  // Remove rounding asymmetry so downstream Hermitian checks see an exact one.
  return 0.5 * (h + h.adjoint());
}

EigenSystem3 eigensolve(const Matrix3c& h, double degeneracy_tol) {
  const double scale = std::max(1.0, h.norm());
  if ((h - h.adjoint()).norm() > 1e-10 * scale) {
    throw std::invalid_argument("eigensolve: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix3c> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigensolve: decomposition failed");
  }
  EigenSystem3 out;
  for (int k = 0; k < 3; ++k) out.energies[k] = solver.eigenvalues()(k);
  out.states = solver.eigenvectors();
  out.degenerate = (out.energies[1] - out.energies[0] < degeneracy_tol) ||
                   (out.energies[2] - out.energies[1] < degeneracy_tol);
  return out;
}

double effective_g(const GTensor& g, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return std::sqrt(g.g_parallel * g.g_parallel * c * c + g.g_perpendicular * g.g_perpendicular * s * s);
}

Matrix3c transverse_spin_operator(const FieldConfig& field) {
  const auto& s = spin1_operators();
  const double ct = std::cos(field.theta);
  const double st = std::sin(field.theta);
  const Eigen::Vector3d e1(ct * std::cos(field.phi), ct * std::sin(field.phi), -st);
  return e1.x() * s[0] + e1.y() * s[1] + e1.z() * s[2];
}

std::string transition_name(int lower, int upper) {
  if (lower == 0 && upper == 1) return "-1<->0";
  if (lower == 1 && upper == 2) return "0<->+1";
  if (lower == 0 && upper == 2) return "-1<->+1";
  throw std::invalid_argument("transition_name: bad level pair");
}

std::vector<Resonance> resonance_fields(const SpinSystemParams& params, double microwave_ghz,
                                        const FieldWindow& window) {
  if (!(microwave_ghz > 0.0)) {
    throw std::invalid_argument("resonance_fields: microwave frequency must be positive");
  }
  if (!(window.max_mt > window.min_mt) || window.min_mt < 0.0 || window.scan_points < 2) {
    throw std::invalid_argument("resonance_fields: invalid field window");
  }

  constexpr std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {1, 2}, {0, 2}}};
  const int n = window.scan_points;
  const double step = (window.max_mt - window.min_mt) / (n - 1);

  std::vector<std::array<double, 3>> gaps(n);
  for (int k = 0; k < n; ++k) {
    SpinSystemParams q = params;
    q.field.magnitude = window.min_mt + k * step;
    const EigenSystem3 es = eigensolve(build_hamiltonian(q));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      gaps[k][p] = es.energies[pairs[p].second] - es.energies[pairs[p].first] - microwave_ghz;
    }
  }

  std::vector<Resonance> out;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    for (int k = 0; k + 1 < n; ++k) {
      const double g0 = gaps[k][p];
      const double g1 = gaps[k + 1][p];
      double root;
      if (g0 == 0.0) {
        root = window.min_mt + k * step;
      } else if (g0 * g1 < 0.0) {
        double lo = window.min_mt + k * step;
        double hi = lo + step;
        double flo = g0;
        for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = level_gap(params, mid, i, j, microwave_ghz);
          if (fm == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        root = 0.5 * (lo + hi);
      } else {
        continue;
      }

      SpinSystemParams q = params;
      q.field.magnitude = root;
      const EigenSystem3 es = eigensolve(build_hamiltonian(q));
      const Matrix3c sx = transverse_spin_operator(q.field);
      const std::complex<double> m = es.states.col(i).dot(sx * es.states.col(j));
      out.push_back(Resonance{i, j, root, std::norm(m), es.degenerate});
    }
    // last grid point exactly on resonance
    if (gaps[n - 1][p] == 0.0) {
      SpinSystemParams q = params;
      q.field.magnitude = window.max_mt;
      const EigenSystem3 es = eigensolve(build_hamiltonian(q));
      const Matrix3c sx = transverse_spin_operator(q.field);
      const std::complex<double> m = es.states.col(i).dot(sx * es.states.col(j));
      out.push_back(Resonance{i, j, window.max_mt, std::norm(m), es.degenerate});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Resonance& a, const Resonance& b) { return a.field_mt < b.field_mt; });
  return out;
}

const std::array<Eigen::Vector3d, 4>& site_axes_111() {
  static const std::array<Eigen::Vector3d, 4> axes = [] {
    std::array<Eigen::Vector3d, 4> a{Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(-1, -1, 1),
                                     Eigen::Vector3d(1, -1, -1), Eigen::Vector3d(-1, 1, -1)};
    for (auto& v : a) v.normalize();
    return a;
  }();
  return axes;
}

Eigen::Vector3d misaligned_field_111(double misalignment) {
  const Eigen::Vector3d u = Eigen::Vector3d(1, 1, 1).normalized();
  const Eigen::Vector3d axis = Eigen::Vector3d(1, 0, -1).normalized();
  // axis is perpendicular to u, so the rotation stays in the (u, axis x u) plane
  return (std::cos(misalignment) * u - std::sin(misalignment) * axis.cross(u)).normalized();
}

std::vector<SpectrumLine> esr_spectrum_111(const SpinSystemParams& base, double microwave_ghz,
                                           double misalignment, const FieldWindow& window) {
  const Eigen::Vector3d b = misaligned_field_111(misalignment);
  constexpr std::array<SiteLabel, 4> labels{SiteLabel::k111, SiteLabel::kBarBar1,
                                            SiteLabel::k1BarBar, SiteLabel::kBar1Bar};
  std::vector<SpectrumLine> lines;
  for (std::size_t s = 0; s < 4; ++s) {
    const double c = std::clamp(b.dot(site_axes_111()[s]), -1.0, 1.0);
    SpinSystemParams p = base;
    p.field.theta = std::acos(c);
    p.field.phi = 0.0;  // site tensors are axial
    p.field.site = labels[s];
    for (const Resonance& r : resonance_fields(p, microwave_ghz, window)) {
      lines.push_back(SpectrumLine{labels[s], p.field.theta, r, r.transition_moment});
    }
  }
  std::sort(lines.begin(), lines.end(), [](const SpectrumLine& a, const SpectrumLine& b2) {
    return a.resonance.field_mt < b2.resonance.field_mt;
  });
  return lines;
}

std::vector<LineGroup> group_lines(const std::vector<SpectrumLine>& lines, double tol_mt) {
  std::vector<LineGroup> groups;
  for (const SpectrumLine& line : lines) {
    const std::string name = transition_name(line.resonance.lower, line.resonance.upper);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const LineGroup& g) {
      return g.transition == name && std::abs(g.field_mt - line.resonance.field_mt) <= tol_mt;
    });
    if (it == groups.end()) {
      groups.push_back(LineGroup{line.resonance.field_mt, line.weight, 1, name});
    } else {
      it->field_mt = (it->field_mt * it->sites + line.resonance.field_mt) / (it->sites + 1);
      it->weight += line.weight;
      it->sites += 1;
    }
  }
  std::sort(groups.begin(), groups.end(),
            [](const LineGroup& a, const LineGroup& b) { return a.field_mt < b.field_mt; });
  return groups;
}

}  // namespace sivrelax
