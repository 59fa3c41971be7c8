#pragma once

// S = 1 spin Hamiltonian for a trigonal defect: zero-field splitting plus
// anisotropic Zeeman term, its eigen-decomposition, and field-swept ESR line
// positions for the four <111> site orientations.
//
// Basis order everywhere is |m_s = -1>, |0>, |+1> quantized along the defect
// symmetry axis (the z axis of the "defect frame"). The g tensor is axial
// about that axis. The ZFS tensor axis may be tilted away from it, which the
// excited-state model uses; the ground state keeps it on the defect axis.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sivrelax {

using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;

struct ZfsTensor {
  double axial_d = 0.0;       // GHz
  double rhombic_e = 0.0;     // GHz
  double axis_polar = 0.0;    // rad, tensor z axis relative to the defect axis
  double axis_azimuth = 0.0;  // rad

  static ZfsTensor siv0_ground() { return ZfsTensor{0.94, 0.0, 0.0, 0.0}; }
  static ZfsTensor axial(double d_ghz) { return ZfsTensor{d_ghz, 0.0, 0.0, 0.0}; }
};

struct GTensor {
  double g_parallel = 2.0042;
  double g_perpendicular = 2.0035;

  static GTensor siv0() { return GTensor{2.0042, 2.0035}; }
  static GTensor isotropic(double g) { return GTensor{g, g}; }
};

enum class SiteLabel { k111, kBarBar1, k1BarBar, kBar1Bar, unspecified };

std::string to_string(SiteLabel site);

struct FieldConfig {
  double magnitude = 0.0;  // mT
  double theta = 0.0;      // rad, angle between B and the defect axis
  double phi = 0.0;        // rad, azimuth of B in the defect frame
  SiteLabel site = SiteLabel::unspecified;
};

struct SpinSystemParams {
  ZfsTensor zfs = ZfsTensor::siv0_ground();
  GTensor g = GTensor::siv0();
  FieldConfig field;
};

/// Throws std::invalid_argument if any type invariant is violated.
void validate(const SpinSystemParams& params);

struct EigenSystem3 {
  std::array<double, 3> energies{};  // GHz, ascending
  Matrix3c states;                   // column k is the eigenvector of energies[k]
  bool degenerate = false;           // some gap below the degeneracy tolerance
};

inline constexpr double kDegeneracyTolGhz = 1e-9;

/// Spin matrices S_x, S_y, S_z for S = 1 in the (-1, 0, +1) basis.
const std::array<Matrix3c, 3>& spin1_operators();

/// H = S.D.S + (muB/h) S.g.B in GHz.
Matrix3c build_hamiltonian(const SpinSystemParams& params);

/// Hermitian 3x3 eigen-decomposition. Rejects inputs that are not Hermitian
/// to 1e-10 relative.
EigenSystem3 eigensolve(const Matrix3c& h, double degeneracy_tol = kDegeneracyTolGhz);

double effective_g(const GTensor& g, double theta);

/// Unit vector of B in the defect frame.
Eigen::Vector3d field_direction(const FieldConfig& field);

/// Spin component along the lab x axis: perpendicular to B, in the plane of B
/// and the defect axis. This is the microwave-field direction used for
/// transition moments.
Matrix3c transverse_spin_operator(const FieldConfig& field);

struct FieldWindow {
  double min_mt = 250.0;
  double max_mt = 450.0;
  int scan_points = 2000;
};

struct Resonance {
  int lower = 0;  // level index, ascending energy
  int upper = 0;
  double field_mt = 0.0;
  double transition_moment = 0.0;  // |<lower|S_x|upper>|^2
  bool degenerate = false;
};

/// "-1<->0", "0<->+1" or "-1<->+1", using high-field level ordering.
std::string transition_name(int lower, int upper);

/// Field magnitudes inside the window at which some level pair is resonant
/// with the microwave frequency. params.field.magnitude is ignored. Every
/// sign change of E_j - E_i - f on the scan grid is refined by bisection.
std::vector<Resonance> resonance_fields(const SpinSystemParams& params, double microwave_ghz,
                                        const FieldWindow& window = {});

struct SpectrumLine {
  SiteLabel site = SiteLabel::unspecified;
  double theta = 0.0;
  Resonance resonance;
  double weight = 0.0;
};

/// Four <111> site axes in the cubic crystal frame, unit length, in the order
/// [111], [-1-11], [1-1-1], [-11-1].
const std::array<Eigen::Vector3d, 4>& site_axes_111();

/// Field direction for B nominally along [111], rotated by `misalignment`
/// about [10-1]. Positive misalignment brings B toward the [-11-1] axis.
Eigen::Vector3d misaligned_field_111(double misalignment);

/// Stick spectrum over all four sites with B near [111]. Each site
/// contributes weight 1 times its transition moment.
std::vector<SpectrumLine> esr_spectrum_111(const SpinSystemParams& base, double microwave_ghz,
                                           double misalignment, const FieldWindow& window = {});

struct LineGroup {
  double field_mt = 0.0;
  double weight = 0.0;
  int sites = 0;
  std::string transition;
};

/// Merges lines of the same transition closer than tol_mt.
std::vector<LineGroup> group_lines(const std::vector<SpectrumLine>& lines, double tol_mt = 1e-3);

}  // namespace sivrelax
