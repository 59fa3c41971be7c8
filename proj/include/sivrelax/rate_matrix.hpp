#pragma once

// Population-transfer generators for the three ground sublevels and their
// relaxation spectrum.

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sivrelax {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A decay time that may be infinite. Never encoded as a sentinel number.
class RelaxTime {
 public:
  static RelaxTime unbounded() { return RelaxTime{}; }
  static RelaxTime from_seconds(double s) { return RelaxTime{s}; }
  /// Rates <= 0 give an unbounded time.
  static RelaxTime from_rate(double rate) {
    return rate > 0.0 ? RelaxTime{1.0 / rate} : RelaxTime{};
  }

  bool bounded() const { return seconds_.has_value(); }
  double seconds() const {
    if (!seconds_) throw std::logic_error("RelaxTime: time is unbounded");
    return *seconds_;
  }
  double rate() const { return seconds_ ? 1.0 / *seconds_ : 0.0; }
  std::string str() const;

 private:
  RelaxTime() = default;
  explicit RelaxTime(double s) : seconds_(s) {}
  std::optional<double> seconds_;
};

/// dP/dt = R P with P = (P_-1, P_0, P_+1). R(m, m') is the rate from m' to m.
struct RateMatrix3 {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();

  /// Builds a generator from off-diagonal transfer rates; the diagonal is set
  /// so that every column sums to zero.
  static RateMatrix3 from_transfer_rates(const Eigen::Matrix3d& off_diagonal);
};

/// Largest |column sum| relative to the largest |entry|, and the most negative
/// off-diagonal entry.
struct GeneratorCheck {
  double column_sum_residual = 0.0;
  double min_off_diagonal = 0.0;
};
GeneratorCheck check_generator(const RateMatrix3& r);

/// Normalized stationary vector from the diagonal cofactors (matrix-tree
/// theorem). Empty when the chain is reducible and the stationary state is
/// not unique.
std::optional<Eigen::Vector3d> stationary_distribution(const RateMatrix3& r);

/// The two non-stationary relaxation modes of a generator.
///
/// Mode "a" is the one whose eigenvector is closest to the symmetric pattern
/// (1, -2, 1); mode "b" is closest to the antisymmetric (1, 0, -1). For a
/// generator symmetric under m -> -m these are exact, which matches the
/// labeling of the closed-form singlet times.
struct RelaxationTimes {
  RelaxTime t1_a = RelaxTime::unbounded();
  RelaxTime t1_b = RelaxTime::unbounded();
  double rate_a = 0.0;  // 1/s, = -eigenvalue
  double rate_b = 0.0;

  RelaxTime fast() const { return rate_a >= rate_b ? t1_a : t1_b; }
  RelaxTime slow() const { return rate_a >= rate_b ? t1_b : t1_a; }
};

/// Eigen-rates of R on the subspace orthogonal to (1, 1, 1), which R maps into
/// itself because its columns sum to zero. Throws NumericError when the
/// restricted 2x2 block has complex or defective eigenvalues.
RelaxationTimes relaxation_times_numeric(const RateMatrix3& r);

}  // namespace sivrelax
