#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cvarsafe {

/// Finite real-valued distribution. Atoms are kept sorted ascending by value
/// with duplicate values merged, so CDF scans are a single pass.
class ProbabilityMassFunction {
 public:
  struct Atom {
    double value;
    double prob;
  };

  /// Builds a pmf from unsorted atoms. Duplicate values are merged and the
  /// probabilities renormalized. Throws std::invalid_argument on an empty
  /// list, a negative or non-finite probability, or a total mass farther
  /// than 1e-9 from one.
  static ProbabilityMassFunction from_atoms(std::vector<Atom> atoms);
  static ProbabilityMassFunction point_mass(double value);

  /// Empirical law of a sample (each draw weighted 1/n).
  static ProbabilityMassFunction empirical(std::span<const double> samples);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double min_value() const { return atoms_.front().value; }
  double max_value() const { return atoms_.back().value; }
  std::vector<double> values() const;

  double mean() const;
  double variance() const;
  double skewness() const;

  /// Same law translated by `offset`.
  ProbabilityMassFunction shifted(double offset) const;

  /// Inverse-CDF draw: the smallest atom whose cumulative mass exceeds
  /// `uniform` (expected in [0, 1)).
  double sample(double uniform) const;

 private:
  explicit ProbabilityMassFunction(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}
  std::vector<Atom> atoms_;
};

}  // namespace cvarsafe
