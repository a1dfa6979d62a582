#include "cvarsafe/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cvarsafe {

namespace {
constexpr double kMassTolerance = 1e-9;
}

ProbabilityMassFunction ProbabilityMassFunction::from_atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("pmf: no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value)) throw std::invalid_argument("pmf: non-finite atom value");
    if (!std::isfinite(a.prob) || a.prob < 0.0)
      throw std::invalid_argument("pmf: probability must be finite and >= 0, got " +
                                  std::to_string(a.prob));
    total += a.prob;
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw std::invalid_argument("pmf: probabilities sum to " + std::to_string(total));

  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& l, const Atom& r) { return l.value < r.value; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (!merged.empty() && merged.back().value == a.value)
      merged.back().prob += a.prob;
    else
      merged.push_back(a);
  }
  double merged_total = 0.0;
  for (const auto& a : merged) merged_total += a.prob;
  for (auto& a : merged) a.prob /= merged_total;
  return ProbabilityMassFunction(std::move(merged));
}

ProbabilityMassFunction ProbabilityMassFunction::point_mass(double value) {
  return from_atoms({{value, 1.0}});
}

ProbabilityMassFunction ProbabilityMassFunction::empirical(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("pmf: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<Atom> atoms;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    atoms.push_back({sorted[i], static_cast<double>(j - i) / n});
    i = j;
  }
  return from_atoms(std::move(atoms));
}

std::vector<double> ProbabilityMassFunction::values() const {
  std::vector<double> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.value);
  return out;
}

double ProbabilityMassFunction::mean() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.prob * a.value;
  return m;
}

double ProbabilityMassFunction::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& a : atoms_) v += a.prob * (a.value - m) * (a.value - m);
  return v;
}

double ProbabilityMassFunction::skewness() const {
  const double m = mean();
  const double v = variance();
  if (v == 0.0) return 0.0;
  double third = 0.0;
  for (const auto& a : atoms_) third += a.prob * std::pow(a.value - m, 3);
  return third / std::pow(v, 1.5);
}

ProbabilityMassFunction ProbabilityMassFunction::shifted(double offset) const {
  std::vector<Atom> out(atoms_);
  for (auto& a : out) a.value += offset;
  return from_atoms(std::move(out));
}

double ProbabilityMassFunction::sample(double uniform) const {
  double cumulative = 0.0;
  for (const auto& a : atoms_) {
    cumulative += a.prob;
    if (uniform < cumulative) return a.value;
  }
  return atoms_.back().value;
}

}  // namespace cvarsafe
