#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kron/ensemble.hpp"
#include "kron/parallel.hpp"

namespace kron {

using Pattern = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// z_kl = 1 iff k = l or sum_a (|(L_a)_lk|^2 + |(L_a)_kl|^2) > 1e-14.
Pattern support_pattern(const StructureEnsemble& ens);

/// Smallest p <= cap with Z^p entrywise positive (cap < 0 means n^2).
std::optional<int> primitivity_exponent(const Pattern& Z, int cap = -1);

struct FlatnessReport {
  Pattern Z;
  std::optional<int> exponent;
  /// Smallest ratio found; an estimate of the best constant, never a certificate.
  double c_estimate = 0.0;
  bool certified = false;
  int samples_used = 0;
  /// Local minimum reached by each restart, in restart order.
  std::vector<double> minima_trace;
};

struct FlatnessOptions {
  int budget = 200;  ///< number of restarts
  std::uint64_t seed = 1;
  int max_sweeps = 200;
  Execution execution = Execution::parallel;
};

/// Minimizes sum_a(|u* L_a v|^2 + |u* L_a* v|^2) / sum_kl z_kl |v_k|^2 |u_l|^2
/// over unit vectors by alternating generalized eigenproblems with restarts.
FlatnessReport estimate_flatness_constant(const StructureEnsemble& ens, const Pattern& Z,
                                          const FlatnessOptions& opts = {});

/// Ratio above for one pair (u, v); +infinity when the denominator vanishes.
double flatness_ratio(const StructureEnsemble& ens, const Pattern& Z, const Vector& u, const Vector& v);

}  // namespace kron
