#pragma once

// The block random matrix model
//   H = K0 (x) I_N + sum_a ( L_a (x) X_a + L_a* (x) X_a* )
// with i.i.d. X_a entries of variance 1/N.

#include <cstdint>
#include <string>
#include <vector>

#include "kron/algebra.hpp"
#include "kron/errors.hpp"

namespace kron {

enum class EntryLaw { gaussian, rademacher, uniform };

std::string to_string(EntryLaw law);
EntryLaw entry_law_from_string(const std::string& name);

struct StructureEnsemble {
  int n = 1;
  int beta = 2;
  Matrix K0;
  std::vector<Matrix> L;
  EntryLaw entry_law = EntryLaw::gaussian;

  int d() const { return static_cast<int>(L.size()); }
};

struct Violation {
  std::string field;  ///< path such as "K0" or "L[2]"
  std::string message;
};

/// All constraint violations; empty when the ensemble is valid.
std::vector<Violation> find_violations(const StructureEnsemble& ens);

/// Thrown by validate(); input kind for shape problems, domain kind otherwise.
class ValidationError : public Error {
 public:
  ValidationError(ErrorKind kind, std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Returns the ensemble unchanged or throws ValidationError.
const StructureEnsemble& validate(const StructureEnsemble& ens);

namespace presets {
/// n = 1, L = 1/sqrt(2): the Wigner matrix with semicircle density on [-2, 2].
StructureEnsemble semicircle(int beta = 2);
/// n = 4, d = 7 example with zero blocks; 3-flat with the pattern of support_pattern().
StructureEnsemble four_block(int beta = 2);
/// d = 0: the deterministic matrix K0 (x) I.
StructureEnsemble deterministic(const Matrix& K0, int beta = 2);
/// n = 2 real ensemble with a non-symmetric structure matrix and a nonzero K0.
StructureEnsemble two_block(int beta = 1);
}  // namespace presets

/// Parses the JSON ensemble format; throws InputError on malformed text.
/// The result is not validated.
StructureEnsemble parse_ensemble(const std::string& text);
StructureEnsemble load_ensemble(const std::string& path);
/// Canonical JSON text (17 significant digits), stable across runs.
std::string ensemble_to_json(const StructureEnsemble& ens);
/// FNV-1a hash of the canonical JSON text, as 16 hex digits.
std::string ensemble_hash(const StructureEnsemble& ens);

/// Upper bound on the spectral support: max of 2 + |K0| + 2 sum |L| and the
/// norm bound |K0| + 2 sqrt(2 sum |L|^2).
double support_radius(const StructureEnsemble& ens);

}  // namespace kron
