#ifndef YTM_INDEP_HPP
#define YTM_INDEP_HPP

#include <optional>
#include <string>

#include "ytm/equivalence.hpp"
#include "ytm/expfam.hpp"
#include "ytm/tangent.hpp"

namespace ytm {

// Tangent directions of the factorized model are pairs (B, C): B is the
// d x d m-representation block of the hidden transition part, C stacks the
// vectors C_y as rows of a dY x d matrix.  Flattened order: B row-major,
// then C row-major after an offset of d^2.
struct IndepTangentPair {
  Matrix B;  // d x d
  Matrix C;  // dY x d
};

Vector flatten_bc(const IndepTangentPair& t);
IndepTangentPair unflatten_bc(const Vector& v, int d, int dY);

// ((W,V)^*(B,C))_y = B D(V_y) + W D(C_y), as a model-shaped family.
Generator star_map(const IndepModel& m, const IndepTangentPair& t,
                   const Settings& settings = Settings::defaults());

// Subspaces of the (B, C) space (ambient dimension d^2 + d*dY).
Subspace l1I_space(const IndepModel& m,
                   const Settings& settings = Settings::defaults());
Subspace l2I_space(const IndepModel& m,
                   const Settings& settings = Settings::defaults());
Subspace lPI_space(const IndepModel& m, const Vector& p,
                   const Settings& settings = Settings::defaults());
Subspace l2PI_space(const IndepModel& m, const Vector& p,
                    const Settings& settings = Settings::defaults());

// Diagnostics of the three factorization conditions.
struct FactorizationDiagnostics {
  bool simple_real_spectra = false;   // G2-1
  bool common_eigenvectors = false;   // G2-2
  bool nonnegative_conjugate = false; // G2-3
  bool indeterminate = false;         // an eigenvalue gap fell in the band
  std::string detail;
};

struct DecomposeResult {
  std::optional<IndepModel> factors;
  std::optional<Matrix> transform;  // T with T W_y = W D(V_y) T
  FactorizationDiagnostics diag;
  bool ok() const { return factors.has_value(); }
};

// Tests whether the model is equivalent to a factorized one via the
// spectra of U_y = |W|^-1 W_y; requires invertible |W|.
DecomposeResult decompose(const YTransitionModel& model,
                          const Settings& settings = Settings::defaults());

struct IdentifiabilityReport {
  bool v_columns_independent = false;
  int k_model = 0;
  bool kernel_zero = false;
  bool p_full_support = false;
  bool permutation_sweep_done = false;
  // Permutations whose relabeled model is equivalent to the original.
  std::vector<std::vector<int>> equivalent_permutations;
};

IdentifiabilityReport check_identifiability(
    const IndepModel& m, const Vector& p,
    const Settings& settings = Settings::defaults());

// Full-model generators of the factorized family in (g_a, g_b) split form.
struct IndepGenerator {
  Matrix ga;  // d x d, function of (x, x')
  Matrix gb;  // dY x d, function of (y, x')
};

struct IndepGeneratorSet {
  std::vector<IndepGenerator> gens;
  int size() const { return static_cast<int>(gens.size()); }
};

// Embedding (g_a, g_b) -> g(y, x, x') = g_a(x, x') + g_b(y, x').
Generator embed(const IndepGenerator& g, int dY);
GeneratorSet embed(const IndepModel& m, const IndepGeneratorSet& gens,
                   const Settings& settings = Settings::defaults());

// The delta-pattern basis of the full factorized model, of size
// d (d + dY - 2); the leading dY - 1 members are functions of y alone.
IndepGeneratorSet ert_generators(const IndepModel& m,
                                 const Settings& settings = Settings::defaults());

struct IndepExpFamilyPoint {
  Vector theta;
  double lambda = 1.0;
  double phi = 0.0;
  Vector pbar;
  IndepModel model;        // (W_theta, V_theta)
  ExpFamilyPoint embedded; // the same point evaluated in the general family
};

// Factorized exponential family; checks the product identity against the
// general-family evaluation of the embedded generators.
IndepExpFamilyPoint indep_exp_family(
    const IndepModel& m, const IndepGeneratorSet& gens, const Vector& theta,
    const Settings& settings = Settings::defaults());

enum class TwoStateCase {
  kNonSingular,            // invertible W, emission columns differ
  kNoninvertibleW,         // rank-deficient W, emission columns differ
  kEqualEmission,          // equal emission columns, invertible W
  kEqualEmissionUniformW,  // both degeneracies
};

struct TwoStateReport {
  TwoStateCase classification = TwoStateCase::kNonSingular;
  bool equal_emission_columns = false;
  bool w_invertible = false;
  bool p_stationary = false;
  int dim_l1I = 0, dim_l2I = 0, dim_lPI = 0, dim_l2PI = 0;
  int quotient_fixed = 0;
  int quotient_asymptotic = 0;
  // Index split of the ert generator list into directions moving inside the
  // singular stratum versus transversally out of it (empty if non-singular).
  std::vector<int> in_stratum;
  std::vector<int> transversal;
};

TwoStateReport two_hidden_state_report(
    const IndepModel& m, const Vector& p,
    const Settings& settings = Settings::defaults());

}  // namespace ytm

#endif
