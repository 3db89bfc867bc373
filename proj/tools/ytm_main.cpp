// Command-line front end: every analysis as a batch subcommand emitting a
// machine-readable JSON report on stdout.
//
// Exit codes: 0 success, 2 validation error, 3 numerical indeterminacy,
// 4 internal cross-check failure.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ytm/equivalence.hpp"
#include "ytm/indep.hpp"
#include "ytm/json_io.hpp"
#include "ytm/tangent.hpp"

namespace {

using ytm::Matrix;
using ytm::Settings;
using ytm::Vector;
using ytm::report::Node;

struct CommonOpts {
  std::string settings_path;
  bool pretty = false;
};

Settings resolve_settings(const CommonOpts& common) {
  if (common.settings_path.empty()) return Settings::defaults();
  return ytm::load_settings_file(common.settings_path);
}

Node report_header(const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& digests,
                   const Settings& settings) {
  Node n = Node::object();
  n.set("command", command);
  Node in = Node::object();
  for (const auto& [k, v] : digests) in.set(k, v);
  n.set("inputs", std::move(in));
  n.set("settings", ytm::to_node(settings));
  return n;
}

void emit(const Node& n, const CommonOpts& common) {
  std::cout << n.dump(common.pretty);
  if (!common.pretty) std::cout << "\n";
}

Vector parse_dist(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
  Vector v(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    v(static_cast<int>(i)) = vals[i];
  return v;
}

// Initial-law choice shared by several subcommands: an explicit --init list
// wins, then --stationary, then the file's P0, then the stationary law.
Vector choose_initial(const ytm::LoadedModel& loaded, const std::string& init,
                      bool force_stationary, const Settings& settings) {
  if (!init.empty()) {
    Vector v = parse_dist(init);
    ytm::require_distribution(v, settings);
    if (v.size() != loaded.model.d)
      throw ytm::ValidationError("--init has wrong length");
    return v;
  }
  if (!force_stationary && loaded.p0) return *loaded.p0;
  return ytm::stationary(loaded.model, settings);
}

Node subspace_dims(const ytm::ObservabilityProfile& obs) {
  Node dims = Node::array();
  for (const auto& k : obs.kernels) dims.push(k.dim());
  return dims;
}

int run_validate(const std::string& path, const CommonOpts& common) {
  Settings settings = resolve_settings(common);
  auto loaded = ytm::load_model_file(path, settings, /*strict=*/false);
  auto rep = ytm::validate(loaded.model, settings);
  Node n = report_header("validate", {{"model", loaded.digest}}, settings);
  n.set("valid", rep.ok());
  Node issues = Node::array();
  for (const auto& issue : rep.issues) {
    Node item = Node::object();
    item.set("what", issue.what);
    if (issue.y >= 0) item.set("y", issue.y);
    if (issue.x >= 0) item.set("x", issue.x);
    if (issue.xp >= 0) item.set("xp", issue.xp);
    issues.push(std::move(item));
  }
  n.set("issues", std::move(issues));
  if (loaded.p0) {
    auto prep = ytm::validate_distribution(*loaded.p0, settings);
    n.set("p0_valid", prep.ok());
    if (!prep.ok()) n.set("p0_issue", prep.summary());
    if (!prep.ok()) rep.issues.push_back({prep.summary()});
  }
  emit(n, common);
  return rep.ok() ? 0 : 2;
}

int run_stats(const std::string& path, const std::string& init,
              bool force_stationary, const CommonOpts& common) {
  Settings settings = resolve_settings(common);
  auto loaded = ytm::load_model_file(path, settings);
  Vector p = choose_initial(loaded, init, force_stationary, settings);
  auto obs = ytm::observability_profile(loaded.model, settings);
  auto reach = ytm::reachability_profile(loaded.model, p, settings);
  auto flags = ytm::check_genericity(loaded.model, p, settings);
  Node n = report_header("stats", {{"model", loaded.digest}}, settings);
  n.set("initial_law", ytm::to_node(p));
  n.set("k_W", obs.k_W);
  n.set("d_W", obs.d_W);
  n.set("kernel_dims", subspace_dims(obs));
  n.set("k_PW", reach.k_PW);
  n.set("d_PW", reach.d_PW);
  Node rdims = Node::array();
  for (const auto& s : reach.spaces) rdims.push(s.dim());
  n.set("reachable_dims", std::move(rdims));
  n.set("E1", flags.E1);
  n.set("E2", flags.E2);
  emit(n, common);
  return 0;
}

int run_equiv(const std::string& path_a, const std::string& path_b, double tol,
              const std::string& init_a, const std::string& init_b,
              const CommonOpts& common) {
  Settings settings = resolve_settings(common);
  auto a = ytm::load_model_file(path_a, settings);
  auto b = ytm::load_model_file(path_b, settings);
  Vector pa = choose_initial(a, init_a, false, settings);
  Vector pb = choose_initial(b, init_b, false, settings);
  auto cert = ytm::are_equivalent(a.model, pa, b.model, pb, tol, settings);
  Node n = report_header("equiv",
                         {{"model_a", a.digest}, {"model_b", b.digest}},
                         settings);
  n.set("tol", tol);
  n.set("equivalent", cert.equivalent);
  n.set("k_used", cert.k_used);
  n.set("tv_distance", cert.tv_distance);
  if (cert.intertwiner) {
    n.set("intertwiner", ytm::to_node(*cert.intertwiner));
    n.set("reachable_basis_a", ytm::to_node(*cert.basis_a));
    n.set("reachable_basis_b", ytm::to_node(*cert.basis_b));
  }
  emit(n, common);
  return 0;
}

int run_tangent(const std::string& path, const std::string& init,
                bool force_stationary, const std::string& gens_out,
                const CommonOpts& common) {
  Settings settings = resolve_settings(common);
  auto loaded = ytm::load_model_file(path, settings);
  Vector p = choose_initial(loaded, init, force_stationary, settings);
  auto rep = ytm::tangent_report(loaded.model, p, settings);
  Node n = report_header("tangent", {{"model", loaded.digest}}, settings);
  n.set("initial_law", ytm::to_node(p));
  n.set("dim_l1", rep.dim_l1);
  n.set("dim_l2", rep.dim_l2);
  n.set("dim_lP", rep.dim_lP);
  n.set("dim_l2P", rep.dim_l2P);
  n.set("dim_sum_asymptotic", rep.dim_sum_asymptotic);
  n.set("dim_sum_fixed", rep.dim_sum_fixed);
  n.set("local_dim_fixed", rep.local_dim_fixed);
  n.set("local_dim_asymptotic", rep.local_dim_asymptotic);
  n.set("generic_dim", rep.generic_dim);
  n.set("observable_count", rep.observable_count);
  n.set("singular", rep.singular);
  n.set("rank_cut_sv_above", rep.sv_above_cut);
  n.set("rank_cut_sv_below", rep.sv_below_cut);
  Node warnings = Node::array();
  std::optional<ytm::GeneratorSet> gens;
  std::string construction;
  try {
    gens = ytm::build_generators(loaded.model, p, true, settings);
    construction = "generic";
  } catch (const ytm::ValidationError& e) {
    if (loaded.model.d == 2) {
      try {
        gens = ytm::two_state_singular_generators(loaded.model, settings);
        construction = "two_state_singular";
      } catch (const ytm::ValidationError& e2) {
        warnings.push(std::string(e.what()));
        warnings.push(std::string(e2.what()));
      }
    } else {
      warnings.push(std::string(e.what()));
    }
  }
  n.set("generator_construction", construction.empty() ? Node(nullptr)
                                                       : Node(construction));
  if (gens) n.set("generator_count", gens->size());
  n.set("warnings", std::move(warnings));
  if (gens && !gens_out.empty())
    ytm::write_file(gens_out, ytm::to_node(*gens).dump(false) + "\n");
  emit(n, common);
  return 0;
}

int run_indep(const std::string& path, const std::string& gens_out,
              const CommonOpts& common) {
  Settings settings = resolve_settings(common);
  auto loaded = ytm::load_model_file(path, settings);
  Node n = report_header("indep", {{"model", loaded.digest}}, settings);
  auto dec = ytm::decompose(loaded.model, settings);
  Node d = Node::object();
  d.set("factorizable", dec.ok());
  d.set("simple_real_spectra", dec.diag.simple_real_spectra);
  d.set("common_eigenvectors", dec.diag.common_eigenvectors);
  d.set("nonnegative_conjugate", dec.diag.nonnegative_conjugate);
  d.set("indeterminate", dec.diag.indeterminate);
  if (!dec.diag.detail.empty()) d.set("detail", dec.diag.detail);
  if (dec.ok()) {
    d.set("factors", ytm::to_node(*dec.factors));
    d.set("transform", ytm::to_node(*dec.transform));
  }
  n.set("decompose", std::move(d));

  if (loaded.indep) {
    const auto& im = *loaded.indep;
    Vector p = loaded.p0 ? *loaded.p0
                         : ytm::stationary(loaded.model, settings);
    auto ident = ytm::check_identifiability(im, p, settings);
    Node idn = Node::object();
    idn.set("v_columns_independent", ident.v_columns_independent);
    idn.set("k_model", ident.k_model);
    idn.set("kernel_zero", ident.kernel_zero);
    idn.set("p_full_support", ident.p_full_support);
    idn.set("permutation_sweep_done", ident.permutation_sweep_done);
    Node perms = Node::array();
    for (const auto& perm : ident.equivalent_permutations) {
      Node one = Node::array();
      for (int v : perm) one.push(v);
      perms.push(std::move(one));
    }
    idn.set("equivalent_permutations", std::move(perms));
    n.set("identifiability", std::move(idn));

    try {
      auto ert = ytm::ert_generators(im, settings);
      n.set("ert_generator_count", ert.size());
      if (!gens_out.empty())
        ytm::write_file(gens_out, ytm::to_node(ert).dump(false) + "\n");
    } catch (const ytm::ValidationError& e) {
      n.set("ert_generator_count", Node(nullptr));
      n.set("ert_warning", std::string(e.what()));
    }

    if (im.W.rows() == 2) {
      auto two = ytm::two_hidden_state_report(im, p, settings);
      Node t = Node::object();
      const char* label = "non_singular";
      switch (two.classification) {
        case ytm::TwoStateCase::kNonSingular: label = "non_singular"; break;
        case ytm::TwoStateCase::kNoninvertibleW:
          label = "singular_noninvertible_W";
          break;
        case ytm::TwoStateCase::kEqualEmission:
          label = "singular_equal_emission";
          break;
        case ytm::TwoStateCase::kEqualEmissionUniformW:
          label = "singular_equal_emission_noninvertible_W";
          break;
      }
      t.set("classification", label);
      t.set("equal_emission_columns", two.equal_emission_columns);
      t.set("w_invertible", two.w_invertible);
      t.set("p_stationary", two.p_stationary);
      t.set("dim_l1I", two.dim_l1I);
      t.set("dim_l2I", two.dim_l2I);
      t.set("dim_lPI", two.dim_lPI);
      t.set("dim_l2PI", two.dim_l2PI);
      t.set("quotient_fixed", two.quotient_fixed);
      t.set("quotient_asymptotic", two.quotient_asymptotic);
      Node in_stratum = Node::array();
      for (int i : two.in_stratum) in_stratum.push(i);
      Node transversal = Node::array();
      for (int i : two.transversal) transversal.push(i);
      t.set("in_stratum_generators", std::move(in_stratum));
      t.set("transversal_generators", std::move(transversal));
      n.set("two_hidden_state", std::move(t));
    }
  }
  emit(n, common);
  return 0;
}

int run_expfam(const std::string& path, const std::string& gens_path,
               const std::string& theta_csv, bool grad,
               const std::string& div_csv, const CommonOpts& common) {
  Settings settings = resolve_settings(common);
  auto loaded = ytm::load_model_file(path, settings);
  std::string gtext = ytm::read_file(gens_path);
  auto gens = ytm::parse_generators_json(gtext, loaded.model, settings);
  Vector theta = parse_dist(theta_csv);
  if (theta.size() != gens.size())
    throw ytm::ValidationError("--theta length does not match the generators");
  auto pt = ytm::at(loaded.model, gens, theta, settings);
  Node n = report_header(
      "expfam",
      {{"model", loaded.digest}, {"generators", ytm::report::fnv1a_hex(gtext)}},
      settings);
  n.set("theta", ytm::to_node(theta));
  n.set("lambda", pt.lambda);
  n.set("phi", pt.phi);
  n.set("pbar", ytm::to_node(pt.pbar));
  n.set("model_theta", ytm::to_node(pt.model));
  if (grad)
    n.set("grad_phi",
          ytm::to_node(ytm::potential_gradient(loaded.model, gens, theta,
                                               settings)));
  if (!div_csv.empty()) {
    Vector theta2 = parse_dist(div_csv);
    if (theta2.size() != gens.size())
      throw ytm::ValidationError("--div length does not match the generators");
    n.set("divergence",
          ytm::divergence(loaded.model, gens, theta, theta2, settings));
    n.set("theta_prime", ytm::to_node(theta2));
  }
  emit(n, common);
  return 0;
}

int run_sample(const std::string& path, std::int64_t count, int window,
               std::uint64_t seed, const std::string& out_path,
               const CommonOpts& common) {
  Settings settings = resolve_settings(common);
  auto loaded = ytm::load_model_file(path, settings);
  Vector p = choose_initial(loaded, "", false, settings);
  auto traj = ytm::sample(loaded.model, p, count, seed, settings);
  std::string digest = ytm::model_digest(loaded.model);
  std::ostringstream body;
  body << "# seed=" << seed << " model=" << digest << "\n";
  for (const auto& [x, y] : traj) body << x << " " << y << "\n";
  ytm::write_file(out_path, body.str());

  Node n = report_header("sample", {{"model", loaded.digest}}, settings);
  n.set("n", count);
  n.set("seed", static_cast<std::int64_t>(seed));
  n.set("model_digest", digest);
  n.set("output", out_path);
  Node tvs = Node::array();
  for (int k = 1; k <= window; ++k) {
    Vector law = ytm::exact_output_law(loaded.model, p, k, settings);
    Vector emp = Vector::Zero(law.size());
    std::int64_t windows = 0;
    // Non-overlapping windows keep the draws independent.
    for (std::int64_t i = 0; i + k <= static_cast<std::int64_t>(traj.size());
         i += k) {
      std::int64_t idx = 0;
      for (int j = 0; j < k; ++j)
        idx += static_cast<std::int64_t>(traj[static_cast<std::size_t>(i + j)].second) *
               static_cast<std::int64_t>(std::pow(loaded.model.dY, j));
      emp(idx) += 1.0;
      ++windows;
    }
    if (windows > 0) emp /= static_cast<double>(windows);
    Node entry = Node::object();
    entry.set("k", k);
    entry.set("tv", 0.5 * (law - emp).cwiseAbs().sum());
    tvs.push(std::move(entry));
  }
  n.set("empirical_vs_exact", std::move(tvs));
  emit(n, common);
  return 0;
}

int run_oracle(const std::string& path, int window, const std::string& init,
               bool force_stationary, const CommonOpts& common) {
  Settings settings = resolve_settings(common);
  auto loaded = ytm::load_model_file(path, settings);
  Vector p = choose_initial(loaded, init, force_stationary, settings);
  Vector law = ytm::exact_output_law(loaded.model, p, window, settings);
  Node n = report_header("oracle", {{"model", loaded.digest}}, settings);
  n.set("k", window);
  n.set("initial_law", ytm::to_node(p));
  n.set("index_order",
        "row r encodes (y_k,...,y_1) with y_1 the least significant digit");
  n.set("law", ytm::to_node(law));
  emit(n, common);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis of output-valued transition matrices"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  CommonOpts common;
  app.add_option("--settings", common.settings_path,
                 "JSON file overriding all numeric tolerances");
  app.add_flag("--pretty", common.pretty, "indented report output");

  std::string path, path_b, init, init_b, gens_out, gens_path, theta_csv,
      div_csv, out_path = "sample.txt";
  bool force_stationary = false, grad = false;
  double tol = Settings::defaults().equiv_tol;
  std::int64_t count = 100000;
  int window = 2;
  std::uint64_t seed = 1;

  auto* validate_cmd = app.add_subcommand("validate", "model file validation");
  validate_cmd->add_option("model", path)->required();

  auto* stats = app.add_subcommand(
      "stats", "observability, reachability and genericity flags");
  stats->add_option("model", path)->required();
  stats->add_option("--init", init, "initial law as comma-separated masses");
  stats->add_flag("--stationary", force_stationary);

  auto* equiv = app.add_subcommand("equiv", "equivalence verdict and certificate");
  equiv->add_option("model_a", path)->required();
  equiv->add_option("model_b", path_b)->required();
  equiv->add_option("--tol", tol, "total-variation tolerance");
  equiv->add_option("--init-a", init, "initial law for the first model");
  equiv->add_option("--init-b", init_b, "initial law for the second model");

  auto* tangent =
      app.add_subcommand("tangent", "tangent dimensions and singularity");
  tangent->add_option("model", path)->required();
  tangent->add_option("--init", init);
  tangent->add_flag("--stationary", force_stationary);
  tangent->add_option("--gens-out", gens_out,
                      "write the constructed generator set to this file");

  auto* indep = app.add_subcommand(
      "indep", "factorization test and factorized-model analyses");
  indep->add_option("model", path)->required();
  indep->add_option("--gens-out", gens_out,
                    "write the delta-pattern generators to this file");

  auto* expfam = app.add_subcommand("expfam", "exponential-family evaluation");
  expfam->add_option("model", path)->required();
  expfam->add_option("generators", gens_path)->required();
  expfam->add_option("--theta", theta_csv)->required();
  expfam->add_flag("--grad", grad, "include the potential gradient");
  expfam->add_option("--div", div_csv,
                     "second parameter point for the divergence");

  auto* sample_cmd =
      app.add_subcommand("sample", "trajectory sampling with an oracle check");
  sample_cmd->add_option("model", path)->required();
  sample_cmd->add_option("-n", count, "number of joint steps");
  sample_cmd->add_option("-k", window, "largest window for the check");
  sample_cmd->add_option("--seed", seed);
  sample_cmd->add_option("-o,--out", out_path, "sample file path");

  auto* oracle = app.add_subcommand("oracle", "exact output-law dump");
  oracle->add_option("model", path)->required();
  oracle->add_option("-k", window)->required();
  oracle->add_option("--init", init);
  oracle->add_flag("--stationary", force_stationary);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return run_validate(path, common);
    if (stats->parsed()) return run_stats(path, init, force_stationary, common);
    if (equiv->parsed())
      return run_equiv(path, path_b, tol, init, init_b, common);
    if (tangent->parsed())
      return run_tangent(path, init, force_stationary, gens_out, common);
    if (indep->parsed()) return run_indep(path, gens_out, common);
    if (expfam->parsed())
      return run_expfam(path, gens_path, theta_csv, grad, div_csv, common);
    if (sample_cmd->parsed())
      return run_sample(path, count, window, seed, out_path, common);
    if (oracle->parsed())
      return run_oracle(path, window, init, force_stationary, common);
  } catch (const ytm::InternalCheckError& e) {
    std::cerr << "internal cross-check failure: " << e.what() << "\n";
    std::cout << "{\"error\":\"" << e.what() << "\",\"exit_code\":4}\n";
    return 4;
  } catch (const ytm::IndeterminateError& e) {
    std::cerr << "numerical indeterminacy: " << e.what() << "\n";
    std::cout << "{\"error\":\"" << e.what() << "\",\"exit_code\":3}\n";
    return 3;
  } catch (const ytm::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    std::cout << "{\"error\":\"" << e.what() << "\",\"exit_code\":2}\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
