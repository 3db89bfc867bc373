#ifndef YTM_JSON_IO_HPP
#define YTM_JSON_IO_HPP

#include <optional>
#include <string>

#include "ytm/expfam.hpp"
#include "ytm/indep.hpp"
#include "ytm/model.hpp"
#include "ytm/report.hpp"

namespace ytm {

// Model file schema: {"d": int, "dY": int, "W": [[[float]]], "P0": [float]?}
// with W[y][x][xp], or the factorized form {"d", "dY", "Wmat": [[float]],
// "V": [[float]], "P0"?} with Wmat[x][xp] and V[y][xp].  Exactly one of
// "W" and ("Wmat", "V") must be present.
struct LoadedModel {
  YTransitionModel model;
  std::optional<Vector> p0;
  std::optional<IndepModel> indep;  // set when the factorized form was read
  std::string digest;               // fingerprint of the file bytes
};

// With strict = false the numeric invariants are not enforced, so an
// ill-formed model can still be loaded and then diagnosed via validate().
LoadedModel load_model_file(const std::string& path,
                            const Settings& settings = Settings::defaults(),
                            bool strict = true);
LoadedModel parse_model_json(const std::string& text,
                             const Settings& settings = Settings::defaults(),
                             bool strict = true);

// Generator file schema: {"gens": [ {"dense": [[[float]]]} |
// {"sparse": [{"y": int, "x": int, "xp": int, "v": float}]} ]} using the
// same (y, x, xp) convention as models.
GeneratorSet load_generators_file(const std::string& path,
                                  const YTransitionModel& base,
                                  const Settings& settings = Settings::defaults());
GeneratorSet parse_generators_json(const std::string& text,
                                   const YTransitionModel& base,
                                   const Settings& settings = Settings::defaults());

// Settings overlay: a flat JSON object whose keys match the Settings
// fields; missing keys keep their defaults.
Settings load_settings_file(const std::string& path);
Settings parse_settings_json(const std::string& text);

// Report-tree renderings of the core types.
report::Node to_node(const Matrix& m);
report::Node to_node(const Vector& v);
report::Node to_node(const YTransitionModel& model);
report::Node to_node(const IndepModel& model);
report::Node to_node(const GeneratorSet& gens);
report::Node to_node(const IndepGeneratorSet& gens);
report::Node to_node(const Settings& settings);

// Canonical digest of a model (independent of file formatting).
std::string model_digest(const YTransitionModel& model);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace ytm

#endif
