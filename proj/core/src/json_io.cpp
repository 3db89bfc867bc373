#include "ytm/json_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ytm {

namespace {

using nlohmann::json;

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw ValidationError(std::string(what) + ": not valid JSON");
  return j;
}

Matrix read_matrix(const json& j, int rows, int cols, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw ValidationError(std::string(what) + ": expected " +
                          std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw ValidationError(std::string(what) + ": expected " +
                            std::to_string(cols) + " columns");
    for (int c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number())
        throw ValidationError(std::string(what) + ": non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << contents;
}

LoadedModel parse_model_json(const std::string& text, const Settings& settings,
                             bool strict) {
  json j = parse_or_throw(text, "model file");
  if (!j.is_object()) throw ValidationError("model file: expected an object");
  if (!j.contains("d") || !j.contains("dY"))
    throw ValidationError("model file: missing d or dY");
  int d = j["d"].get<int>();
  int dY = j["dY"].get<int>();
  if (d < 1 || dY < 1)
    throw ValidationError("model file: d and dY must be positive");

  bool has_joint = j.contains("W");
  bool has_factored = j.contains("Wmat") || j.contains("V");
  if (has_joint == has_factored)
    throw ValidationError(
        "model file: exactly one of \"W\" and (\"Wmat\", \"V\") must be "
        "present");

  LoadedModel out;
  out.digest = report::fnv1a_hex(text);
  if (has_joint) {
    const auto& w = j["W"];
    if (!w.is_array() || static_cast<int>(w.size()) != dY)
      throw ValidationError("model file: W must hold dY blocks");
    out.model.d = d;
    out.model.dY = dY;
    for (int y = 0; y < dY; ++y)
      out.model.W.push_back(
          read_matrix(w[static_cast<std::size_t>(y)], d, d, "model file W"));
  } else {
    if (!j.contains("Wmat") || !j.contains("V"))
      throw ValidationError("model file: factorized form needs Wmat and V");
    IndepModel im;
    im.W = read_matrix(j["Wmat"], d, d, "model file Wmat");
    im.V = read_matrix(j["V"], dY, d, "model file V");
    if (strict) {
      auto rep = validate(im, settings);
      if (!rep.ok()) throw ValidationError("model file: " + rep.summary());
    }
    out.indep = im;
    out.model.d = d;
    out.model.dY = dY;
    for (int y = 0; y < dY; ++y)
      out.model.W.push_back(im.W * im.V.row(y).asDiagonal());
  }
  if (strict) {
    auto rep = validate(out.model, settings);
    if (!rep.ok()) throw ValidationError("model file: " + rep.summary());
  }

  if (j.contains("P0")) {
    const auto& p = j["P0"];
    if (!p.is_array() || static_cast<int>(p.size()) != d)
      throw ValidationError("model file: P0 must have length d");
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = p[static_cast<std::size_t>(i)].get<double>();
    if (strict) {
      auto prep = validate_distribution(v, settings);
      if (!prep.ok()) throw ValidationError("model file P0: " + prep.summary());
    }
    out.p0 = v;
  }
  return out;
}

LoadedModel load_model_file(const std::string& path, const Settings& settings,
                            bool strict) {
  return parse_model_json(read_file(path), settings, strict);
}

GeneratorSet parse_generators_json(const std::string& text,
                                   const YTransitionModel& base,
                                   const Settings& settings) {
  json j = parse_or_throw(text, "generator file");
  if (!j.is_object() || !j.contains("gens") || !j["gens"].is_array())
    throw ValidationError("generator file: expected {\"gens\": [...]}");
  std::vector<Generator> gens;
  for (const auto& item : j["gens"]) {
    Generator g(static_cast<std::size_t>(base.dY),
                Matrix::Zero(base.d, base.d));
    if (item.contains("dense")) {
      const auto& dense = item["dense"];
      if (!dense.is_array() || static_cast<int>(dense.size()) != base.dY)
        throw ValidationError("generator file: dense block must hold dY slices");
      for (int y = 0; y < base.dY; ++y)
        g[static_cast<std::size_t>(y)] = read_matrix(
            dense[static_cast<std::size_t>(y)], base.d, base.d,
            "generator file dense");
    } else if (item.contains("sparse")) {
      for (const auto& e : item["sparse"]) {
        int y = e.at("y").get<int>();
        int x = e.at("x").get<int>();
        int xp = e.at("xp").get<int>();
        if (y < 0 || y >= base.dY || x < 0 || x >= base.d || xp < 0 ||
            xp >= base.d)
          throw ValidationError("generator file: sparse index out of range");
        g[static_cast<std::size_t>(y)](x, xp) = e.at("v").get<double>();
      }
    } else {
      throw ValidationError(
          "generator file: each entry needs \"dense\" or \"sparse\"");
    }
    gens.push_back(std::move(g));
  }
  return make_generator_set(base, std::move(gens), settings);
}

GeneratorSet load_generators_file(const std::string& path,
                                  const YTransitionModel& base,
                                  const Settings& settings) {
  return parse_generators_json(read_file(path), base, settings);
}

Settings parse_settings_json(const std::string& text) {
  json j = parse_or_throw(text, "settings file");
  if (!j.is_object()) throw ValidationError("settings file: expected an object");
  Settings s;
  auto get_d = [&](const char* key, double& field) {
    if (j.contains(key)) field = j[key].get<double>();
  };
  auto get_i = [&](const char* key, std::int64_t& field) {
    if (j.contains(key)) field = j[key].get<std::int64_t>();
  };
  get_d("stochastic_tol", s.stochastic_tol);
  get_d("support_tol", s.support_tol);
  get_d("rank_rel_tol", s.rank_rel_tol);
  get_d("residual_tol", s.residual_tol);
  get_d("perron_tol", s.perron_tol);
  get_i("perron_max_iter", s.perron_max_iter);
  get_d("equiv_tol", s.equiv_tol);
  get_d("deriv_zero_tol", s.deriv_zero_tol);
  get_d("deriv_nonzero_tol", s.deriv_nonzero_tol);
  get_d("eig_gap_tol", s.eig_gap_tol);
  get_d("eig_gap_hard", s.eig_gap_hard);
  get_d("imag_tol", s.imag_tol);
  get_d("codiag_tol", s.codiag_tol);
  get_i("enumeration_cap", s.enumeration_cap);
  get_d("exp_guard", s.exp_guard);
  return s;
}

Settings load_settings_file(const std::string& path) {
  return parse_settings_json(read_file(path));
}

report::Node to_node(const Matrix& m) {
  auto rows = report::Node::array();
  for (int r = 0; r < m.rows(); ++r) {
    auto row = report::Node::array();
    for (int c = 0; c < m.cols(); ++c) row.push(m(r, c));
    rows.push(std::move(row));
  }
  return rows;
}

report::Node to_node(const Vector& v) {
  auto arr = report::Node::array();
  for (int i = 0; i < v.size(); ++i) arr.push(v(i));
  return arr;
}

report::Node to_node(const YTransitionModel& model) {
  auto n = report::Node::object();
  n.set("d", model.d);
  n.set("dY", model.dY);
  auto w = report::Node::array();
  for (const auto& wy : model.W) w.push(to_node(wy));
  n.set("W", std::move(w));
  return n;
}

report::Node to_node(const IndepModel& model) {
  auto n = report::Node::object();
  n.set("d", static_cast<int>(model.W.rows()));
  n.set("dY", static_cast<int>(model.V.rows()));
  n.set("Wmat", to_node(model.W));
  n.set("V", to_node(model.V));
  return n;
}

report::Node to_node(const GeneratorSet& gens) {
  auto n = report::Node::object();
  auto arr = report::Node::array();
  for (const auto& g : gens.gens) {
    auto item = report::Node::object();
    auto dense = report::Node::array();
    for (const auto& gy : g) dense.push(to_node(gy));
    item.set("dense", std::move(dense));
    arr.push(std::move(item));
  }
  n.set("gens", std::move(arr));
  return n;
}

report::Node to_node(const IndepGeneratorSet& gens) {
  auto n = report::Node::object();
  auto arr = report::Node::array();
  for (const auto& g : gens.gens) {
    auto item = report::Node::object();
    item.set("ga", to_node(g.ga));
    item.set("gb", to_node(g.gb));
    arr.push(std::move(item));
  }
  n.set("gens", std::move(arr));
  return n;
}

report::Node to_node(const Settings& s) {
  auto n = report::Node::object();
  n.set("stochastic_tol", s.stochastic_tol);
  n.set("support_tol", s.support_tol);
  n.set("rank_rel_tol", s.rank_rel_tol);
  n.set("residual_tol", s.residual_tol);
  n.set("perron_tol", s.perron_tol);
  n.set("perron_max_iter", s.perron_max_iter);
  n.set("equiv_tol", s.equiv_tol);
  n.set("deriv_zero_tol", s.deriv_zero_tol);
  n.set("deriv_nonzero_tol", s.deriv_nonzero_tol);
  n.set("eig_gap_tol", s.eig_gap_tol);
  n.set("eig_gap_hard", s.eig_gap_hard);
  n.set("imag_tol", s.imag_tol);
  n.set("codiag_tol", s.codiag_tol);
  n.set("enumeration_cap", s.enumeration_cap);
  n.set("exp_guard", s.exp_guard);
  return n;
}

std::string model_digest(const YTransitionModel& model) {
  return report::fnv1a_hex(to_node(model).dump(false));
}

}  // namespace ytm
