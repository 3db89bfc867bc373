#include "ytm/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace ytm {

namespace {

struct QuotientView {
  Matrix basis;                 // d x q complement of the terminal kernel
  std::vector<Matrix> actions;  // [W_y] in that basis
  Vector p_class;               // [P]
  int k_W = 0;
  int k_PW = 0;
  int d_PW = 0;
  Subspace reachable = Subspace::zero(0);
};

QuotientView quotient_view(const YTransitionModel& model, const Vector& p,
                           const Settings& settings) {
  QuotientView v;
  auto obs = observability_profile(model, settings);
  auto reach = reachability_profile(model, p, settings);
  v.basis = reach.quotient_basis;
  v.actions.reserve(static_cast<std::size_t>(model.dY));
  for (int y = 0; y < model.dY; ++y)
    v.actions.push_back(v.basis.transpose() * model.W[y] * v.basis);
  v.p_class = v.basis.transpose() * p;
  v.k_W = obs.k_W;
  v.k_PW = reach.k_PW;
  v.d_PW = reach.d_PW;
  v.reachable = reach.terminal_space();
  return v;
}

}  // namespace

EquivalenceCertificate are_equivalent(const YTransitionModel& a,
                                      const Vector& pa,
                                      const YTransitionModel& b,
                                      const Vector& pb, double tol,
                                      const Settings& settings) {
  require_valid(a, settings);
  require_valid(b, settings);
  require_distribution(pa, settings);
  require_distribution(pb, settings);
  if (a.dY != b.dY)
    throw ValidationError("are_equivalent: output alphabets differ");

  auto obs_a = observability_profile(a, settings);
  auto obs_b = observability_profile(b, settings);
  auto reach_a = reachability_profile(a, pa, settings);
  auto reach_b = reachability_profile(b, pb, settings);
  int k = std::max(obs_a.k_W, obs_b.k_W) +
          std::max(reach_a.k_PW, reach_b.k_PW) + 1;

  Vector law_a, law_b;
  try {
    law_a = exact_output_law(a, pa, k, settings);
    law_b = exact_output_law(b, pb, k, settings);
  } catch (const CapExceededError&) {
    throw CapExceededError(
        "are_equivalent: window law too large to enumerate; consider a "
        "Monte Carlo comparison instead");
  }
  EquivalenceCertificate cert;
  cert.k_used = k;
  cert.tv_distance = 0.5 * (law_a - law_b).cwiseAbs().sum();
  cert.equivalent = cert.tv_distance <= tol;

  if (cert.equivalent && pa.minCoeff() > settings.support_tol &&
      pb.minCoeff() > settings.support_tol &&
      reach_a.d_PW == reach_b.d_PW) {
    Matrix ba, bb;
    cert.intertwiner = intertwiner(a, pa, b, pb, &ba, &bb, settings);
    cert.basis_a = ba;
    cert.basis_b = bb;
  }
  return cert;
}

EquivalenceCertificate are_equivalent_stationary(const YTransitionModel& a,
                                                 const YTransitionModel& b,
                                                 double tol,
                                                 const Settings& settings) {
  return are_equivalent(a, stationary(a, settings), b,
                        stationary(b, settings), tol, settings);
}

Matrix intertwiner(const YTransitionModel& a, const Vector& pa,
                   const YTransitionModel& b, const Vector& pb,
                   Matrix* basis_a_out, Matrix* basis_b_out,
                   const Settings& settings) {
  auto va = quotient_view(a, pa, settings);
  auto vb = quotient_view(b, pb, settings);
  if (va.d_PW != vb.d_PW) {
    std::ostringstream os;
    os << "intertwiner: reachable dimensions differ (" << va.d_PW << " vs "
       << vb.d_PW << "), contradicting equivalence";
    throw InternalCheckError(os.str());
  }
  const int r = va.d_PW;
  const int k1 = std::max(va.k_PW, vb.k_PW);

  // Enumerate candidate labels: all output words of length <= k1 including
  // the empty one, each giving the pair ([W_word P], [W'_word P']).
  struct Cand {
    Vector va_vec, vb_vec;
  };
  std::vector<Cand> cands;
  std::function<void(int, const Vector&, const Vector&)> rec =
      [&](int len, const Vector& cur_a, const Vector& cur_b) {
        cands.push_back({cur_a, cur_b});
        if (len == k1) return;
        for (int y = 0; y < a.dY; ++y)
          rec(len + 1, Vector(va.actions[static_cast<std::size_t>(y)] * cur_a),
              Vector(vb.actions[static_cast<std::size_t>(y)] * cur_b));
      };
  rec(0, va.p_class, vb.p_class);

  // Greedy pivoted selection of r labels whose reachable vectors on the A
  // side are well-conditioned.
  Matrix sel_a(va.p_class.size(), r), sel_b(vb.p_class.size(), r);
  std::vector<bool> used(cands.size(), false);
  Matrix chosen(va.p_class.size(), 0);
  for (int j = 0; j < r; ++j) {
    int best = -1;
    double best_gain = 0.0;
    Subspace sp = j == 0 ? Subspace::zero(static_cast<int>(va.p_class.size()))
                         : Subspace::span(chosen, settings.rank_rel_tol);
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (used[c]) continue;
      Vector resid = cands[c].va_vec - sp.project(cands[c].va_vec);
      double gain = resid.norm();
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(c);
      }
    }
    if (best < 0 || best_gain <= settings.rank_rel_tol)
      throw InternalCheckError(
          "intertwiner: could not select independent reachable labels");
    used[static_cast<std::size_t>(best)] = true;
    sel_a.col(j) = cands[static_cast<std::size_t>(best)].va_vec;
    sel_b.col(j) = cands[static_cast<std::size_t>(best)].vb_vec;
    chosen.conservativeResize(Eigen::NoChange, j + 1);
    chosen.col(j) = sel_a.col(j);
  }

  // Express both selections in orthonormal bases of the reachable spaces
  // and map coordinates of the A side onto the B side.  Building both bases
  // from the same selected labels keeps identical inputs at the identity.
  Matrix sa = Subspace::span(sel_a, settings.rank_rel_tol).basis();
  Matrix sb = Subspace::span(sel_b, settings.rank_rel_tol).basis();
  if (static_cast<int>(sa.cols()) != r || static_cast<int>(sb.cols()) != r)
    throw InternalCheckError(
        "intertwiner: selected labels are dependent on one side");
  Matrix ca = sa.transpose() * sel_a;  // r x r
  Matrix cb = sb.transpose() * sel_b;  // r x r
  Matrix t = cb * ca.inverse();

  // Certificate residuals: T [W_y] = [W'_y] T on the reachable spaces and
  // T [P] = [P'].
  double worst = 0.0;
  for (int y = 0; y < a.dY; ++y) {
    Matrix act_a = sa.transpose() * va.actions[static_cast<std::size_t>(y)] * sa;
    Matrix act_b = sb.transpose() * vb.actions[static_cast<std::size_t>(y)] * sb;
    worst = std::max(worst, (t * act_a - act_b * t).cwiseAbs().maxCoeff());
  }
  worst = std::max(
      worst,
      Vector(t * (sa.transpose() * va.p_class) - sb.transpose() * vb.p_class)
          .cwiseAbs()
          .maxCoeff());
  if (worst > 1e-6) {
    std::ostringstream os;
    os << "intertwiner: certificate residual " << worst
       << " is too large; models are likely not equivalent";
    throw InternalCheckError(os.str());
  }
  if (basis_a_out) *basis_a_out = va.basis * sa;
  if (basis_b_out) *basis_b_out = vb.basis * sb;
  return t;
}

YTransitionModel permuted(const YTransitionModel& model,
                          const std::vector<int>& perm,
                          const Settings& settings) {
  require_valid(model, settings);
  if (static_cast<int>(perm.size()) != model.d)
    throw ValidationError("permuted: permutation has wrong length");
  std::vector<bool> seen(perm.size(), false);
  for (int v : perm) {
    if (v < 0 || v >= model.d || seen[static_cast<std::size_t>(v)])
      throw ValidationError("permuted: not a bijection on the states");
    seen[static_cast<std::size_t>(v)] = true;
  }
  YTransitionModel out;
  out.d = model.d;
  out.dY = model.dY;
  out.W.assign(static_cast<std::size_t>(model.dY), Matrix::Zero(model.d, model.d));
  for (int y = 0; y < model.dY; ++y)
    for (int x = 0; x < model.d; ++x)
      for (int xp = 0; xp < model.d; ++xp)
        out.W[static_cast<std::size_t>(y)](perm[static_cast<std::size_t>(x)],
                                           perm[static_cast<std::size_t>(xp)]) =
            model.W[static_cast<std::size_t>(y)](x, xp);
  return out;
}

Vector permute_distribution(const Vector& p, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != p.size())
    throw ValidationError("permute_distribution: length mismatch");
  Vector out(p.size());
  for (int x = 0; x < p.size(); ++x) out(perm[static_cast<std::size_t>(x)]) = p(x);
  return out;
}

std::pair<YTransitionModel, Vector> duplicate_state(
    const YTransitionModel& model, const Vector& p, int x_star, double split,
    const Settings& settings) {
  require_valid(model, settings);
  require_distribution(p, settings);
  if (x_star < 0 || x_star >= model.d)
    throw ValidationError("duplicate_state: state index out of range");
  if (!(split > 0.0 && split < 1.0))
    throw ValidationError("duplicate_state: split must lie in (0, 1)");
  const int d = model.d, dn = d + 1;
  YTransitionModel out;
  out.d = dn;
  out.dY = model.dY;
  out.W.assign(static_cast<std::size_t>(model.dY), Matrix::Zero(dn, dn));
  for (int y = 0; y < model.dY; ++y) {
    auto& wn = out.W[static_cast<std::size_t>(y)];
    const auto& w = model.W[static_cast<std::size_t>(y)];
    for (int xp = 0; xp < d; ++xp) {
      for (int x = 0; x < d; ++x) {
        double mass = w(x, xp);
        if (x == x_star) {
          wn(x_star, xp) = split * mass;
          wn(d, xp) = (1.0 - split) * mass;
        } else {
          wn(x, xp) = mass;
        }
      }
    }
    // The copy behaves exactly like the original state.
    wn.col(d) = wn.col(x_star);
  }
  Vector pn(dn);
  pn.head(d) = p;
  pn(x_star) = split * p(x_star);
  pn(d) = (1.0 - split) * p(x_star);
  require_valid(out, settings);
  return {out, pn};
}

}  // namespace ytm
