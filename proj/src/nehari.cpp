#include "nehari/nehari.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nehari/errors.hpp"

namespace nehari {

double kappa(double p, double a_inf, double c) {
  if (!(p > 2.0)) throw DomainError("kappa needs p > 2");
  if (!(a_inf > 0.0) || !(c > 0.0)) throw DomainError("kappa needs positive ||a|| and c");
  return std::pow(std::pow(2.0, p - 1.0) * a_inf * std::pow(c, p), -1.0 / (p - 2.0));
}

double default_rho0(double p, double a_inf, double c) {
  if (!(p > 2.0)) throw DomainError("rho0 needs p > 2");
  return 0.5 * std::pow(a_inf * std::pow(c, p), -1.0 / (p - 2.0));
}

NehariParams make_params(const EnergyContext& ctx, const Field& v_ref, double c) {
  NehariParams prm;
  prm.c = c;
  prm.a_inf = ctx.weight().sup_norm();
  prm.kappa = kappa(ctx.p(), prm.a_inf, c);
  prm.rho0 = default_rho0(ctx.p(), prm.a_inf, c);
  prm.R = 2.0 * norm(ctx.grid(), v_ref);
  prm.energy_cap = energy(ctx, v_ref) + 1.0;
  return prm;
}

double c_rho_lower_bound(const NehariParams& params, double p, double rho) {
  if (!(rho > 0.0) || rho > params.rho0) throw DomainError("rho must lie in (0, rho0]");
  return 0.5 * rho * rho - params.a_inf * std::pow(params.c, p) / p * std::pow(rho, p);
}

// --- frame ------------------------------------------------------------------

NehariFrame nehari_frame(const EnergyContext& ctx, const Field& u) {
  NehariFrame f;
  f.parts = ctx.decomposer().decompose(u);
  const auto& fam = ctx.weight().families;
  for (std::size_t c = 0; c < fam.size(); ++c) {
    if (fam[c] != Family::tilde) continue;
    auto [plus, minus] = split_signs(f.parts.components[c]);
    const std::string id = std::to_string(c);
    f.pieces.push_back(std::move(plus));
    f.signs.push_back(+1);
    f.labels.push_back("tilde_plus[" + id + "]");
    f.pieces.push_back(std::move(minus));
    f.signs.push_back(-1);
    f.labels.push_back("tilde_minus[" + id + "]");
  }
  for (std::size_t c = 0; c < fam.size(); ++c) {
    if (fam[c] != Family::hat) continue;
    f.pieces.push_back(positive_part(f.parts.components[c]));
    f.signs.push_back(+1);
    f.labels.push_back("hat_plus[" + std::to_string(c) + "]");
  }
  f.hat_minus = negative_part(f.parts.hat);
  f.rest = f.parts.bar_low + f.parts.remainder - f.hat_minus;
  return f;
}

namespace {

Field compose(const NehariFrame& frame, const Vector& scales) {
  Field w = frame.rest;
  for (std::size_t k = 0; k < frame.size(); ++k)
    w.values() += (scales[k] * frame.signs[k]) * frame.pieces[k].values();
  return w;
}

}  // namespace

Field sigma(const NehariFrame& frame, const Vector& scales) {
  if (scales.size() != static_cast<Index>(frame.size()))
    throw DomainError("one scale per piece required");
  for (Index k = 0; k < scales.size(); ++k) {
    if (!(scales[k] >= 0.0 && scales[k] <= 2.0))
      throw DomainError("cube parameters must lie in [0, 2]");
  }
  return compose(frame, scales);
}

Vector nehari_residuals(const EnergyContext& ctx, const Field& u, const NehariFrame& frame) {
  const Vector load = nonlinear_load(ctx, u);
  const Vector Ku = ctx.grid().stiffness() * u.values();
  Vector r(static_cast<Index>(frame.size()));
  for (std::size_t k = 0; k < frame.size(); ++k) {
    const Vector& pk = frame.pieces[k].values();
    r[k] = Ku.dot(pk) - load.dot(pk);
  }
  return r;
}

Vector closed_form_scales(const EnergyContext& ctx, const Field& u, const NehariFrame& frame) {
  const Vector load = nonlinear_load(ctx, u);
  Vector s(static_cast<Index>(frame.size()));
  for (std::size_t k = 0; k < frame.size(); ++k) {
    const double num = inner_product(ctx.grid(), frame.pieces[k], frame.pieces[k]);
    const double den = frame.signs[k] * load.dot(frame.pieces[k].values());
    if (!(num > 0.0) || !(den > 0.0))
      throw SignPatternLost("sign-pattern lost: " + frame.labels[k] +
                            (num > 0.0 ? " has nonpositive nonlinear term" : " vanishes"));
    s[k] = std::pow(num / den, 1.0 / (ctx.p() - 2.0));
  }
  return s;
}

Rescaled rescale_to_nehari(const EnergyContext& ctx, const Field& u) {
  const NehariFrame frame = nehari_frame(ctx, u);
  const Index k = static_cast<Index>(frame.size());
  const Grid& g = ctx.grid();
  const double p = ctx.p();
  Vector s = closed_form_scales(ctx, u, frame);

  // Reduced problem: f(s) = 1/2 s^T G s + b^T s + const - 1/p sum q a |sigma(s)|^p.
  Eigen::MatrixXd G(k, k);
  Vector b(k);
  std::vector<Vector> sp(k);  // signed pieces
  for (Index i = 0; i < k; ++i) sp[i] = frame.signs[i] * frame.pieces[i].values();
  const Vector Krest = g.stiffness() * frame.rest.values();
  for (Index i = 0; i < k; ++i) {
    const Vector Kp = g.stiffness() * sp[i];
    for (Index j = 0; j < k; ++j) G(i, j) = sp[j].dot(Kp);
    b[i] = sp[i].dot(Krest);
  }
  G = 0.5 * (G + G.transpose());

  std::vector<Index> support;
  for (Index n = 0; n < g.size(); ++n) {
    for (Index i = 0; i < k; ++i) {
      if (sp[i][n] != 0.0) {
        support.push_back(n);
        break;
      }
    }
  }
  const Vector& q = g.quadrature();
  const Vector& a = ctx.a_mu();

  auto evaluate = [&](const Vector& sc, Vector& grad, Vector& scale, Eigen::MatrixXd* hess) {
    const Vector lin = G * sc;
    Vector nonlin = Vector::Zero(k);
    if (hess) *hess = G;
    for (Index n : support) {
      double w = frame.rest[n];
      for (Index i = 0; i < k; ++i) w += sc[i] * sp[i][n];
      const double qa = q[n] * a[n];
      const double m = qa * abs_pow(w, p - 2.0);
      for (Index i = 0; i < k; ++i) {
        if (sp[i][n] == 0.0) continue;
        nonlin[i] += m * w * sp[i][n];
        if (hess) {
          for (Index j = 0; j < k; ++j) (*hess)(i, j) -= (p - 1.0) * m * sp[i][n] * sp[j][n];
        }
      }
    }
    grad = lin + b - nonlin;
    scale = lin.cwiseAbs() + b.cwiseAbs() + nonlin.cwiseAbs();
    double merit = 0.0;
    for (Index i = 0; i < k; ++i) merit = std::max(merit, std::abs(grad[i]) / scale[i]);
    return merit;
  };

  Vector grad, scale;
  Eigen::MatrixXd H;
  double merit = evaluate(s, grad, scale, &H);
  int it = 0;
  constexpr double kTarget = 1e-15;
  for (; it < 60 && merit > kTarget; ++it) {
    Vector d;
    Eigen::LLT<Eigen::MatrixXd> llt(-H);
    if (llt.info() == Eigen::Success) {
      d = llt.solve(grad);
    } else {
      d.resize(k);
      for (Index i = 0; i < k; ++i) d[i] = grad[i] / std::max(std::abs(H(i, i)), G(i, i));
    }
    bool moved = false;
    double alpha = 1.0;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      const Vector trial = s + alpha * d;
      if ((trial.array() <= 0.0).any()) continue;
      Vector tg, tsc;
      Eigen::MatrixXd tH;
      const double tm = evaluate(trial, tg, tsc, &tH);
      if (tm < merit) {
        s = trial;
        grad = tg;
        scale = tsc;
        H = tH;
        merit = tm;
        moved = true;
        break;
      }
    }
    if (!moved) break;  // at rounding level
  }
  if (merit > 1e-8)
    throw SignPatternLost("sign-pattern lost: Nehari rescaling did not settle (merit " +
                          std::to_string(merit) + ")");
  return Rescaled{compose(frame, s), s, it};
}

ConstraintReport check_membership(const EnergyContext& ctx, const NehariParams& params,
                                  const Field& u, const MembershipTolerances& tol) {
  const Grid& g = ctx.grid();
  const NehariFrame frame = nehari_frame(ctx, u);
  ConstraintReport r;

  r.nontrivial = frame.size() > 0;
  r.min_piece_norm = std::numeric_limits<double>::infinity();
  for (const Field& piece : frame.pieces) {
    const double nrm = norm(g, piece);
    r.piece_norms.push_back(nrm);
    r.nontrivial = r.nontrivial && nrm >= tol.nontrivial;
    r.min_piece_norm = std::min(r.min_piece_norm, nrm);
  }
  if (frame.size() == 0) r.min_piece_norm = 0.0;

  const Vector res = nehari_residuals(ctx, u, frame);
  r.residuals.assign(res.data(), res.data() + res.size());
  r.residual_bound = tol.nehari * (1.0 + norm(g, u));
  r.nehari_ok = res.size() > 0 && res.cwiseAbs().maxCoeff() <= r.residual_bound;

  r.energy = energy(ctx, u);
  r.energy_cap = params.energy_cap;
  r.energy_ok = r.energy <= r.energy_cap;

  r.norm_remainder = norm(g, frame.parts.remainder);
  r.norm_tilde_hat_plus = norm(g, frame.parts.tilde + positive_part(frame.parts.hat));
  r.R = params.R;
  r.norm_chain_ok = r.norm_remainder <= r.min_piece_norm &&
                    r.min_piece_norm < r.norm_tilde_hat_plus && r.norm_tilde_hat_plus <= r.R;

  r.norm_hat_minus = norm(g, frame.hat_minus);
  r.norm_bar_low = norm(g, frame.parts.bar_low);
  r.rho0 = params.rho0;
  r.smallness_ok = std::max(r.norm_hat_minus, r.norm_bar_low) <= r.rho0;
  return r;
}

// --- cube -------------------------------------------------------------------

std::vector<double> cube_axis(int m) {
  if (m < 2) throw DomainError("need at least two points per axis");
  std::vector<double> out(m);
  for (int j = 0; j < m; ++j) out[j] = 0.5 * std::pow(4.0, static_cast<double>(j) / (m - 1));
  out.front() = 0.5;
  out.back() = 2.0;
  if (m % 2 == 1) out[m / 2] = 1.0;
  return out;
}

SurfaceReport f_surface(const EnergyContext& ctx, const Field& u,
                        const std::vector<Eigen::Vector3d>& points) {
  const NehariFrame frame = nehari_frame(ctx, u);
  if (frame.size() != 3)
    throw DomainError("the f-surface needs exactly one tilde and one hat component");
  SurfaceReport rep;
  rep.points = points;
  rep.values.resize(static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vector s = points[i];
    rep.values[static_cast<Index>(i)] = energy(ctx, sigma(frame, s));
    if (points[i] == Eigen::Vector3d::Ones()) rep.center = static_cast<Index>(i);
  }
  if (!points.empty()) rep.values.maxCoeff(&rep.argmax);
  rep.f_center = energy(ctx, sigma(frame, Vector::Ones(3)));
  return rep;
}

SurfaceReport f_surface(const EnergyContext& ctx, const Field& u, int points_per_axis) {
  const auto axis = cube_axis(points_per_axis);
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(axis.size() * axis.size() * axis.size());
  for (double r : axis)
    for (double s : axis)
      for (double t : axis) pts.emplace_back(r, s, t);
  return f_surface(ctx, u, pts);
}

double separation(const SurfaceReport& s, double theta) {
  double far_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if ((s.points[i] - Eigen::Vector3d::Ones()).norm() >= theta)
      far_max = std::max(far_max, s.values[static_cast<Index>(i)]);
  }
  return s.f_center - far_max;
}

double aux_constant(const EnergyContext& ctx, const NehariFrame& frame) {
  const Grid& g = ctx.grid();
  const WeightField& wf = ctx.weight();
  const double p = ctx.p();
  const Field& rem = frame.parts.remainder;
  double k = 0.5 * (inner_product(g, frame.hat_minus, frame.hat_minus) +
                    inner_product(g, frame.parts.bar_low, frame.parts.bar_low) +
                    inner_product(g, rem, rem));
  // The a+ integrals are taken over the hat and bar components respectively.
  const Field hat_part = rem - frame.hat_minus;
  const Field bar_part = frame.parts.bar_low + rem;
  const Vector& q = g.quadrature();
  for (std::size_t c = 0; c < wf.component_masks.size(); ++c) {
    const Field* f = wf.families[c] == Family::hat   ? &hat_part
                     : wf.families[c] == Family::bar ? &bar_part
                                                     : nullptr;
    if (!f) continue;
    for (Index i : wf.component_masks[c]) k -= q[i] * wf.a_plus[i] * abs_pow((*f)[i], p) / p;
  }
  k += ctx.mu() * weighted_p_integral(g, wf.a_minus, rem, p) / p;
  return k;
}

double g_aux(const NehariFrame& frame, const Grid& grid, const Vector& scales, double p,
             double k_const) {
  double g = k_const;
  for (std::size_t k = 0; k < frame.size(); ++k) {
    const double s = scales[static_cast<Index>(k)];
    g += (0.5 * s * s - std::pow(s, p) / p) * inner_product(grid, frame.pieces[k], frame.pieces[k]);
  }
  return g;
}

PhiPsi psi_phi_maps(const EnergyContext& ctx, const Field& w) {
  const NehariFrame frame = nehari_frame(ctx, w);
  const Grid& g = ctx.grid();
  const Vector& ap = ctx.weight().a_plus;
  const Vector& q = g.quadrature();
  const double p = ctx.p();
  PhiPsi out{Vector(static_cast<Index>(frame.size())), Vector(static_cast<Index>(frame.size()))};
  Vector load(w.size());
  for (Index i = 0; i < w.size(); ++i) load[i] = q[i] * ap[i] * abs_pow(w[i], p - 2.0) * w[i];
  for (std::size_t k = 0; k < frame.size(); ++k) {
    const double n2 = inner_product(g, frame.pieces[k], frame.pieces[k]);
    if (!(n2 > 0.0)) throw DomainError(frame.labels[k] + " vanishes: maps undefined");
    out.phi[k] = frame.signs[k] * load.dot(frame.pieces[k].values()) / n2;
    out.psi[k] = weighted_p_integral(g, ap, frame.pieces[k], p) / n2;
  }
  return out;
}

DegreeReport degree_check(const EnergyContext& ctx, const Field& u, int edge_points) {
  if (edge_points < 5) throw DomainError("boundary sample too coarse (need >= 5 points per edge)");
  const NehariFrame frame = nehari_frame(ctx, u);
  const Index k = static_cast<Index>(frame.size());
  const double e = ctx.p() - 2.0;
  DegreeReport rep;
  rep.psi_u = psi_phi_maps(ctx, u).psi;

  const double lo = std::pow(0.5, e), hi = std::pow(2.0, e);
  rep.winding = k > 0 && (rep.psi_u.array() > lo).all() && (rep.psi_u.array() < hi).all();

  std::vector<double> axis(edge_points);
  for (int j = 0; j < edge_points; ++j) axis[j] = 0.5 + 1.5 * j / (edge_points - 1);
  rep.boundary_distance = std::numeric_limits<double>::infinity();

  std::vector<int> idx(k, 0);
  while (true) {
    bool on_boundary = false;
    Vector s(k);
    for (Index i = 0; i < k; ++i) {
      s[i] = axis[idx[i]];
      on_boundary |= idx[i] == 0 || idx[i] == edge_points - 1;
    }
    if (on_boundary) {
      const PhiPsi m = psi_phi_maps(ctx, sigma(frame, s));
      rep.boundary_distance = std::min(rep.boundary_distance, (m.psi - Vector::Ones(k)).norm());
      rep.phi_psi_gap = std::max(rep.phi_psi_gap, (m.phi - m.psi).cwiseAbs().maxCoeff());
      for (Index i = 0; i < k; ++i) {
        const double predicted = std::pow(s[i], e) * rep.psi_u[i];
        rep.homogeneity_error =
            std::max(rep.homogeneity_error, std::abs(m.psi[i] - predicted) / predicted);
      }
      ++rep.samples;
    }
    Index d = 0;
    while (d < k && ++idx[d] == edge_points) idx[d++] = 0;
    if (d == k) break;
  }
  return rep;
}

}  // namespace nehari
