#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nehari/decomposition.hpp"
#include "nehari/functional.hpp"

namespace nehari {

/// Constants of the constraint set: the smallness radius rho0, the outer
/// radius R, the energy cap I(v_ref) + 1, the lower bound kappa and the
/// Sobolev constant c they were derived from.
struct NehariParams {
  double rho0 = 0.0;
  double R = 0.0;
  double energy_cap = 0.0;
  double kappa = 0.0;
  double c = 0.0;
  double a_inf = 0.0;
};

/// kappa = (2^{p-1} ||a||_inf c^p)^{-1/(p-2)}.
double kappa(double p, double a_inf, double c);

/// rho0 = 1/2 (||a||_inf c^p)^{-1/(p-2)}.
double default_rho0(double p, double a_inf, double c);

/// Parameters for a reference function v_ref supported away from a-.
NehariParams make_params(const EnergyContext& ctx, const Field& v_ref, double c);

/// Lower bound t^2/2 - (||a||_inf c^p / p) t^p for the infimum of I_mu over
/// {u in H(hat) + H(bar) : rho <= max(||u_hat||, ||u_bar||) <= rho0}.
double c_rho_lower_bound(const NehariParams& params, double p, double rho);

/// The signed pieces whose scalings parametrise the Nehari cube:
/// for every tilde component its positive and negative part, for every hat
/// component its positive part. With one component per family the order is
/// (u~+, u~-, u^+).
struct NehariFrame {
  Decomposition parts;
  std::vector<Field> pieces;
  std::vector<int> signs;          // +1 for positive parts, -1 for negative parts
  std::vector<std::string> labels;
  Field hat_minus;                 // negative part of the hat projection
  Field rest;                      // -hat_minus + bar_low + remainder

  std::size_t size() const { return pieces.size(); }
};

NehariFrame nehari_frame(const EnergyContext& ctx, const Field& u);

/// sum_k scales_k * signs_k * pieces_k + rest. Scales must lie in [0, 2].
Field sigma(const NehariFrame& frame, const Vector& scales);

/// I_mu'(u)(piece_k) for every piece.
Vector nehari_residuals(const EnergyContext& ctx, const Field& u, const NehariFrame& frame);

/// One-shot scale factors (||piece||^2 / (+-) sum q a |u|^{p-2} u piece)^{1/(p-2)}.
/// Throws SignPatternLost if a denominator is not positive.
Vector closed_form_scales(const EnergyContext& ctx, const Field& u, const NehariFrame& frame);

struct Rescaled {
  Field w;
  Vector scales;
  int iterations = 0;
};

/// Moves u along its own scaling cube to the critical point of I_mu o sigma,
/// starting from the closed-form factors and finishing with Newton's method.
/// The returned w satisfies the three orthogonality conditions to rounding.
Rescaled rescale_to_nehari(const EnergyContext& ctx, const Field& u);

struct MembershipTolerances {
  double nontrivial = 1e-6;
  double nehari = 1e-8;
};

struct ConstraintReport {
  // (i) nontriviality of the pieces
  std::vector<double> piece_norms;
  bool nontrivial = false;
  // (ii) vanishing derivative along the pieces
  std::vector<double> residuals;
  double residual_bound = 0.0;
  bool nehari_ok = false;
  // (iii) energy cap
  double energy = 0.0;
  double energy_cap = 0.0;
  bool energy_ok = false;
  // (iv) ||rem|| <= min piece norm < ||u~ + u^+|| <= R
  double norm_remainder = 0.0;
  double min_piece_norm = 0.0;
  double norm_tilde_hat_plus = 0.0;
  double R = 0.0;
  bool norm_chain_ok = false;
  // (v) max(||u^-||, ||u_bar||) <= rho0
  double norm_hat_minus = 0.0;
  double norm_bar_low = 0.0;
  double rho0 = 0.0;
  bool smallness_ok = false;

  bool all() const { return nontrivial && nehari_ok && energy_ok && norm_chain_ok && smallness_ok; }
};

ConstraintReport check_membership(const EnergyContext& ctx, const NehariParams& params,
                                  const Field& u, const MembershipTolerances& tol = {});

// --- the scaling cube -------------------------------------------------------

/// m points from 1/2 to 2, geometrically spaced so that 1 is a node when m is odd.
std::vector<double> cube_axis(int m);

struct SurfaceReport {
  std::vector<Eigen::Vector3d> points;
  Vector values;
  Index argmax = 0;
  Index center = -1;      // index of (1,1,1) if it is a sample point
  double f_center = 0.0;  // I_mu o sigma at (1,1,1)
};

/// f = I_mu o sigma on the given points of [0,2]^3. Needs a three-piece frame.
SurfaceReport f_surface(const EnergyContext& ctx, const Field& u,
                        const std::vector<Eigen::Vector3d>& points);
SurfaceReport f_surface(const EnergyContext& ctx, const Field& u, int points_per_axis);

/// f(1,1,1) - max{ f(x) : |x - (1,1,1)| >= theta } over the sampled points.
double separation(const SurfaceReport& s, double theta);

/// Constant part of the closed-form comparison surface g.
double aux_constant(const EnergyContext& ctx, const NehariFrame& frame);

/// g = sum_k (s_k^2/2 - s_k^p/p) ||piece_k||^2 + K.
double g_aux(const NehariFrame& frame, const Grid& grid, const Vector& scales, double p,
             double k_const);

struct PhiPsi {
  Vector phi;
  Vector psi;
};

/// phi_k(w) = +-sum q a+ |w|^{p-2} w w_k / ||w_k||^2 and
/// psi_k(w) = sum q a+ |w_k|^p / ||w_k||^2 over the pieces w_k of w.
PhiPsi psi_phi_maps(const EnergyContext& ctx, const Field& w);

struct DegreeReport {
  Vector psi_u;                   // psi-triple of u
  double boundary_distance = 0.0; // min |Psi - (1,..,1)| over boundary samples
  double phi_psi_gap = 0.0;       // max |Phi - Psi| over boundary samples
  double homogeneity_error = 0.0; // max |Psi(sigma(s)) - s^{p-2} psi(u)| relative
  bool winding = false;           // (1,..,1) strictly inside the image of the product map
  int samples = 0;

  bool certificate() const { return winding && boundary_distance > 0.0; }
};

/// Checks the two ingredients of the degree argument on [1/2,2]^k:
/// separation of Psi on the cube boundary from (1,..,1), and the monotone
/// product structure of Psi. `edge_points` >= 5 samples per edge.
DegreeReport degree_check(const EnergyContext& ctx, const Field& u, int edge_points = 9);

}  // namespace nehari
