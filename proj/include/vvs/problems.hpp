#pragma once

#include <cstdint>
#include <vector>

#include "vvs/al_precond.hpp"
#include "vvs/assembly.hpp"
#include "vvs/multigrid.hpp"

namespace vvs {

/// Multi-sinker benchmark on the unit square: n high-viscosity inclusions of
/// diameter omega with Gaussian-smoothed boundaries, forced downwards.
struct SinkerConfig {
  int n = 8;
  double omega = 0.1;
  double delta = 200.0;
  double beta = 10.0;
  double dr = 1e4;  // DR(mu) = mu_max / mu_min
  std::uint64_t seed = 1;
  std::vector<Vec2> centers;

  double mu_min() const { return 1.0 / std::sqrt(dr); }
  double mu_max() const { return std::sqrt(dr); }
};

std::vector<Vec2> place_sinkers(int n, double omega, std::uint64_t seed);
double sinker_chi(const SinkerConfig& cfg, Vec2 x);
double sinker_viscosity(const SinkerConfig& cfg, Vec2 x);
Vec2 sinker_rhs(const SinkerConfig& cfg, Vec2 x);

class SinkerViscosity final : public ViscosityModel {
 public:
  explicit SinkerViscosity(SinkerConfig cfg);
  ViscositySample sample(Vec2 x) const override;
  const SinkerConfig& config() const { return cfg_; }

 private:
  SinkerConfig cfg_;
};

/// 2D cross-section of the compressional slab: viscoplastic lower layer,
/// isoviscous upper layer, weak notch at the bottom center. Nondimensional
/// units (lengths by H0, velocities by U0, viscosities by eta0).
struct ViscoplasticConfig {
  double Lx = 4.0, Lz = 1.0;
  double eta_r = 1000.0;  // lower-layer reference viscosity mu_1 / eta_0
  double tau_y = 100.0;
  double mu_upper = 1.0;   // mu_2 / eta_0
  double mu_notch = 1e-4;  // mu_3 / eta_0
  double eta_floor = 1e-6;
  double layer_top = 0.75;  // interface height between the layers
  Rect notch{1.95, 0.0, 2.05, 0.1};
  double u0 = 1.0;
  double strain_floor = 1e-12;

  bool in_notch(Vec2 p) const { return notch.contains(p); }
  bool in_upper_layer(Vec2 p) const { return p.y > layer_top; }

  /// Graded coarse tensor grid aligned with the notch and layer interface.
  std::vector<double> coarse_xs() const;
  std::vector<double> coarse_zs() const;
};

double viscoplastic_effective_viscosity(const ViscoplasticConfig& cfg, Vec2 x,
                                        double strain_invariant);

/// Inflow on left/right, closed bottom, open top; only normal components are
/// constrained (free slip tangentially).
BcSetup viscoplastic_bcs(const ViscoplasticConfig& cfg);

/// Scalar (Picard) viscosity at a frozen velocity state; a null state yields
/// the zero-strain viscosity.
class ViscoplasticPicard final : public ViscosityModel {
 public:
  ViscoplasticPicard(const ViscoplasticConfig& cfg, const FunctionSpace* V = nullptr,
                     std::vector<double> state = {});
  ViscositySample sample(Vec2 x) const override;

 private:
  ViscoplasticConfig cfg_;
  const FunctionSpace* V_;
  std::vector<double> state_;
};

/// Stress-velocity Newton viscosity at a frozen state: effective scalar times
/// the bracket [I - (eps(u) x tau)_sym / (2 II_eps max(tau_y, II_tau))],
/// with tau the consistent stress projected onto II_tau <= tau_y.
class ViscoplasticNewton final : public ViscosityModel {
 public:
  ViscoplasticNewton(const ViscoplasticConfig& cfg, const FunctionSpace& V,
                     std::vector<double> state);
  ViscositySample sample(Vec2 x) const override;

 private:
  ViscoplasticConfig cfg_;
  const FunctionSpace* V_;
  std::vector<double> state_;
};

struct NewtonStepReport {
  int step = 0;
  SolveReport linear;
  double residual_norm = 0;
  double alpha = 1.0;  // accepted line-search step
};

struct NewtonOptions {
  double gamma = 10.0;
  SchurVariant variant = SchurVariant::P2;
  WChoice w = WChoice::MpInvVisc;
  double lin_rtol = 1e-6;
  int lin_maxit = 300;
  double rtol = 1e-8;
  int maxit = 15;
  MgOptions mg;
  bool linear_rheology = false;  // constant-viscosity override (one Newton step)
};

struct NewtonResult {
  std::vector<double> u, p;
  std::vector<NewtonStepReport> steps;
  bool converged = false;
  double initial_residual = 0;
};

NewtonResult newton_solve(const ViscoplasticConfig& cfg, const MeshHierarchy& meshes,
                          int k, const NewtonOptions& opts);

/// Structured-grid CSV of the solution fields (x, y, mu_eff, II, u, v, p).
void write_fields_csv(const ViscoplasticConfig& cfg, const FunctionSpace& V,
                      const FunctionSpace& Q, std::span<const double> u,
                      std::span<const double> p, std::ostream& os);

}  // namespace vvs
