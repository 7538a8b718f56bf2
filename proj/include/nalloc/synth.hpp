#pragma once

#include <cstdint>

#include "nalloc/market_data.hpp"

namespace nalloc {

/// Parameters of the synthetic return generator: AR(1) conditional mean with
/// GARCH(1,1) conditional variance and a constant cross-asset correlation of
/// the Gaussian innovations. All GARCH/AR coefficients apply to every asset.
struct SynthSpec {
  int n_assets = 1;
  int n_days = 1000;
  std::uint64_t seed = 0;
  double garch_omega = 1e-4;
  double garch_alpha = 0.0;
  double garch_beta = 0.0;
  double cross_corr = 0.0;
  double ar_coeff = 0.0;
};

/// Throws Error(InvalidSpec) naming the violated constraint.
void validate(const SynthSpec& spec);

/// Deterministic for a fixed seed. Each asset follows
///   r_t = ar_coeff * r_{t-1} + u_t,  u_t = sigma_t * eps_t,
///   sigma_t^2 = omega + alpha * u_{t-1}^2 + beta * sigma_{t-1}^2,
/// with sigma_0^2 at the stationary value omega / (1 - alpha - beta) and
/// r_0 = 0. Innovations eps_t are jointly normal with the constant
/// correlation matrix (1 - rho) I + rho J.
///
/// Random source: one mt19937_64 per asset feeding std::normal_distribution,
/// asset stream k seeded with splitmix64(seed ^ splitmix64(k + 1)); the
/// per-asset standard normals are then mixed by the Cholesky factor of the
/// correlation matrix. Re-implementations can match moments, not bit-streams.
///
/// Dates are consecutive weekdays starting at 2010-01-04.
ReturnPanel generate_panel(const SynthSpec& spec);

}  // namespace nalloc
