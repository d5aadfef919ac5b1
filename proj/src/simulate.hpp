#ifndef SDEFIT_SIMULATE_HPP
#define SDEFIT_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include "model.hpp"

namespace sdefit {

enum class SimScheme { Euler, LocalLinearization };

/// Ground-truth generation protocol: fine-grid path simulation followed by
/// subsampling with observation noise. Desk-scale defaults (20 replications,
/// fine_dt = 1e-3) keep runs at minutes scale; fine_dt = 1e-4 restores the
/// reference setting.
struct SimProtocol {
  SimScheme scheme = SimScheme::Euler;
  double fine_dt = 1e-3;
  double horizon = 10.0; // T
  double delta = 1.0;    // sampling period δ; observations at t0 + kδ, k < M
  int replications = 20;
  std::uint64_t seed = 0;

  int observation_count() const; // M = round(T/δ)
  void validate() const;
};

struct Path {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<Vector> x; // x[n] at t0 + n·dt
};

/// Latent path on the fine grid {t0 + n·fine_dt}. Euler-Maruyama or the
/// order-1 LL discretization (linearized drift advanced by the augmented
/// exponential, diffusion evaluated at the left node). Deterministic given
/// (seed, replication).
Path simulate_path(const SdeModel& model, const Vector& theta, const Vector& x0, double t0,
                   const SimProtocol& protocol, std::uint32_t replication);

/// Subsample the path at {t0 + kδ} and add observation noise e_k ~ N(0, Π_k)
/// drawn from a substream independent of the path's Wiener stream.
ObservationSeries make_observations(const Path& path, const SimProtocol& protocol,
                                    const ObservationModel& obs, std::uint32_t replication);

/// CSV dump of a path or series: header "t,x1,..,xd" / "t,z1,..,zr".
std::string path_to_csv(const Path& path, int stride = 1);
std::string series_to_csv(const ObservationSeries& series);

} // namespace sdefit

#endif
