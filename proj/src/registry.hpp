#ifndef SDEFIT_REGISTRY_HPP
#define SDEFIT_REGISTRY_HPP

#include <string>
#include <vector>

#include "model.hpp"

namespace sdefit {

/// A registered test system: SDE + linear observation + filter start values.
struct TestModel {
  std::string id;
  SdeModel sde;
  ObservationModel obs;
  InitialCondition init;
  double t0 = 0.0;
  Vector theta0;                        // reference parameter values
  std::vector<std::string> param_names;
  bool has_exact_moments = false;       // closed-form conditional moments available
  int default_scheme = 0;               // 0 = euler, 1 = local linearization
};

/// Registry ids: "ex1" (scalar, multiplicative noise), "ex2" (scalar, two
/// additive noises), "ex3" (Van der Pol, random input), "ex4" (Van der Pol,
/// random frequency). θ empty selects the reference values. Unknown ids and
/// out-of-box θ are rejected.
TestModel test_model(const std::string& id, const Vector& theta = Vector());

std::vector<std::string> registry_ids();

/// Closed-form one-interval predictions of the conditional mean and second
/// moment for ex1/ex2, given filter values (x, q) at t_k. Other ids have no
/// closed form and are rejected.
struct ExactMoments {
  double mean;
  double second_moment;
};
ExactMoments exact_moment_oracle(const std::string& id, const Vector& theta, double x_filt,
                                 double q_filt, double t_k, double t_next);

} // namespace sdefit

#endif
