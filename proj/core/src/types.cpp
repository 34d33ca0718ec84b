#include "swedge/types.hpp"

#include <cmath>
#include <string>

#include "swedge/error.hpp"

namespace swedge {

void VarianceComponents::validate() const {
  auto check = [](double v, const std::string& name) {
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidArgument(name + " must be finite and nonnegative (got " + std::to_string(v) + ")");
  };
  check(cluster, "cluster variance");
  check(residual, "residual variance");
  if (!(residual > 0.0)) throw InvalidArgument("residual variance must be positive");
  for (std::size_t k = 0; k < treatment.size(); ++k)
    check(treatment[k], "treatment variance " + std::to_string(k + 1));
}

}  // namespace swedge
