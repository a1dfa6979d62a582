#include "cvarsafe/system_model.hpp"

#include <algorithm>

namespace cvarsafe {

double SystemModel::z_update(double z, std::span<const double> x, double u) const {
  return std::max(z, stage_cost(x, u));
}

}  // namespace cvarsafe
