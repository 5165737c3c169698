#include "armaopt/types.hpp"

namespace armaopt {

std::optional<BoundaryTag> parse_boundary_tag(std::string_view s) {
  if (s == "StrictlyFeasible") return BoundaryTag::StrictlyFeasible;
  if (s == "NearAR") return BoundaryTag::NearAR;
  if (s == "NearMA") return BoundaryTag::NearMA;
  if (s == "NearBoth") return BoundaryTag::NearBoth;
  return std::nullopt;
}

}  // namespace armaopt
