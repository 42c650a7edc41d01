#ifndef MACHZERO_FLOW_STATE_HPP_
#define MACHZERO_FLOW_STATE_HPP_

#include <vector>

#include "machzero/geometry.hpp"

namespace machzero {

/// Physical fields derived from a potential, one entry per quadrature point
/// (element-major, 4 per element).  Incompressible states carry density 1
/// and Mach number 0 exactly.  `modified_flow` marks a compressible state
/// whose speed left the identity branch of the subsonic truncation
/// somewhere, i.e. the state solves the truncated equations rather than the
/// physical ones.
struct FlowState {
  std::vector<Point2> velocity;
  std::vector<double> density;
  std::vector<double> pressure;
  std::vector<double> mach_number;
  bool modified_flow = false;
};

}  // namespace machzero

#endif  // MACHZERO_FLOW_STATE_HPP_
