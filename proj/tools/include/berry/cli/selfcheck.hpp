#pragma once

#include <string>
#include <vector>

#include "berry/geometry.hpp"

namespace berry::cli {

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckLine> selfcheck_special();
std::vector<CheckLine> selfcheck_field();
std::vector<CheckLine> selfcheck_geometry();

// Signed length by walking each segment of `a` in steps of at most `step` and
// testing every sample point against the segments of `c`.
double brute_force_signed_length(const PolygonalChain& a, const PolygonalChain& c,
                                 double step = 1e-4);

}  // namespace berry::cli
