#pragma once

#include <functional>
#include <span>
#include <string>

#include "csde/grid.hpp"
#include "json.hpp"

namespace csde {

// Closed-form scalar fields used as forcings, initial data and test inputs.
//   {"kind":"constant","value":c}
//   {"kind":"sine","mode":[k1,..],"amplitude":A}            A sin(2 pi k.x)
//   {"kind":"gaussian","center":[..],"width":w,"amplitude":A}
//   {"kind":"modulated_bump","center":[..],"width":w,"mode":[..],"amplitude":A}
//   {"kind":"ball_indicator","center":[..],"radius":r,"amplitude":A}
// Any kind accepts "decay": a to multiply by e^{-a t}.
struct ScalarField {
  std::string kind;
  nlohmann::json params;
  std::function<double(double t, std::span<const double> x)> eval;

  GridFunction sample(const Grid& g) const { return GridFunction::sample(g, eval); }
};

ScalarField make_scalar_field(const nlohmann::json& spec, int dim);

}  // namespace csde
