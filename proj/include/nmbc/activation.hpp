#pragma once

#include <map>
#include <string>

#include "nmbc/trace.hpp"

namespace nmbc {

/// Nonlinear excitation-to-activation shaping
///   A = (e^{E*u} - 1) / (e^{E} - 1)
/// for u in [0,1] and shape factor E in [-3, 0). A(0) = 0 and A(1) = 1
/// exactly; as E -> 0- the map tends to the identity.
double activation(double u_bar, double shape_E);

/// Full-wave rectification followed by a 2nd-order low-pass per channel
/// (zero initial state). Requires a uniformly sampled trace and a cutoff
/// below Nyquist.
Trace envelope(const Trace& raw, double cutoff_hz);

/// u_bar = clamp(env / mvc, 0, 1) per channel. Every trace channel must
/// have an MVC entry.
Trace normalize_mvc(const Trace& env, const std::map<std::string, double>& mvc);

}  // namespace nmbc
