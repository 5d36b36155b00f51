#pragma once

#include <array>
#include <vector>

#include "dcuc/common.hpp"

namespace dcuc::emission {

// Parameters of the static hourly emission curve f0 + f1 * g^n1 [tCO2/h].
struct StaticEmissionParams {
  double f0 = 0.0;
  double f1 = 0.0;
  double n1 = 1.0;
};

// Parameters of the dynamic (ramping) emission term. tau is the output
// transition time in hours and must stay below one hour.
struct DynamicEmissionParams {
  double b = 0.0;
  double tau = 0.0;
  double n2 = 1.0;
};

// One hour of plant telemetry: output at the previous, current, and next
// hour plus the measured emission over the current hour.
struct EmissionSample {
  double g_prev = 0.0;
  double g = 0.0;
  double g_next = 0.0;
  double emission = 0.0;
  bool static_flag = false;  // true when g_prev == g == g_next
};

// One step of the ramp-magnitude step function: representative marginal
// emission rate over swing magnitudes in [lo, hi].
struct EmissionBlock {
  double lo = 0.0;   // MW
  double hi = 0.0;   // MW
  double rate = 0.0; // tCO2 per MW of swing within this block
};

// One affine piece of the within-hour output trajectory. swing is the full
// inter-hour output change the segment belongs to (zero on the flat piece);
// the instantaneous ramping emission is constant along a transition segment.
struct TrajectorySegment {
  double t0 = 0.0;
  double t1 = 0.0;
  double g0 = 0.0;
  double g1 = 0.0;
  double swing = 0.0;  // |delta g| of the transition, 0 for the flat segment
};

// |g_to - g_from| / (tau * g_max); dimensionless ramp speed.
double ramp_fraction(double g_from, double g_to, double g_max, double tau);

// f0 + f1 * g^n1
double static_hourly_emission(const StaticEmissionParams& p, double g);

// Splits the hour [0,1] into ramp-in [0, tau/2], flat [tau/2, 1-tau/2] and
// ramp-out [1-tau/2, 1]. Endpoints follow the half-split convention: the
// hour starts at the midpoint of (g_prev, g) and ends at the midpoint of
// (g, g_next).
std::array<TrajectorySegment, 3> transition_profile(double g_prev, double g,
                                                    double g_next, double tau);

// Closed-form hourly emission including the ramping term. Reduces exactly
// to static_hourly_emission when g_prev == g == g_next.
double dynamic_hourly_emission(const StaticEmissionParams& ps,
                               const DynamicEmissionParams& pd, double g_prev,
                               double g, double g_next);

// The ramping-only part of dynamic_hourly_emission:
// b*tau*(|g - g_prev|^n2 + |g_next - g|^n2). Symmetric in ramp direction
// and zero on flat hours.
double dynamic_increment(const DynamicEmissionParams& pd, double g_prev,
                         double g, double g_next);

// Equal-area step function over the given swing-magnitude breakpoints
// (strictly increasing, starting at 0). Rates are non-decreasing, which
// keeps the induced piecewise-linear cost convex.
std::vector<EmissionBlock> build_emission_blocks(
    const DynamicEmissionParams& pd, const std::vector<double>& breakpoints);

// Default breakpoints: equal-width blocks covering [0, ramp_limit].
std::vector<double> default_breakpoints(double ramp_limit, int blocks = 4);

}  // namespace dcuc::emission
