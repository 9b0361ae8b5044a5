#include "energy/capacitor.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace edgeboost::energy {

double Capacitor::usable_energy() const { return std::max(0.0, energy() - cutoff_energy()); }

double Capacitor::usable_fraction() const {
  const double cap = usable_capacity();
  return cap > 0.0 ? std::clamp(usable_energy() / cap, 0.0, 1.0) : 0.0;
}

void Capacitor::set_energy(double joules) {
  joules = std::clamp(joules, 0.0, max_energy());
  voltage = joules >= max_energy() ? v_max : std::sqrt(2.0 * joules / capacitance);
}

void validate(const Capacitor& cap) {
  require(std::isfinite(cap.capacitance) && cap.capacitance > 0.0, ErrorCode::invalid_config,
          "capacitance must be positive");
  require(std::isfinite(cap.v_max) && cap.v_max > 0.0, ErrorCode::invalid_config, "v_max must be positive");
  require(std::isfinite(cap.v_cutoff) && cap.v_cutoff >= 0.0 && cap.v_cutoff < cap.v_max,
          ErrorCode::invalid_config, "v_cutoff must lie in [0, v_max)");
  require(std::isfinite(cap.voltage) && cap.voltage >= 0.0 && cap.voltage <= cap.v_max, ErrorCode::invalid_config,
          "capacitor voltage must lie in [0, v_max]");
}

Capacitor at_usable_fraction(Capacitor cap, double fraction) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  if (fraction >= 1.0) {
    cap.voltage = cap.v_max;
  } else {
    cap.set_energy(cap.cutoff_energy() + fraction * cap.usable_capacity());
  }
  return cap;
}

StepResult step(const Capacitor& cap, double harvested_power, double load_power, double dt) {
  require(dt > 0.0, ErrorCode::invalid_input, "step: dt must be positive");
  require(harvested_power >= 0.0 && load_power >= 0.0, ErrorCode::invalid_input, "step: powers must be >= 0");
  StepResult out;
  out.cap = cap;
  out.harvested = harvested_power * dt;
  const double e0 = cap.energy();
  double e = e0 + out.harvested - load_power * dt;
  out.consumed = load_power * dt;
  if (e < 0.0) {
    out.deficit = true;
    out.consumed += e;  // only what was there could be drawn
    e = 0.0;
  } else if (e > cap.max_energy()) {
    out.spilled = e - cap.max_energy();
    e = cap.max_energy();
  }
  if (harvested_power == load_power) {
    return out;  // voltage untouched, no round-off drift
  }
  out.cap.set_energy(e);
  return out;
}

}  // namespace edgeboost::energy
