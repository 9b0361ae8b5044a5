#pragma once

namespace edgeboost::energy {

struct Capacitor {
  double capacitance = 0.47;  // F
  double v_max = 4.2;         // charging clamp
  double v_cutoff = 1.7;      // brown-out threshold
  double voltage = 0.0;

  double energy() const { return 0.5 * capacitance * voltage * voltage; }
  double max_energy() const { return 0.5 * capacitance * v_max * v_max; }
  double cutoff_energy() const { return 0.5 * capacitance * v_cutoff * v_cutoff; }
  double usable_capacity() const { return max_energy() - cutoff_energy(); }
  double usable_energy() const;
  double usable_fraction() const;
  // Any usable charge at all; exactly at the cutoff nothing can execute.
  bool on() const { return usable_energy() > 0.0; }

  void set_energy(double joules);
};

void validate(const Capacitor& cap);

/// Capacitor charged to the voltage at which `fraction` of the usable window is available.
Capacitor at_usable_fraction(Capacitor cap, double fraction);

struct StepResult {
  Capacitor cap;
  bool deficit = false;  // load not fully served, store hit zero
  double harvested = 0.0;
  double consumed = 0.0;
  double spilled = 0.0;  // harvest rejected at v_max
};

/// Plain bookkeeping: E' = clamp(E + (P_harv - P_load) dt, 0, E_max).
StepResult step(const Capacitor& cap, double harvested_power, double load_power, double dt);

}  // namespace edgeboost::energy
