#pragma once

#include "energy/capacitor.hpp"
#include "energy/cost.hpp"
#include "energy/trace.hpp"

namespace edgeboost::energy {

enum class Drain { inference, retrain, sleep, idle };

struct EnergyLedger {
  double harvested = 0.0;  // accepted into the store
  double spilled = 0.0;    // offered while full, not stored
  double inference = 0.0;
  double retrain = 0.0;
  double sleep = 0.0;
  double idle = 0.0;

  double consumed() const { return inference + retrain + sleep + idle; }
};

// Capacitor + trace cursor. Time only moves forward. Between executions the
// device sleeps (draws sleep_power while it has usable charge); executions take
// their energy up front and then let time pass with harvesting only.
class Device {
 public:
  Device(Capacitor cap, const PowerTrace& trace, const CostModel& cost, double start_time);

  double time() const { return time_; }
  const Capacitor& capacitor() const { return cap_; }
  const EnergyLedger& ledger() const { return ledger_; }
  double initial_energy() const { return initial_energy_; }
  double harvest_power() const { return trace_->power[cursor_]; }
  double stored_energy() const { return energy_; }
  double usable_energy() const;
  double usable_fraction() const;
  bool on() const { return usable_energy() > 0.0; }
  /// Discretized e_now for the scheduler.
  int energy_level(double one_learner_cost) const;

  /// Sleep until t (no-op if t <= time()).
  void advance_to(double t);

  /// Draws `joules` for an action of length `duration`. Returns false on brown-out:
  /// the remaining usable charge is drained into `kind` and the device turns off.
  bool execute(double joules, double duration, Drain kind);

  /// Stored-energy balance error against the ledger.
  double accounting_error() const;

 private:
  void integrate(double until, double draw, Drain kind);
  void book(Drain kind, double joules);

  Capacitor cap_;
  const PowerTrace* trace_;
  CostModel cost_;
  double time_;
  std::size_t cursor_;
  double energy_;  // tracked directly; voltage is derived
  double initial_energy_;
  EnergyLedger ledger_;
};

}  // namespace edgeboost::energy
