#include "energy/device.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace edgeboost::energy {

Device::Device(Capacitor cap, const PowerTrace& trace, const CostModel& cost, double start_time)
    : cap_(cap), trace_(&trace), cost_(cost), time_(start_time) {
  validate(cap_);
  validate(cost_);
  validate(trace);
  cursor_ = trace.segment_at(start_time);
  energy_ = cap_.energy();
  initial_energy_ = energy_;
}

double Device::usable_energy() const { return std::max(0.0, energy_ - cap_.cutoff_energy()); }

double Device::usable_fraction() const {
  const double cap = cap_.usable_capacity();
  return cap > 0.0 ? std::clamp(usable_energy() / cap, 0.0, 1.0) : 0.0;
}

int Device::energy_level(double one_learner_cost) const {
  return energy::energy_level(usable_energy(), cap_.usable_capacity(), one_learner_cost);
}

void Device::book(Drain kind, double joules) {
  switch (kind) {
    case Drain::inference: ledger_.inference += joules; break;
    case Drain::retrain: ledger_.retrain += joules; break;
    case Drain::sleep: ledger_.sleep += joules; break;
    case Drain::idle: ledger_.idle += joules; break;
  }
}

// Constant-power pieces between trace breakpoints and cutoff crossings.
void Device::integrate(double until, double draw, Drain kind) {
  const double e_cut = cap_.cutoff_energy();
  const double e_max = cap_.max_energy();
  while (time_ < until) {
    while (cursor_ + 1 < trace_->size() && trace_->time[cursor_ + 1] <= time_) ++cursor_;
    const double seg_end = cursor_ + 1 < trace_->size() ? trace_->time[cursor_ + 1] : until;
    double dt = std::min(until, seg_end) - time_;
    const double ph = trace_->power[cursor_];
    double t_next = time_ + dt;

    if (energy_ < e_cut) {
      // Off: charge only.
      if (ph > 0.0 && energy_ + ph * dt >= e_cut) {
        dt = (e_cut - energy_) / ph;
        t_next = time_ + dt;
        ledger_.harvested += e_cut - energy_;
        energy_ = e_cut;
      } else {
        ledger_.harvested += ph * dt;
        energy_ += ph * dt;
      }
    } else {
      const double net = ph - draw;
      if (net >= 0.0) {
        const double gain = net * dt;
        const double room = e_max - energy_;
        const double spill = gain > room ? gain - room : 0.0;
        ledger_.harvested += ph * dt - spill;
        book(kind, draw * dt);
        if (spill > 0.0) {
          ledger_.spilled += spill;
          energy_ = e_max;
        } else {
          energy_ += gain;
        }
      } else if (energy_ <= e_cut) {
        // Pinned at the cutoff: whatever trickles in is used up straight away.
        ledger_.harvested += ph * dt;
        book(kind, ph * dt);
      } else {
        const double to_cut = (energy_ - e_cut) / -net;
        if (to_cut < dt) {
          dt = to_cut;
          t_next = time_ + dt;
          ledger_.harvested += ph * dt;
          book(kind, draw * dt);
          energy_ = e_cut;
        } else {
          ledger_.harvested += ph * dt;
          book(kind, draw * dt);
          energy_ += net * dt;
        }
      }
    }
    time_ = t_next;
  }
  cap_.set_energy(energy_);  // voltage for reporting; energy_ stays authoritative
}

void Device::advance_to(double t) {
  if (t <= time_) return;
  integrate(t, cost_.sleep_power, Drain::sleep);
}

bool Device::execute(double joules, double duration, Drain kind) {
  require(joules >= 0.0 && duration >= 0.0, ErrorCode::invalid_input, "execute: negative energy or duration");
  const double usable = usable_energy();
  const bool ok = usable > 0.0 && usable >= joules;
  const double drawn = ok ? joules : usable;
  book(kind, drawn);
  energy_ = ok ? energy_ - drawn : std::min(energy_, cap_.cutoff_energy());
  cap_.set_energy(energy_);
  if (duration > 0.0) integrate(time_ + duration, 0.0, Drain::idle);
  return ok;
}

double Device::accounting_error() const {
  const double expected = initial_energy_ + ledger_.harvested - ledger_.consumed();
  return std::abs(energy_ - expected);
}

}  // namespace edgeboost::energy
