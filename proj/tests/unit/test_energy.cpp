#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "energy/capacitor.hpp"
#include "energy/cost.hpp"
#include "energy/device.hpp"
#include "energy/trace.hpp"

using namespace edgeboost;
using namespace edgeboost::energy;

namespace {

PowerTrace constant_trace(double watts, double duration) {
  SynthProfile p;
  p.kind = Profile::constant;
  p.power = watts;
  return synth_trace(1, p, duration);
}

}  // namespace

TEST_CASE("capacitor energies") {
  Capacitor c{0.47, 3.6, 1.7, 3.6};
  CHECK(c.energy() == doctest::Approx(3.0456));
  CHECK(c.max_energy() == doctest::Approx(0.5 * 0.47 * 3.6 * 3.6));
  CHECK(c.usable_energy() == doctest::Approx(2.366).epsilon(1e-3));
  CHECK(c.usable_energy() == doctest::Approx(0.5 * 0.47 * (3.6 * 3.6 - 1.7 * 1.7)));
  CHECK(c.usable_fraction() == doctest::Approx(1.0));
  c.voltage = 1.7;
  CHECK_FALSE(c.on());
  auto half = at_usable_fraction(c, 0.5);
  CHECK(half.usable_fraction() == doctest::Approx(0.5));
}

TEST_CASE("capacitor step") {
  Capacitor c{0.47, 4.2, 1.7, 3.0};
  auto same = step(c, 1e-3, 1e-3, 100.0);
  CHECK(same.cap.voltage == c.voltage);

  auto charge = step(c, 1e-3, 0.0, 10.0);
  CHECK(charge.cap.energy() == doctest::Approx(c.energy() + 1e-2));

  Capacitor full = c;
  full.voltage = 4.2;
  auto spill = step(full, 1.0, 0.0, 1.0);
  CHECK(spill.cap.voltage == doctest::Approx(4.2));
  CHECK(spill.spilled == doctest::Approx(1.0));

  Capacitor empty = c;
  empty.voltage = 0.0;
  auto dry = step(empty, 0.0, 1.0, 1.0);
  CHECK(dry.deficit);
  CHECK(dry.cap.voltage == 0.0);
}

TEST_CASE("trace CSV parsing") {
  auto vi = parse_trace("timestamp_s,voltage_V,current_A\n0.0,2.0,0.001\n10.0,1.0,0.004\n", 1.0);
  CHECK(vi.power[0] == doctest::Approx(0.002));
  CHECK(vi.power[1] == doctest::Approx(0.004));
  CHECK(vi.end_time == doctest::Approx(20.0));

  auto scaled = parse_trace("timestamp_s,voltage_V,current_A\n0.0,2.0,0.001\n", 0.0);
  CHECK(scaled.power[0] == 0.0);

  auto pw = parse_trace("timestamp_s,power_W\n0,0.5\n1,0.25\n", 0.5);
  CHECK(pw.power[1] == doctest::Approx(0.125));
  CHECK(pw.power_at(0.5) == doctest::Approx(0.25));

  CHECK_THROWS_AS(parse_trace("timestamp_s,power_W\n0,1\n0,2\n", 1.0), Error);
  CHECK_THROWS_AS(parse_trace("timestamp_s,power_W\n0,1\n1,abc\n", 1.0, "t.csv"), Error);
  try {
    parse_trace("timestamp_s,power_W\n0,1\n1,abc\n", 1.0, "t.csv");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("t.csv:3") != std::string::npos);
  }
}

TEST_CASE("synthetic traces") {
  auto zero = constant_trace(0.0, 600);
  for (double p : zero.power) CHECK(p == 0.0);

  SynthProfile dn;
  dn.period = 100;
  dn.resolution = 1;
  dn.power = 1e-3;
  auto a = synth_trace(5, dn, 1000);
  auto b = synth_trace(5, dn, 1000);
  CHECK(a.power == b.power);
  for (int period = 0; period < 10; ++period) {
    int zeros = 0;
    for (int i = 0; i < 100; ++i) zeros += a.power[period * 100 + i] == 0.0;
    CHECK(zeros == 50);
  }

  SynthProfile burst;
  burst.kind = Profile::bursty;
  auto c = synth_trace(8, burst, 86400);
  CHECK(c.power == synth_trace(8, burst, 86400).power);
}

TEST_CASE("terciles split a uniform trace evenly") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1e-3);
  std::ostringstream csv;
  csv << "timestamp_s,power_W\n";
  for (int i = 0; i < 3000; ++i) csv << i << "," << u(rng) << "\n";
  auto trace = parse_trace(csv.str(), 1.0);
  auto th = power_terciles(trace);
  int bins[3] = {0, 0, 0};
  for (double p : trace.power) ++bins[discretize_power(p, th)];
  for (int b : bins) CHECK(std::abs(b / 3000.0 - 1.0 / 3.0) <= 0.02);
  CHECK(discretize_power(0.0, th) == 0);
  CHECK(discretize_power(th.high, th) == 2);
}

TEST_CASE("cost model") {
  CostModel c;
  c.energy_per_mac = 1e-9;
  c.per_inference_overhead = 0.0;
  CHECK(inference_cost(0, c) == 0.0);
  CHECK(inference_cost(1000000, c) == doctest::Approx(1e-3));
  CHECK(inference_cost(500, c) == inference_cost(500, c));
  CHECK(execution_time(2000000, c) == doctest::Approx(2.0));
  CHECK(execution_energy(1000, c) == doctest::Approx(inference_cost(1000, c) + c.active_idle_power * 1e-3));
  CHECK(retrain_energy(1000, c) == doctest::Approx(c.fc_retrain_energy_fraction * execution_energy(1000, c)));
}

TEST_CASE("energy discretisation") {
  const double cap = 2.0, one = 0.1;
  CHECK(energy_level(cap, cap, one) == 3);
  CHECK(energy_level(one * 0.999, cap, one) == 0);
  CHECK(energy_level(0.6 * cap, cap, one) == 2);
  CHECK(energy_level(0.3 * cap, cap, one) == 1);
  Capacitor full{0.47, 4.2, 1.7, 4.2};
  CHECK(discretize_energy(full, 0.01) == 3);
}

TEST_CASE("request times") {
  auto t = request_times({5.0, 20.0}, 100.0);
  CHECK(t == std::vector<double>{105.0, 110.0, 115.0});
}

TEST_CASE("device accounting closes") {
  SynthProfile dn;
  dn.period = 3600;
  dn.resolution = 60;
  dn.power = 2e-3;
  auto trace = synth_trace(3, dn, 7200);
  CostModel cost;
  Device d(Capacitor{0.05, 4.2, 1.7, 3.0}, trace, cost, 0.0);
  for (double t = 10; t < 7000; t += 10) {
    d.advance_to(t);
    if (d.on()) d.execute(5e-3, 0.5, Drain::inference);
  }
  const auto& l = d.ledger();
  CHECK(std::abs(d.stored_energy() - (d.initial_energy() + l.harvested - l.consumed())) < 1e-9);
  CHECK(d.accounting_error() < 1e-9);
  CHECK(l.inference > 0.0);
  CHECK(l.sleep > 0.0);
}

TEST_CASE("zero power eventually browns out and stays off") {
  auto trace = constant_trace(0.0, 100000);
  Device d(Capacitor{0.01, 4.2, 1.7, 4.2}, trace, CostModel{}, 0.0);
  bool browned = false;
  for (double t = 1; t < 90000 && !browned; t += 1) {
    d.advance_to(t);
    if (d.on()) browned = !d.execute(1e-2, 0.1, Drain::inference);
    else browned = true;
  }
  CHECK(browned);
  CHECK_FALSE(d.on());
  d.advance_to(99000);
  CHECK_FALSE(d.on());
  CHECK(d.accounting_error() < 1e-9);
}

TEST_CASE("sleep draw stops at the cutoff") {
  auto trace = constant_trace(0.0, 1e7);
  CostModel cost;
  Capacitor c{0.01, 4.2, 1.7, 1.8};
  Device d(c, trace, cost, 0.0);
  const double usable = d.usable_energy();
  d.advance_to(9e6);
  CHECK(d.usable_energy() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.ledger().sleep == doctest::Approx(usable));
}
