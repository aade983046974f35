#pragma once

#include <cstdint>
#include <span>

#include "surfmem/circuit.hpp"
#include "surfmem/frame_sim.hpp"

namespace surfmem {

// Oracle scale: the public tableau entry points refuse larger circuits.
inline constexpr uint32_t kTableauOracleMaxQubits = 32;

// Full stabilizer-tableau simulation; same output contract as sample().
// Outcomes of intrinsically random measurements are drawn fresh per shot, so
// only detector and observable parities are comparable with the frame sampler.
SampleRecord tableau_simulate(const Circuit& circuit, uint64_t shots, uint64_t seed);

// Deterministic variant under forced faults, one shot per injection list;
// bit-identical to sample_with_injections on valid circuits.
SampleRecord tableau_simulate(const Circuit& circuit,
                              std::span<const FaultInjection> injections, uint64_t seed = 0);

// Runs the circuit with all noise channels silenced and checks that every
// detector reads zero on every trial (trials use distinct streams for the
// intrinsically random measurements). Throws integrity_error naming the first
// offending detector. Not limited to the oracle qubit cap.
void check_noiseless_determinism(const Circuit& circuit, int trials = 8, uint64_t seed = 1);

}  // namespace surfmem
