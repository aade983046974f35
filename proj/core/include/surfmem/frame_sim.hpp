#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "surfmem/circuit.hpp"

namespace surfmem {

// Detector outcomes and observable flips for a batch of shots, bit-packed with
// shots along 64-bit word lanes.
struct SampleRecord {
    uint64_t shots = 0;
    uint32_t detector_count = 0;
    uint64_t seed = 0;
    uint32_t schedule_step = 0;
    std::vector<uint64_t> detector_bits;    // [detector * words_per_lane() + word]
    std::vector<uint64_t> observable_bits;  // [word]

    uint64_t words_per_lane() const { return (shots + 63) / 64; }
    bool detector(uint64_t shot, uint32_t det) const {
        return (detector_bits[det * words_per_lane() + shot / 64] >> (shot % 64)) & 1;
    }
    bool observable_flip(uint64_t shot) const {
        return (observable_bits[shot / 64] >> (shot % 64)) & 1;
    }
    uint64_t count_observable_flips() const;

    // Content equality over the logical bit matrix (ignores seed tags).
    bool same_outcomes(const SampleRecord& other) const;
};

// One- or two-qubit Pauli, encoded 0=I, 1=X, 2=Y, 3=Z per slot.
struct PauliTerm {
    uint8_t q0 = 0;
    uint8_t q1 = 0;
    static PauliTerm single(uint8_t p) { return {p, 0}; }
    static PauliTerm pair(uint8_t a, uint8_t b) { return {a, b}; }
    friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

// A deterministic fault planted at one noise-channel site, overriding its
// randomness. `instruction` indexes the flattened instruction stream and
// `target_group` the qubit (or CNOT pair) within it.
struct ForcedFault {
    uint64_t instruction = 0;
    uint32_t target_group = 0;
    PauliTerm term;
};
using FaultInjection = std::vector<ForcedFault>;

// Addressable noise-channel sites of a circuit, in flattened order.
struct ChannelSite {
    uint64_t instruction = 0;
    uint32_t target_group = 0;
    InstrKind kind = InstrKind::Depolarize1;
    double p = 0;
    std::array<uint32_t, 2> qubits{0, 0};
    int arity = 1;
};
std::vector<ChannelSite> enumerate_channels(const Circuit& circuit);

// Monte Carlo sampling by Pauli-frame propagation. Shots are processed in
// fixed batches of 65536 (the reproducibility partition): every batch draws
// from its own stream keyed by (seed, batch index), so results are
// bit-identical for a given (circuit, shots, seed) regardless of how calls or
// worker threads are arranged around the partition.
//
// Precondition: the circuit passes the noiseless-determinism check (see
// tableau.hpp); detector parities are reported relative to the noiseless
// reference run.
SampleRecord sample(const Circuit& circuit, uint64_t shots, uint64_t seed);

// One shot per injection list; noise channels stay silent except for the
// forced faults, so the outcome is deterministic.
SampleRecord sample_with_injections(const Circuit& circuit,
                                    std::span<const FaultInjection> injections);

// Raw-sample dump: little-endian header (magic "SMS1", detector_count, shots,
// seed) followed by one bit-packed row per shot holding detector_count
// detector bits then one observable bit, padded to whole bytes.
std::string dump_samples(const SampleRecord& record);
SampleRecord load_samples(std::string_view bytes);

namespace detail {
// Splittable stream seeding shared by the samplers and the orchestrator.
uint64_t mix_seed(uint64_t seed, uint64_t stream);
}  // namespace detail

}  // namespace surfmem
