#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surfmem/circuit.hpp"
#include "surfmem/frame_sim.hpp"

namespace surfmem {

// Log-likelihood matching weight ln((1-p)/p); requires 0 < p < 0.5.
double edge_weight(double p);

// One elementary fault: a single Pauli term of one noise channel.
struct FaultMechanism {
    uint64_t instruction = 0;
    uint32_t target_group = 0;
    PauliTerm term;
    double probability = 0;
};

// Detectors flipped by one mechanism (or one X/Z component of it).
struct MechanismEffect {
    FaultMechanism mechanism;
    std::vector<uint32_t> detectors;
    bool observable_flip = false;
};

struct DemEdge {
    int32_t det_a = -1;
    int32_t det_b = -1;  // -1: boundary edge
    bool boundary() const { return det_b < 0; }
    bool observable_parity = false;
    double probability = 0;
    Basis graph = Basis::Z;  // basis of the stabilizers whose detectors it links
    double weight() const { return edge_weight(probability); }
};

enum class GraphTag { XGraph, ZGraph, Combined };

struct DetectorErrorModel {
    uint64_t detector_count = 0;
    GraphTag tag = GraphTag::Combined;
    std::vector<DemEdge> edges;           // canonical order: (det_a, det_b, parity)
    std::vector<Basis> detector_basis;    // per detector

    // The sub-model holding one basis graph.
    DetectorErrorModel split(Basis graph) const;
};

struct ExtractOptions {
    double prune_threshold = 0;  // drop merged edges below this probability; off by default
};

// Splits every channel term into its X and Z components, propagates each
// through the noiseless remainder of the circuit, and merges components with
// identical (detector set, observable parity) by independent-XOR combination.
// Components must land on at most two detectors of a single basis graph;
// anything else raises integrity_error naming the mechanism.
DetectorErrorModel extract_dem(const Circuit& circuit, const ExtractOptions& opts = {});

// The per-component effects before merging, in mechanism order. Exhaustive and
// exact; shared by extract_dem and the completeness tests.
std::vector<MechanismEffect> enumerate_mechanism_effects(const Circuit& circuit);

// One line per edge: error(p) D<i> [D<j>] [L0], canonically sorted.
std::string emit_dem_text(const DetectorErrorModel& dem);

}  // namespace surfmem
