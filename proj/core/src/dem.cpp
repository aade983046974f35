#include "surfmem/dem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "surfmem/error.hpp"

namespace surfmem {

double edge_weight(double p) {
    if (!(p > 0) || !(p < 0.5)) {
        throw std::invalid_argument(
            fmt::format("edge probability {} outside (0, 0.5)", p));
    }
    return std::log((1 - p) / p);
}

namespace {

uint8_t x_component(uint8_t pauli) { return pauli == 1 || pauli == 2 ? 1 : 0; }
uint8_t z_component(uint8_t pauli) { return pauli == 3 || pauli == 2 ? 3 : 0; }

// The X and Z components of a term, routed to separate mechanisms per the
// uncorrelated-decoder treatment of Y errors.
std::vector<PauliTerm> split_term(const PauliTerm& term) {
    std::vector<PauliTerm> parts;
    PauliTerm xpart{x_component(term.q0), x_component(term.q1)};
    PauliTerm zpart{z_component(term.q0), z_component(term.q1)};
    if (xpart.q0 || xpart.q1) parts.push_back(xpart);
    if (zpart.q0 || zpart.q1) parts.push_back(zpart);
    return parts;
}

std::vector<FaultMechanism> enumerate_mechanisms(const Circuit& circuit) {
    std::vector<FaultMechanism> mechanisms;
    for (const auto& site : enumerate_channels(circuit)) {
        if (site.p <= 0) continue;
        auto add = [&](PauliTerm term, double probability) {
            for (const auto& part : split_term(term)) {
                mechanisms.push_back({site.instruction, site.target_group, part, probability});
            }
        };
        switch (site.kind) {
            case InstrKind::FlipX:
                add(PauliTerm::single(1), site.p);
                break;
            case InstrKind::FlipZ:
                add(PauliTerm::single(3), site.p);
                break;
            case InstrKind::Depolarize1:
                for (uint8_t t : {1, 2, 3}) add(PauliTerm::single(t), site.p / 3);
                break;
            case InstrKind::Depolarize2:
                for (int t = 1; t < 16; ++t) {
                    add(PauliTerm::pair(static_cast<uint8_t>(t >> 2),
                                        static_cast<uint8_t>(t & 3)),
                        site.p / 15);
                }
                break;
            default:
                break;
        }
    }
    return mechanisms;
}

// Detector basis classification: a detector belongs to the X graph when its
// (x, y) coordinates name an auxiliary that receives Hadamard gates.
std::vector<Basis> classify_detectors(const Circuit& circuit,
                                      const std::vector<DetectorInfo>& detectors) {
    std::map<std::pair<double, double>, uint32_t> qubit_at;
    std::set<uint32_t> h_targets;
    circuit.for_each_instruction([&](const Instruction& instr) {
        if (instr.kind == InstrKind::QubitCoords && instr.params.size() >= 2 &&
            instr.targets.size() == 1) {
            qubit_at[{instr.params[0], instr.params[1]}] =
                static_cast<uint32_t>(instr.targets[0].value);
        } else if (instr.kind == InstrKind::Hadamard) {
            for (const auto& t : instr.targets) h_targets.insert(static_cast<uint32_t>(t.value));
        }
    });
    std::vector<Basis> basis(detectors.size(), Basis::Z);
    for (std::size_t d = 0; d < detectors.size(); ++d) {
        if (!detectors[d].has_coords) {
            throw integrity_error(
                "detector without coordinates cannot be assigned to a basis graph");
        }
        auto it = qubit_at.find({detectors[d].coords[0], detectors[d].coords[1]});
        if (it == qubit_at.end()) {
            throw integrity_error(fmt::format(
                "detector {} coordinates ({}, {}) name no qubit", d, detectors[d].coords[0],
                detectors[d].coords[1]));
        }
        basis[d] = h_targets.count(it->second) ? Basis::X : Basis::Z;
    }
    return basis;
}

}  // namespace

std::vector<MechanismEffect> enumerate_mechanism_effects(const Circuit& circuit) {
    auto mechanisms = enumerate_mechanisms(circuit);
    std::vector<MechanismEffect> effects;
    effects.reserve(mechanisms.size());

    constexpr std::size_t kChunk = 4096;
    for (std::size_t begin = 0; begin < mechanisms.size(); begin += kChunk) {
        const std::size_t end = std::min(begin + kChunk, mechanisms.size());
        std::vector<FaultInjection> shots;
        shots.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            shots.push_back({{mechanisms[i].instruction, mechanisms[i].target_group,
                              mechanisms[i].term}});
        }
        auto record = sample_with_injections(circuit, shots);
        for (std::size_t i = begin; i < end; ++i) {
            MechanismEffect effect;
            effect.mechanism = mechanisms[i];
            const uint64_t shot = i - begin;
            for (uint32_t d = 0; d < record.detector_count; ++d) {
                if (record.detector(shot, d)) effect.detectors.push_back(d);
            }
            effect.observable_flip = record.observable_flip(shot);
            effects.push_back(std::move(effect));
        }
    }
    return effects;
}

DetectorErrorModel extract_dem(const Circuit& circuit, const ExtractOptions& opts) {
    const auto detectors = detector_info(circuit);
    DetectorErrorModel dem;
    dem.detector_count = detectors.size();
    dem.tag = GraphTag::Combined;
    dem.detector_basis = classify_detectors(circuit, detectors);

    struct Key {
        int32_t a, b;
        bool parity;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, std::pair<double, Basis>> merged;

    for (const auto& effect : enumerate_mechanism_effects(circuit)) {
        if (effect.detectors.empty()) {
            if (effect.observable_flip) {
                throw integrity_error(fmt::format(
                    "mechanism at instruction {} group {} flips the observable without any "
                    "detector",
                    effect.mechanism.instruction, effect.mechanism.target_group));
            }
            continue;
        }
        Basis graph = dem.detector_basis[effect.detectors[0]];
        for (uint32_t d : effect.detectors) {
            if (dem.detector_basis[d] != graph) {
                throw integrity_error(fmt::format(
                    "mechanism at instruction {} group {} (term {} {}) spans both basis "
                    "graphs after splitting",
                    effect.mechanism.instruction, effect.mechanism.target_group,
                    effect.mechanism.term.q0, effect.mechanism.term.q1));
            }
        }
        if (effect.detectors.size() > 2) {
            throw integrity_error(fmt::format(
                "mechanism at instruction {} group {} (term {} {}) is not graphlike: flips {} "
                "detectors in one graph",
                effect.mechanism.instruction, effect.mechanism.target_group,
                effect.mechanism.term.q0, effect.mechanism.term.q1, effect.detectors.size()));
        }

        Key key{static_cast<int32_t>(effect.detectors[0]),
                effect.detectors.size() == 2 ? static_cast<int32_t>(effect.detectors[1]) : -1,
                effect.observable_flip};
        auto [it, inserted] = merged.try_emplace(key, std::pair{0.0, graph});
        double& p = it->second.first;
        const double q = effect.mechanism.probability;
        p = p * (1 - q) + q * (1 - p);
    }

    for (const auto& [key, value] : merged) {
        if (value.first <= opts.prune_threshold) continue;
        DemEdge edge;
        edge.det_a = key.a;
        edge.det_b = key.b;
        edge.observable_parity = key.parity;
        edge.probability = value.first;
        edge.graph = value.second;
        dem.edges.push_back(edge);
    }
    std::sort(dem.edges.begin(), dem.edges.end(), [](const DemEdge& a, const DemEdge& b) {
        return std::tuple(a.det_a, a.det_b, a.observable_parity) <
               std::tuple(b.det_a, b.det_b, b.observable_parity);
    });
    return dem;
}

DetectorErrorModel DetectorErrorModel::split(Basis graph) const {
    DetectorErrorModel out;
    out.detector_count = detector_count;
    out.detector_basis = detector_basis;
    out.tag = graph == Basis::X ? GraphTag::XGraph : GraphTag::ZGraph;
    for (const auto& edge : edges) {
        if (edge.graph == graph) out.edges.push_back(edge);
    }
    return out;
}

std::string emit_dem_text(const DetectorErrorModel& dem) {
    std::string out;
    for (const auto& edge : dem.edges) {
        out += fmt::format("error({}) D{}", edge.probability, edge.det_a);
        if (!edge.boundary()) out += fmt::format(" D{}", edge.det_b);
        if (edge.observable_parity) out += " L0";
        out += '\n';
    }
    return out;
}

}  // namespace surfmem
