#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "surfmem/geometry.hpp"

namespace surfmem {

enum class InstrKind {
    ResetZ,         // R
    ResetX,         // RX
    Hadamard,       // H
    Cnot,           // CX, targets in (control, target) pairs
    Idle,           // I
    MeasureZ,       // M
    MeasureX,       // MX
    MeasureResetZ,  // MR
    MeasureFlip,    // M(p): Z-basis measurement whose record flips with probability p
    Depolarize1,    // DEPOLARIZE1(p)
    Depolarize2,    // DEPOLARIZE2(p), targets in pairs
    FlipX,          // X_ERROR(p)
    FlipZ,          // Z_ERROR(p)
    Tick,           // TICK
    Detector,       // DETECTOR(x, y, t) rec[-a] ...
    ObservableInclude,  // OBSERVABLE_INCLUDE(k) rec[-a] ...
    QubitCoords,    // QUBIT_COORDS(x, y) q
    ShiftCoords,    // SHIFT_COORDS(dx, dy, dt)
    RepeatBlock,    // REPEAT n { ... }
};

std::string_view instr_name(InstrKind kind);

// A qubit index or a measurement-record back-reference rec[-k] (k >= 1).
struct Target {
    int32_t value = 0;
    bool is_rec = false;

    static Target qubit(uint32_t q) { return {static_cast<int32_t>(q), false}; }
    static Target rec(int32_t back) { return {back, true}; }  // back = k in rec[-k]
    friend bool operator==(const Target&, const Target&) = default;
};

struct Instruction {
    InstrKind kind = InstrKind::Tick;
    std::vector<double> params;
    std::vector<Target> targets;
    // RepeatBlock only:
    uint64_t repeat_count = 0;
    int32_t block = -1;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Circuit {
    std::vector<Instruction> instructions;
    std::vector<Circuit> blocks;  // bodies referenced by RepeatBlock instructions

    friend bool operator==(const Circuit&, const Circuit&) = default;

    // Visits every instruction in execution order, expanding repeat blocks.
    void for_each_instruction(const std::function<void(const Instruction&)>& fn) const;

    uint32_t num_qubits() const;
    uint64_t measurement_count() const;
    uint64_t detector_count() const;
    uint32_t observable_count() const;
};

// Per-detector absolute measurement indices and absolute (x, y, t) coordinates
// after applying coordinate shifts.
struct DetectorInfo {
    std::vector<uint64_t> measurements;
    std::array<double, 3> coords{0, 0, 0};
    bool has_coords = false;
};
std::vector<DetectorInfo> detector_info(const Circuit& circuit);

// Absolute measurement indices per observable.
std::vector<std::vector<uint64_t>> observable_info(const Circuit& circuit);

struct NoiseParams {
    double p = 0.0;  // uniform depolarizing circuit-level rate
};

struct BuildOptions {
    Basis basis = Basis::Z;  // memory Z preserves |0>_L, memory X preserves |+>_L
    int rounds = 0;          // 0 means the default of 3 * distance
    bool exclude_opposite_detectors = true;
    bool z_aux_idle_during_h = true;
    bool bypass_parallel_criterion = false;
};

// Builds an annotated memory-experiment circuit: data initialisation, `rounds`
// rounds of the eight-step stabilizer measurement cycle with uniform
// depolarizing noise after every gate and on every idle qubit, detectors
// comparing consecutive same-stabilizer outcomes, a final data measurement
// with reconstruction detectors, and one logical observable.
//
// Throws std::invalid_argument when the CNOT order fails the commutation
// criterion, or the parallelism criterion without `bypass_parallel_criterion`.
Circuit build_memory_circuit(const CodeLayout& layout, const CnotOrder& order,
                             const NoiseParams& noise, const BuildOptions& opts);

// Canonical text form. parse_text(emit_text(c)) reproduces the structure and
// emit is a pure function of it, so emit(parse(emit(c))) == emit(c).
std::string emit_text(const Circuit& circuit);
Circuit parse_text(std::string_view text);

}  // namespace surfmem
