#include "surfmem/circuit.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "surfmem/error.hpp"

namespace surfmem {

std::string_view instr_name(InstrKind kind) {
    switch (kind) {
        case InstrKind::ResetZ: return "R";
        case InstrKind::ResetX: return "RX";
        case InstrKind::Hadamard: return "H";
        case InstrKind::Cnot: return "CX";
        case InstrKind::Idle: return "I";
        case InstrKind::MeasureZ: return "M";
        case InstrKind::MeasureX: return "MX";
        case InstrKind::MeasureResetZ: return "MR";
        case InstrKind::MeasureFlip: return "M";
        case InstrKind::Depolarize1: return "DEPOLARIZE1";
        case InstrKind::Depolarize2: return "DEPOLARIZE2";
        case InstrKind::FlipX: return "X_ERROR";
        case InstrKind::FlipZ: return "Z_ERROR";
        case InstrKind::Tick: return "TICK";
        case InstrKind::Detector: return "DETECTOR";
        case InstrKind::ObservableInclude: return "OBSERVABLE_INCLUDE";
        case InstrKind::QubitCoords: return "QUBIT_COORDS";
        case InstrKind::ShiftCoords: return "SHIFT_COORDS";
        case InstrKind::RepeatBlock: return "REPEAT";
    }
    return "?";
}

void Circuit::for_each_instruction(const std::function<void(const Instruction&)>& fn) const {
    for (const auto& instr : instructions) {
        if (instr.kind == InstrKind::RepeatBlock) {
            const Circuit& body = blocks.at(instr.block);
            for (uint64_t i = 0; i < instr.repeat_count; ++i) {
                body.for_each_instruction(fn);
            }
        } else {
            fn(instr);
        }
    }
}

namespace {

bool is_measurement(InstrKind kind) {
    return kind == InstrKind::MeasureZ || kind == InstrKind::MeasureX ||
           kind == InstrKind::MeasureResetZ || kind == InstrKind::MeasureFlip;
}

}  // namespace

uint32_t Circuit::num_qubits() const {
    int32_t max_index = -1;
    for_each_instruction([&](const Instruction& instr) {
        for (const auto& t : instr.targets) {
            if (!t.is_rec) max_index = std::max(max_index, t.value);
        }
    });
    return static_cast<uint32_t>(max_index + 1);
}

uint64_t Circuit::measurement_count() const {
    uint64_t count = 0;
    for_each_instruction([&](const Instruction& instr) {
        if (is_measurement(instr.kind)) count += instr.targets.size();
    });
    return count;
}

uint64_t Circuit::detector_count() const {
    uint64_t count = 0;
    for_each_instruction([&](const Instruction& instr) {
        if (instr.kind == InstrKind::Detector) ++count;
    });
    return count;
}

uint32_t Circuit::observable_count() const {
    int32_t max_index = -1;
    for_each_instruction([&](const Instruction& instr) {
        if (instr.kind == InstrKind::ObservableInclude && !instr.params.empty()) {
            max_index = std::max(max_index, static_cast<int32_t>(instr.params[0]));
        }
    });
    return static_cast<uint32_t>(max_index + 1);
}

std::vector<DetectorInfo> detector_info(const Circuit& circuit) {
    std::vector<DetectorInfo> out;
    uint64_t measurements = 0;
    std::array<double, 3> shift{0, 0, 0};
    circuit.for_each_instruction([&](const Instruction& instr) {
        if (is_measurement(instr.kind)) {
            measurements += instr.targets.size();
        } else if (instr.kind == InstrKind::ShiftCoords) {
            for (std::size_t i = 0; i < instr.params.size() && i < 3; ++i) {
                shift[i] += instr.params[i];
            }
        } else if (instr.kind == InstrKind::Detector) {
            DetectorInfo info;
            for (const auto& t : instr.targets) {
                if (!t.is_rec) throw integrity_error("detector target is not a record reference");
                int64_t abs = static_cast<int64_t>(measurements) - t.value;
                if (abs < 0) {
                    throw integrity_error(
                        "detector record reference reaches before the first measurement");
                }
                info.measurements.push_back(static_cast<uint64_t>(abs));
            }
            if (!instr.params.empty()) {
                info.has_coords = true;
                for (std::size_t i = 0; i < instr.params.size() && i < 3; ++i) {
                    info.coords[i] = instr.params[i] + shift[i];
                }
            }
            out.push_back(std::move(info));
        }
    });
    return out;
}

std::vector<std::vector<uint64_t>> observable_info(const Circuit& circuit) {
    std::vector<std::vector<uint64_t>> out(circuit.observable_count());
    uint64_t measurements = 0;
    circuit.for_each_instruction([&](const Instruction& instr) {
        if (is_measurement(instr.kind)) {
            measurements += instr.targets.size();
        } else if (instr.kind == InstrKind::ObservableInclude) {
            auto& obs = out.at(static_cast<std::size_t>(instr.params.at(0)));
            for (const auto& t : instr.targets) {
                if (!t.is_rec) throw integrity_error("observable target is not a record reference");
                int64_t abs = static_cast<int64_t>(measurements) - t.value;
                if (abs < 0) {
                    throw integrity_error(
                        "observable record reference reaches before the first measurement");
                }
                obs.push_back(static_cast<uint64_t>(abs));
            }
        }
    });
    return out;
}

namespace {

struct Builder {
    const CodeLayout& layout;
    const CnotOrder& order;
    double p;
    BuildOptions opts;
    int rounds;

    uint32_t ndata;
    uint32_t naux;
    std::vector<uint32_t> x_aux;                 // qubit ids of X-type auxiliaries
    std::vector<uint32_t> z_aux;                 // qubit ids of Z-type auxiliaries
    std::vector<uint32_t> all_aux;
    std::vector<uint32_t> all_data;
    std::array<std::vector<Target>, 4> cx_steps;  // CNOT pairs per time step
    std::array<std::vector<uint32_t>, 4> cx_idle;
    std::vector<uint32_t> h_idle;
    std::vector<std::size_t> detector_stabs;     // stabilizers that get detectors in rounds >= 2
    std::vector<std::size_t> basis_stabs;        // same-basis stabilizers

    Builder(const CodeLayout& l, const CnotOrder& o, double p_, const BuildOptions& opts_)
        : layout(l), order(o), p(p_), opts(opts_) {
        rounds = opts.rounds > 0 ? opts.rounds : 3 * layout.distance;
        ndata = static_cast<uint32_t>(layout.num_data());
        naux = static_cast<uint32_t>(layout.num_aux());
        for (uint32_t q = 0; q < ndata; ++q) all_data.push_back(q);
        for (std::size_t s = 0; s < naux; ++s) {
            uint32_t aux = layout.aux_qubit(s);
            all_aux.push_back(aux);
            (layout.stabilizers[s].type == Basis::X ? x_aux : z_aux).push_back(aux);
            if (layout.stabilizers[s].type == opts.basis) basis_stabs.push_back(s);
            if (layout.stabilizers[s].type == opts.basis || !opts.exclude_opposite_detectors) {
                detector_stabs.push_back(s);
            }
        }

        for (int step = 0; step < 4; ++step) {
            std::vector<bool> touched(layout.total_qubits(), false);
            auto add_pairs = [&](Basis type, int slot) {
                for (std::size_t s = 0; s < naux; ++s) {
                    const auto& stab = layout.stabilizers[s];
                    if (stab.type != type || !stab.data_slots[slot]) continue;
                    uint32_t aux = layout.aux_qubit(s);
                    uint32_t data = *stab.data_slots[slot];
                    // X-type copies from the auxiliary, Z-type onto it.
                    uint32_t control = type == Basis::X ? aux : data;
                    uint32_t target = type == Basis::X ? data : aux;
                    cx_steps[step].push_back(Target::qubit(control));
                    cx_steps[step].push_back(Target::qubit(target));
                    touched[control] = touched[target] = true;
                }
            };
            add_pairs(Basis::X, order.x_order[step]);
            add_pairs(Basis::Z, order.z_order[step]);
            for (uint32_t q = 0; q < layout.total_qubits(); ++q) {
                if (!touched[q]) cx_idle[step].push_back(q);
            }
        }

        h_idle = all_data;
        if (opts.z_aux_idle_during_h) {
            h_idle.insert(h_idle.end(), z_aux.begin(), z_aux.end());
            std::sort(h_idle.begin(), h_idle.end());
        }
    }

    static std::vector<Target> qubit_targets(const std::vector<uint32_t>& qubits) {
        std::vector<Target> ts;
        ts.reserve(qubits.size());
        for (uint32_t q : qubits) ts.push_back(Target::qubit(q));
        return ts;
    }

    void push(Circuit& c, InstrKind kind, std::vector<Target> targets,
              std::vector<double> params = {}) const {
        c.instructions.push_back(Instruction{kind, std::move(params), std::move(targets), 0, -1});
    }

    void push_noise1(Circuit& c, InstrKind kind, const std::vector<uint32_t>& qubits) const {
        if (p <= 0 || qubits.empty()) return;
        push(c, kind, qubit_targets(qubits), {p});
    }

    void tick(Circuit& c) const { push(c, InstrKind::Tick, {}); }

    void emit_round_steps(Circuit& c) const {
        // Step: Hadamards on X-type auxiliaries.
        push(c, InstrKind::Hadamard, qubit_targets(x_aux));
        push_noise1(c, InstrKind::Depolarize1, x_aux);
        push_noise1(c, InstrKind::Depolarize1, h_idle);
        tick(c);
        // Four CNOT steps.
        for (int step = 0; step < 4; ++step) {
            push(c, InstrKind::Cnot, cx_steps[step]);
            if (p > 0 && !cx_steps[step].empty()) {
                push(c, InstrKind::Depolarize2, cx_steps[step], {p});
            }
            push_noise1(c, InstrKind::Depolarize1, cx_idle[step]);
            tick(c);
        }
        // Second Hadamard step.
        push(c, InstrKind::Hadamard, qubit_targets(x_aux));
        push_noise1(c, InstrKind::Depolarize1, x_aux);
        push_noise1(c, InstrKind::Depolarize1, h_idle);
        tick(c);
        // Measure and reset every auxiliary; data qubits idle once.
        push_noise1(c, InstrKind::FlipX, all_aux);
        push(c, InstrKind::MeasureResetZ, qubit_targets(all_aux));
        push_noise1(c, InstrKind::FlipX, all_aux);
        push_noise1(c, InstrKind::Depolarize1, all_data);
    }

    std::vector<double> detector_coords(std::size_t stab) const {
        const Coord aux = layout.stabilizers[stab].auxiliary;
        return {static_cast<double>(aux.x), static_cast<double>(aux.y), 0.0};
    }

    Circuit build() const {
        Circuit c;
        for (uint32_t q = 0; q < layout.total_qubits(); ++q) {
            const Coord coord = layout.qubit_coord(q);
            push(c, InstrKind::QubitCoords, {Target::qubit(q)},
                 {static_cast<double>(coord.x), static_cast<double>(coord.y)});
        }

        // Data initialisation in the memory basis plus auxiliary reset, all
        // with faulty-reset noise.
        if (opts.basis == Basis::Z) {
            std::vector<uint32_t> everything = all_data;
            everything.insert(everything.end(), all_aux.begin(), all_aux.end());
            push(c, InstrKind::ResetZ, qubit_targets(everything));
            push_noise1(c, InstrKind::FlipX, everything);
        } else {
            push(c, InstrKind::ResetX, qubit_targets(all_data));
            push(c, InstrKind::ResetZ, qubit_targets(all_aux));
            push_noise1(c, InstrKind::FlipZ, all_data);
            push_noise1(c, InstrKind::FlipX, all_aux);
        }
        tick(c);

        // Round 1: same-basis outcomes are deterministic, opposite-basis ones
        // are random and never get a round-1 detector.
        emit_round_steps(c);
        for (std::size_t s : basis_stabs) {
            push(c, InstrKind::Detector,
                 {Target::rec(static_cast<int32_t>(naux - s))}, detector_coords(s));
        }

        if (rounds > 1) {
            Circuit body;
            tick(body);
            emit_round_steps(body);
            push(body, InstrKind::ShiftCoords, {}, {0, 0, 1});
            for (std::size_t s : detector_stabs) {
                push(body, InstrKind::Detector,
                     {Target::rec(static_cast<int32_t>(naux - s)),
                      Target::rec(static_cast<int32_t>(2 * naux - s))},
                     detector_coords(s));
            }
            Instruction repeat;
            repeat.kind = InstrKind::RepeatBlock;
            repeat.repeat_count = static_cast<uint64_t>(rounds - 1);
            repeat.block = static_cast<int32_t>(c.blocks.size());
            c.blocks.push_back(std::move(body));
            c.instructions.push_back(std::move(repeat));
        }

        // Final transversal data measurement in the memory basis.
        tick(c);
        if (opts.basis == Basis::Z) {
            push_noise1(c, InstrKind::FlipX, all_data);
            push(c, InstrKind::MeasureZ, qubit_targets(all_data));
        } else {
            push_noise1(c, InstrKind::FlipZ, all_data);
            push(c, InstrKind::MeasureX, qubit_targets(all_data));
        }
        push_noise1(c, InstrKind::Depolarize1, all_aux);
        push(c, InstrKind::ShiftCoords, {}, {0, 0, 1});

        // Reconstructed stabilizer parity vs the last auxiliary outcome.
        for (std::size_t s : basis_stabs) {
            std::vector<Target> targets;
            for (const auto& slot : layout.stabilizers[s].data_slots) {
                if (slot) targets.push_back(Target::rec(static_cast<int32_t>(ndata - *slot)));
            }
            targets.push_back(Target::rec(static_cast<int32_t>(ndata + naux - s)));
            push(c, InstrKind::Detector, std::move(targets), detector_coords(s));
        }

        const auto& support =
            opts.basis == Basis::Z ? layout.logical_z_support : layout.logical_x_support;
        std::vector<Target> obs;
        for (uint32_t q : support) obs.push_back(Target::rec(static_cast<int32_t>(ndata - q)));
        push(c, InstrKind::ObservableInclude, std::move(obs), {0});
        return c;
    }
};

}  // namespace

Circuit build_memory_circuit(const CodeLayout& layout, const CnotOrder& order,
                             const NoiseParams& noise, const BuildOptions& opts) {
    if (noise.p < 0 || noise.p >= 0.5) {
        throw std::invalid_argument(fmt::format("noise probability {} outside [0, 0.5)", noise.p));
    }
    if (opts.rounds < 0) {
        throw std::invalid_argument("rounds must be at least 1");
    }
    auto report = validate_order(layout, order);
    if (!report.commutes || (!report.parallel && !opts.bypass_parallel_criterion)) {
        std::string why;
        if (!report.commutes) why += "commutation criterion failed";
        if (!report.parallel && !opts.bypass_parallel_criterion) {
            if (!why.empty()) why += "; ";
            why += "parallelism criterion failed";
        }
        throw std::invalid_argument(
            fmt::format("CNOT order {} is not usable: {}", order.str(), why));
    }
    return Builder(layout, order, noise.p, opts).build();
}

}  // namespace surfmem
