#include "surfmem/frame_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "surfmem/error.hpp"

namespace surfmem {

namespace detail {

namespace {
uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t state = seed ^ (0xD1B54A32D192ED03ull * (stream + 1));
    uint64_t out = splitmix64(state);
    out ^= splitmix64(state);
    return out;
}

}  // namespace detail

uint64_t SampleRecord::count_observable_flips() const {
    uint64_t count = 0;
    for (uint64_t w : observable_bits) count += static_cast<uint64_t>(std::popcount(w));
    return count;
}

bool SampleRecord::same_outcomes(const SampleRecord& other) const {
    return shots == other.shots && detector_count == other.detector_count &&
           detector_bits == other.detector_bits && observable_bits == other.observable_bits;
}

namespace {

constexpr uint64_t kBatchShots = 65536;  // reproducibility partition, 1024 words

bool is_noise_kind(InstrKind kind) {
    return kind == InstrKind::Depolarize1 || kind == InstrKind::Depolarize2 ||
           kind == InstrKind::FlipX || kind == InstrKind::FlipZ;
}

enum class OpType { Reset, Hadamard, Cnot, Measure, Noise };

struct Op {
    OpType type = OpType::Reset;
    InstrKind kind = InstrKind::ResetZ;
    double p = 0;
    std::vector<uint32_t> qubits;
    uint64_t meas_base = 0;   // Measure: record index of first target
    bool x_basis = false;     // Measure: record the X frame component
    bool reset_after = false; // Measure: clear the frame afterwards
    double record_flip = 0;   // Measure: classical record flip probability
    uint64_t flat_index = 0;
};

struct Plan {
    uint32_t num_qubits = 0;
    uint64_t num_measurements = 0;
    std::vector<Op> ops;
    std::vector<DetectorInfo> detectors;
    std::vector<uint64_t> observable;  // measurement indices of observable 0
};

Plan compile(const Circuit& circuit) {
    Plan plan;
    plan.num_qubits = circuit.num_qubits();
    plan.detectors = detector_info(circuit);
    auto observables = observable_info(circuit);
    if (observables.size() > 1) {
        throw capability_error("the sampler supports a single logical observable");
    }
    if (!observables.empty()) plan.observable = observables[0];

    uint64_t meas = 0;
    uint64_t flat = 0;
    circuit.for_each_instruction([&](const Instruction& instr) {
        const uint64_t index = flat++;
        Op op;
        op.flat_index = index;
        switch (instr.kind) {
            case InstrKind::ResetZ:
            case InstrKind::ResetX:
                op.type = OpType::Reset;
                break;
            case InstrKind::Hadamard:
                op.type = OpType::Hadamard;
                break;
            case InstrKind::Cnot:
                op.type = OpType::Cnot;
                break;
            case InstrKind::MeasureZ:
            case InstrKind::MeasureX:
            case InstrKind::MeasureResetZ:
            case InstrKind::MeasureFlip:
                op.type = OpType::Measure;
                op.meas_base = meas;
                op.x_basis = instr.kind == InstrKind::MeasureX;
                op.reset_after = instr.kind == InstrKind::MeasureResetZ;
                op.record_flip =
                    instr.kind == InstrKind::MeasureFlip && !instr.params.empty()
                        ? instr.params[0]
                        : 0.0;
                meas += instr.targets.size();
                break;
            case InstrKind::Depolarize1:
            case InstrKind::Depolarize2:
            case InstrKind::FlipX:
            case InstrKind::FlipZ:
                op.type = OpType::Noise;
                op.p = instr.params.at(0);
                break;
            default:
                return;  // annotations and TICK/I: nothing to execute
        }
        op.kind = instr.kind;
        op.qubits.reserve(instr.targets.size());
        for (const auto& t : instr.targets) op.qubits.push_back(static_cast<uint32_t>(t.value));
        plan.ops.push_back(std::move(op));
    });
    plan.num_measurements = meas;
    return plan;
}

inline double unit_open(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
}

// Visits Bernoulli(p) hit positions in [0, n) using geometric skips.
template <typename Fn>
void for_each_hit(std::mt19937_64& rng, double p, uint64_t n, Fn&& fn) {
    if (p <= 0 || n == 0) return;
    const double inv_log = 1.0 / std::log1p(-p);
    int64_t pos = -1;
    for (;;) {
        double jump = std::log(unit_open(rng)) * inv_log;  // >= 0
        pos += 1 + static_cast<int64_t>(jump);
        if (pos < 0 || pos >= static_cast<int64_t>(n)) return;
        fn(static_cast<uint64_t>(pos));
    }
}

struct LaneState {
    uint64_t words = 0;
    uint64_t shots = 0;
    std::vector<uint64_t> x, z;
    std::vector<uint64_t> meas;

    LaneState(uint32_t num_qubits, uint64_t num_meas, uint64_t shots_in_batch)
        : words((shots_in_batch + 63) / 64),
          shots(shots_in_batch),
          x(static_cast<std::size_t>(num_qubits) * words),
          z(static_cast<std::size_t>(num_qubits) * words),
          meas(num_meas * words) {}

    void clear_frames() {
        std::fill(x.begin(), x.end(), 0);
        std::fill(z.begin(), z.end(), 0);
    }
    uint64_t* xq(uint32_t q) { return x.data() + static_cast<std::size_t>(q) * words; }
    uint64_t* zq(uint32_t q) { return z.data() + static_cast<std::size_t>(q) * words; }

    void apply_pauli(uint32_t q, uint8_t pauli, uint64_t shot) {
        const uint64_t word = shot / 64, bit = 1ull << (shot % 64);
        if (pauli == 1 || pauli == 2) xq(q)[word] ^= bit;
        if (pauli == 3 || pauli == 2) zq(q)[word] ^= bit;
    }
};

using InjectionTable =
    std::map<std::pair<uint64_t, uint32_t>, std::vector<std::pair<uint64_t, PauliTerm>>>;

void run_batch(const Plan& plan, LaneState& state, std::mt19937_64* rng,
               const InjectionTable* injections) {
    const uint64_t W = state.words;
    for (const auto& op : plan.ops) {
        switch (op.type) {
            case OpType::Reset:
                for (uint32_t q : op.qubits) {
                    std::fill_n(state.xq(q), W, 0);
                    std::fill_n(state.zq(q), W, 0);
                }
                break;
            case OpType::Hadamard:
                for (uint32_t q : op.qubits) {
                    uint64_t* xs = state.xq(q);
                    uint64_t* zs = state.zq(q);
                    for (uint64_t w = 0; w < W; ++w) std::swap(xs[w], zs[w]);
                }
                break;
            case OpType::Cnot:
                for (std::size_t i = 0; i + 1 < op.qubits.size(); i += 2) {
                    uint64_t* xc = state.xq(op.qubits[i]);
                    uint64_t* zc = state.zq(op.qubits[i]);
                    uint64_t* xt = state.xq(op.qubits[i + 1]);
                    uint64_t* zt = state.zq(op.qubits[i + 1]);
                    for (uint64_t w = 0; w < W; ++w) {
                        xt[w] ^= xc[w];
                        zc[w] ^= zt[w];
                    }
                }
                break;
            case OpType::Measure:
                for (std::size_t i = 0; i < op.qubits.size(); ++i) {
                    const uint32_t q = op.qubits[i];
                    uint64_t* source = op.x_basis ? state.zq(q) : state.xq(q);
                    uint64_t* record = state.meas.data() + (op.meas_base + i) * W;
                    std::copy_n(source, W, record);
                    if (op.reset_after) {
                        std::fill_n(state.xq(q), W, 0);
                        std::fill_n(state.zq(q), W, 0);
                    }
                }
                if (op.record_flip > 0 && rng != nullptr) {
                    for_each_hit(*rng, op.record_flip, op.qubits.size() * state.shots,
                                 [&](uint64_t pos) {
                                     const uint64_t target = pos / state.shots;
                                     const uint64_t shot = pos % state.shots;
                                     state.meas[(op.meas_base + target) * W + shot / 64] ^=
                                         1ull << (shot % 64);
                                 });
                }
                break;
            case OpType::Noise: {
                if (injections != nullptr) {
                    const uint32_t groups = op.kind == InstrKind::Depolarize2
                                                ? static_cast<uint32_t>(op.qubits.size() / 2)
                                                : static_cast<uint32_t>(op.qubits.size());
                    for (uint32_t g = 0; g < groups; ++g) {
                        auto it = injections->find({op.flat_index, g});
                        if (it == injections->end()) continue;
                        for (const auto& [shot, term] : it->second) {
                            if (op.kind == InstrKind::Depolarize2) {
                                state.apply_pauli(op.qubits[2 * g], term.q0, shot);
                                state.apply_pauli(op.qubits[2 * g + 1], term.q1, shot);
                            } else {
                                state.apply_pauli(op.qubits[g], term.q0, shot);
                            }
                        }
                    }
                    break;
                }
                if (op.p <= 0) break;
                switch (op.kind) {
                    case InstrKind::FlipX:
                    case InstrKind::FlipZ: {
                        const bool is_x = op.kind == InstrKind::FlipX;
                        for_each_hit(*rng, op.p, op.qubits.size() * state.shots,
                                     [&](uint64_t pos) {
                                         state.apply_pauli(op.qubits[pos / state.shots],
                                                           is_x ? 1 : 3, pos % state.shots);
                                     });
                        break;
                    }
                    case InstrKind::Depolarize1: {
                        std::uniform_int_distribution<int> term(1, 3);
                        for_each_hit(*rng, op.p, op.qubits.size() * state.shots,
                                     [&](uint64_t pos) {
                                         state.apply_pauli(op.qubits[pos / state.shots],
                                                           static_cast<uint8_t>(term(*rng)),
                                                           pos % state.shots);
                                     });
                        break;
                    }
                    case InstrKind::Depolarize2: {
                        std::uniform_int_distribution<int> term(1, 15);
                        const uint64_t pairs = op.qubits.size() / 2;
                        for_each_hit(*rng, op.p, pairs * state.shots, [&](uint64_t pos) {
                            const uint64_t pair = pos / state.shots;
                            const uint64_t shot = pos % state.shots;
                            const int t = term(*rng);
                            state.apply_pauli(op.qubits[2 * pair],
                                              static_cast<uint8_t>(t >> 2), shot);
                            state.apply_pauli(op.qubits[2 * pair + 1],
                                              static_cast<uint8_t>(t & 3), shot);
                        });
                        break;
                    }
                    default:
                        break;
                }
                break;
            }
        }
    }
}

void extract_outputs(const Plan& plan, const LaneState& state, SampleRecord& out,
                     uint64_t word_offset) {
    const uint64_t W = state.words;
    const uint64_t out_words = out.words_per_lane();
    for (std::size_t d = 0; d < plan.detectors.size(); ++d) {
        uint64_t* dst = out.detector_bits.data() + d * out_words + word_offset;
        for (uint64_t m : plan.detectors[d].measurements) {
            const uint64_t* src = state.meas.data() + m * W;
            for (uint64_t w = 0; w < W; ++w) dst[w] ^= src[w];
        }
    }
    uint64_t* obs = out.observable_bits.data() + word_offset;
    for (uint64_t m : plan.observable) {
        const uint64_t* src = state.meas.data() + m * W;
        for (uint64_t w = 0; w < W; ++w) obs[w] ^= src[w];
    }
}

}  // namespace

std::vector<ChannelSite> enumerate_channels(const Circuit& circuit) {
    std::vector<ChannelSite> sites;
    uint64_t flat = 0;
    circuit.for_each_instruction([&](const Instruction& instr) {
        const uint64_t index = flat++;
        if (!is_noise_kind(instr.kind)) return;
        const int arity = instr.kind == InstrKind::Depolarize2 ? 2 : 1;
        const std::size_t groups = instr.targets.size() / static_cast<std::size_t>(arity);
        for (std::size_t g = 0; g < groups; ++g) {
            ChannelSite site;
            site.instruction = index;
            site.target_group = static_cast<uint32_t>(g);
            site.kind = instr.kind;
            site.p = instr.params.at(0);
            site.arity = arity;
            site.qubits[0] = static_cast<uint32_t>(instr.targets[g * arity].value);
            if (arity == 2) {
                site.qubits[1] = static_cast<uint32_t>(instr.targets[g * arity + 1].value);
            }
            sites.push_back(site);
        }
    });
    return sites;
}

SampleRecord sample(const Circuit& circuit, uint64_t shots, uint64_t seed) {
    Plan plan = compile(circuit);
    SampleRecord out;
    out.shots = shots;
    out.seed = seed;
    out.detector_count = static_cast<uint32_t>(plan.detectors.size());
    if (shots == 0) return out;
    out.detector_bits.assign(plan.detectors.size() * out.words_per_lane(), 0);
    out.observable_bits.assign(out.words_per_lane(), 0);

    const uint64_t batches = (shots + kBatchShots - 1) / kBatchShots;
    for (uint64_t b = 0; b < batches; ++b) {
        const uint64_t batch_shots = std::min(kBatchShots, shots - b * kBatchShots);
        LaneState state(plan.num_qubits, plan.num_measurements, batch_shots);
        std::mt19937_64 rng(detail::mix_seed(seed, b));
        run_batch(plan, state, &rng, nullptr);
        extract_outputs(plan, state, out, b * (kBatchShots / 64));
    }
    return out;
}

SampleRecord sample_with_injections(const Circuit& circuit,
                                    std::span<const FaultInjection> injections) {
    Plan plan = compile(circuit);

    // Validate that every forced fault addresses a real channel site.
    std::map<std::pair<uint64_t, uint32_t>, const ChannelSite*> site_map;
    auto sites = enumerate_channels(circuit);
    for (const auto& site : sites) site_map[{site.instruction, site.target_group}] = &site;
    InjectionTable table;
    for (std::size_t shot = 0; shot < injections.size(); ++shot) {
        for (const auto& fault : injections[shot]) {
            auto it = site_map.find({fault.instruction, fault.target_group});
            if (it == site_map.end()) {
                throw std::invalid_argument(
                    fmt::format("forced fault addresses instruction {} group {} which is not "
                                "a noise channel",
                                fault.instruction, fault.target_group));
            }
            const ChannelSite& site = *it->second;
            const bool identity =
                fault.term.q0 == 0 && (site.arity == 1 || fault.term.q1 == 0);
            if (identity || fault.term.q0 > 3 || fault.term.q1 > 3 ||
                (site.arity == 1 && fault.term.q1 != 0)) {
                throw std::invalid_argument("forced fault term is malformed for its channel");
            }
            table[{fault.instruction, fault.target_group}].push_back({shot, fault.term});
        }
    }

    SampleRecord out;
    out.shots = injections.size();
    out.detector_count = static_cast<uint32_t>(plan.detectors.size());
    if (out.shots == 0) return out;
    out.detector_bits.assign(plan.detectors.size() * out.words_per_lane(), 0);
    out.observable_bits.assign(out.words_per_lane(), 0);

    LaneState state(plan.num_qubits, plan.num_measurements, out.shots);
    run_batch(plan, state, nullptr, &table);
    extract_outputs(plan, state, out, 0);
    return out;
}

std::string dump_samples(const SampleRecord& record) {
    const uint64_t row_bytes = (record.detector_count + 1 + 7) / 8;
    std::string out;
    out.reserve(24 + row_bytes * record.shots);
    out += "SMS1";
    auto put_u32 = [&](uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    auto put_u64 = [&](uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    put_u32(record.detector_count);
    put_u64(record.shots);
    put_u64(record.seed);
    for (uint64_t shot = 0; shot < record.shots; ++shot) {
        std::string row(row_bytes, '\0');
        for (uint32_t d = 0; d < record.detector_count; ++d) {
            if (record.detector(shot, d)) row[d / 8] |= static_cast<char>(1 << (d % 8));
        }
        if (record.observable_flip(shot)) {
            row[record.detector_count / 8] |=
                static_cast<char>(1 << (record.detector_count % 8));
        }
        out += row;
    }
    return out;
}

SampleRecord load_samples(std::string_view bytes) {
    if (bytes.size() < 24 || bytes.substr(0, 4) != "SMS1") {
        throw parse_error(1, "sample dump missing SMS1 header");
    }
    auto get_u32 = [&](std::size_t at) {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes[at + i])) << (8 * i);
        return v;
    };
    auto get_u64 = [&](std::size_t at) {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(bytes[at + i])) << (8 * i);
        return v;
    };
    SampleRecord record;
    record.detector_count = get_u32(4);
    record.shots = get_u64(8);
    record.seed = get_u64(16);
    const uint64_t row_bytes = (record.detector_count + 1 + 7) / 8;
    if (bytes.size() != 24 + row_bytes * record.shots) {
        throw parse_error(1, "sample dump truncated");
    }
    record.detector_bits.assign(record.detector_count * record.words_per_lane(), 0);
    record.observable_bits.assign(record.words_per_lane(), 0);
    for (uint64_t shot = 0; shot < record.shots; ++shot) {
        const char* row = bytes.data() + 24 + shot * row_bytes;
        for (uint32_t d = 0; d < record.detector_count; ++d) {
            if ((row[d / 8] >> (d % 8)) & 1) {
                record.detector_bits[d * record.words_per_lane() + shot / 64] |=
                    1ull << (shot % 64);
            }
        }
        if ((row[record.detector_count / 8] >> (record.detector_count % 8)) & 1) {
            record.observable_bits[shot / 64] |= 1ull << (shot % 64);
        }
    }
    return record;
}

}  // namespace surfmem
