#include "surfmem/tableau.hpp"

#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "surfmem/error.hpp"

namespace surfmem {

namespace {

// Aaronson-Gottesman tableau: rows 0..n-1 destabilizers, n..2n-1 stabilizers.
class Tableau {
  public:
    explicit Tableau(uint32_t n) : n_(n), words_((n + 63) / 64) { reset_all(); }

    void reset_all() {
        x_.assign(2 * static_cast<std::size_t>(n_) * words_, 0);
        z_.assign(2 * static_cast<std::size_t>(n_) * words_, 0);
        r_.assign(2 * n_, 0);
        for (uint32_t i = 0; i < n_; ++i) {
            set_x(i, i, true);           // destabilizer i = X_i
            set_z(n_ + i, i, true);      // stabilizer i = Z_i
        }
    }

    void h(uint32_t q) {
        for (uint32_t row = 0; row < 2 * n_; ++row) {
            bool xv = get_x(row, q), zv = get_z(row, q);
            if (xv && zv) r_[row] ^= 1;
            set_x(row, q, zv);
            set_z(row, q, xv);
        }
    }

    void cx(uint32_t c, uint32_t t) {
        for (uint32_t row = 0; row < 2 * n_; ++row) {
            bool xc = get_x(row, c), zc = get_z(row, c);
            bool xt = get_x(row, t), zt = get_z(row, t);
            if (xc && zt && (xt == zc)) r_[row] ^= 1;
            set_x(row, t, xt ^ xc);
            set_z(row, c, zc ^ zt);
        }
    }

    void pauli_x(uint32_t q) {
        for (uint32_t row = 0; row < 2 * n_; ++row) r_[row] ^= get_z(row, q);
    }
    void pauli_z(uint32_t q) {
        for (uint32_t row = 0; row < 2 * n_; ++row) r_[row] ^= get_x(row, q);
    }
    void pauli_y(uint32_t q) {
        for (uint32_t row = 0; row < 2 * n_; ++row) r_[row] ^= get_x(row, q) ^ get_z(row, q);
    }
    void pauli(uint8_t term, uint32_t q) {
        if (term == 1) pauli_x(q);
        if (term == 2) pauli_y(q);
        if (term == 3) pauli_z(q);
    }

    // Measures Z on qubit q. `random_bit` supplies the outcome when the result
    // is intrinsically random.
    template <typename RandomBit>
    bool measure_z(uint32_t q, RandomBit&& random_bit) {
        uint32_t p = 2 * n_;
        for (uint32_t row = n_; row < 2 * n_; ++row) {
            if (get_x(row, q)) {
                p = row;
                break;
            }
        }
        if (p < 2 * n_) {
            for (uint32_t row = 0; row < 2 * n_; ++row) {
                if (row != p && get_x(row, q)) row_mult(row, p);
            }
            copy_row(p - n_, p);
            zero_row(p);
            set_z(p, q, true);
            bool outcome = random_bit();
            r_[p] = outcome ? 1 : 0;
            return outcome;
        }
        // Deterministic: accumulate stabilizer rows flagged by destabilizers.
        scratch_x_.assign(words_, 0);
        scratch_z_.assign(words_, 0);
        scratch_r_ = 0;
        for (uint32_t i = 0; i < n_; ++i) {
            if (get_x(i, q)) scratch_mult(n_ + i);
        }
        return scratch_r_ != 0;
    }

    uint32_t n() const { return n_; }

  private:
    uint32_t n_;
    uint32_t words_;
    std::vector<uint64_t> x_, z_;
    std::vector<uint8_t> r_;
    std::vector<uint64_t> scratch_x_, scratch_z_;
    int scratch_r_ = 0;

    std::size_t base(uint32_t row) const { return static_cast<std::size_t>(row) * words_; }
    bool get_x(uint32_t row, uint32_t q) const {
        return (x_[base(row) + q / 64] >> (q % 64)) & 1;
    }
    bool get_z(uint32_t row, uint32_t q) const {
        return (z_[base(row) + q / 64] >> (q % 64)) & 1;
    }
    void set_x(uint32_t row, uint32_t q, bool v) {
        uint64_t& w = x_[base(row) + q / 64];
        w = (w & ~(1ull << (q % 64))) | (static_cast<uint64_t>(v) << (q % 64));
    }
    void set_z(uint32_t row, uint32_t q, bool v) {
        uint64_t& w = z_[base(row) + q / 64];
        w = (w & ~(1ull << (q % 64))) | (static_cast<uint64_t>(v) << (q % 64));
    }
    void copy_row(uint32_t dst, uint32_t src) {
        for (uint32_t w = 0; w < words_; ++w) {
            x_[base(dst) + w] = x_[base(src) + w];
            z_[base(dst) + w] = z_[base(src) + w];
        }
        r_[dst] = r_[src];
    }
    void zero_row(uint32_t row) {
        for (uint32_t w = 0; w < words_; ++w) {
            x_[base(row) + w] = 0;
            z_[base(row) + w] = 0;
        }
        r_[row] = 0;
    }

    // Phase exponent of i contributed by multiplying single-qubit Paulis
    // (x1,z1) * (x2,z2), from the Aaronson-Gottesman rowsum rules.
    static int phase_g(bool x1, bool z1, bool x2, bool z2) {
        if (!x1 && !z1) return 0;
        if (x1 && z1) return static_cast<int>(z2) - static_cast<int>(x2);
        if (x1) return z2 ? (x2 ? 1 : -1) : 0;
        return x2 ? (z2 ? -1 : 1) : 0;
    }

    // row h <- row h * row i
    void row_mult(uint32_t h, uint32_t i) {
        int phase = 2 * r_[h] + 2 * r_[i];
        for (uint32_t q = 0; q < n_; ++q) {
            phase += phase_g(get_x(i, q), get_z(i, q), get_x(h, q), get_z(h, q));
        }
        for (uint32_t w = 0; w < words_; ++w) {
            x_[base(h) + w] ^= x_[base(i) + w];
            z_[base(h) + w] ^= z_[base(i) + w];
        }
        r_[h] = ((phase % 4) + 4) % 4 == 2 ? 1 : 0;
    }

    void scratch_mult(uint32_t i) {
        int phase = 2 * scratch_r_ + 2 * r_[i];
        for (uint32_t q = 0; q < n_; ++q) {
            bool hx = (scratch_x_[q / 64] >> (q % 64)) & 1;
            bool hz = (scratch_z_[q / 64] >> (q % 64)) & 1;
            phase += phase_g(get_x(i, q), get_z(i, q), hx, hz);
        }
        for (uint32_t w = 0; w < words_; ++w) {
            scratch_x_[w] ^= x_[base(i) + w];
            scratch_z_[w] ^= z_[base(i) + w];
        }
        scratch_r_ = ((phase % 4) + 4) % 4 == 2 ? 1 : 0;
    }
};

struct ShotRunner {
    const Circuit& circuit;
    bool noise_enabled = true;
    const std::map<std::pair<uint64_t, uint32_t>, std::vector<PauliTerm>>* forced = nullptr;

    std::vector<bool> run(uint32_t num_qubits, std::mt19937_64& rng) const {
        Tableau tab(num_qubits);
        std::vector<bool> record;
        auto random_bit = [&] { return (rng() & 1) != 0; };
        auto bernoulli = [&](double p) {
            return p > 0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
        };

        uint64_t flat = 0;
        circuit.for_each_instruction([&](const Instruction& instr) {
            const uint64_t index = flat++;
            auto qubit = [&](std::size_t i) {
                return static_cast<uint32_t>(instr.targets[i].value);
            };
            switch (instr.kind) {
                case InstrKind::ResetZ:
                    for (std::size_t i = 0; i < instr.targets.size(); ++i) {
                        if (tab.measure_z(qubit(i), random_bit)) tab.pauli_x(qubit(i));
                    }
                    break;
                case InstrKind::ResetX:
                    for (std::size_t i = 0; i < instr.targets.size(); ++i) {
                        if (tab.measure_z(qubit(i), random_bit)) tab.pauli_x(qubit(i));
                        tab.h(qubit(i));
                    }
                    break;
                case InstrKind::Hadamard:
                    for (std::size_t i = 0; i < instr.targets.size(); ++i) tab.h(qubit(i));
                    break;
                case InstrKind::Cnot:
                    for (std::size_t i = 0; i + 1 < instr.targets.size(); i += 2) {
                        tab.cx(qubit(i), qubit(i + 1));
                    }
                    break;
                case InstrKind::MeasureZ:
                case InstrKind::MeasureFlip:
                    for (std::size_t i = 0; i < instr.targets.size(); ++i) {
                        bool m = tab.measure_z(qubit(i), random_bit);
                        if (instr.kind == InstrKind::MeasureFlip && noise_enabled &&
                            forced == nullptr && bernoulli(instr.params.at(0))) {
                            m = !m;
                        }
                        record.push_back(m);
                    }
                    break;
                case InstrKind::MeasureX:
                    for (std::size_t i = 0; i < instr.targets.size(); ++i) {
                        tab.h(qubit(i));
                        record.push_back(tab.measure_z(qubit(i), random_bit));
                        tab.h(qubit(i));
                    }
                    break;
                case InstrKind::MeasureResetZ:
                    for (std::size_t i = 0; i < instr.targets.size(); ++i) {
                        bool m = tab.measure_z(qubit(i), random_bit);
                        record.push_back(m);
                        if (m) tab.pauli_x(qubit(i));
                    }
                    break;
                case InstrKind::Depolarize1:
                case InstrKind::Depolarize2:
                case InstrKind::FlipX:
                case InstrKind::FlipZ: {
                    const int arity = instr.kind == InstrKind::Depolarize2 ? 2 : 1;
                    const std::size_t groups = instr.targets.size() / arity;
                    for (std::size_t g = 0; g < groups; ++g) {
                        if (forced != nullptr) {
                            auto it = forced->find({index, static_cast<uint32_t>(g)});
                            if (it == forced->end()) continue;
                            for (const auto& term : it->second) {
                                tab.pauli(term.q0, qubit(g * arity));
                                if (arity == 2) tab.pauli(term.q1, qubit(g * arity + 1));
                            }
                            continue;
                        }
                        if (!noise_enabled) continue;
                        const double p = instr.params.at(0);
                        if (!bernoulli(p)) continue;
                        switch (instr.kind) {
                            case InstrKind::FlipX:
                                tab.pauli_x(qubit(g));
                                break;
                            case InstrKind::FlipZ:
                                tab.pauli_z(qubit(g));
                                break;
                            case InstrKind::Depolarize1:
                                tab.pauli(static_cast<uint8_t>(
                                              std::uniform_int_distribution<int>(1, 3)(rng)),
                                          qubit(g));
                                break;
                            case InstrKind::Depolarize2: {
                                int t = std::uniform_int_distribution<int>(1, 15)(rng);
                                tab.pauli(static_cast<uint8_t>(t >> 2), qubit(2 * g));
                                tab.pauli(static_cast<uint8_t>(t & 3), qubit(2 * g + 1));
                                break;
                            }
                            default:
                                break;
                        }
                    }
                    break;
                }
                default:
                    break;  // annotations, TICK, I
            }
        });
        return record;
    }
};

SampleRecord assemble(const Circuit& circuit, uint64_t shots,
                      const std::function<std::vector<bool>(uint64_t shot)>& run_shot) {
    const auto detectors = detector_info(circuit);
    const auto observables = observable_info(circuit);
    SampleRecord out;
    out.shots = shots;
    out.detector_count = static_cast<uint32_t>(detectors.size());
    if (shots == 0) return out;
    out.detector_bits.assign(detectors.size() * out.words_per_lane(), 0);
    out.observable_bits.assign(out.words_per_lane(), 0);

    for (uint64_t shot = 0; shot < shots; ++shot) {
        const auto record = run_shot(shot);
        const uint64_t word = shot / 64;
        const uint64_t bit = 1ull << (shot % 64);
        for (std::size_t d = 0; d < detectors.size(); ++d) {
            bool parity = false;
            for (uint64_t m : detectors[d].measurements) parity ^= record[m];
            if (parity) out.detector_bits[d * out.words_per_lane() + word] |= bit;
        }
        if (!observables.empty()) {
            bool parity = false;
            for (uint64_t m : observables[0]) parity ^= record[m];
            if (parity) out.observable_bits[word] |= bit;
        }
    }
    return out;
}

void check_oracle_scale(const Circuit& circuit) {
    const uint32_t n = circuit.num_qubits();
    if (n > kTableauOracleMaxQubits) {
        throw capability_error(fmt::format(
            "tableau oracle is limited to {} qubits, circuit uses {}", kTableauOracleMaxQubits, n));
    }
}

}  // namespace

SampleRecord tableau_simulate(const Circuit& circuit, uint64_t shots, uint64_t seed) {
    check_oracle_scale(circuit);
    const uint32_t n = circuit.num_qubits();
    ShotRunner runner{circuit, true, nullptr};
    auto out = assemble(circuit, shots, [&](uint64_t shot) {
        std::mt19937_64 rng(detail::mix_seed(seed, shot));
        return runner.run(n, rng);
    });
    out.seed = seed;
    return out;
}

SampleRecord tableau_simulate(const Circuit& circuit,
                              std::span<const FaultInjection> injections, uint64_t seed) {
    check_oracle_scale(circuit);
    const uint32_t n = circuit.num_qubits();

    // Validate against the channel-site table once.
    std::map<std::pair<uint64_t, uint32_t>, int> arity_of;
    for (const auto& site : enumerate_channels(circuit)) {
        arity_of[{site.instruction, site.target_group}] = site.arity;
    }
    std::vector<std::map<std::pair<uint64_t, uint32_t>, std::vector<PauliTerm>>> forced(
        injections.size());
    for (std::size_t shot = 0; shot < injections.size(); ++shot) {
        for (const auto& fault : injections[shot]) {
            auto it = arity_of.find({fault.instruction, fault.target_group});
            if (it == arity_of.end()) {
                throw std::invalid_argument("forced fault does not address a noise channel");
            }
            forced[shot][{fault.instruction, fault.target_group}].push_back(fault.term);
        }
    }

    auto out = assemble(circuit, injections.size(), [&](uint64_t shot) {
        std::mt19937_64 rng(detail::mix_seed(seed, shot));
        ShotRunner runner{circuit, false, &forced[shot]};
        return runner.run(n, rng);
    });
    out.seed = seed;
    return out;
}

void check_noiseless_determinism(const Circuit& circuit, int trials, uint64_t seed) {
    const uint32_t n = circuit.num_qubits();
    ShotRunner runner{circuit, false, nullptr};
    auto record = assemble(circuit, static_cast<uint64_t>(trials), [&](uint64_t shot) {
        std::mt19937_64 rng(detail::mix_seed(seed, shot));
        return runner.run(n, rng);
    });
    for (uint32_t d = 0; d < record.detector_count; ++d) {
        for (uint64_t shot = 0; shot < record.shots; ++shot) {
            if (record.detector(shot, d)) {
                throw integrity_error(fmt::format(
                    "detector {} is not deterministically zero in the noiseless circuit", d));
            }
        }
    }
}

}  // namespace surfmem
