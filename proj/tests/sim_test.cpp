#include <random>

#include "gtest/gtest.h"

#include "surfmem/circuit.hpp"
#include "surfmem/error.hpp"
#include "surfmem/frame_sim.hpp"
#include "surfmem/tableau.hpp"

using namespace surfmem;

namespace {

Circuit memory_circuit(CodeFamily family, int d, const char* order, Basis basis, double p,
                       int rounds = 0) {
    auto layout = build_layout(family, d);
    BuildOptions opts;
    opts.basis = basis;
    opts.rounds = rounds;
    return build_memory_circuit(layout, CnotOrder::from_string(order), NoiseParams{p}, opts);
}

// Channel sites of the measurement-flip X_ERROR directly before each MR, in
// flattened order. Entry r holds round r+1's sites indexed by stabilizer.
std::vector<uint64_t> mr_flip_instructions(const Circuit& circuit) {
    std::vector<Instruction> flat;
    circuit.for_each_instruction([&](const Instruction& i) { flat.push_back(i); });
    std::vector<uint64_t> out;
    for (std::size_t i = 1; i < flat.size(); ++i) {
        if (flat[i].kind == InstrKind::MeasureResetZ) {
            EXPECT_EQ(flat[i - 1].kind, InstrKind::FlipX);
            out.push_back(i - 1);
        }
    }
    return out;
}

FaultInjection random_injection(const std::vector<ChannelSite>& sites, std::mt19937_64& rng) {
    FaultInjection inj;
    std::uniform_int_distribution<std::size_t> pick(0, sites.size() - 1);
    std::uniform_int_distribution<int> weight(1, 3);
    int n = weight(rng);
    for (int i = 0; i < n; ++i) {
        const auto& site = sites[pick(rng)];
        ForcedFault fault;
        fault.instruction = site.instruction;
        fault.target_group = site.target_group;
        if (site.arity == 1) {
            fault.term = PauliTerm::single(
                static_cast<uint8_t>(std::uniform_int_distribution<int>(1, 3)(rng)));
        } else {
            int t = std::uniform_int_distribution<int>(1, 15)(rng);
            fault.term = PauliTerm::pair(static_cast<uint8_t>(t >> 2),
                                         static_cast<uint8_t>(t & 3));
        }
        inj.push_back(fault);
    }
    return inj;
}

}  // namespace

TEST(FrameSim, NoiselessShotsAreAllZero) {
    for (auto family : {CodeFamily::Rotated, CodeFamily::Unrotated}) {
        for (auto basis : {Basis::X, Basis::Z}) {
            auto c = memory_circuit(family, 3, "23102130", basis, 0.0);
            auto record = sample(c, 10000, 42);
            EXPECT_EQ(record.count_observable_flips(), 0u);
            for (uint64_t w : record.detector_bits) EXPECT_EQ(w, 0u);
        }
    }
}

TEST(FrameSim, ZeroShotsGiveEmptyRecord) {
    auto c = memory_circuit(CodeFamily::Rotated, 3, "23102130", Basis::Z, 0.001);
    auto record = sample(c, 0, 7);
    EXPECT_EQ(record.shots, 0u);
    EXPECT_TRUE(record.detector_bits.empty());
}

TEST(FrameSim, DeterministicGivenSeed) {
    auto c = memory_circuit(CodeFamily::Rotated, 3, "32013021", Basis::Z, 0.01);
    auto a = sample(c, 70000, 123);  // crosses a batch boundary
    auto b = sample(c, 70000, 123);
    EXPECT_TRUE(a.same_outcomes(b));
    auto other = sample(c, 70000, 124);
    EXPECT_FALSE(a.same_outcomes(other));
}

TEST(FrameSim, SingleMeasurementFlipFiresTimeAdjacentDetectorPair) {
    auto layout = build_layout(CodeFamily::Rotated, 3);
    BuildOptions opts;
    opts.rounds = 9;
    auto c = build_memory_circuit(layout, CnotOrder::from_string("23102130"), NoiseParams{0.001},
                                  opts);
    auto flips = mr_flip_instructions(c);
    ASSERT_EQ(flips.size(), 9u);

    // Pick a Z-type stabilizer (memory Z detectors) and flip its round-5 outcome.
    uint32_t stab = 0;
    while (layout.stabilizers[stab].type != Basis::Z) ++stab;
    FaultInjection inj{{flips[4], stab, PauliTerm::single(1)}};
    auto record = sample_with_injections(c, std::span(&inj, 1));

    auto info = detector_info(c);
    std::vector<uint32_t> fired;
    for (uint32_t d = 0; d < record.detector_count; ++d) {
        if (record.detector(0, d)) fired.push_back(d);
    }
    ASSERT_EQ(fired.size(), 2u);
    const Coord aux = layout.stabilizers[stab].auxiliary;
    for (uint32_t d : fired) {
        EXPECT_DOUBLE_EQ(info[d].coords[0], aux.x);
        EXPECT_DOUBLE_EQ(info[d].coords[1], aux.y);
    }
    EXPECT_DOUBLE_EQ(info[fired[1]].coords[2] - info[fired[0]].coords[2], 1.0);
    EXPECT_EQ(record.count_observable_flips(), 0u);
}

TEST(FrameSim, InjectionLinearity) {
    auto c = memory_circuit(CodeFamily::Unrotated, 2, "21302130", Basis::Z, 0.001);
    auto sites = enumerate_channels(c);
    ASSERT_FALSE(sites.empty());
    std::mt19937_64 rng(99);
    for (int round = 0; round < 50; ++round) {
        auto a = random_injection(sites, rng);
        auto b = random_injection(sites, rng);
        // Symmetric difference over (site, term) triples.
        FaultInjection sym;
        auto key = [](const ForcedFault& f) {
            return std::tuple(f.instruction, f.target_group, f.term.q0, f.term.q1);
        };
        for (const auto& f : a) {
            bool in_b = false;
            for (const auto& g : b) in_b |= key(f) == key(g);
            if (!in_b) sym.push_back(f);
        }
        for (const auto& g : b) {
            bool in_a = false;
            for (const auto& f : a) in_a |= key(f) == key(g);
            if (!in_a) sym.push_back(g);
        }
        std::vector<FaultInjection> shots{a, b, sym};
        auto record = sample_with_injections(c, shots);
        for (uint32_t d = 0; d < record.detector_count; ++d) {
            EXPECT_EQ(record.detector(0, d) ^ record.detector(1, d), record.detector(2, d));
        }
        EXPECT_EQ(record.observable_flip(0) ^ record.observable_flip(1),
                  record.observable_flip(2));
    }
}

TEST(FrameSim, RejectsBogusInjection) {
    auto c = memory_circuit(CodeFamily::Unrotated, 2, "21302130", Basis::Z, 0.001);
    FaultInjection bad{{0, 0, PauliTerm::single(1)}};  // instruction 0 is QUBIT_COORDS
    EXPECT_THROW(sample_with_injections(c, std::span(&bad, 1)), std::invalid_argument);
    auto sites = enumerate_channels(c);
    FaultInjection identity{{sites[0].instruction, sites[0].target_group, PauliTerm{}}};
    EXPECT_THROW(sample_with_injections(c, std::span(&identity, 1)), std::invalid_argument);
}

TEST(FrameSim, DumpRoundTrip) {
    auto c = memory_circuit(CodeFamily::Rotated, 3, "32013021", Basis::Z, 0.02);
    auto record = sample(c, 777, 5);
    auto bytes = dump_samples(record);
    auto loaded = load_samples(bytes);
    EXPECT_TRUE(record.same_outcomes(loaded));
    EXPECT_EQ(loaded.seed, record.seed);
    EXPECT_THROW(load_samples(bytes.substr(0, bytes.size() - 1)), parse_error);
}

TEST(Tableau, NoiselessDeterminismOnValidOrders) {
    for (auto family : {CodeFamily::Rotated, CodeFamily::Unrotated}) {
        for (auto basis : {Basis::X, Basis::Z}) {
            auto c = memory_circuit(family, 3, "32013021", basis, 0.0);
            EXPECT_NO_THROW(check_noiseless_determinism(c));
            auto record = tableau_simulate(c, 64, 11);
            for (uint64_t w : record.detector_bits) EXPECT_EQ(w, 0u);
        }
    }
}

TEST(Tableau, FlagsNonDeterministicDetector) {
    // A detector on a coin-flip measurement is not deterministic.
    auto c = parse_text("H 0\nM 0\nDETECTOR rec[-1]\n");
    EXPECT_THROW(check_noiseless_determinism(c, 16), integrity_error);
}

TEST(Tableau, OracleQubitCap) {
    auto c = memory_circuit(CodeFamily::Unrotated, 4, "21302130", Basis::Z, 0.0);
    ASSERT_GT(c.num_qubits(), kTableauOracleMaxQubits);
    EXPECT_THROW(tableau_simulate(c, 1, 0), capability_error);
    // The determinism check is not capped.
    EXPECT_NO_THROW(check_noiseless_determinism(c, 2));
}

TEST(Tableau, MatchesFrameSamplerUnderInjections) {
    std::mt19937_64 rng(2024);
    for (auto family : {CodeFamily::Rotated, CodeFamily::Unrotated}) {
        auto c = memory_circuit(family, 2, "21302130", Basis::Z, 0.001);
        auto sites = enumerate_channels(c);
        std::vector<FaultInjection> shots;
        for (int i = 0; i < 200; ++i) shots.push_back(random_injection(sites, rng));
        auto frame = sample_with_injections(c, shots);
        auto oracle = tableau_simulate(c, shots);
        EXPECT_TRUE(frame.same_outcomes(oracle)) << to_string(family);
    }
}

TEST(Tableau, MarginalsMatchFrameSampler) {
    auto c = memory_circuit(CodeFamily::Unrotated, 2, "21302130", Basis::Z, 0.01);
    const uint64_t n_frame = 200000, n_tab = 50000;
    auto frame = sample(c, n_frame, 31);
    auto oracle = tableau_simulate(c, n_tab, 32);
    ASSERT_EQ(frame.detector_count, oracle.detector_count);
    for (uint32_t d = 0; d < frame.detector_count; ++d) {
        uint64_t kf = 0, kt = 0;
        for (uint64_t s = 0; s < n_frame; ++s) kf += frame.detector(s, d);
        for (uint64_t s = 0; s < n_tab; ++s) kt += oracle.detector(s, d);
        double pf = static_cast<double>(kf) / n_frame;
        double pt = static_cast<double>(kt) / n_tab;
        double sigma = std::sqrt(pf * (1 - pf) / n_frame + pt * (1 - pt) / n_tab);
        EXPECT_NEAR(pf, pt, 4 * sigma + 1e-9) << "detector " << d;
    }
}
