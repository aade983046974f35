#include "surfmem/circuit.hpp"

#include <map>
#include <set>

#include "gtest/gtest.h"

#include "surfmem/error.hpp"

using namespace surfmem;

namespace {

Circuit build(CodeFamily family, int d, const char* order, Basis basis, double p,
              BuildOptions opts = {}) {
    auto layout = build_layout(family, d);
    opts.basis = basis;
    return build_memory_circuit(layout, CnotOrder::from_string(order), NoiseParams{p}, opts);
}

// Independent detector-count oracle: enumerate what each round contributes.
uint64_t expected_detectors(const CodeLayout& layout, const BuildOptions& opts, int rounds) {
    uint64_t same = 0, all = 0;
    for (const auto& stab : layout.stabilizers) {
        if (stab.type == opts.basis) ++same;
        ++all;
    }
    uint64_t per_round = opts.exclude_opposite_detectors ? same : all;
    return same + static_cast<uint64_t>(rounds - 1) * per_round + same;
}

}  // namespace

TEST(Circuit, DetectorCountMatchesEnumeration) {
    auto layout = build_layout(CodeFamily::Rotated, 3);
    auto order = CnotOrder::from_string("23102130");

    BuildOptions excl;
    excl.basis = Basis::Z;
    excl.rounds = 9;
    auto c1 = build_memory_circuit(layout, order, NoiseParams{0.001}, excl);
    EXPECT_EQ(c1.detector_count(), expected_detectors(layout, excl, 9));
    EXPECT_EQ(c1.detector_count(), 40u);

    BuildOptions incl = excl;
    incl.exclude_opposite_detectors = false;
    auto c2 = build_memory_circuit(layout, order, NoiseParams{0.001}, incl);
    EXPECT_EQ(c2.detector_count(), expected_detectors(layout, incl, 9));
    EXPECT_EQ(c2.detector_count(), 4u + 8u * 8u + 4u);  // 72

    EXPECT_EQ(c1.observable_count(), 1u);
    EXPECT_EQ(c1.num_qubits(), 17u);
}

TEST(Circuit, DefaultRoundsAreThreeTimesDistance) {
    for (int d : {2, 3, 5}) {
        auto layout = build_layout(CodeFamily::Unrotated, d);
        BuildOptions opts;
        auto c = build_memory_circuit(layout, CnotOrder::from_string("21302130"), NoiseParams{0},
                                      opts);
        EXPECT_EQ(c.measurement_count(),
                  static_cast<uint64_t>(3 * d) * layout.num_aux() + layout.num_data());
    }
}

TEST(Circuit, RejectsBadOrders) {
    auto layout = build_layout(CodeFamily::Unrotated, 3);
    // 0123/0123 shares axes each step but does not commute.
    EXPECT_THROW(build_memory_circuit(layout, CnotOrder::from_string("01230123"), NoiseParams{0},
                                      BuildOptions{}),
                 std::invalid_argument);
    // Interspersed order: commutes but is not parallel; allowed only with the
    // bypass flag.
    auto interspersed = CnotOrder::from_string("01321023");
    auto report = validate_order(layout, interspersed);
    EXPECT_TRUE(report.commutes);
    EXPECT_FALSE(report.parallel);
    EXPECT_THROW(
        build_memory_circuit(layout, interspersed, NoiseParams{0}, BuildOptions{}),
        std::invalid_argument);
    BuildOptions bypass;
    bypass.bypass_parallel_criterion = true;
    EXPECT_NO_THROW(build_memory_circuit(layout, interspersed, NoiseParams{0}, bypass));
}

TEST(Circuit, RejectsBadNoise) {
    auto layout = build_layout(CodeFamily::Rotated, 3);
    auto order = CnotOrder::from_string("23102130");
    EXPECT_THROW(build_memory_circuit(layout, order, NoiseParams{0.5}, BuildOptions{}),
                 std::invalid_argument);
    EXPECT_THROW(build_memory_circuit(layout, order, NoiseParams{-0.1}, BuildOptions{}),
                 std::invalid_argument);
}

TEST(Circuit, EmitParseRoundTrip) {
    for (auto family : {CodeFamily::Rotated, CodeFamily::Unrotated}) {
        for (auto basis : {Basis::X, Basis::Z}) {
            for (double p : {0.0, 0.001}) {
                auto c = build(family, 3, "32013021", basis, p);
                auto text = emit_text(c);
                auto reparsed = parse_text(text);
                EXPECT_EQ(emit_text(reparsed), text);
                EXPECT_EQ(reparsed.detector_count(), c.detector_count());
                EXPECT_EQ(reparsed.measurement_count(), c.measurement_count());
            }
        }
    }
}

TEST(Circuit, ParseGrammar) {
    EXPECT_TRUE(parse_text("").instructions.empty());
    EXPECT_TRUE(parse_text("  \n # just a comment\n").instructions.empty());

    auto c = parse_text("X_ERROR(0.001) 3 5\n");
    ASSERT_EQ(c.instructions.size(), 1u);
    EXPECT_EQ(c.instructions[0].kind, InstrKind::FlipX);
    EXPECT_DOUBLE_EQ(c.instructions[0].params[0], 0.001);
    ASSERT_EQ(c.instructions[0].targets.size(), 2u);
    EXPECT_EQ(c.instructions[0].targets[0], Target::qubit(3));
    EXPECT_EQ(c.instructions[0].targets[1], Target::qubit(5));

    auto r = parse_text("REPEAT 3 { M 0 }");
    EXPECT_EQ(r.measurement_count(), 3u);

    auto m = parse_text("M(0.125) 7");
    EXPECT_EQ(m.instructions[0].kind, InstrKind::MeasureFlip);

    auto det = parse_text("M 0 1\nDETECTOR(1, 2, 0) rec[-1] rec[-2]\n");
    auto info = detector_info(det);
    ASSERT_EQ(info.size(), 1u);
    EXPECT_EQ(info[0].measurements, (std::vector<uint64_t>{1, 0}));
    EXPECT_TRUE(info[0].has_coords);
    EXPECT_DOUBLE_EQ(info[0].coords[0], 1.0);
}

TEST(Circuit, ParseErrors) {
    EXPECT_THROW(parse_text("FROB 1 2\n"), parse_error);
    EXPECT_THROW(parse_text("M rec[-1]\n"), parse_error);
    EXPECT_THROW(parse_text("DETECTOR rec[1]\n"), parse_error);
    EXPECT_THROW(parse_text("DETECTOR rec[-1\n"), parse_error);
    EXPECT_THROW(parse_text("REPEAT 2 {\nM 0\n"), parse_error);
    EXPECT_THROW(parse_text("X_ERROR(1.5) 0\n"), parse_error);
    EXPECT_THROW(parse_text("CX 0 1 2\n"), parse_error);
    try {
        parse_text("M 0\nWAT 1\n");
        FAIL() << "expected parse_error";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line, 2);
    }
}

TEST(Circuit, DetectorRefsNeverReachBeforeFirstMeasurement) {
    for (auto family : {CodeFamily::Rotated, CodeFamily::Unrotated}) {
        auto c = build(family, 3, "23102130", Basis::Z, 0.001);
        EXPECT_NO_THROW(detector_info(c));
        auto bad = parse_text("M 0\nDETECTOR rec[-2]\n");
        EXPECT_THROW(detector_info(bad), integrity_error);
    }
}

// Every round after the first is one body of the repeat block; the gate steps
// of round 1 must match that body exactly so rounds are uniform.
TEST(Circuit, RoundUniformity) {
    auto c = build(CodeFamily::Unrotated, 3, "10231203", Basis::Z, 0.001);
    ASSERT_EQ(c.blocks.size(), 1u);
    const auto& body = c.blocks[0].instructions;
    ASSERT_GT(body.size(), 2u);
    EXPECT_EQ(body.front().kind, InstrKind::Tick);

    std::size_t body_end = 0;
    while (body_end < body.size() && body[body_end].kind != InstrKind::ShiftCoords) ++body_end;
    ASSERT_LT(body_end, body.size());

    // Locate round 1: first Tick after the initialisation resets.
    std::size_t start = 0;
    while (c.instructions[start].kind != InstrKind::Tick) ++start;
    for (std::size_t i = 1; i < body_end; ++i) {
        ASSERT_LT(start + i, c.instructions.size());
        EXPECT_EQ(c.instructions[start + i], body[i]) << "instruction " << i;
    }
}

// Each step of each round covers every qubit with noise channels: gate targets
// with the gate's own channel, everything else with one idle channel. The
// measure-reset step carries two flip channels on the auxiliaries.
TEST(Circuit, NoiseCoversEveryQubitEachStep) {
    auto c = build(CodeFamily::Rotated, 3, "32013021", Basis::Z, 0.001);
    const uint32_t n = c.num_qubits();

    std::vector<Instruction> flat;
    c.for_each_instruction([&](const Instruction& i) { flat.push_back(i); });

    std::size_t i = 0;
    auto is_gate = [](InstrKind k) {
        return k == InstrKind::ResetZ || k == InstrKind::ResetX || k == InstrKind::Hadamard ||
               k == InstrKind::Cnot || k == InstrKind::MeasureZ || k == InstrKind::MeasureX ||
               k == InstrKind::MeasureResetZ;
    };
    auto is_channel = [](InstrKind k) {
        return k == InstrKind::Depolarize1 || k == InstrKind::Depolarize2 ||
               k == InstrKind::FlipX || k == InstrKind::FlipZ;
    };
    int steps_checked = 0;
    while (i < flat.size()) {
        std::map<uint32_t, int> channel_hits;
        std::set<uint32_t> gated;
        bool has_gate = false, has_mr = false;
        for (; i < flat.size() && flat[i].kind != InstrKind::Tick; ++i) {
            if (is_gate(flat[i].kind)) {
                has_gate = true;
                if (flat[i].kind == InstrKind::MeasureResetZ) has_mr = true;
                for (const auto& t : flat[i].targets) gated.insert(t.value);
            }
            if (is_channel(flat[i].kind)) {
                for (const auto& t : flat[i].targets) channel_hits[t.value]++;
            }
        }
        if (i < flat.size()) ++i;  // skip the Tick
        if (!has_gate) continue;
        ++steps_checked;
        for (uint32_t q = 0; q < n; ++q) {
            int expected = 1;
            if (has_mr && gated.count(q)) expected = 2;
            EXPECT_EQ(channel_hits[q], expected) << "qubit " << q << " in step " << steps_checked;
        }
    }
    EXPECT_GE(steps_checked, 8);
}

TEST(Circuit, ZAuxIdleToggleChangesOnlyHadamardStepIdles) {
    auto layout = build_layout(CodeFamily::Unrotated, 3);
    auto order = CnotOrder::from_string("10231203");
    BuildOptions with;
    with.rounds = 4;
    BuildOptions without = with;
    without.z_aux_idle_during_h = false;

    auto a = build_memory_circuit(layout, order, NoiseParams{0.001}, with);
    auto b = build_memory_circuit(layout, order, NoiseParams{0.001}, without);

    std::vector<Instruction> fa, fb;
    a.for_each_instruction([&](const Instruction& i) { fa.push_back(i); });
    b.for_each_instruction([&](const Instruction& i) { fb.push_back(i); });
    ASSERT_EQ(fa.size(), fb.size());

    std::set<uint32_t> z_aux;
    for (std::size_t s = 0; s < layout.num_aux(); ++s) {
        if (layout.stabilizers[s].type == Basis::Z) z_aux.insert(layout.aux_qubit(s));
    }

    int differing = 0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        if (fa[i] == fb[i]) continue;
        ++differing;
        EXPECT_EQ(fa[i].kind, InstrKind::Depolarize1);
        EXPECT_EQ(fb[i].kind, InstrKind::Depolarize1);
        std::set<uint32_t> ta, tb;
        for (const auto& t : fa[i].targets) ta.insert(t.value);
        for (const auto& t : fb[i].targets) tb.insert(t.value);
        std::set<uint32_t> diff;
        std::set_difference(ta.begin(), ta.end(), tb.begin(), tb.end(),
                            std::inserter(diff, diff.begin()));
        EXPECT_EQ(diff, z_aux);
    }
    EXPECT_EQ(differing, 2 * 4);  // two Hadamard steps per round
}
