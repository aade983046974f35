#include <charconv>
#include <cctype>
#include <map>
#include <string>

#include <fmt/format.h>

#include "surfmem/circuit.hpp"
#include "surfmem/error.hpp"

namespace surfmem {

namespace {

void emit_instruction(const Instruction& instr, const Circuit& circuit, int indent,
                      std::string& out) {
    out.append(static_cast<std::size_t>(indent), ' ');
    if (instr.kind == InstrKind::RepeatBlock) {
        out += fmt::format("REPEAT {} {{\n", instr.repeat_count);
        for (const auto& inner : circuit.blocks.at(instr.block).instructions) {
            emit_instruction(inner, circuit.blocks.at(instr.block), indent + 4, out);
        }
        out.append(static_cast<std::size_t>(indent), ' ');
        out += "}\n";
        return;
    }
    out += instr_name(instr.kind);
    if (!instr.params.empty()) {
        out += '(';
        for (std::size_t i = 0; i < instr.params.size(); ++i) {
            if (i) out += ", ";
            out += fmt::format("{}", instr.params[i]);
        }
        out += ')';
    }
    for (const auto& t : instr.targets) {
        if (t.is_rec) {
            out += fmt::format(" rec[-{}]", t.value);
        } else {
            out += fmt::format(" {}", t.value);
        }
    }
    out += '\n';
}

struct KindSpec {
    InstrKind kind;
    int min_params;
    int max_params;
    bool rec_targets;   // targets are record references
    bool pair_targets;  // targets come in pairs
};

const std::map<std::string, KindSpec, std::less<>>& name_table() {
    static const std::map<std::string, KindSpec, std::less<>> table{
        {"R", {InstrKind::ResetZ, 0, 0, false, false}},
        {"RX", {InstrKind::ResetX, 0, 0, false, false}},
        {"H", {InstrKind::Hadamard, 0, 0, false, false}},
        {"CX", {InstrKind::Cnot, 0, 0, false, true}},
        {"I", {InstrKind::Idle, 0, 0, false, false}},
        {"M", {InstrKind::MeasureZ, 0, 1, false, false}},
        {"MX", {InstrKind::MeasureX, 0, 0, false, false}},
        {"MR", {InstrKind::MeasureResetZ, 0, 0, false, false}},
        {"DEPOLARIZE1", {InstrKind::Depolarize1, 1, 1, false, false}},
        {"DEPOLARIZE2", {InstrKind::Depolarize2, 1, 1, false, true}},
        {"X_ERROR", {InstrKind::FlipX, 1, 1, false, false}},
        {"Z_ERROR", {InstrKind::FlipZ, 1, 1, false, false}},
        {"TICK", {InstrKind::Tick, 0, 0, false, false}},
        {"DETECTOR", {InstrKind::Detector, 0, 3, true, false}},
        {"OBSERVABLE_INCLUDE", {InstrKind::ObservableInclude, 1, 1, true, false}},
        {"QUBIT_COORDS", {InstrKind::QubitCoords, 2, 2, false, false}},
        {"SHIFT_COORDS", {InstrKind::ShiftCoords, 1, 3, false, false}},
    };
    return table;
}

struct Parser {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1;

    bool at_end() const { return pos >= text.size(); }

    void skip_space() {
        while (!at_end() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r')) ++pos;
    }

    void skip_blank() {
        for (;;) {
            skip_space();
            if (!at_end() && text[pos] == '#') {
                while (!at_end() && text[pos] != '\n') ++pos;
            }
            if (!at_end() && text[pos] == '\n') {
                ++pos;
                ++line;
                continue;
            }
            return;
        }
    }

    [[noreturn]] void fail(const std::string& what) const { throw parse_error(line, what); }

    std::string_view read_name() {
        std::size_t start = pos;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
            ++pos;
        }
        if (pos == start) fail("expected an instruction name");
        return text.substr(start, pos - start);
    }

    double read_double() {
        skip_space();
        double value = 0;
        auto begin = text.data() + pos;
        auto end = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{}) fail("expected a number");
        pos += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    int64_t read_int() {
        skip_space();
        int64_t value = 0;
        auto begin = text.data() + pos;
        auto end = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{}) fail("expected an integer");
        pos += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    // Parses instructions until `closing_brace` (or end of input), appending to
    // `out`.
    void parse_block(Circuit& out, bool closing_brace) {
        for (;;) {
            skip_blank();
            if (at_end()) {
                if (closing_brace) fail("missing '}' closing a REPEAT block");
                return;
            }
            if (text[pos] == '}') {
                if (!closing_brace) fail("unexpected '}'");
                ++pos;
                return;
            }
            auto name = read_name();
            if (name == "REPEAT") {
                skip_space();
                int64_t count = read_int();
                if (count < 1) fail("REPEAT count must be positive");
                skip_blank();
                if (at_end() || text[pos] != '{') fail("expected '{' after REPEAT count");
                ++pos;
                Circuit body;
                parse_block(body, true);
                Instruction instr;
                instr.kind = InstrKind::RepeatBlock;
                instr.repeat_count = static_cast<uint64_t>(count);
                instr.block = static_cast<int32_t>(out.blocks.size());
                out.blocks.push_back(std::move(body));
                out.instructions.push_back(std::move(instr));
                continue;
            }

            auto it = name_table().find(name);
            if (it == name_table().end()) {
                fail(fmt::format("unknown instruction '{}'", name));
            }
            KindSpec spec = it->second;

            Instruction instr;
            instr.kind = spec.kind;
            skip_space();
            if (!at_end() && text[pos] == '(') {
                ++pos;
                for (;;) {
                    instr.params.push_back(read_double());
                    skip_space();
                    if (!at_end() && text[pos] == ',') {
                        ++pos;
                        continue;
                    }
                    break;
                }
                skip_space();
                if (at_end() || text[pos] != ')') fail("expected ')'");
                ++pos;
            }
            if (static_cast<int>(instr.params.size()) < spec.min_params ||
                static_cast<int>(instr.params.size()) > spec.max_params) {
                fail(fmt::format("instruction '{}' takes {}..{} parameters, got {}", name,
                                 spec.min_params, spec.max_params, instr.params.size()));
            }
            if (spec.kind == InstrKind::MeasureZ && instr.params.size() == 1) {
                instr.kind = InstrKind::MeasureFlip;
                if (instr.params[0] < 0 || instr.params[0] > 1) {
                    fail("measurement flip probability outside [0, 1]");
                }
            }
            if (spec.kind == InstrKind::Depolarize1 || spec.kind == InstrKind::Depolarize2 ||
                spec.kind == InstrKind::FlipX || spec.kind == InstrKind::FlipZ) {
                if (instr.params[0] < 0 || instr.params[0] > 1) {
                    fail("error probability outside [0, 1]");
                }
            }

            // Targets until end of line (or '}' for single-line blocks).
            for (;;) {
                skip_space();
                if (at_end() || text[pos] == '\n' || text[pos] == '#' || text[pos] == '}') break;
                if (text.compare(pos, 4, "rec[") == 0) {
                    pos += 4;
                    int64_t v = read_int();
                    if (v >= 0) fail("malformed record reference: expected rec[-k] with k >= 1");
                    if (at_end() || text[pos] != ']') fail("malformed record reference: missing ']'");
                    ++pos;
                    if (!spec.rec_targets) {
                        fail(fmt::format("instruction '{}' does not take record references", name));
                    }
                    instr.targets.push_back(Target::rec(static_cast<int32_t>(-v)));
                } else {
                    int64_t q = read_int();
                    if (q < 0) fail("negative qubit index");
                    if (spec.rec_targets) {
                        fail(fmt::format("instruction '{}' takes record references only", name));
                    }
                    instr.targets.push_back(Target::qubit(static_cast<uint32_t>(q)));
                }
            }
            if (spec.pair_targets && instr.targets.size() % 2 != 0) {
                fail(fmt::format("instruction '{}' needs an even number of targets", name));
            }
            if (spec.kind == InstrKind::QubitCoords && instr.targets.size() != 1) {
                fail("QUBIT_COORDS takes exactly one qubit");
            }
            out.instructions.push_back(std::move(instr));
        }
    }
};

}  // namespace

std::string emit_text(const Circuit& circuit) {
    std::string out;
    for (const auto& instr : circuit.instructions) {
        emit_instruction(instr, circuit, 0, out);
    }
    return out;
}

Circuit parse_text(std::string_view text) {
    Parser parser{text};
    Circuit circuit;
    parser.parse_block(circuit, false);
    return circuit;
}

}  // namespace surfmem
