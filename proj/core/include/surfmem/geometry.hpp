#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace surfmem {

enum class CodeFamily { Rotated, Unrotated };
enum class Basis { X, Z };

inline Basis opposite(Basis b) { return b == Basis::X ? Basis::Z : Basis::X; }
std::string_view to_string(CodeFamily family);
std::string_view to_string(Basis basis);
CodeFamily family_from_string(std::string_view s);
Basis basis_from_string(std::string_view s);

struct Coord {
    int x = 0;
    int y = 0;
    friend bool operator==(const Coord&, const Coord&) = default;
    friend auto operator<=>(const Coord&, const Coord&) = default;
};

// One stabilizer measurement site. `data_slots[label]` holds the data-qubit
// index sitting at geometric slot `label` (see slot_offsets), or nullopt on a
// boundary where that neighbour is missing.
struct StabilizerSpec {
    Basis type = Basis::X;
    Coord auxiliary;
    std::array<std::optional<uint32_t>, 4> data_slots;

    int weight() const {
        int w = 0;
        for (const auto& s : data_slots) w += s.has_value() ? 1 : 0;
        return w;
    }
};

struct CodeLayout {
    CodeFamily family = CodeFamily::Rotated;
    int distance = 0;
    bool stabilizer_swap = false;
    std::vector<Coord> data_qubits;           // sorted by (x, y)
    std::vector<StabilizerSpec> stabilizers;  // sorted by auxiliary (x, y)
    std::vector<uint32_t> logical_x_support;  // data indices, ordered along the chain
    std::vector<uint32_t> logical_z_support;

    std::size_t num_data() const { return data_qubits.size(); }
    std::size_t num_aux() const { return stabilizers.size(); }
    std::size_t total_qubits() const { return num_data() + num_aux(); }

    // Qubit indexing convention shared with the circuit builder: data qubits
    // first, then one auxiliary per stabilizer in stabilizer order.
    uint32_t aux_qubit(std::size_t stab_index) const {
        return static_cast<uint32_t>(num_data() + stab_index);
    }
    Coord qubit_coord(uint32_t qubit) const {
        return qubit < num_data() ? data_qubits[qubit]
                                  : stabilizers[qubit - num_data()].auxiliary;
    }
};

// Slot label -> geometric offset from the auxiliary, one constant table per
// family. Labels run clockwise; labels {0,2} and {1,3} each span one axis.
const std::array<Coord, 4>& slot_offsets(CodeFamily family);
int slot_axis(int slot);  // 0 for labels {0,2}, 1 for {1,3}

// CNOT order for one round of stabilizer measurement, quoted X then Z type,
// e.g. "23102130".
struct CnotOrder {
    std::array<uint8_t, 4> x_order{0, 1, 2, 3};
    std::array<uint8_t, 4> z_order{0, 1, 2, 3};

    static CnotOrder from_string(std::string_view digits);
    std::string str() const;
    friend bool operator==(const CnotOrder&, const CnotOrder&) = default;
};

enum class HookClass { None, XHook, ZHook, Both };
std::string_view to_string(HookClass hook);

struct ValidityReport {
    bool commutes = false;
    bool parallel = false;
    HookClass hook = HookClass::None;

    // Derived, never stored: hook is always None for unrotated layouts, so the
    // same expression serves both families.
    bool valid() const { return commutes && parallel && hook == HookClass::None; }
};

// Builds a rotated or unrotated surface-code layout. Qubit totals follow
// 2d^2-1 (rotated) and 4d^2-4d+1 (unrotated). The default orientation puts the
// logical X chain vertical and the logical Z chain horizontal;
// `stabilizer_swap` inverts every stabilizer's Pauli type and swaps the
// logical supports.
CodeLayout build_layout(CodeFamily family, int distance, bool stabilizer_swap = false);

ValidityReport validate_order(const CodeLayout& layout, const CnotOrder& order);

// A hook is reported for a stabilizer type when the data qubits of its final
// two CNOTs are displaced parallel to the same-type logical operator. The
// copied error in the unrotated code can never align with a logical operator,
// so unrotated layouts always report None.
HookClass classify_hook(const CodeLayout& layout, const CnotOrder& order);

// Number of weight-d data-qubit chains implementing the logical operator of
// `basis`, counted on the matching graph (boundary edges cost nothing).
// Exhaustive; requires distance <= 9.
uint64_t count_min_weight_paths(const CodeLayout& layout, Basis basis);

// Structured-text dump consumed by tests and external tooling.
std::string layout_to_json(const CodeLayout& layout);

}  // namespace surfmem
