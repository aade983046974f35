#include "surfmem/geometry.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "surfmem/error.hpp"
#include "nlohmann/json.hpp"

namespace surfmem {

std::string_view to_string(CodeFamily family) {
    return family == CodeFamily::Rotated ? "rotated" : "unrotated";
}

std::string_view to_string(Basis basis) { return basis == Basis::X ? "X" : "Z"; }

CodeFamily family_from_string(std::string_view s) {
    if (s == "rotated") return CodeFamily::Rotated;
    if (s == "unrotated") return CodeFamily::Unrotated;
    throw std::invalid_argument(fmt::format("unknown code family '{}'", s));
}

Basis basis_from_string(std::string_view s) {
    if (s == "X" || s == "x") return Basis::X;
    if (s == "Z" || s == "z") return Basis::Z;
    throw std::invalid_argument(fmt::format("unknown basis '{}'", s));
}

std::string_view to_string(HookClass hook) {
    switch (hook) {
        case HookClass::None: return "none";
        case HookClass::XHook: return "x-hook";
        case HookClass::ZHook: return "z-hook";
        case HookClass::Both: return "both";
    }
    return "?";
}

const std::array<Coord, 4>& slot_offsets(CodeFamily family) {
    // Clockwise labels. Unrotated data sit on the lattice axes, rotated data on
    // the diagonals. In both tables labels {0,2} and {1,3} are antiparallel
    // pairs, so they form the two axis groups of the parallelism criterion.
    static const std::array<Coord, 4> kUnrotated{{{0, 1}, {1, 0}, {0, -1}, {-1, 0}}};
    static const std::array<Coord, 4> kRotated{{{-1, 1}, {1, 1}, {1, -1}, {-1, -1}}};
    return family == CodeFamily::Rotated ? kRotated : kUnrotated;
}

int slot_axis(int slot) { return (slot == 0 || slot == 2) ? 0 : 1; }

CnotOrder CnotOrder::from_string(std::string_view digits) {
    if (digits.size() != 8) {
        throw std::invalid_argument(
            fmt::format("CNOT order must be 8 digits (X order then Z order), got '{}'", digits));
    }
    CnotOrder order;
    std::array<bool, 4> seen_x{}, seen_z{};
    for (int i = 0; i < 8; ++i) {
        char c = digits[i];
        if (c < '0' || c > '3') {
            throw std::invalid_argument(fmt::format("CNOT order digit out of range in '{}'", digits));
        }
        uint8_t v = static_cast<uint8_t>(c - '0');
        if (i < 4) {
            order.x_order[i] = v;
            seen_x[v] = true;
        } else {
            order.z_order[i - 4] = v;
            seen_z[v] = true;
        }
    }
    for (int s = 0; s < 4; ++s) {
        if (!seen_x[s] || !seen_z[s]) {
            throw std::invalid_argument(
                fmt::format("CNOT order '{}' is not a pair of permutations of 0123", digits));
        }
    }
    return order;
}

std::string CnotOrder::str() const {
    std::string out(8, '0');
    for (int i = 0; i < 4; ++i) {
        out[i] = static_cast<char>('0' + x_order[i]);
        out[4 + i] = static_cast<char>('0' + z_order[i]);
    }
    return out;
}

namespace {

struct CoordMap {
    std::map<Coord, uint32_t> index;
    std::optional<uint32_t> find(Coord c) const {
        auto it = index.find(c);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
};

void attach_slots(CodeLayout& layout, const CoordMap& data_index) {
    const auto& offsets = slot_offsets(layout.family);
    for (auto& stab : layout.stabilizers) {
        for (int slot = 0; slot < 4; ++slot) {
            Coord c{stab.auxiliary.x + offsets[slot].x, stab.auxiliary.y + offsets[slot].y};
            stab.data_slots[slot] = data_index.find(c);
        }
    }
}

CodeLayout build_unrotated(int d) {
    CodeLayout layout;
    layout.family = CodeFamily::Unrotated;
    layout.distance = d;

    const int span = 2 * (d - 1);
    CoordMap data_index;
    for (int x = 0; x <= span; ++x) {
        for (int y = 0; y <= span; ++y) {
            if ((x + y) % 2 == 0) {
                data_index.index[{x, y}] = 0;  // renumbered below
            }
        }
    }
    uint32_t idx = 0;
    for (auto& [coord, i] : data_index.index) {
        i = idx++;
        layout.data_qubits.push_back(coord);
    }

    // X-type auxiliaries on (odd, even), Z-type on (even, odd). The top and
    // bottom rows then hold X-type auxiliaries, making the vertical chain the
    // logical X operator.
    for (int x = 0; x <= span; ++x) {
        for (int y = 0; y <= span; ++y) {
            if ((x + y) % 2 == 0) continue;
            StabilizerSpec stab;
            stab.auxiliary = {x, y};
            stab.type = (x % 2 == 1) ? Basis::X : Basis::Z;
            layout.stabilizers.push_back(stab);
        }
    }
    attach_slots(layout, data_index);

    for (int y = 0; y <= span; y += 2) {
        layout.logical_x_support.push_back(data_index.index.at({0, y}));
    }
    for (int x = 0; x <= span; x += 2) {
        layout.logical_z_support.push_back(data_index.index.at({x, 0}));
    }
    return layout;
}

CodeLayout build_rotated(int d) {
    CodeLayout layout;
    layout.family = CodeFamily::Rotated;
    layout.distance = d;

    CoordMap data_index;
    for (int x = 1; x <= 2 * d - 1; x += 2) {
        for (int y = 1; y <= 2 * d - 1; y += 2) {
            data_index.index[{x, y}] = 0;
        }
    }
    uint32_t idx = 0;
    for (auto& [coord, i] : data_index.index) {
        i = idx++;
        layout.data_qubits.push_back(coord);
    }

    // Auxiliary candidates on the even-even grid. Bulk sites keep all four
    // neighbours; boundary sites keep two and survive only when their Pauli
    // type matches the boundary: top/bottom rows keep X-type, left/right
    // columns keep Z-type. The vertical chain then terminates on the X-type
    // boundaries, as the logical X operator must.
    for (int i = 0; i <= d; ++i) {
        for (int j = 0; j <= d; ++j) {
            Coord aux{2 * i, 2 * j};
            int neighbours = 0;
            for (const auto& off : slot_offsets(CodeFamily::Rotated)) {
                if (data_index.find({aux.x + off.x, aux.y + off.y})) ++neighbours;
            }
            Basis type = ((i + j) % 2 == 0) ? Basis::X : Basis::Z;
            bool keep = false;
            if (neighbours == 4) {
                keep = true;
            } else if (neighbours == 2) {
                bool on_top_bottom = (j == 0 || j == d);
                bool on_left_right = (i == 0 || i == d);
                if (on_top_bottom && !on_left_right) keep = (type == Basis::X);
                if (on_left_right && !on_top_bottom) keep = (type == Basis::Z);
            }
            if (!keep) continue;
            StabilizerSpec stab;
            stab.auxiliary = aux;
            stab.type = type;
            layout.stabilizers.push_back(stab);
        }
    }
    std::sort(layout.stabilizers.begin(), layout.stabilizers.end(),
              [](const StabilizerSpec& a, const StabilizerSpec& b) {
                  return a.auxiliary < b.auxiliary;
              });
    attach_slots(layout, data_index);

    for (int y = 1; y <= 2 * d - 1; y += 2) {
        layout.logical_x_support.push_back(data_index.index.at({1, y}));
    }
    for (int x = 1; x <= 2 * d - 1; x += 2) {
        layout.logical_z_support.push_back(data_index.index.at({x, 1}));
    }
    return layout;
}

// Stabilizers of different type must share an even number of data qubits or
// the code itself is inconsistent.
void check_pairwise_supports(const CodeLayout& layout) {
    std::vector<std::vector<uint32_t>> supports(layout.num_aux());
    for (std::size_t s = 0; s < layout.num_aux(); ++s) {
        for (const auto& slot : layout.stabilizers[s].data_slots) {
            if (slot) supports[s].push_back(*slot);
        }
        std::sort(supports[s].begin(), supports[s].end());
    }
    for (std::size_t a = 0; a < layout.num_aux(); ++a) {
        for (std::size_t b = a + 1; b < layout.num_aux(); ++b) {
            if (layout.stabilizers[a].type == layout.stabilizers[b].type) continue;
            std::vector<uint32_t> shared;
            std::set_intersection(supports[a].begin(), supports[a].end(), supports[b].begin(),
                                  supports[b].end(), std::back_inserter(shared));
            if (shared.size() % 2 != 0) {
                throw integrity_error(fmt::format(
                    "stabilizers at ({},{}) and ({},{}) share an odd number of data qubits",
                    layout.stabilizers[a].auxiliary.x, layout.stabilizers[a].auxiliary.y,
                    layout.stabilizers[b].auxiliary.x, layout.stabilizers[b].auxiliary.y));
            }
        }
    }
}

}  // namespace

CodeLayout build_layout(CodeFamily family, int distance, bool stabilizer_swap) {
    if (distance < 2) {
        throw std::invalid_argument(
            fmt::format("distance must be at least 2, got {}", distance));
    }
    CodeLayout layout =
        family == CodeFamily::Rotated ? build_rotated(distance) : build_unrotated(distance);

    if (stabilizer_swap) {
        layout.stabilizer_swap = true;
        for (auto& stab : layout.stabilizers) stab.type = opposite(stab.type);
        std::swap(layout.logical_x_support, layout.logical_z_support);
    }

    const std::size_t expected_total =
        family == CodeFamily::Rotated
            ? 2u * distance * distance - 1
            : 4u * distance * distance - 4u * distance + 1;
    if (layout.total_qubits() != expected_total) {
        throw integrity_error(fmt::format("layout for {} d={} has {} qubits, expected {}",
                                          to_string(family), distance, layout.total_qubits(),
                                          expected_total));
    }
    check_pairwise_supports(layout);
    return layout;
}

namespace {

// Direction of the minimum-weight logical operator for `basis`: axis 0 for a
// horizontal chain, 1 for vertical.
int logical_axis(const CodeLayout& layout, Basis basis) {
    const auto& support =
        basis == Basis::X ? layout.logical_x_support : layout.logical_z_support;
    Coord a = layout.data_qubits[support.front()];
    Coord b = layout.data_qubits[support.back()];
    return a.x == b.x ? 1 : 0;
}

bool displacement_parallel_to_axis(Coord disp, int axis) {
    if (axis == 0) return disp.y == 0 && disp.x != 0;
    return disp.x == 0 && disp.y != 0;
}

}  // namespace

HookClass classify_hook(const CodeLayout& layout, const CnotOrder& order) {
    if (layout.family == CodeFamily::Unrotated) return HookClass::None;

    const auto& offsets = slot_offsets(layout.family);
    auto hook_for = [&](const std::array<uint8_t, 4>& slots, Basis type) {
        Coord a = offsets[slots[2]];
        Coord b = offsets[slots[3]];
        Coord disp{b.x - a.x, b.y - a.y};
        return displacement_parallel_to_axis(disp, logical_axis(layout, type));
    };

    bool x_hook = hook_for(order.x_order, Basis::X);
    bool z_hook = hook_for(order.z_order, Basis::Z);
    if (x_hook && z_hook) return HookClass::Both;
    if (x_hook) return HookClass::XHook;
    if (z_hook) return HookClass::ZHook;
    return HookClass::None;
}

ValidityReport validate_order(const CodeLayout& layout, const CnotOrder& order) {
    ValidityReport report;

    report.parallel = true;
    for (int step = 0; step < 4; ++step) {
        if (slot_axis(order.x_order[step]) != slot_axis(order.z_order[step])) {
            report.parallel = false;
            break;
        }
    }

    // Interaction time of a stabilizer with the data qubit in `slot`, refined
    // so that simultaneous X- and Z-type CNOTs resolve in circuit emission
    // order (X-type layers first within a step).
    std::array<int, 4> x_pos{}, z_pos{};
    for (int step = 0; step < 4; ++step) {
        x_pos[order.x_order[step]] = step;
        z_pos[order.z_order[step]] = step;
    }
    auto time_key = [&](Basis type, int slot) {
        return type == Basis::X ? 2 * x_pos[slot] : 2 * z_pos[slot] + 1;
    };

    // Shared data qubits between every X/Z stabilizer pair must be visited in
    // the same relative order by the two circuits.
    std::vector<std::vector<std::pair<uint32_t, int>>> incidence(layout.num_data());
    for (std::size_t s = 0; s < layout.num_aux(); ++s) {
        const auto& stab = layout.stabilizers[s];
        for (int slot = 0; slot < 4; ++slot) {
            if (stab.data_slots[slot]) {
                incidence[*stab.data_slots[slot]].push_back({static_cast<uint32_t>(s), slot});
            }
        }
    }
    std::map<std::pair<uint32_t, uint32_t>, std::vector<std::pair<int, int>>> shared;
    for (const auto& users : incidence) {
        for (const auto& [sa, slot_a] : users) {
            for (const auto& [sb, slot_b] : users) {
                if (sa >= sb) continue;
                if (layout.stabilizers[sa].type == layout.stabilizers[sb].type) continue;
                shared[{sa, sb}].push_back({slot_a, slot_b});
            }
        }
    }
    report.commutes = true;
    for (const auto& [pair, slots] : shared) {
        const Basis type_a = layout.stabilizers[pair.first].type;
        const Basis type_b = layout.stabilizers[pair.second].type;
        int sign = 0;
        for (const auto& [slot_a, slot_b] : slots) {
            int delta = time_key(type_a, slot_a) - time_key(type_b, slot_b);
            int s = delta < 0 ? -1 : 1;
            if (sign == 0) {
                sign = s;
            } else if (sign != s) {
                report.commutes = false;
            }
        }
        if (!report.commutes) break;
    }

    report.hook = classify_hook(layout, order);
    return report;
}

uint64_t count_min_weight_paths(const CodeLayout& layout, Basis basis) {
    if (layout.distance > 9) {
        throw capability_error(
            fmt::format("path counting is exhaustive and limited to distance <= 9, got {}",
                        layout.distance));
    }

    // Errors of `basis` type anticommute with opposite-type stabilizers, which
    // are the graph nodes. Data qubits are the edges; a data qubit seen by a
    // single node is a boundary edge on the side nearer to it along the chain
    // direction.
    const Basis node_type = opposite(basis);
    const int chain_axis = logical_axis(layout, basis);

    std::vector<int> node_of_stab(layout.num_aux(), -1);
    int num_nodes = 0;
    for (std::size_t s = 0; s < layout.num_aux(); ++s) {
        if (layout.stabilizers[s].type == node_type) node_of_stab[s] = num_nodes++;
    }
    const int source = num_nodes;      // low-coordinate boundary
    const int sink = num_nodes + 1;    // high-coordinate boundary
    const int total_nodes = num_nodes + 2;

    int lo = 0, hi = 0;
    bool first = true;
    for (const auto& c : layout.data_qubits) {
        int v = chain_axis == 0 ? c.x : c.y;
        if (first || v < lo) lo = v;
        if (first || v > hi) hi = v;
        first = false;
    }

    std::map<std::pair<int, int>, uint64_t> edge_mult;
    for (std::size_t q = 0; q < layout.num_data(); ++q) {
        std::vector<int> ends;
        for (std::size_t s = 0; s < layout.num_aux(); ++s) {
            if (node_of_stab[s] < 0) continue;
            for (const auto& slot : layout.stabilizers[s].data_slots) {
                if (slot && *slot == q) ends.push_back(node_of_stab[s]);
            }
        }
        if (ends.size() > 2) {
            throw integrity_error("data qubit touches more than two same-type stabilizers");
        }
        if (ends.empty()) continue;  // detects nothing in this graph
        if (ends.size() == 1) {
            const Coord c = layout.data_qubits[q];
            int v = chain_axis == 0 ? c.x : c.y;
            ends.push_back(2 * v < lo + hi ? source : sink);
        }
        int a = std::min(ends[0], ends[1]);
        int b = std::max(ends[0], ends[1]);
        if (a == b) continue;  // both endpoints identical: no graph edge
        edge_mult[{a, b}] += 1;
    }

    std::vector<std::vector<std::pair<int, uint64_t>>> adj(total_nodes);
    for (const auto& [edge, mult] : edge_mult) {
        adj[edge.first].push_back({edge.second, mult});
        adj[edge.second].push_back({edge.first, mult});
    }

    // BFS shortest-path counting with edge multiplicities.
    std::vector<int> dist(total_nodes, -1);
    std::vector<uint64_t> count(total_nodes, 0);
    std::queue<int> queue;
    dist[source] = 0;
    count[source] = 1;
    queue.push(source);
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop();
        for (const auto& [v, mult] : adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push(v);
            }
            if (dist[v] == dist[u] + 1) count[v] += count[u] * mult;
        }
    }
    if (dist[sink] != layout.distance) {
        throw integrity_error(
            fmt::format("shortest logical path has weight {}, expected the distance {}",
                        dist[sink], layout.distance));
    }
    return count[sink];
}

std::string layout_to_json(const CodeLayout& layout) {
    nlohmann::json j;
    j["family"] = to_string(layout.family);
    j["distance"] = layout.distance;
    j["stabilizer_swap"] = layout.stabilizer_swap;
    j["total_qubits"] = layout.total_qubits();
    j["data_qubits"] = nlohmann::json::array();
    for (const auto& c : layout.data_qubits) j["data_qubits"].push_back({c.x, c.y});
    j["stabilizers"] = nlohmann::json::array();
    for (const auto& stab : layout.stabilizers) {
        nlohmann::json s;
        s["type"] = to_string(stab.type);
        s["auxiliary"] = {stab.auxiliary.x, stab.auxiliary.y};
        s["slots"] = nlohmann::json::array();
        for (const auto& slot : stab.data_slots) {
            if (slot) {
                s["slots"].push_back(*slot);
            } else {
                s["slots"].push_back(nullptr);
            }
        }
        j["stabilizers"].push_back(std::move(s));
    }
    j["logical_x_support"] = layout.logical_x_support;
    j["logical_z_support"] = layout.logical_z_support;
    return j.dump(2);
}

}  // namespace surfmem
