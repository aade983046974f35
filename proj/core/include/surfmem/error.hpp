#pragma once

#include <stdexcept>
#include <string>

namespace surfmem {

// Requested operation exceeds what this build is sized for (oracle scale caps,
// exhaustive enumeration limits).
struct capability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal consistency violation: a circuit, model or store that breaks its
// own contract (non-deterministic detector at p=0, unreachable detector, ...).
struct integrity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text input that does not match a documented grammar.
struct parse_error : std::runtime_error {
    parse_error(int line_number, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
          line(line_number) {}
    int line;
};

}  // namespace surfmem
