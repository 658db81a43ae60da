#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace adsim {

using Vec = std::vector<double>;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched vector sizes anywhere in the numeric core. Carries both sizes.
struct DimensionError : Error {
    std::size_t expected;
    std::size_t got;
    DimensionError(const std::string& where, std::size_t expected_, std::size_t got_)
        : Error(where + ": dimension mismatch, expected " + std::to_string(expected_) +
                ", got " + std::to_string(got_)),
          expected(expected_),
          got(got_) {}
};

// Rejected actuation: the requested control point is not admissible at the
// measured state. Carries both so callers can log the offending pair.
struct AdmissibilityError : Error {
    Vec state;
    Vec control;
    AdmissibilityError(const std::string& why, Vec state_, Vec control_)
        : Error("inadmissible control: " + why), state(std::move(state_)), control(std::move(control_)) {}
};

// A point handed to a transition map outside the map's domain.
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

inline void require_dim(const std::string& where, std::size_t expected, std::size_t got) {
    if (expected != got) throw DimensionError(where, expected, got);
}

inline std::string vec_to_string(const Vec& v) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v[i];
    }
    os << ")";
    return os.str();
}

}  // namespace adsim
