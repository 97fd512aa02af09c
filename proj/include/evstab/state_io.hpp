#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "evstab/equilibria.hpp"

namespace evstab {

inline constexpr const char* kStateFormat = "ev-stab-steady-state";
inline constexpr int kStateVersion = 1;

struct StateFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Line 1: compact JSON header. Then CSV with columns r,y,mu0,lambda0,rho0,p0,q0,m.
std::string state_to_string(const SteadyState& ss);
void save_state(const SteadyState& ss, const std::filesystem::path& path);

// Checks the table invariants, rebuilds the state from the header parameters and
// compares it with the stored table. Throws StateFormatError on any mismatch.
SteadyState state_from_string(const std::string& text);
SteadyState load_state(const std::filesystem::path& path);

void write_table_csv(const SteadyState& ss, std::ostream& os);

// E0_cut, Rmin, Rmax, M_ADM, M_vlasov and diagnostics.
nlohmann::ordered_json state_summary(const SteadyState& ss);

}  // namespace evstab
