#pragma once

// Serialized forms of an equilibrium solve: the report document and the
// per-iteration trace CSV.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinmigrate/equilibrium.hpp"

namespace twinmigrate {

nlohmann::json report_to_json(const EquilibriumReport& report, const Scenario& scenario);

// outer_iter, p_1..p_M, b_11..b_NM (row-major), U_L_sum, stop_stat
std::string trace_csv_header(std::size_t n, std::size_t m);
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace, std::size_t n,
                     std::size_t m);

}  // namespace twinmigrate
