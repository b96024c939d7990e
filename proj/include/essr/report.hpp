// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

#include "json.hpp"

#include "essr/costmodel.hpp"

namespace essr::cost {

inline constexpr const char* kReportSchema = "essr-cost/1";

/// JSON form of a report. Keys keep insertion order so output is stable.
nlohmann::ordered_json report_json(const CostReport& report);

/// One summary row per subnet plus a total row.
void write_report_csv(std::ostream& out, const CostReport& report);

/// Reference parameter count for the default ×2/×4 configurations, 0 when none applies.
std::size_t reference_param_count(const ModelConfig& cfg) noexcept;

}  // namespace essr::cost
