#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "colcomplete/curplus.hpp"
#include "colcomplete/datagen.hpp"
#include "colcomplete/qpma.hpp"
#include "colcomplete/sampling.hpp"
#include "colcomplete/theory.hpp"

namespace colcomplete {

using json = nlohmann::ordered_json;

// {"m": int, "indices": [ints]}; indices shifted by one when one_based.
json sampler_to_json(const ColumnSampler& s, bool one_based);
// Throws ConfigError on a malformed object, IndexError on bad indices.
ColumnSampler sampler_from_json(const json& j, bool one_based);

json synthetic_to_json(const SyntheticSpec& spec);
// Reads the keys written by synthetic_to_json; unknown keys are rejected.
// `where` prefixes error messages.
SyntheticSpec synthetic_from_json(const json& j, const std::string& where);

json theory_to_json(const TheoryReport& rep);
json bound_to_json(const BoundBreakdown& b);

// Writes u_a.csv, q_hat.csv, v_qs.csv, z_hat.csv, m_hat.csv and meta.json.
void save_model(const std::filesystem::path& dir, const QpmaModel& model, json meta);
// Same layout without q_hat.csv; the CUR+ factors go to u_a.csv / v_qs.csv.
void save_model(const std::filesystem::path& dir, const CurPlusModel& model, json meta);

// Number written with 17 significant digits, or null when not finite.
json real_or_null(double x);

}  // namespace colcomplete
