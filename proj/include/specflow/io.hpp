#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "specflow/connection.hpp"
#include "specflow/forms.hpp"

namespace specflow::io {

using nlohmann::json;

// Form document: { "n": int, "degree": int, "fiber": int,
//   "terms": [ { "k": [ints], "I": [1-based ints], "re": [[..]], "im": [[..]] } ] }
json form_to_json(const forms::TrigPolyForm& f);
forms::TrigPolyForm form_from_json(const json& j);

// Connection document: { "n": int, "fiber": int, "hol": [..], "osc": <form|null> }
json connection_to_json(const Connection& c);
Connection connection_from_json(const json& j);

// CSV with '#' comment lines (units, resolved parameters) before the header row.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace specflow::io
