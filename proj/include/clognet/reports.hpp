#pragma once

#include <json.hpp>

#include "clognet/dsl.hpp"
#include "clognet/explore.hpp"
#include "clognet/mcmt.hpp"

namespace clognet::reports {

// Field names in the structured formats are stable; golden tests pin them.

std::string validation_text(const std::string& subject,
                            const ValidationReport& report);
nlohmann::json validation_json(const std::string& subject,
                               const ValidationReport& report);

std::string marking_lines(const Marking& m, const std::string& indent);
nlohmann::json marking_json(const Marking& m);

std::string catalog_text(const CatalogInstance& cat_instance,
                         const std::string& indent);
nlohmann::json catalog_json(const CatalogInstance& cat_instance);

std::string verdict_text(const Verdict& verdict);
nlohmann::json verdict_json(const Verdict& verdict);

std::string bounded_text(const BoundedCheck& check, std::uint64_t bound);
nlohmann::json bounded_json(const BoundedCheck& check, std::uint64_t bound);

std::string classify_text(const ConservativeReport& report, bool fk_acyclic);
nlohmann::json classify_json(const ConservativeReport& report,
                             bool fk_acyclic);

std::string encode_diagnostics_text(const mcmt::Document& doc);

}  // namespace clognet::reports
