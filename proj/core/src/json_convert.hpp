#pragma once

// Internal json-object converters shared by serialize.cpp, preference.cpp and
// store.cpp. Not installed; public code uses the string APIs in serialize.hpp.

#include <nlohmann/json.hpp>

#include "fence/model.hpp"
#include "fence/revision.hpp"

namespace fence {

nlohmann::ordered_json lineage_to_json(const Lineage& lineage);
Lineage lineage_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json claim_to_json(const Claim& claim);
Claim claim_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json document_to_json(const EvidenceDocument& doc);
EvidenceDocument document_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json verdict_to_json(const ClaimVerdict& verdict);
ClaimVerdict verdict_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json candidate_to_json(const CandidateResponse& response);
CandidateResponse candidate_from_json(const nlohmann::ordered_json& j);

}  // namespace fence
