#pragma once

#include <string>

#include "json.hpp"
#include "stoptime/factorization.hpp"
#include "stoptime/game.hpp"
#include "stoptime/operators.hpp"
#include "stoptime/ramsey.hpp"
#include "stoptime/spaces.hpp"

namespace stoptime {

// One JSON document per artifact.  Nodes appear as bit strings ("" for the
// root); coefficient maps carry only their nonzero entries.

nlohmann::json coeff_to_json(const CoeffVector& x);
CoeffVector coeff_from_json(const nlohmann::json& j);

nlohmann::json base_norm_to_json(const BaseNorm& base);
BaseNorm base_norm_from_json(const nlohmann::json& j);

nlohmann::json space_tag_to_json(const SpaceTag& tag);
SpaceTag space_tag_from_json(const nlohmann::json& j);

nlohmann::json operator_to_json(const OperatorMatrix& m);
OperatorMatrix operator_from_json(const nlohmann::json& j);

nlohmann::json coloring_to_json(const Coloring& c);
Coloring coloring_from_json(const nlohmann::json& j);

nlohmann::json embedding_to_json(const SubtreeEmbedding& e);
SubtreeEmbedding embedding_from_json(const nlohmann::json& j);

nlohmann::json transcript_to_json(const GameTranscript& tr);
GameTranscript transcript_from_json(const nlohmann::json& j);

nlohmann::json certificate_to_json(const FactorisationCertificate& cert);

// parse "lp:1", "lp:1.5", "lp:inf"
BaseNorm base_norm_from_cli(const std::string& text);

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace stoptime
