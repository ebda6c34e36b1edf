#pragma once

#include <json.hpp>

#include "level_forge/caption.hpp"
#include "level_forge/concepts.hpp"
#include "level_forge/diversity.hpp"
#include "level_forge/scoring.hpp"
#include "level_forge/solvability.hpp"

namespace level_forge {

using Json = nlohmann::json;

inline std::string_view surface_kind_name(SurfaceState::Kind k) {
    switch (k) {
    case SurfaceState::Kind::None: return "none";
    case SurfaceState::Kind::Full: return "full";
    case SurfaceState::Kind::Gaps: return "gaps";
    case SurfaceState::Kind::GiantGap: return "giant_gap";
    }
    return "none";
}

inline Json to_json(const SurfaceState& s) {
    Json j{{"state", surface_kind_name(s.kind)}};
    if (s.kind == SurfaceState::Kind::Gaps) j["gaps"] = s.count;
    if (s.kind == SurfaceState::Kind::GiantGap) j["chunks"] = s.count;
    return j;
}

inline Json to_json(const ConceptReport& r) {
    Json counts = Json::object();
    for (Concept c : kAllConcepts) counts[std::string(concept_name(c))] = r.count(c);
    return Json{{"counts", counts}, {"floor", to_json(r.floor)}, {"ceiling", to_json(r.ceiling)}};
}

inline Json to_json(const ScoreBreakdown& b) {
    Json per = Json::object();
    for (Concept c : kAllConcepts) per[std::string(concept_name(c))] = b[c];
    return Json{{"per_concept", per}, {"c_score", b.c_score}, {"topic_set_size", b.topic_set_size}};
}

inline Json to_json(const SolveResult& r) {
    Json path = Json::array();
    for (const auto& s : r.path) {
        path.push_back(Json{{"column", s.column}, {"row", s.row}, {"grounded", s.grounded}});
    }
    Json j{{"beatable", r.beatable}, {"expanded", r.expanded}, {"path", path}};
    if (!r.beatable) j["reason"] = r.reason;
    return j;
}

inline Json to_json(const IntegrityRates& r) {
    return Json{{"scenes", r.scenes},
                {"broken_pipe_pct", r.broken_pipe_pct},
                {"any_pipe_pct", r.any_pipe_pct},
                {"broken_cannon_pct", r.broken_cannon_pct},
                {"any_cannon_pct", r.any_cannon_pct}};
}

inline Json rows_json(const TileGrid& g) { return Json(to_rows(g)); }

inline TileGrid grid_from_json(const Json& rows) {
    if (!rows.is_array()) throw Error("bad_request", "scene must be an array of row strings");
    std::vector<std::string> lines;
    for (const auto& r : rows) {
        if (!r.is_string()) throw Error("bad_request", "scene rows must be strings");
        lines.push_back(r.get<std::string>());
    }
    return grid_from_rows(lines);
}

/// Machine-readable grammar: everything a prompt builder needs to offer only legal phrases.
inline Json grammar_json() {
    Json quantities = Json::array();
    for (Quantity q : kAllQuantities) quantities.push_back(std::string(quantity_word(q)));
    Json concepts = Json::array();
    for (Concept c : kAllConcepts) {
        if (!is_training_concept(c)) continue;
        Json forms = Json::array();
        Json phrases = Json::array();
        for (const auto& p : legal_phrases(false, true)) {
            if (p.subject != c) continue;
            phrases.push_back(phrase_text(p) + ".");
        }
        if (c == Concept::Floor || c == Concept::Ceiling) {
            forms.push_back(Json{{"form", "full"}, {"template", "full " + std::string(concept_name(c)) + "."}});
            forms.push_back(Json{{"form", "gaps"},
                                 {"template", std::string(concept_name(c)) + " with {quantity} gap[s]."}});
            if (c == Concept::Floor) {
                forms.push_back(Json{{"form", "giant_gap"}, {"template", "giant gap with {quantity} chunk[s] of floor."}});
            }
        } else {
            const auto n = detail::nouns(c);
            forms.push_back(Json{{"form", "count"},
                                 {"template", "{quantity} {noun}."},
                                 {"singular", n.singular},
                                 {"plural", n.plural}});
        }
        concepts.push_back(Json{{"name", concept_name(c)}, {"forms", forms}, {"phrases", phrases}});
    }
    return Json{{"quantities", quantities},
                {"concepts", concepts},
                {"scored_concepts", [] {
                     Json all = Json::array();
                     for (Concept c : kAllConcepts) all.push_back(std::string(concept_name(c)));
                     return all;
                 }()}};
}

} // namespace level_forge
