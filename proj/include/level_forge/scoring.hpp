#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "level_forge/caption.hpp"

namespace level_forge {

class ConceptMismatch : public Error {
public:
    ConceptMismatch(Concept a, Concept b)
        : Error("concept_mismatch", "cannot match a " + std::string(concept_name(a)) + " phrase against a " +
                                        std::string(concept_name(b)) + " phrase") {}
};

/// Agreement between the prompt's and the caption's phrase for one concept.
///   identical (or both missing)       1.0
///   both carry a quantity             1 - |ordinal difference| / 4
///   both present, not both counted    0.1
///   one present, the other missing   -1.0
/// "no X" phrases count as missing.
inline double match_phrases(std::optional<Phrase> prompt, std::optional<Phrase> caption) {
    if (prompt && caption && prompt->subject != caption->subject) {
        throw ConceptMismatch(prompt->subject, caption->subject);
    }
    if (prompt && prompt->form == PhraseForm::Absent) prompt.reset();
    if (caption && caption->form == PhraseForm::Absent) caption.reset();

    if (!prompt && !caption) return 1.0;
    if (prompt && caption) {
        if (*prompt == *caption) return 1.0;
        if (prompt->countable() && caption->countable()) {
            const int diff = std::abs(ordinal(prompt->quantity) - ordinal(caption->quantity));
            return 1.0 - static_cast<double>(diff) / static_cast<double>(kQuantityCount - 1);
        }
        return 0.1;
    }
    return -1.0;
}

struct ScoreBreakdown {
    std::array<double, kConceptCount> per_concept{};
    double c_score = 0.0;
    int topic_set_size = kConceptCount;

    double operator[](Concept c) const { return per_concept[static_cast<std::size_t>(index_of(c))]; }
};

/// Caption adherence: mean per-concept match over all 18 concepts, broken
/// pipes and cannons included. Range [-1, 1].
inline ScoreBreakdown c_score(const Caption& prompt, const Caption& actual) {
    const PhraseMap p = prompt.semantic();
    const PhraseMap c = actual.semantic();
    ScoreBreakdown out;
    double sum = 0.0;
    for (std::size_t i = 0; i < kConceptCount; ++i) {
        out.per_concept[i] = match_phrases(p[i], c[i]);
        sum += out.per_concept[i];
    }
    out.c_score = sum / static_cast<double>(kConceptCount);
    return out;
}

inline ScoreBreakdown c_score(std::string_view prompt, std::string_view actual) {
    return c_score(parse_caption(prompt), parse_caption(actual));
}

struct ToleranceResult {
    double value = 0.0;
    std::vector<Caption> permutations;
    std::vector<double> scores; // one per successful permutation
    int failures = 0;
};

/// Produces the caption of a scene generated for a (permuted) prompt.
using CaptionSource = std::function<Caption(const Caption& prompt)>;

namespace detail {

inline std::uint64_t permutation_count(std::size_t n, std::uint64_t cap) {
    std::uint64_t f = 1;
    for (std::size_t k = 2; k <= n; ++k) {
        f *= k;
        if (f >= cap) return cap;
    }
    return f;
}

inline std::vector<int> phrase_order(const Caption& original, const Caption& permuted) {
    std::vector<int> order;
    for (const auto& p : permuted.phrases) {
        for (std::size_t i = 0; i < original.phrases.size(); ++i) {
            if (original.phrases[i].subject == p.subject) order.push_back(static_cast<int>(i));
        }
    }
    return order;
}

} // namespace detail

/// Caption-order tolerance: mean c-score over up to `max_perms` distinct
/// phrase orderings of the prompt, each sent through `source`. Failing calls
/// are skipped and counted.
inline ToleranceResult tolerance(const Caption& prompt, const CaptionSource& source, int max_perms = 5,
                                 std::uint64_t seed = 0) {
    ToleranceResult result;
    const auto wanted = detail::permutation_count(prompt.phrases.size(), static_cast<std::uint64_t>(max_perms));
    std::set<std::vector<int>> seen;
    Rng rng(seed);
    // The identity ordering is always one of the samples when only one exists.
    while (seen.size() < wanted) {
        Caption perm = prompt;
        if (wanted > 1) rng.shuffle(std::span<Phrase>(perm.phrases));
        if (!seen.insert(detail::phrase_order(prompt, perm)).second) continue;
        result.permutations.push_back(std::move(perm));
    }
    double sum = 0.0;
    for (const auto& perm : result.permutations) {
        try {
            const double s = c_score(perm, source(perm)).c_score;
            result.scores.push_back(s);
            sum += s;
        } catch (const std::exception&) {
            ++result.failures;
        }
    }
    if (result.scores.empty()) {
        throw Error("generator_failed", "every permutation failed to generate a scene");
    }
    result.value = sum / static_cast<double>(result.scores.size());
    return result;
}

} // namespace level_forge
