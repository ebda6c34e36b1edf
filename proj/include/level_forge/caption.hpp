#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "level_forge/concepts.hpp"
#include "level_forge/random.hpp"

namespace level_forge {

enum class Quantity : int { One = 0, Two = 1, AFew = 2, Several = 3, Many = 4 };

inline constexpr int kQuantityCount = 5;
inline constexpr std::array<Quantity, kQuantityCount> kAllQuantities = {
    Quantity::One, Quantity::Two, Quantity::AFew, Quantity::Several, Quantity::Many};

constexpr int ordinal(Quantity q) { return static_cast<int>(q); }

constexpr std::string_view quantity_word(Quantity q) {
    constexpr std::array<std::string_view, kQuantityCount> words = {"one", "two", "a few", "several", "many"};
    return words[static_cast<std::size_t>(ordinal(q))];
}

/// 1 -> one, 2 -> two, 3-4 -> a few, 5-9 -> several, 10+ -> many.
constexpr Quantity quantity_for(int count) {
    if (count <= 1) return Quantity::One;
    if (count == 2) return Quantity::Two;
    if (count <= 4) return Quantity::AFew;
    if (count <= 9) return Quantity::Several;
    return Quantity::Many;
}

/// Smallest and largest counts that render as `q` (Many is open-ended; 15 is a practical cap).
constexpr std::pair<int, int> count_range(Quantity q) {
    switch (q) {
    case Quantity::One: return {1, 1};
    case Quantity::Two: return {2, 2};
    case Quantity::AFew: return {3, 4};
    case Quantity::Several: return {5, 9};
    case Quantity::Many: return {10, 15};
    }
    return {1, 1};
}

enum class PhraseForm { Present, Full, Gaps, GiantGap, Absent };

struct Phrase {
    Concept subject = Concept::Floor;
    PhraseForm form = PhraseForm::Present;
    Quantity quantity = Quantity::One;

    bool countable() const {
        return form == PhraseForm::Present || form == PhraseForm::Gaps || form == PhraseForm::GiantGap;
    }

    friend bool operator==(const Phrase& a, const Phrase& b) {
        if (a.subject != b.subject || a.form != b.form) return false;
        return !a.countable() || a.quantity == b.quantity;
    }
};

enum class CaptionStyle { Regular, Absence, Negative };

constexpr std::string_view style_name(CaptionStyle s) {
    switch (s) {
    case CaptionStyle::Regular: return "regular";
    case CaptionStyle::Absence: return "absence";
    case CaptionStyle::Negative: return "negative";
    }
    return "regular";
}

inline std::optional<CaptionStyle> style_from_name(std::string_view name) {
    for (auto s : {CaptionStyle::Regular, CaptionStyle::Absence, CaptionStyle::Negative}) {
        if (style_name(s) == name) return s;
    }
    return std::nullopt;
}

namespace detail {

struct Nouns {
    std::string_view singular;
    std::string_view plural;
};

constexpr Nouns nouns(Concept c) {
    constexpr std::array<Nouns, kConceptCount> table = {{
        {"floor", "floor"},
        {"ceiling", "ceiling"},
        {"enemy", "enemies"},
        {"question block", "question blocks"},
        {"cannon", "cannons"},
        {"coin", "coins"},
        {"coin line", "coin lines"},
        {"platform", "platforms"},
        {"ascending staircase", "ascending staircases"},
        {"descending staircase", "descending staircases"},
        {"pipe", "pipes"},
        {"upside down pipe", "upside down pipes"},
        {"tower", "towers"},
        {"rectangular block cluster", "rectangular block clusters"},
        {"irregular block cluster", "irregular block clusters"},
        {"loose block", "loose blocks"},
        {"broken pipe", "broken pipes"},
        {"broken cannon", "broken cannons"},
    }};
    return table[static_cast<std::size_t>(index_of(c))];
}

inline std::string counted(Quantity q, std::string_view singular, std::string_view plural) {
    std::string s(quantity_word(q));
    s += ' ';
    s += (q == Quantity::One ? singular : plural);
    return s;
}

} // namespace detail

/// Text of one phrase without the trailing period.
inline std::string phrase_text(const Phrase& p, CaptionStyle style = CaptionStyle::Regular) {
    const auto n = detail::nouns(p.subject);
    if (p.form == PhraseForm::Absent) {
        if (style == CaptionStyle::Negative) return std::string(n.singular);
        return "no " + std::string(n.plural);
    }
    switch (p.form) {
    case PhraseForm::Full: return "full " + std::string(n.singular);
    case PhraseForm::Gaps:
        return std::string(n.singular) + " with " + detail::counted(p.quantity, "gap", "gaps");
    case PhraseForm::GiantGap:
        return "giant gap with " + detail::counted(p.quantity, "chunk", "chunks") + " of floor";
    default: return detail::counted(p.quantity, n.singular, n.plural);
    }
}

/// Concept-keyed view of a caption with "no X" phrases folded into absence.
using PhraseMap = std::array<std::optional<Phrase>, kConceptCount>;

struct Caption {
    CaptionStyle style = CaptionStyle::Regular;
    std::vector<Phrase> phrases;

    /// Period-terminated phrases joined by single spaces; empty caption -> "".
    std::string text() const {
        std::string out;
        for (const auto& p : phrases) {
            if (!out.empty()) out += ' ';
            out += phrase_text(p, style);
            out += '.';
        }
        return out;
    }

    std::optional<Phrase> phrase(Concept c) const {
        for (const auto& p : phrases) {
            if (p.subject == c) return p;
        }
        return std::nullopt;
    }

    PhraseMap semantic() const {
        PhraseMap m;
        for (const auto& p : phrases) {
            if (p.form != PhraseForm::Absent) m[static_cast<std::size_t>(index_of(p.subject))] = p;
        }
        return m;
    }

    /// Same phrases in canonical concept order.
    Caption canonical() const {
        Caption c = *this;
        std::stable_sort(c.phrases.begin(), c.phrases.end(),
                         [](const Phrase& a, const Phrase& b) { return index_of(a.subject) < index_of(b.subject); });
        return c;
    }
};

/// Order-independent equality.
inline bool equivalent(const Caption& a, const Caption& b) { return a.semantic() == b.semantic(); }

inline std::optional<Phrase> surface_phrase(Concept subject, const SurfaceState& s) {
    switch (s.kind) {
    case SurfaceState::Kind::None: return std::nullopt;
    case SurfaceState::Kind::Full: return Phrase{subject, PhraseForm::Full};
    case SurfaceState::Kind::Gaps: return Phrase{subject, PhraseForm::Gaps, quantity_for(s.count)};
    case SurfaceState::Kind::GiantGap: return Phrase{subject, PhraseForm::GiantGap, quantity_for(s.count)};
    }
    return std::nullopt;
}

/// Phrase describing concept `c` in `report`, or nullopt when absent.
inline std::optional<Phrase> present_phrase(const ConceptReport& report, Concept c) {
    if (c == Concept::Floor) return surface_phrase(c, report.floor);
    if (c == Concept::Ceiling) return surface_phrase(c, report.ceiling);
    if (report.count(c) == 0) return std::nullopt;
    return Phrase{c, PhraseForm::Present, quantity_for(report.count(c))};
}

/// Captions a report. Regular lists present concepts. Absence has one phrase
/// per training concept, "no X." when missing. Negative lists the bare names
/// of the missing training concepts.
inline Caption render(const ConceptReport& report, CaptionStyle style = CaptionStyle::Regular) {
    Caption cap;
    cap.style = style;
    for (Concept c : kAllConcepts) {
        auto p = present_phrase(report, c);
        switch (style) {
        case CaptionStyle::Regular:
            if (p) cap.phrases.push_back(*p);
            break;
        case CaptionStyle::Absence:
            if (!is_training_concept(c)) break;
            cap.phrases.push_back(p ? *p : Phrase{c, PhraseForm::Absent});
            break;
        case CaptionStyle::Negative:
            if (!p && is_training_concept(c)) cap.phrases.push_back(Phrase{c, PhraseForm::Absent});
            break;
        }
    }
    return cap;
}

class UnknownPhrase : public Error {
public:
    explicit UnknownPhrase(std::string fragment)
        : Error("unknown_phrase", "unknown caption phrase: \"" + fragment + "\""), fragment_(std::move(fragment)) {}
    const std::string& fragment() const { return fragment_; }

private:
    std::string fragment_;
};

class DuplicateConcept : public Error {
public:
    explicit DuplicateConcept(Concept c)
        : Error("duplicate_concept", "caption mentions " + std::string(concept_name(c)) + " more than once"),
          concept_(c) {}
    Concept subject() const { return concept_; }

private:
    Concept concept_;
};

/// Every legal phrase of the grammar, in canonical order. `with_absent`
/// includes the "no X" forms; `training_only` drops the broken-structure concepts.
inline std::vector<Phrase> legal_phrases(bool with_absent, bool training_only) {
    std::vector<Phrase> out;
    for (Concept c : kAllConcepts) {
        if (training_only && !is_training_concept(c)) continue;
        if (c == Concept::Floor || c == Concept::Ceiling) {
            out.push_back({c, PhraseForm::Full});
            for (Quantity q : kAllQuantities) out.push_back({c, PhraseForm::Gaps, q});
            if (c == Concept::Floor) {
                for (Quantity q : kAllQuantities) out.push_back({c, PhraseForm::GiantGap, q});
            }
        } else {
            for (Quantity q : kAllQuantities) out.push_back({c, PhraseForm::Present, q});
        }
        if (with_absent) out.push_back({c, PhraseForm::Absent});
    }
    return out;
}

namespace detail {

inline const std::unordered_map<std::string, Phrase>& phrase_table(CaptionStyle style) {
    static const auto build = [](CaptionStyle s) {
        std::unordered_map<std::string, Phrase> table;
        if (s == CaptionStyle::Negative) {
            for (Concept c : kAllConcepts) table.emplace(std::string(nouns(c).singular), Phrase{c, PhraseForm::Absent});
        } else {
            for (const auto& p : legal_phrases(true, false)) table.emplace(phrase_text(p, s), p);
        }
        return table;
    };
    static const std::array<std::unordered_map<std::string, Phrase>, 3> tables = {
        build(CaptionStyle::Regular), build(CaptionStyle::Absence), build(CaptionStyle::Negative)};
    return tables[static_cast<std::size_t>(style)];
}

inline std::string normalize_space(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char ch : s) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            pending = !out.empty();
            continue;
        }
        if (pending) out += ' ';
        pending = false;
        out += ch;
    }
    return out;
}

} // namespace detail

/// Parses period-separated phrases in any order. Regular and absence captions
/// share one grammar ("no X." is accepted by both); negative captions are bare
/// concept names.
inline Caption parse_caption(std::string_view text, CaptionStyle style = CaptionStyle::Regular) {
    const auto& table = detail::phrase_table(style);
    Caption cap;
    cap.style = style;
    std::array<bool, kConceptCount> seen{};
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t dot = text.find('.', start);
        const auto piece = text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        const std::string fragment = detail::normalize_space(piece);
        if (!fragment.empty()) {
            const auto it = table.find(fragment);
            if (it == table.end()) throw UnknownPhrase(fragment);
            auto& flag = seen[static_cast<std::size_t>(index_of(it->second.subject))];
            if (flag) throw DuplicateConcept(it->second.subject);
            flag = true;
            cap.phrases.push_back(it->second);
        }
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return cap;
}

/// Deterministic permutation of the phrases for a given seed.
inline Caption shuffle_phrases(Caption caption, std::uint64_t seed) {
    Rng rng(seed);
    rng.shuffle(std::span<Phrase>(caption.phrases));
    return caption;
}

/// Whitespace split with '.' as a token of its own.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (char ch : text) {
        if (ch == '.') {
            flush();
            out.emplace_back(".");
        } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            flush();
        } else {
            cur += ch;
        }
    }
    flush();
    return out;
}

inline constexpr std::array<std::string_view, 2> kSpecialTokens = {"[PAD]", "[MASK]"};

/// Tokens a text encoder trained on captions of this style needs: the two
/// special tokens followed by every word of the training-concept grammar in
/// first-appearance order. Negative captions reuse the regular vocabulary.
inline std::vector<std::string> vocabulary(CaptionStyle style) {
    std::vector<std::string> vocab(kSpecialTokens.begin(), kSpecialTokens.end());
    const bool with_absent = style == CaptionStyle::Absence;
    for (const auto& p : legal_phrases(with_absent, true)) {
        for (auto& tok : tokenize(phrase_text(p, style) + ".")) {
            if (std::find(vocab.begin(), vocab.end(), tok) == vocab.end()) vocab.push_back(std::move(tok));
        }
    }
    return vocab;
}

} // namespace level_forge
