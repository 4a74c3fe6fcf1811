#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include "speechread/error.hpp"
#include "speechread/practice.hpp"
#include "speechread/session_csv.hpp"
#include "speechread/text.hpp"

namespace speechread::simulation {

/// Stand-in for a person answering a quiz trial: returns one of the choices.
using Responder = std::function<std::string(const practice::PlannedTrial&, std::mt19937_64&)>;

inline Responder perfect_responder()
{
    return [](const practice::PlannedTrial& t, std::mt19937_64&) { return t.correct_word; };
}

inline Responder random_responder()
{
    return [](const practice::PlannedTrial& t, std::mt19937_64& rng) {
        return t.choices[std::uniform_int_distribution<std::size_t>(0, t.choices.size() - 1)(rng)];
    };
}

/// Weights keyed by (correct word, chosen word), compared case-insensitively.
using ConfusionWeights = std::map<std::pair<std::string, std::string>, double>;

/// Confusion-matrix file: `correct_word,chosen_word,weight` per line.
inline ConfusionWeights parse_confusion_weights(std::string_view content)
{
    ConfusionWeights out;
    auto all = text::lines(content);
    for (std::size_t n = 0; n < all.size(); ++n) {
        auto line = text::trim(all[n]);
        if (line.empty() || line.starts_with('#'))
            continue;
        auto f = csv::split_record(line);
        double w = 0;
        bool ok = f.size() == 3;
        if (ok) {
            try {
                std::size_t used = 0;
                auto field = std::string(text::trim(f[2]));
                w = std::stod(field, &used);
                ok = used == field.size() && w >= 0;
            } catch (const std::logic_error&) {
                ok = false;
            }
        }
        if (!ok) {
            if (n == 0)
                continue; // header
            throw Error(ErrorCode::parse_error, "confusion matrix line " + std::to_string(n + 1)
                                                    + ": expected 'correct_word,chosen_word,weight'");
        }
        out[{text::to_upper(text::trim(f[0])), text::to_upper(text::trim(f[1]))}] = w;
    }
    return out;
}

/// Picks among the offered choices with probability proportional to the
/// weight for (correct word, choice); uniform when no weight applies.
inline Responder confusion_responder(ConfusionWeights weights)
{
    return [weights = std::move(weights)](const practice::PlannedTrial& t, std::mt19937_64& rng) {
        std::vector<double> w;
        double total = 0;
        for (const auto& c : t.choices) {
            auto it = weights.find({text::to_upper(t.correct_word), text::to_upper(c)});
            w.push_back(it == weights.end() ? 0.0 : it->second);
            total += w.back();
        }
        if (total <= 0)
            w.assign(t.choices.size(), 1.0);
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        return t.choices[pick(rng)];
    };
}

/// Runs a whole quiz with a simulated responder. The responder draws from its
/// own stream seeded from `seed`, separate from the planner's.
inline SessionRecord simulate_session(const practice::SessionPlan& plan, const Responder& responder,
                                      std::uint64_t seed, Timestamp clock)
{
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    practice::LipshapeSession session(plan);
    for (std::size_t i = 0; i < plan.trials.size(); ++i)
        session.answer(i, responder(plan.trials[i], rng), clock);
    return session.finish(clock);
}

} // namespace speechread::simulation
