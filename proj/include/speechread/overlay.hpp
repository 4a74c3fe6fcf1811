#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "speechread/error.hpp"
#include "speechread/phoneme.hpp"
#include "speechread/text.hpp"

namespace speechread::overlay {

/// One of the 22 consonant labels shown on the overlay, together with the
/// inventory consonants it stands for.
struct DisplaySymbol {
    std::string_view label;
    Viseme viseme;
    std::vector<Phoneme> sources;

    friend bool operator==(const DisplaySymbol& a, const DisplaySymbol& b) noexcept { return a.label == b.label; }
};

inline constexpr std::size_t display_symbol_count = 22;

namespace detail {

inline constexpr std::array<std::string_view, display_symbol_count> display_labels = {
    "P", "B", "M", "F", "V", "T", "D", "S", "Z", "TH", "W", "R", "CH", "JH", "SH", "K", "G", "N", "L", "HH", "Y", "NG",
};

// Consonants folded into another label; everything else maps to itself.
struct Condensation {
    std::string_view from;
    std::string_view to;
};

inline constexpr std::array<Condensation, 8> condensations = {{
    {"DX", "TH"},
    {"DH", "TH"},
    {"WH", "W"},
    {"ZH", "SH"},
    {"NX", "NG"},
    {"EN", "NG"},
    {"EM", "M"},
    {"EL", "L"},
}};

inline std::string_view label_for(Phoneme p) noexcept
{
    for (const auto& c : condensations)
        if (c.from == p.symbol())
            return c.to;
    return p.symbol();
}

} // namespace detail

/// Condenses a consonant onto its display label (ZH -> SH, WH -> W, ...).
inline DisplaySymbol simplify(Phoneme consonant)
{
    if (!consonant.is_consonant())
        throw Error(ErrorCode::not_a_consonant,
                    "phoneme " + std::string(consonant.symbol()) + " is not a consonant");
    auto label = detail::label_for(consonant);
    DisplaySymbol out{label, Phoneme::parse(label).viseme(), {}};
    for (auto c : consonants())
        if (detail::label_for(c) == label)
            out.sources.push_back(c);
    return out;
}

inline DisplaySymbol simplify(std::string_view symbol) { return simplify(Phoneme::parse(symbol)); }

inline std::vector<DisplaySymbol> display_set()
{
    std::vector<DisplaySymbol> out;
    out.reserve(display_symbol_count);
    for (auto label : detail::display_labels)
        out.push_back(simplify(Phoneme::parse(label)));
    return out;
}

struct Point {
    double x = 0;
    double y = 0;
};

struct Rect {
    double x = 0;
    double y = 0;
    double width = 0;
    double height = 0;
};

enum class Side { left, right };

struct Slot {
    std::size_t index;
    double angle_deg;
    DisplaySymbol symbol;
};

/// Slot 0 sits at the forehead (+90 degrees), slot 21 at the chin (-90).
/// `anchor` is the semicircle centre as a fraction of the face box, and
/// `radius` is a fraction of the face box height.
struct OverlayLayout {
    std::vector<Slot> slots;
    Point anchor;
    double radius;
    Side side = Side::left;

    const Slot& slot_for(std::string_view label) const
    {
        for (const auto& s : slots)
            if (s.symbol.label == label)
                return s;
        throw Error(ErrorCode::unknown_symbol, "no overlay slot for '" + std::string(label) + "'");
    }

    Point centre(const Rect& face) const
    {
        return {face.x + anchor.x * face.width, face.y + anchor.y * face.height};
    }

    double absolute_radius(const Rect& face) const { return radius * face.height; }

    Point position(const Slot& slot, const Rect& face, double scale = 1.0) const
    {
        auto c = centre(face);
        double r = absolute_radius(face) * scale;
        double theta = slot.angle_deg * std::numbers::pi / 180.0;
        double outward = side == Side::left ? -1.0 : 1.0;
        return {c.x + outward * r * std::cos(theta), c.y - r * std::sin(theta)};
    }
};

inline double slot_angle(std::size_t index) noexcept
{
    return 90.0 - static_cast<double>(index) * (180.0 / static_cast<double>(display_symbol_count - 1));
}

/// Greedy dispersal: each slot goes to the viseme class with the most
/// unplaced symbols that differs from the class of the slot above it (ties
/// by class id). Within a class, symbols are handed out alphabetically.
inline OverlayLayout compute_layout(Point anchor, double radius, Side side = Side::left)
{
    if (!(radius > 0))
        throw Error(ErrorCode::invalid_config, "overlay radius must be positive");

    std::map<Viseme, std::deque<DisplaySymbol>> pending;
    for (auto& sym : display_set())
        pending[sym.viseme].push_back(sym);
    for (auto& [v, queue] : pending)
        std::sort(queue.begin(), queue.end(),
                  [](const DisplaySymbol& a, const DisplaySymbol& b) { return a.label < b.label; });

    OverlayLayout layout{{}, anchor, radius, side};
    std::optional<Viseme> previous;
    for (std::size_t i = 0; i < display_symbol_count; ++i) {
        std::optional<Viseme> pick;
        for (const auto& [v, queue] : pending) {
            if (queue.empty() || v == previous)
                continue;
            if (!pick) {
                pick = v;
                continue;
            }
            auto best = pending[*pick].size();
            if (queue.size() > best || (queue.size() == best && to_string(v) < to_string(*pick)))
                pick = v;
        }
        // Unreachable for the fixed class sizes {7,5,3,3,2,2}.
        if (!pick)
            throw Error(ErrorCode::invalid_config, "overlay layout cannot separate viseme classes");
        auto& queue = pending[*pick];
        layout.slots.push_back({i, slot_angle(i), queue.front()});
        queue.pop_front();
        previous = pick;
    }
    return layout;
}

inline OverlayLayout default_layout(Side side = Side::left)
{
    return compute_layout({side == Side::left ? 0.0 : 1.0, 0.5}, 0.5, side);
}

// --- transcripts and arrow state ---------------------------------------

struct TranscriptEvent {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::string word;
    PhonemeSequence phonemes;
};

/// Parses `start_ms<TAB>end_ms<TAB>word<TAB>phonemes` lines; `#` lines are
/// comments. Events must be sorted and non-overlapping.
inline std::vector<TranscriptEvent> parse_transcript(std::string_view content)
{
    std::vector<TranscriptEvent> events;
    auto all = text::lines(content);
    for (std::size_t n = 0; n < all.size(); ++n) {
        const auto& line = all[n];
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::parse_error, "transcript line " + std::to_string(n + 1) + ": " + why);
        };
        if (line.starts_with('#') || text::trim(line).empty())
            continue;
        auto fields = text::split(line, '\t');
        if (fields.size() != 4)
            fail("expected 4 tab-separated fields");
        TranscriptEvent ev;
        try {
            std::size_t used = 0;
            ev.start_ms = std::stoll(fields[0], &used);
            if (used != fields[0].size())
                fail("bad start_ms");
            ev.end_ms = std::stoll(fields[1], &used);
            if (used != fields[1].size())
                fail("bad end_ms");
        } catch (const std::logic_error&) {
            fail("timestamps must be integers");
        }
        if (ev.start_ms > ev.end_ms)
            fail("start_ms after end_ms");
        ev.word = fields[2];
        for (const auto& tok : text::split(fields[3], ' ')) {
            auto p = parse_arpabet_token(tok);
            if (!p)
                fail("unknown phoneme token '" + tok + "'");
            ev.phonemes.push_back(*p);
        }
        if (!events.empty()) {
            const auto& prev = events.back();
            if (ev.start_ms < prev.start_ms)
                fail("events out of order");
            if (ev.start_ms < prev.end_ms)
                fail("event overlaps the previous one");
        }
        events.push_back(std::move(ev));
    }
    return events;
}

struct OverlayState {
    std::optional<DisplaySymbol> target; // nullopt = neutral, arrow hidden
    std::int64_t since_ms = 0;

    bool neutral() const noexcept { return !target.has_value(); }
};

/// The arrow jumps to the simplified initial consonant of each new word and
/// stays there until the next word. Vowel-initial words hide the arrow.
inline OverlayState step_state(const OverlayState& state, const TranscriptEvent& event)
{
    if (event.start_ms < state.since_ms)
        throw Error(ErrorCode::out_of_order_event, "event at " + std::to_string(event.start_ms)
                                                       + " ms precedes state time " + std::to_string(state.since_ms));
    OverlayState next{std::nullopt, event.start_ms};
    if (!event.phonemes.empty())
        if (auto c = initial_consonant(event.phonemes))
            next.target = simplify(*c);
    return next;
}

inline OverlayState state_at(std::span<const TranscriptEvent> events, std::int64_t time_ms)
{
    OverlayState state;
    for (const auto& ev : events) {
        if (ev.start_ms > time_ms)
            break;
        state = step_state(state, ev);
    }
    return state;
}

// --- rendering ---------------------------------------------------------

namespace detail {

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline constexpr double label_offset = 1.18;
inline constexpr double font_scale = 0.11;

} // namespace detail

/// Emits an SVG document with the 22 labels around the semicircle and, when
/// the state has a target, an arrow from the centre to the target's slot.
/// Everything is drawn in black with a white outline.
inline std::string render_overlay(const OverlayLayout& layout, const OverlayState& state, const Rect& face_box)
{
    if (!(face_box.width > 0) || !(face_box.height > 0))
        throw Error(ErrorCode::invalid_config, "face box must be nonempty");

    using detail::num;
    const double r = layout.absolute_radius(face_box);
    const double font = r * detail::font_scale;
    const double stroke = std::max(font * 0.12, 0.5);
    const auto centre = layout.centre(face_box);

    double min_x = std::min(0.0, face_box.x), min_y = std::min(0.0, face_box.y);
    double max_x = face_box.x + face_box.width, max_y = face_box.y + face_box.height;
    for (const auto& slot : layout.slots) {
        auto p = layout.position(slot, face_box, detail::label_offset);
        min_x = std::min(min_x, p.x - font * 1.5);
        max_x = std::max(max_x, p.x + font * 1.5);
        min_y = std::min(min_y, p.y - font);
        max_y = std::max(max_y, p.y + font);
    }

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" + num(min_x) + " " + num(min_y) + " "
         + num(max_x - min_x) + " " + num(max_y - min_y) + "\" width=\"" + num(max_x - min_x) + "\" height=\""
         + num(max_y - min_y) + "\">\n";
    svg += "  <g class=\"labels\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"" + num(font)
         + "\" text-anchor=\"middle\" dominant-baseline=\"central\">\n";
    for (const auto& slot : layout.slots) {
        auto p = layout.position(slot, face_box, detail::label_offset);
        auto label = detail::xml_escape(slot.symbol.label);
        svg += "    <text class=\"label\" data-slot=\"" + std::to_string(slot.index) + "\" data-symbol=\"" + label
             + "\" x=\"" + num(p.x) + "\" y=\"" + num(p.y) + "\" fill=\"#000000\" stroke=\"#ffffff\" stroke-width=\""
             + num(stroke) + "\" paint-order=\"stroke\">" + label + "</text>\n";
    }
    svg += "  </g>\n";

    if (state.target) {
        const auto& slot = layout.slot_for(state.target->label);
        auto tip = layout.position(slot, face_box);
        double dx = tip.x - centre.x, dy = tip.y - centre.y;
        double len = std::hypot(dx, dy);
        double ux = dx / len, uy = dy / len;
        double head = font * 0.9;
        double width = std::max(font * 0.18, 1.0);
        Point base{tip.x - ux * head, tip.y - uy * head};
        Point left{base.x - uy * head * 0.5, base.y + ux * head * 0.5};
        Point right{base.x + uy * head * 0.5, base.y - ux * head * 0.5};
        auto target = detail::xml_escape(slot.symbol.label);
        svg += "  <g class=\"arrow\" data-target=\"" + target + "\">\n";
        svg += "    <line class=\"arrow-outline\" x1=\"" + num(centre.x) + "\" y1=\"" + num(centre.y) + "\" x2=\""
             + num(base.x) + "\" y2=\"" + num(base.y) + "\" stroke=\"#ffffff\" stroke-width=\"" + num(width + 2 * stroke)
             + "\" fill=\"none\"/>\n";
        svg += "    <line class=\"arrow-shaft\" x1=\"" + num(centre.x) + "\" y1=\"" + num(centre.y) + "\" x2=\""
             + num(base.x) + "\" y2=\"" + num(base.y) + "\" stroke=\"#000000\" stroke-width=\"" + num(width)
             + "\" fill=\"none\"/>\n";
        svg += "    <polygon class=\"arrow-head\" data-tip-x=\"" + num(tip.x) + "\" data-tip-y=\"" + num(tip.y)
             + "\" points=\"" + num(tip.x) + "," + num(tip.y) + " " + num(left.x) + "," + num(left.y) + " "
             + num(right.x) + "," + num(right.y) + "\" fill=\"#000000\" stroke=\"#ffffff\" stroke-width=\""
             + num(stroke) + "\"/>\n";
        svg += "  </g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

struct RenderedFrame {
    std::string name;
    std::int64_t time_ms;
    std::string svg;
};

/// One document per transcript event, showing the state just after it.
inline std::vector<RenderedFrame> render_events(const OverlayLayout& layout, std::span<const TranscriptEvent> events,
                                                const Rect& face_box)
{
    std::vector<RenderedFrame> out;
    OverlayState state;
    for (std::size_t i = 0; i < events.size(); ++i) {
        state = step_state(state, events[i]);
        char name[48];
        std::snprintf(name, sizeof name, "overlay-%04zu.svg", i + 1);
        out.push_back({name, events[i].start_ms, render_overlay(layout, state, face_box)});
    }
    return out;
}

inline std::vector<RenderedFrame> render_at(const OverlayLayout& layout, std::span<const TranscriptEvent> events,
                                            std::span<const std::int64_t> times_ms, const Rect& face_box)
{
    std::vector<RenderedFrame> out;
    for (auto t : times_ms)
        out.push_back({"overlay-t" + std::to_string(t) + ".svg", t,
                       render_overlay(layout, state_at(events, t), face_box)});
    return out;
}

} // namespace speechread::overlay
