// Domain types for well telemetry and the CSV format used by every other
// module. One row per (well, day); nulls are empty cells; values round-trip
// at full precision.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wellsense/core.hpp"

namespace wellsense {

// Telemetry channels, in Table-layout order. `bht` is carried through the
// pipeline but never used as a model input.
enum class Channel : int {
    bhp = 0,
    bht,
    whp,
    wht,
    choke_p,
    choke_t,
    choke_aperture,
    q_oil,
    q_gas,
    q_water,
    q_gaslift,
    depth_pdg,
    open_hours,
};

inline constexpr int kNumChannels = 13;

inline constexpr std::array<const char*, kNumChannels> kChannelNames = {
    "bhp",    "bht",   "whp",     "wht",       "choke_p",   "choke_t", "choke_aperture",
    "q_oil",  "q_gas", "q_water", "q_gaslift", "depth_pdg", "open_hours",
};

inline const char* channel_name(Channel c) { return kChannelNames[static_cast<int>(c)]; }

inline std::optional<Channel> channel_from_name(std::string_view name) {
    for (int i = 0; i < kNumChannels; ++i)
        if (name == kChannelNames[i]) return static_cast<Channel>(i);
    return std::nullopt;
}

// Per-record data quality markers. Null bits are derived from cell
// emptiness on load and are not persisted separately; error/warn bits
// travel in the quality_flags column.
struct QualityFlags {
    std::uint32_t null_mask = 0;
    std::uint32_t error_mask = 0;
    std::uint32_t warn_mask = 0;

    void set_null(Channel c) { null_mask |= 1u << static_cast<int>(c); }
    void set_error(Channel c) { error_mask |= 1u << static_cast<int>(c); }
    void set_warn(Channel c) { warn_mask |= 1u << static_cast<int>(c); }
    bool is_null(Channel c) const { return null_mask & (1u << static_cast<int>(c)); }
    bool is_error(Channel c) const { return error_mask & (1u << static_cast<int>(c)); }
    bool is_warn(Channel c) const { return warn_mask & (1u << static_cast<int>(c)); }
    bool any() const { return null_mask || error_mask || warn_mask; }

    friend bool operator==(const QualityFlags&, const QualityFlags&) = default;

    // Persisted form: "err:whp;warn:choke_aperture" (semicolon-joined, channel order).
    std::string to_string() const {
        std::string out;
        auto append = [&](std::uint32_t mask, const char* tag) {
            for (int i = 0; i < kNumChannels; ++i)
                if (mask & (1u << i)) {
                    if (!out.empty()) out += ';';
                    out += tag;
                    out += ':';
                    out += kChannelNames[i];
                }
        };
        append(error_mask, "err");
        append(warn_mask, "warn");
        return out;
    }

    static QualityFlags parse(std::string_view s) {
        QualityFlags f;
        std::size_t pos = 0;
        while (pos < s.size()) {
            std::size_t end = s.find(';', pos);
            if (end == std::string_view::npos) end = s.size();
            std::string_view tok = s.substr(pos, end - pos);
            const std::size_t colon = tok.find(':');
            if (colon != std::string_view::npos) {
                const std::string_view kind = tok.substr(0, colon);
                const auto ch = channel_from_name(tok.substr(colon + 1));
                if (ch) {
                    if (kind == "err")
                        f.set_error(*ch);
                    else if (kind == "warn")
                        f.set_warn(*ch);
                }
            }
            pos = end + 1;
        }
        return f;
    }
};

// One timestamped sample of all telemetry variables for one well.
struct WellRecord {
    std::string well_id;
    Date day;
    std::array<std::optional<double>, kNumChannels> values{};
    QualityFlags flags;

    std::optional<double>& operator[](Channel c) { return values[static_cast<int>(c)]; }
    const std::optional<double>& operator[](Channel c) const {
        return values[static_cast<int>(c)];
    }

    double get(Channel c) const {
        const auto& v = values[static_cast<int>(c)];
        if (!v) throw DomainError(std::string("missing value for ") + channel_name(c));
        return *v;
    }

    friend bool operator==(const WellRecord&, const WellRecord&) = default;
};

// A collection of per-well daily series plus field-level metadata.
struct FieldDataset {
    std::string field_id;
    std::map<std::string, std::vector<WellRecord>> wells;
    std::string provenance;

    std::size_t record_count() const {
        std::size_t n = 0;
        for (const auto& [id, recs] : wells) n += recs.size();
        return n;
    }

    friend bool operator==(const FieldDataset&, const FieldDataset&) = default;
};

// Maps canonical column names to the names used in a particular file.
// Default-constructed schema is the identity.
struct CsvSchema {
    std::map<std::string, std::string> names;  // canonical -> file column

    std::string column_for(const std::string& canonical) const {
        auto it = names.find(canonical);
        return it == names.end() ? canonical : it->second;
    }
};

namespace detail {

inline void validate_record(WellRecord& r) {
    for (Channel c : {Channel::q_oil, Channel::q_gas, Channel::q_water, Channel::q_gaslift}) {
        const auto& v = r[c];
        if (v && *v < 0.0) r.flags.set_error(c);
    }
    const auto& choke = r[Channel::choke_aperture];
    if (choke) {
        if (*choke < 0.0) r.flags.set_error(Channel::choke_aperture);
        // Table-2-style apertures above 100% are kept, flagged, not clipped.
        else if (*choke > 100.0) r.flags.set_warn(Channel::choke_aperture);
    }
    const auto& oh = r[Channel::open_hours];
    if (oh && (*oh < 0.0 || *oh > 24.0)) r.flags.set_error(Channel::open_hours);
}

}  // namespace detail

// Loads a field CSV. Unparseable or missing cells become absent values with
// a null flag; they never silently become 0. Records come back sorted by
// day within each well.
inline FieldDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw EmptyFileError("empty file: " + path.string());

    const auto header = split_csv_line(trim(line));
    std::map<std::string, int> col_index;
    for (std::size_t i = 0; i < header.size(); ++i)
        col_index[std::string(trim(header[i]))] = static_cast<int>(i);

    auto require = [&](const std::string& canonical) {
        const std::string col = schema.column_for(canonical);
        auto it = col_index.find(col);
        if (it == col_index.end())
            throw MissingColumnError("missing column '" + col + "' in " + path.string());
        return it->second;
    };

    const int idx_well = require("well_id");
    const int idx_date = require("date");
    std::array<int, kNumChannels> idx_channel{};
    for (int c = 0; c < kNumChannels; ++c) idx_channel[c] = require(kChannelNames[c]);
    // quality_flags is optional on input.
    int idx_flags = -1;
    {
        const std::string col = schema.column_for("quality_flags");
        auto it = col_index.find(col);
        if (it != col_index.end()) idx_flags = it->second;
    }

    FieldDataset ds;
    ds.field_id = path.stem().string();
    ds.provenance = path.string();

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view sv = trim(line);
        if (sv.empty()) continue;
        const auto cells = split_csv_line(sv);
        auto cell = [&](int idx) -> std::string_view {
            return idx >= 0 && idx < static_cast<int>(cells.size()) ? trim(cells[idx])
                                                                    : std::string_view{};
        };

        WellRecord r;
        r.well_id = std::string(cell(idx_well));
        if (r.well_id.empty())
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": empty well_id");
        const auto day = Date::parse(cell(idx_date));
        if (!day)
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad date '" +
                             std::string(cell(idx_date)) + "'");
        r.day = *day;

        if (idx_flags >= 0) r.flags = QualityFlags::parse(cell(idx_flags));

        for (int c = 0; c < kNumChannels; ++c) {
            const std::string_view raw = cell(idx_channel[c]);
            if (raw.empty()) {
                r.flags.set_null(static_cast<Channel>(c));
                continue;
            }
            const auto v = parse_double(raw);
            if (!v) {
                r.flags.set_null(static_cast<Channel>(c));
                r.flags.set_error(static_cast<Channel>(c));
                continue;
            }
            r.values[c] = *v;
        }
        detail::validate_record(r);
        ds.wells[r.well_id].push_back(std::move(r));
    }

    if (ds.wells.empty()) throw EmptyFileError("no data rows in " + path.string());

    for (auto& [id, recs] : ds.wells) {
        std::stable_sort(recs.begin(), recs.end(),
                         [](const WellRecord& a, const WellRecord& b) { return a.day < b.day; });
        std::optional<double> depth;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (i > 0 && recs[i].day == recs[i - 1].day)
                throw DuplicateTimestampError("well " + id + " has two rows for " +
                                              recs[i].day.to_string());
            const auto& d = recs[i][Channel::depth_pdg];
            if (d) {
                if (depth && *depth != *d)
                    throw InvariantError("well " + id + " changes depth_pdg at " +
                                         recs[i].day.to_string());
                depth = *d;
            }
        }
    }
    return ds;
}

// Writes a field CSV such that load_csv(save_csv(ds)) == ds.
inline void save_csv(const FieldDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());

    out << "well_id,date";
    for (int c = 0; c < kNumChannels; ++c) out << ',' << kChannelNames[c];
    out << ",quality_flags\n";

    for (const auto& [id, recs] : ds.wells) {
        for (const WellRecord& r : recs) {
            out << id << ',' << r.day.to_string();
            for (int c = 0; c < kNumChannels; ++c) {
                out << ',';
                if (r.values[c]) out << fmt_double(*r.values[c]);
            }
            out << ',' << r.flags.to_string() << '\n';
        }
    }
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace wellsense
