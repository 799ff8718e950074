// Data conditioning: cleaning, frozen-sensor removal, daily alignment,
// derived features (GOR, water cut), partitioning, IQR outlier removal,
// Pearson correlation, normalization and time-window sample construction.
//
// Pipeline order is fixed: clean -> frozen -> daily-align -> derive ->
// partition -> IQR -> scaler-fit(train) -> window. Scalers are fitted by the
// training stage so that fold-level refits cannot leak validation data.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "wellsense/core.hpp"
#include "wellsense/welldata.hpp"

namespace wellsense {

// ---------------------------------------------------------------------------
// Features: telemetry channels plus the two derived ratios.
// ---------------------------------------------------------------------------

enum class Feature : int {
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
    gor,
    wcut,
};

inline constexpr int kNumFeatures = 15;

inline const char* feature_name(Feature f) {
    const int i = static_cast<int>(f);
    if (i < kNumChannels) return kChannelNames[i];
    return f == Feature::gor ? "gor" : "wcut";
}

inline std::optional<Feature> feature_from_name(std::string_view name) {
    for (int i = 0; i < kNumFeatures; ++i)
        if (name == feature_name(static_cast<Feature>(i))) return static_cast<Feature>(i);
    return std::nullopt;
}

struct DerivedRecord : WellRecord {
    double gor = 0.0;
    double wcut = 0.0;

    friend bool operator==(const DerivedRecord&, const DerivedRecord&) = default;
};

inline double get_feature(const DerivedRecord& r, Feature f) {
    if (f == Feature::gor) return r.gor;
    if (f == Feature::wcut) return r.wcut;
    return r.get(static_cast<Channel>(static_cast<int>(f)));
}

struct DerivedDataset {
    std::string field_id;
    std::map<std::string, std::vector<DerivedRecord>> wells;

    std::size_t record_count() const {
        std::size_t n = 0;
        for (const auto& [id, recs] : wells) n += recs.size();
        return n;
    }
    std::vector<const DerivedRecord*> flat() const {
        std::vector<const DerivedRecord*> out;
        out.reserve(record_count());
        for (const auto& [id, recs] : wells)
            for (const auto& r : recs) out.push_back(&r);
        return out;
    }
};

// Ordered list of model input columns. BHP and BHT are never inputs.
struct FeatureSet {
    std::string id;
    std::vector<Feature> columns;

    FeatureSet() = default;
    FeatureSet(std::string set_id, std::vector<Feature> cols)
        : id(std::move(set_id)), columns(std::move(cols)) {
        for (Feature f : columns)
            if (f == Feature::bhp || f == Feature::bht)
                throw InvalidConfigError("feature set may not contain bhp/bht");
    }

    int size() const { return static_cast<int>(columns.size()); }
    bool contains(Feature f) const {
        return std::find(columns.begin(), columns.end(), f) != columns.end();
    }

    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

    // The input combinations evaluated during model definition.
    static FeatureSet table5(int n) {
        using F = Feature;
        switch (n) {
            case 1:
                return {"Set1", {F::choke_p, F::choke_t, F::whp, F::wht, F::q_oil, F::q_gas,
                                 F::depth_pdg}};
            case 2:
                return {"Set2", {F::choke_p, F::choke_t, F::whp, F::wht, F::q_oil, F::q_gas,
                                 F::q_water, F::depth_pdg}};
            case 3:
                return {"Set3", {F::choke_p, F::choke_t, F::whp, F::wht, F::q_oil, F::gor,
                                 F::wcut, F::depth_pdg}};
            case 4:
                return {"Set4", {F::choke_aperture, F::choke_p, F::choke_t, F::whp, F::wht,
                                 F::q_oil, F::q_gas, F::depth_pdg}};
            case 5:
                return {"Set5", {F::choke_p, F::whp, F::q_oil, F::gor, F::wcut, F::depth_pdg}};
            case 6:
                return {"Set6", {F::choke_p, F::whp, F::q_oil, F::q_gas, F::wcut, F::depth_pdg}};
            default:
                throw InvalidConfigError("table5 set index must be 1..6");
        }
    }

    static FeatureSet by_id(const std::string& id) {
        for (int n = 1; n <= 6; ++n)
            if (id == "Set" + std::to_string(n)) return table5(n);
        throw InvalidConfigError("unknown feature set id: " + id);
    }
};

// ---------------------------------------------------------------------------
// Cleaning (nulls/errors, zero rates, short-open days) and frozen sensors.
// ---------------------------------------------------------------------------

struct RuleCounts {
    std::size_t null_error = 0;
    std::size_t zero_rate = 0;
    std::size_t short_open = 0;
    std::size_t frozen = 0;
    std::size_t iqr = 0;

    std::size_t total() const { return null_error + zero_rate + short_open + frozen + iqr; }
};

struct ConditioningReport {
    std::map<std::string, RuleCounts> per_well;
    std::size_t input_records = 0;
    std::size_t output_records = 0;
    std::size_t wells_too_short_for_window = 0;

    RuleCounts total() const {
        RuleCounts t;
        for (const auto& [w, c] : per_well) {
            t.null_error += c.null_error;
            t.zero_rate += c.zero_rate;
            t.short_open += c.short_open;
            t.frozen += c.frozen;
            t.iqr += c.iqr;
        }
        return t;
    }

    nlohmann::json to_json() const {
        nlohmann::json wells = nlohmann::json::object();
        for (const auto& [w, c] : per_well)
            wells[w] = {{"null_error", c.null_error}, {"zero_rate", c.zero_rate},
                        {"short_open", c.short_open}, {"frozen", c.frozen},
                        {"iqr", c.iqr}};
        const RuleCounts t = total();
        return {{"input_records", input_records},
                {"output_records", output_records},
                {"removed",
                 {{"null_error", t.null_error},
                  {"zero_rate", t.zero_rate},
                  {"short_open", t.short_open},
                  {"frozen", t.frozen},
                  {"iqr", t.iqr},
                  {"total", t.total()}}},
                {"per_well", wells}};
    }
};

namespace detail {

// Channels a record must carry to be usable; BHT is tracked but excluded
// from the analysis, so its nulls do not invalidate a record.
inline constexpr Channel kRequiredChannels[] = {
    Channel::bhp,    Channel::whp,       Channel::wht,       Channel::choke_p,
    Channel::choke_t, Channel::choke_aperture, Channel::q_oil, Channel::q_gas,
    Channel::q_water, Channel::q_gaslift, Channel::depth_pdg, Channel::open_hours,
};

enum class CleanVerdict { keep, null_error, zero_rate, short_open };

inline CleanVerdict clean_verdict(const WellRecord& r) {
    for (Channel c : kRequiredChannels)
        if (!r[c] || r.flags.is_error(c)) return CleanVerdict::null_error;
    if (*r[Channel::q_oil] == 0.0 || *r[Channel::choke_aperture] == 0.0)
        return CleanVerdict::zero_rate;
    if (*r[Channel::open_hours] < 2.0) return CleanVerdict::short_open;
    return CleanVerdict::keep;
}

}  // namespace detail

// Removes records with a null or error value in any required channel, with
// zero oil rate or choke aperture, or open for less than 2 hours in the day.
inline FieldDataset clean(const FieldDataset& ds, ConditioningReport* report = nullptr) {
    FieldDataset out;
    out.field_id = ds.field_id;
    out.provenance = ds.provenance;
    for (const auto& [id, recs] : ds.wells) {
        std::vector<WellRecord> kept;
        kept.reserve(recs.size());
        for (const WellRecord& r : recs) {
            switch (detail::clean_verdict(r)) {
                case detail::CleanVerdict::keep:
                    kept.push_back(r);
                    break;
                case detail::CleanVerdict::null_error:
                    if (report) report->per_well[id].null_error++;
                    break;
                case detail::CleanVerdict::zero_rate:
                    if (report) report->per_well[id].zero_rate++;
                    break;
                case detail::CleanVerdict::short_open:
                    if (report) report->per_well[id].short_open++;
                    break;
            }
        }
        if (!kept.empty()) out.wells[id] = std::move(kept);
    }
    return out;
}

// Sensor channels scanned for frozen values. Choke aperture is a setpoint
// (plateaus are normal operation) and rates come from daily allocation, so
// only continuously measured channels are scanned.
inline constexpr Channel kFrozenScanChannels[] = {Channel::bhp,     Channel::bht,
                                                  Channel::whp,     Channel::wht,
                                                  Channel::choke_p, Channel::choke_t};

// Removes every maximal run of more than `min_days` consecutive records in
// which a scanned channel repeats the exact same stored value. Equality is
// bitwise: real frozen sensors repeat stored values exactly, and a tolerance
// would need an epsilon the data cannot justify.
inline FieldDataset detect_frozen(const FieldDataset& ds, int min_days = 3,
                                  ConditioningReport* report = nullptr) {
    if (min_days < 1) throw InvalidConfigError("min_days must be >= 1");
    FieldDataset out;
    out.field_id = ds.field_id;
    out.provenance = ds.provenance;
    for (const auto& [id, recs] : ds.wells) {
        std::vector<bool> drop(recs.size(), false);
        for (Channel c : kFrozenScanChannels) {
            std::size_t run_start = 0;
            auto flush = [&](std::size_t end) {  // run is [run_start, end)
                if (end - run_start > static_cast<std::size_t>(min_days))
                    for (std::size_t k = run_start; k < end; ++k) drop[k] = true;
            };
            for (std::size_t i = 1; i <= recs.size(); ++i) {
                const bool contiguous = i < recs.size() && recs[i][c] && recs[run_start][c] &&
                                        *recs[i][c] == *recs[run_start][c];
                if (!contiguous) {
                    flush(i);
                    run_start = i;
                }
            }
        }
        std::vector<WellRecord> kept;
        kept.reserve(recs.size());
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (drop[i]) {
                if (report) report->per_well[id].frozen++;
            } else {
                kept.push_back(recs[i]);
            }
        }
        if (!kept.empty()) out.wells[id] = std::move(kept);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Daily alignment of sub-daily sensor data.
// ---------------------------------------------------------------------------

// One hour of raw sensor readings. Production rates are already daily and
// are merged downstream, so only the sensor channels appear here.
struct HourlySample {
    Date day;
    int hour = 0;
    bool flowing = true;
    std::array<std::optional<double>, 6> sensors{};  // order of kFrozenScanChannels
};

struct DailyAggregate {
    Date day;
    std::array<std::optional<double>, 6> sensors{};
    double open_hours = 0.0;
};

// Arithmetic mean per calendar day over flowing hours only; shut-in hours
// are excluded and counted out of open_hours.
inline std::vector<DailyAggregate> daily_average(const std::vector<HourlySample>& hourly) {
    std::map<std::int64_t, std::pair<std::array<std::pair<double, int>, 6>, int>> days;
    for (const HourlySample& h : hourly) {
        auto& [acc, open] = days[h.day.days_since_epoch()];
        if (!h.flowing) continue;
        open += 1;
        for (int c = 0; c < 6; ++c)
            if (h.sensors[c]) {
                acc[c].first += *h.sensors[c];
                acc[c].second += 1;
            }
    }
    std::vector<DailyAggregate> out;
    out.reserve(days.size());
    for (const auto& [day, entry] : days) {
        DailyAggregate d;
        d.day = Date(day);
        d.open_hours = entry.second;
        for (int c = 0; c < 6; ++c)
            if (entry.first[c].second > 0)
                d.sensors[c] = entry.first[c].first / entry.first[c].second;
        out.push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Derived features.
// ---------------------------------------------------------------------------

// GOR = Qg/Qo and Wcut = Qw/(Qo+Qw). Requires clean() upstream: a zero oil
// rate reaching this point is a pipeline bug, not a data condition.
inline DerivedDataset derive_features(const FieldDataset& ds) {
    DerivedDataset out;
    out.field_id = ds.field_id;
    for (const auto& [id, recs] : ds.wells) {
        auto& drecs = out.wells[id];
        drecs.reserve(recs.size());
        for (const WellRecord& r : recs) {
            const double q_oil = r.get(Channel::q_oil);
            if (q_oil == 0.0)
                throw DomainError("derive_features: zero oil rate for well " + id + " at " +
                                  r.day.to_string());
            DerivedRecord d;
            static_cast<WellRecord&>(d) = r;
            d.gor = r.get(Channel::q_gas) / q_oil;
            d.wcut = r.get(Channel::q_water) / (q_oil + r.get(Channel::q_water));
            drecs.push_back(std::move(d));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partitioning (blind-test protocol).
// ---------------------------------------------------------------------------

struct SplitSpec {
    std::set<std::string> heldout_wells;
    Date temporal_cutoff;
    int k = 5;
};

struct Partitions {
    DerivedDataset trainval;  // non-heldout wells, day <= cutoff
    DerivedDataset test1;     // heldout wells, day <= cutoff
    DerivedDataset test2;     // all wells, day > cutoff
};

// Splits into the two blind-test subsets and the training pool. "Before the
// cutoff" is inclusive so the three parts are disjoint and cover the input.
inline Partitions partition(const DerivedDataset& ds, const SplitSpec& spec) {
    if (ds.record_count() == 0) throw EmptyPartitionError("partition: empty dataset");
    Date lo = Date(std::numeric_limits<std::int64_t>::max());
    Date hi = Date(std::numeric_limits<std::int64_t>::min());
    for (const auto& [id, recs] : ds.wells) {
        if (recs.empty()) continue;
        lo = std::min(lo, recs.front().day);
        hi = std::max(hi, recs.back().day);
    }
    if (spec.temporal_cutoff < lo || spec.temporal_cutoff >= hi)
        throw EmptyPartitionError("partition: cutoff " + spec.temporal_cutoff.to_string() +
                                  " outside data range");

    Partitions out;
    out.trainval.field_id = out.test1.field_id = out.test2.field_id = ds.field_id;
    for (const auto& [id, recs] : ds.wells) {
        const bool held = spec.heldout_wells.count(id) > 0;
        for (const DerivedRecord& r : recs) {
            DerivedDataset& dst = r.day > spec.temporal_cutoff ? out.test2
                                  : held                       ? out.test1
                                                               : out.trainval;
            dst.wells[id].push_back(r);
        }
    }
    if (out.trainval.record_count() == 0)
        throw EmptyPartitionError("partition: no training records left");
    return out;
}

// ---------------------------------------------------------------------------
// IQR outlier removal (fences from Hazen quantiles, computed once).
// ---------------------------------------------------------------------------

inline constexpr Feature kIqrFeatures[] = {
    Feature::bhp,     Feature::whp,       Feature::wht,     Feature::choke_p,
    Feature::choke_t, Feature::choke_aperture, Feature::q_oil, Feature::q_gas,
    Feature::q_water, Feature::q_gaslift, Feature::depth_pdg, Feature::gor,
    Feature::wcut,
};

struct IqrResult {
    DerivedDataset kept;
    std::vector<DerivedRecord> removed;
    std::map<Feature, std::pair<double, double>> fences;  // (lower, upper)
};

// A record is removed when any non-excepted feature lies strictly outside
// [Q1 - 1.5*IQR, Q3 + 1.5*IQR]. Fences are computed once over the full
// input, never re-fenced after removals, and each field (and partition) is
// filtered with its own fences.
inline IqrResult iqr_filter(const DerivedDataset& ds,
                            const std::set<Feature>& exceptions = {},
                            ConditioningReport* report = nullptr) {
    IqrResult out;
    out.kept.field_id = ds.field_id;
    if (ds.record_count() < 4) throw TooFewSamplesError("iqr_filter: need >= 4 samples");

    const auto flat = ds.flat();
    for (Feature f : kIqrFeatures) {
        if (exceptions.count(f)) continue;
        std::vector<double> vals;
        vals.reserve(flat.size());
        for (const DerivedRecord* r : flat) vals.push_back(get_feature(*r, f));
        const double q1 = stats::quantile_hazen(vals, 0.25);
        const double q3 = stats::quantile_hazen(std::move(vals), 0.75);
        const double iqr = q3 - q1;
        out.fences[f] = {q1 - 1.5 * iqr, q3 + 1.5 * iqr};
    }

    for (const auto& [id, recs] : ds.wells) {
        std::vector<DerivedRecord> kept;
        kept.reserve(recs.size());
        for (const DerivedRecord& r : recs) {
            bool outlier = false;
            for (const auto& [f, fence] : out.fences) {
                const double v = get_feature(r, f);
                if (v < fence.first || v > fence.second) {
                    outlier = true;
                    break;
                }
            }
            if (outlier) {
                out.removed.push_back(r);
                if (report) report->per_well[id].iqr++;
            } else {
                kept.push_back(r);
            }
        }
        if (!kept.empty()) out.kept.wells[id] = std::move(kept);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pearson correlation.
// ---------------------------------------------------------------------------

// Standard Pearson r on every feature pair; symmetric with unit diagonal.
inline Eigen::MatrixXd pearson_matrix(const DerivedDataset& ds,
                                      const std::vector<Feature>& features) {
    const auto flat = ds.flat();
    const auto n = static_cast<Eigen::Index>(flat.size());
    const auto m = static_cast<Eigen::Index>(features.size());
    if (n < 2) throw TooFewSamplesError("pearson_matrix: need >= 2 samples");

    Eigen::MatrixXd x(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            x(i, j) = get_feature(*flat[i], features[static_cast<std::size_t>(j)]);

    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::VectorXd ss = x.colwise().squaredNorm();
    for (Eigen::Index j = 0; j < m; ++j)
        if (ss(j) == 0.0)
            throw ConstantFeatureError(std::string("pearson_matrix: constant feature ") +
                                       feature_name(features[static_cast<std::size_t>(j)]));

    Eigen::MatrixXd r(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        r(a, a) = 1.0;
        for (Eigen::Index b = a + 1; b < m; ++b) {
            const double v = x.col(a).dot(x.col(b)) / std::sqrt(ss(a) * ss(b));
            r(a, b) = v;
            r(b, a) = v;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Normalization.
// ---------------------------------------------------------------------------

enum class ScalerKind { MinMax, Standard };

inline const char* scaler_kind_name(ScalerKind k) {
    return k == ScalerKind::MinMax ? "MinMax" : "Standard";
}

struct FeatureScale {
    double a = 0.0;  // MinMax: min, Standard: mean
    double b = 1.0;  // MinMax: max, Standard: std (population)
    bool constant = false;

    friend bool operator==(const FeatureScale&, const FeatureScale&) = default;
};

// Column-wise affine scaler fitted on training data only. Values outside the
// training range are mapped by the same affine law (no clipping). Constant
// columns are flagged and map to 0.
struct ScalerParams {
    ScalerKind kind = ScalerKind::MinMax;
    std::vector<FeatureScale> per_feature;

    double transform(std::size_t i, double v) const {
        const FeatureScale& s = per_feature[i];
        if (s.constant) return 0.0;
        return kind == ScalerKind::MinMax ? (v - s.a) / (s.b - s.a) : (v - s.a) / s.b;
    }
    double inverse(std::size_t i, double v) const {
        const FeatureScale& s = per_feature[i];
        if (s.constant) return s.a;
        return kind == ScalerKind::MinMax ? s.a + v * (s.b - s.a) : s.a + v * s.b;
    }

    friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

inline ScalerParams fit_scaler(const std::vector<std::vector<double>>& columns, ScalerKind kind) {
    ScalerParams p;
    p.kind = kind;
    p.per_feature.reserve(columns.size());
    for (const auto& col : columns) {
        if (col.empty()) throw TooFewSamplesError("fit_scaler: empty column");
        FeatureScale s;
        if (kind == ScalerKind::MinMax) {
            s.a = *std::min_element(col.begin(), col.end());
            s.b = *std::max_element(col.begin(), col.end());
            if (s.a == s.b) {
                s.constant = true;
                s.b = s.a + 1.0;
            }
        } else {
            const double mu = stats::mean(col);
            double ss = 0.0;
            for (double v : col) ss += (v - mu) * (v - mu);
            const double sd = std::sqrt(ss / static_cast<double>(col.size()));
            s.a = mu;
            s.b = sd;
            if (sd == 0.0) {
                s.constant = true;
                s.b = 1.0;
            }
        }
        p.per_feature.push_back(s);
    }
    return p;
}

// Fits the input scaler over a record set for a feature list; the target
// (BHP) gets its own single-column params.
struct ScalerSet {
    ScalerParams features;
    ScalerParams target;  // one entry, channel bhp

    friend bool operator==(const ScalerSet&, const ScalerSet&) = default;

    double scale_target(double y) const { return target.transform(0, y); }
    double unscale_target(double y) const { return target.inverse(0, y); }
};

inline ScalerSet fit_scaler(const DerivedDataset& train, const FeatureSet& fs, ScalerKind kind) {
    const auto flat = train.flat();
    if (flat.empty()) throw TooFewSamplesError("fit_scaler: empty training set");
    std::vector<std::vector<double>> cols(fs.columns.size());
    std::vector<std::vector<double>> ycol(1);
    for (const DerivedRecord* r : flat) {
        for (std::size_t j = 0; j < fs.columns.size(); ++j)
            cols[j].push_back(get_feature(*r, fs.columns[j]));
        ycol[0].push_back(r->get(Channel::bhp));
    }
    ScalerSet out;
    out.features = fit_scaler(cols, kind);
    out.target = fit_scaler(ycol, kind);
    if (out.target.per_feature[0].constant)
        throw ConstantFeatureError("fit_scaler: constant target");
    return out;
}

// ---------------------------------------------------------------------------
// Windowing (Fig-8 style sample construction).
// ---------------------------------------------------------------------------

// A (p+1)-step input slice, oldest row first, with the BHP target at the
// last step. Rows hold raw (unscaled) feature values; models scale on entry.
struct WindowedSample {
    Eigen::MatrixXd x;  // (p+1) x n_features
    double y = 0.0;
    std::string well_id;
    Date day;
};

// One sample per record with p consecutive-calendar-day predecessors in the
// same well. Windows never span removed days or well boundaries; p = 0
// degenerates to a single-row feature vector.
inline std::vector<WindowedSample> window_samples(const DerivedDataset& ds,
                                                  const FeatureSet& fs, int p,
                                                  ConditioningReport* report = nullptr) {
    if (p < 0) throw InvalidConfigError("window_samples: p must be >= 0");
    std::vector<WindowedSample> out;
    const auto n_feat = static_cast<Eigen::Index>(fs.columns.size());
    for (const auto& [id, recs] : ds.wells) {
        if (recs.size() < static_cast<std::size_t>(p) + 1) {
            if (report) report->wells_too_short_for_window++;
            continue;
        }
        for (std::size_t i = p; i < recs.size(); ++i) {
            bool contiguous = true;
            for (int k = 0; k < p; ++k)
                if (recs[i - k].day - recs[i - k - 1].day != 1) {
                    contiguous = false;
                    break;
                }
            if (!contiguous) continue;
            WindowedSample w;
            w.x.resize(p + 1, n_feat);
            for (int t = 0; t <= p; ++t) {
                const DerivedRecord& r = recs[i - p + t];
                for (Eigen::Index j = 0; j < n_feat; ++j)
                    w.x(t, j) = get_feature(r, fs.columns[static_cast<std::size_t>(j)]);
            }
            w.y = recs[i].get(Channel::bhp);
            w.well_id = id;
            w.day = recs[i].day;
            out.push_back(std::move(w));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Whole-pipeline driver and derived-dataset persistence.
// ---------------------------------------------------------------------------

struct ConditioningConfig {
    int min_frozen_days = 3;
    // Rates carry legitimate operational extremes (the physically plausible
    // deviations the outlier rule must not delete), so they default to the
    // exception list.
    std::set<Feature> iqr_exceptions = {Feature::q_gas, Feature::q_water, Feature::q_gaslift};
    SplitSpec split;
};

struct ConditionedData {
    Partitions parts;
    ConditioningReport report;
};

inline ConditionedData run_conditioning(const FieldDataset& ds, const ConditioningConfig& cfg) {
    ConditionedData out;
    out.report.input_records = ds.record_count();
    const FieldDataset cleaned = clean(ds, &out.report);
    const FieldDataset unfrozen = detect_frozen(cleaned, cfg.min_frozen_days, &out.report);
    const DerivedDataset derived = derive_features(unfrozen);
    Partitions parts = partition(derived, cfg.split);
    out.parts.trainval = iqr_filter(parts.trainval, cfg.iqr_exceptions, &out.report).kept;
    if (parts.test1.record_count() >= 4)
        out.parts.test1 = iqr_filter(parts.test1, cfg.iqr_exceptions, &out.report).kept;
    else
        out.parts.test1 = std::move(parts.test1);
    if (parts.test2.record_count() >= 4)
        out.parts.test2 = iqr_filter(parts.test2, cfg.iqr_exceptions, &out.report).kept;
    else
        out.parts.test2 = std::move(parts.test2);
    out.parts.trainval.field_id = ds.field_id;
    out.parts.test1.field_id = ds.field_id;
    out.parts.test2.field_id = ds.field_id;
    out.report.output_records = out.parts.trainval.record_count() +
                                out.parts.test1.record_count() +
                                out.parts.test2.record_count();
    return out;
}

inline void save_derived_csv(const DerivedDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "well_id,date";
    for (int c = 0; c < kNumChannels; ++c) out << ',' << kChannelNames[c];
    out << ",quality_flags,gor,wcut\n";
    for (const auto& [id, recs] : ds.wells) {
        for (const DerivedRecord& r : recs) {
            out << id << ',' << r.day.to_string();
            for (int c = 0; c < kNumChannels; ++c) {
                out << ',';
                if (r.values[c]) out << fmt_double(*r.values[c]);
            }
            out << ',' << r.flags.to_string() << ',' << fmt_double(r.gor) << ','
                << fmt_double(r.wcut) << '\n';
        }
    }
    if (!out) throw IoError("write failure on " + path.string());
}

inline DerivedDataset load_derived_csv(const std::filesystem::path& path) {
    // Reuse the welldata loader for the shared columns, then re-derive the
    // ratio features (they are pure functions of the stored rates).
    const FieldDataset base = load_csv(path);
    return derive_features(base);
}

}  // namespace wellsense
