// Synthetic two-field well data with a known BHP ground truth. A simplified
// steady-state pressure-drop model (gravity + friction) supplies the target,
// so downstream estimators can be verified without proprietary field data.
// Fault injection plants the defect classes the conditioning stage removes
// and returns a ledger for exact reconciliation in tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wellsense/core.hpp"
#include "wellsense/welldata.hpp"

namespace wellsense {

// Physical constants. Pressures are kgf/cm2 throughout; with rho in kg/m3
// and depth in m, the hydrostatic head is rho*depth/1e4 because g cancels
// against the kgf definition (1 kgf/cm2 = 98066.5 Pa, g = 9.80665 m/s2).
inline constexpr double kRhoWater = 1000.0;    // kg/m3
inline constexpr double kRhoOil = 850.0;       // kg/m3
inline constexpr double kRhoGasSc = 0.85;      // kg/m3 at standard conditions
inline constexpr double kStdPressure = 1.033;  // kgf/cm2
inline constexpr double kDefaultFrictionCoeff = 7.5e-11;  // kgf/cm2 * m5 / (m3/d)^2

// Static per-well description used by the pressure model and the generator.
struct WellProps {
    double depth_pdg = 4800.0;     // m
    double tubing_id = 0.1397;     // m
    double flowline_len = 2000.0;  // m
    double base_gor = 0.25;        // (Mm3/d)/(m3/d) at start of history
    double wcut_trend = 0.0;       // fraction/day, indicative end-of-life slope
    double reservoir_p0 = 560.0;   // kgf/cm2
    double depletion_rate = 0.015; // kgf/cm2/day
    bool has_gaslift = false;
    double noise_sigma = 0.0;      // relative sensor noise
    double friction_coeff = kDefaultFrictionCoeff;
};

// Steady-state flowing BHP: WHP plus a gravity term from a no-slip mixture
// density and a quadratic liquid friction term. The acceleration component
// of the gradient is taken as zero.
//
// Mixture density is total mass rate over total in-situ volume rate, with
// the surface gas volume expanded isothermally at a midpoint pressure
// estimated from a liquid-only column. That keeps the density a documented
// closed form: increasing in water cut and depth, decreasing in gas and
// gas-lift rates.
inline double bhp_oracle(double whp, double q_oil, double q_gas, double q_water,
                         double q_gaslift, const WellProps& props) {
    if (q_oil < 0 || q_gas < 0 || q_water < 0 || q_gaslift < 0)
        throw DomainError("bhp_oracle: negative rate");
    if (whp <= 0) throw DomainError("bhp_oracle: non-positive wellhead pressure");
    const double q_liq = q_oil + q_water;
    if (q_liq <= 0.0) throw NoFlowError("bhp_oracle: no liquid flow");

    const double wcut = q_water / q_liq;
    const double rho_liq = wcut * kRhoWater + (1.0 - wcut) * kRhoOil;

    const double p_ref = whp + rho_liq * props.depth_pdg / 2.0e4;
    const double b_g = kStdPressure / p_ref;          // in-situ volume per sc volume
    const double q_gas_sc = (q_gas + q_gaslift) * 1000.0;  // Mm3/d -> m3/d
    const double mass_rate = q_liq * rho_liq + q_gas_sc * kRhoGasSc;
    const double vol_rate = q_liq + q_gas_sc * b_g;
    const double rho_mix = mass_rate / vol_rate;

    const double dp_grav = rho_mix * props.depth_pdg / 1.0e4;
    const double dp_fric =
        props.friction_coeff * q_liq * q_liq / std::pow(props.tubing_id, 5);
    return whp + dp_grav + dp_fric;
}

enum class FieldProfile { field1, field2 };

inline const char* field_profile_name(FieldProfile p) {
    return p == FieldProfile::field1 ? "field1" : "field2";
}

// Per-record planting probabilities; frozen_rate is the chance a frozen run
// starts at a given record.
struct FaultRates {
    double null_rate = 0.0;
    double shutin_rate = 0.0;
    double short_open_rate = 0.0;
    double frozen_rate = 0.0;
    double outlier_rate = 0.0;

    bool all_zero() const {
        return null_rate == 0 && shutin_rate == 0 && short_open_rate == 0 &&
               frozen_rate == 0 && outlier_rate == 0;
    }
    void validate() const {
        for (double r : {null_rate, shutin_rate, short_open_rate, frozen_rate, outlier_rate})
            if (r < 0.0 || r > 1.0) throw InvalidConfigError("fault rate outside [0,1]");
    }
};

struct GenConfig {
    int n_wells = 45;
    int n_days = 1500;
    FieldProfile profile = FieldProfile::field1;
    std::uint64_t seed = 0;
    FaultRates fault_rates;
    double noise_sigma = 0.005;
    Date start_date = Date::from_ymd(2010, 1, 1);

    void validate() const {
        if (n_wells < 1) throw InvalidConfigError("n_wells must be >= 1");
        if (n_days < 30) throw InvalidConfigError("n_days must be >= 30");
        if (noise_sigma < 0) throw InvalidConfigError("noise_sigma must be >= 0");
        fault_rates.validate();
    }
};

enum class FaultKind { null_cell, shutin, short_open, frozen, outlier };

inline const char* fault_kind_name(FaultKind k) {
    switch (k) {
        case FaultKind::null_cell: return "null";
        case FaultKind::shutin: return "shutin";
        case FaultKind::short_open: return "short_open";
        case FaultKind::frozen: return "frozen";
        case FaultKind::outlier: return "outlier";
    }
    return "?";
}

struct FaultEntry {
    FaultKind kind;
    std::string well_id;
    Channel channel;  // meaningful for null/frozen/outlier
    std::vector<Date> days;
};

struct FaultLedger {
    std::vector<FaultEntry> entries;

    std::size_t record_count(FaultKind k) const {
        std::size_t n = 0;
        for (const auto& e : entries)
            if (e.kind == k) n += e.days.size();
        return n;
    }

    // Set of (well, day) pairs planted for one fault class.
    std::set<std::pair<std::string, std::int64_t>> records(FaultKind k) const {
        std::set<std::pair<std::string, std::int64_t>> out;
        for (const auto& e : entries)
            if (e.kind == k)
                for (Date d : e.days) out.emplace(e.well_id, d.days_since_epoch());
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : entries) {
            nlohmann::json days = nlohmann::json::array();
            for (Date d : e.days) days.push_back(d.to_string());
            arr.push_back({{"kind", fault_kind_name(e.kind)},
                           {"well_id", e.well_id},
                           {"channel", channel_name(e.channel)},
                           {"days", days}});
        }
        return {{"faults", arr}};
    }
};

namespace detail {

// Trajectory parameters drawn per well; not part of the public data model.
struct WellTrajectory {
    WellProps props;
    double q_oil_base;
    double gor_drift;
    double wcut0, wcut1, ramp_mid, ramp_tau;
    double dd_target;          // drawdown at base oil rate, kgf/cm2
    double wht_base, choke_t_drop, bht_base;
    double decline_rate;
    double wiggle_amp, wiggle_period, wiggle_phase;
    double phase2, phase3, phase4;
    double choke_init, choke_move_mean_days, choke_move_max;
    double shutin_mean_days;
    double gl_base, gl_start_frac;
};

inline WellTrajectory draw_trajectory(FieldProfile profile, double noise_sigma, Rng& rng) {
    WellTrajectory t;
    const bool f2 = profile == FieldProfile::field2;
    WellProps& p = t.props;
    p.depth_pdg = f2 ? rng.uniform(4780, 4970) : rng.uniform(4550, 4925);
    p.tubing_id = f2 ? 0.1524 : 0.1397;
    p.flowline_len = f2 ? rng.uniform(1900, 2300) : rng.uniform(1800, 2200);
    // Between-well spread dominates within-well drift on every channel the
    // outlier filter scans, so pooled distributions stay inside their own
    // 1.5*IQR fences and only planted outliers can violate them.
    p.base_gor = f2 ? rng.uniform(0.24, 0.44) : rng.uniform(0.17, 0.33);
    p.reservoir_p0 = f2 ? rng.uniform(550, 630) : rng.uniform(525, 600);
    p.depletion_rate = rng.uniform(0.006, f2 ? 0.016 : 0.018);
    p.has_gaslift = f2 && rng.uniform() < 0.6;
    p.noise_sigma = noise_sigma;

    t.q_oil_base = f2 ? rng.uniform(1500, 4800) : rng.uniform(1800, 4200);
    t.gor_drift = rng.uniform(0.08, f2 ? 0.22 : 0.28);
    t.wcut0 = f2 ? rng.uniform(0.05, 0.15) : rng.uniform(0.02, 0.08);
    t.wcut1 = f2 ? rng.uniform(0.18, 0.35) : rng.uniform(0.10, 0.22);
    t.ramp_mid = rng.uniform(0.30, 0.70);
    t.ramp_tau = rng.uniform(0.08, 0.20);
    p.wcut_trend = (t.wcut1 - t.wcut0) / (4.0 * t.ramp_tau);  // peak logistic slope, per unit history
    t.dd_target = f2 ? rng.uniform(45, 70) : rng.uniform(45, 65);
    t.wht_base = f2 ? rng.uniform(50, 64) : rng.uniform(48, 62);
    t.choke_t_drop = f2 ? rng.uniform(10, 20) : rng.uniform(12, 22);
    t.bht_base = f2 ? rng.uniform(92, 106) : rng.uniform(88, 102);
    t.decline_rate = rng.uniform(1e-5, 2.2e-4);
    t.wiggle_amp = rng.uniform(0.01, 0.05);
    t.wiggle_period = rng.uniform(45, 120);
    t.wiggle_phase = rng.uniform(0, 2 * M_PI);
    t.phase2 = rng.uniform(0, 2 * M_PI);
    t.phase3 = rng.uniform(0, 2 * M_PI);
    t.phase4 = rng.uniform(0, 2 * M_PI);
    t.choke_init = rng.uniform(35, 90);
    t.choke_move_mean_days = rng.uniform(50, 110);
    t.choke_move_max = rng.uniform(5, 18);
    t.shutin_mean_days = rng.uniform(180, 320);
    t.gl_base = p.has_gaslift ? rng.uniform(80, 200) : 0.0;
    t.gl_start_frac = rng.uniform(0.0, 0.5);
    return t;
}

// Solves oracle(whp) = bhp_target for whp. The gravity term depends on whp
// only through the midpoint expansion factor, so fixed-point iteration
// contracts quickly.
inline double solve_whp(double bhp_target, double q_oil, double q_gas, double q_water,
                        double q_gaslift, const WellProps& props) {
    double whp = std::max(20.0, bhp_target - 0.6 * props.depth_pdg / 10.0);
    for (int it = 0; it < 200; ++it) {
        const double delta = bhp_target - bhp_oracle(whp, q_oil, q_gas, q_water, q_gaslift, props);
        whp += delta;
        if (whp < 5.0) whp = 5.0;
        if (std::abs(delta) < 1e-11) break;
    }
    return whp;
}

}  // namespace detail

// Deterministic field generator. Per-well streams are split from the seed,
// so well order or parallel generation cannot change the output. Shut-in
// events appear as gaps in the series (no row for a non-flowing day).
inline FieldDataset generate_field(const GenConfig& cfg) {
    cfg.validate();
    const Rng root(cfg.seed);

    FieldDataset ds;
    ds.field_id = field_profile_name(cfg.profile);
    ds.provenance = "synthgen:seed=" + std::to_string(cfg.seed);
    const char* prefix = cfg.profile == FieldProfile::field1 ? "F1-W" : "F2-W";

    for (int w = 0; w < cfg.n_wells; ++w) {
        Rng rng = root.split(static_cast<std::uint64_t>(w));
        auto traj = detail::draw_trajectory(cfg.profile, cfg.noise_sigma, rng);
        const WellProps& props = traj.props;

        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "%s%02d", prefix, w + 1);
        std::string well_id = idbuf;

        // Pre-draw operational events.
        std::set<int> shut_days;
        {
            Rng ev = rng.split(1);
            double tday = ev.uniform(0.3, 1.3) * traj.shutin_mean_days;
            while (tday < cfg.n_days) {
                const int dur = 1 + static_cast<int>(ev.uniform_int(4));
                for (int d = 0; d < dur; ++d) {
                    const int day = static_cast<int>(tday) + d;
                    if (day >= 0 && day < cfg.n_days) shut_days.insert(day);
                }
                tday += std::max(20.0, ev.uniform(0.4, 1.6) * traj.shutin_mean_days);
            }
        }
        std::map<int, double> choke_moves;  // day -> new aperture
        {
            Rng ev = rng.split(2);
            double aperture = traj.choke_init;
            double tday = ev.uniform(0.3, 1.3) * traj.choke_move_mean_days;
            while (tday < cfg.n_days) {
                const double step = ev.uniform(-traj.choke_move_max, traj.choke_move_max);
                aperture = std::clamp(aperture + step, 18.0, 98.0);
                choke_moves[static_cast<int>(tday)] = aperture;
                tday += std::max(10.0, ev.uniform(0.4, 1.6) * traj.choke_move_mean_days);
            }
        }

        Rng noise = rng.split(3);
        auto& records = ds.wells[well_id];
        records.reserve(cfg.n_days);
        double aperture = traj.choke_init;

        for (int day = 0; day < cfg.n_days; ++day) {
            if (auto it = choke_moves.find(day); it != choke_moves.end()) aperture = it->second;
            if (shut_days.count(day)) continue;

            const double u = static_cast<double>(day) / cfg.n_days;
            const double choke_factor = std::pow(aperture / 100.0, 0.35);
            const double wiggle =
                1.0 + traj.wiggle_amp *
                          std::sin(2 * M_PI * day / traj.wiggle_period + traj.wiggle_phase);
            const double q_oil =
                traj.q_oil_base * choke_factor * std::exp(-traj.decline_rate * day) * wiggle;
            const double ramp = 1.0 / (1.0 + std::exp(-(u - traj.ramp_mid) / traj.ramp_tau));
            const double wcut = traj.wcut0 + (traj.wcut1 - traj.wcut0) * ramp;
            const double q_water = q_oil * wcut / (1.0 - wcut);
            const double gor = props.base_gor * (1.0 + traj.gor_drift * u);
            const double q_gas = gor * q_oil;
            double q_gaslift = 0.0;
            if (props.has_gaslift) {
                const double gl_start = traj.gl_start_frac * cfg.n_days;
                if (day > gl_start)
                    q_gaslift = traj.gl_base * std::min(1.0, (day - gl_start) / 30.0);
            }

            const double p_res = props.reservoir_p0 - props.depletion_rate * day;
            const double pi = traj.q_oil_base / traj.dd_target;
            const double bhp_inflow = p_res - (q_oil + q_water) / pi;
            const double whp =
                detail::solve_whp(bhp_inflow, q_oil, q_gas, q_water, q_gaslift, props);
            const double bhp = bhp_oracle(whp, q_oil, q_gas, q_water, q_gaslift, props);

            const double wht = traj.wht_base * (0.92 + 0.08 * q_oil / traj.q_oil_base) +
                               0.5 * std::sin(2 * M_PI * day / 365.0 + traj.phase2);
            const double choke_t =
                wht - traj.choke_t_drop * (0.95 + 0.1 * std::sin(2 * M_PI * day / 77.0 + traj.phase3));
            const double choke_p = whp * (0.12 + 0.30 * choke_factor);
            const double bht = traj.bht_base + 1.5 * std::sin(2 * M_PI * day / 400.0 + traj.phase4) +
                               0.8 * (q_oil / traj.q_oil_base - 1.0);

            WellRecord r;
            r.well_id = well_id;
            r.day = cfg.start_date + day;
            auto noisy = [&](double v) { return v * (1.0 + props.noise_sigma * noise.normal()); };
            r[Channel::bhp] = noisy(bhp);
            r[Channel::bht] = noisy(bht);
            r[Channel::whp] = noisy(whp);
            r[Channel::wht] = noisy(wht);
            r[Channel::choke_p] = noisy(choke_p);
            r[Channel::choke_t] = noisy(choke_t);
            r[Channel::choke_aperture] = aperture;
            r[Channel::q_oil] = q_oil;
            r[Channel::q_gas] = q_gas;
            r[Channel::q_water] = q_water;
            r[Channel::q_gaslift] = q_gaslift;
            r[Channel::depth_pdg] = props.depth_pdg;
            r[Channel::open_hours] = 24.0;
            records.push_back(std::move(r));
        }
    }
    return ds;
}

namespace detail {

inline constexpr Channel kSensorChannels[] = {Channel::bhp,     Channel::bht,
                                              Channel::whp,     Channel::wht,
                                              Channel::choke_p, Channel::choke_t};

inline constexpr Channel kNullTargets[] = {Channel::bhp,     Channel::whp,   Channel::wht,
                                           Channel::choke_p, Channel::choke_t, Channel::q_oil,
                                           Channel::q_gas,   Channel::q_water};

inline constexpr Channel kOutlierTargets[] = {Channel::whp, Channel::wht, Channel::choke_p,
                                              Channel::choke_t, Channel::q_oil};

}  // namespace detail

// Plants nulls, shut-in rows, short-open rows, frozen runs and gross
// outliers, and reports exactly which (well, day) pairs were touched.
// Faults never collide: a record carries at most one fault, and frozen runs
// keep a one-record buffer so planted values cannot merge with neighbours.
inline std::pair<FieldDataset, FaultLedger> inject_faults(const FieldDataset& input,
                                                          const GenConfig& cfg) {
    cfg.fault_rates.validate();
    FieldDataset ds = input;
    FaultLedger ledger;
    if (cfg.fault_rates.all_zero()) return {std::move(ds), std::move(ledger)};

    // Outliers are planted at 10x the pre-fault Q3 of the target channel so
    // they land far beyond any 1.5*IQR fence computed downstream.
    std::map<Channel, double> q3;
    for (Channel c : detail::kOutlierTargets) {
        std::vector<double> vals;
        for (const auto& [id, recs] : input.wells)
            for (const auto& r : recs)
                if (r[c]) vals.push_back(*r[c]);
        if (vals.size() >= 4) q3[c] = stats::quantile_hazen(std::move(vals), 0.75);
    }

    const Rng root = Rng(cfg.seed).split(0x666175ULL);  // independent of generation streams
    std::uint64_t widx = 0;
    const FaultRates& fr = cfg.fault_rates;

    for (auto& [well_id, recs] : ds.wells) {
        Rng rng = root.split(widx++);
        std::vector<bool> claimed(recs.size(), false);

        // Frozen runs first: they need room.
        for (std::size_t j = 0; j + 1 < recs.size(); ++j) {
            if (rng.uniform() >= fr.frozen_rate) continue;
            const std::size_t len = 4 + rng.uniform_int(4);  // 4..7 records
            if (j == 0 || j + len + 1 > recs.size()) continue;
            bool ok = true;
            for (std::size_t k = j == 0 ? j : j - 1; k <= j + len && k < recs.size(); ++k)
                if (claimed[k]) ok = false;
            for (std::size_t k = 1; k < len; ++k)
                if (recs[j + k].day - recs[j].day != static_cast<std::int64_t>(k)) ok = false;
            if (!ok) continue;

            const Channel ch =
                detail::kSensorChannels[rng.uniform_int(std::size(detail::kSensorChannels))];
            FaultEntry e{FaultKind::frozen, well_id, ch, {}};
            const double frozen_value = *recs[j][ch];
            for (std::size_t k = 0; k < len; ++k) {
                recs[j + k][ch] = frozen_value;
                e.days.push_back(recs[j + k].day);
            }
            for (std::size_t k = j == 0 ? j : j - 1; k <= j + len && k < recs.size(); ++k)
                claimed[k] = true;
            ledger.entries.push_back(std::move(e));
        }

        for (std::size_t j = 0; j < recs.size(); ++j) {
            if (claimed[j]) continue;
            WellRecord& r = recs[j];
            const double roll = rng.uniform();
            double acc = fr.null_rate;
            if (roll < acc) {
                const Channel ch =
                    detail::kNullTargets[rng.uniform_int(std::size(detail::kNullTargets))];
                r[ch] = std::nullopt;
                r.flags.set_null(ch);
                ledger.entries.push_back({FaultKind::null_cell, well_id, ch, {r.day}});
                claimed[j] = true;
                continue;
            }
            acc += fr.shutin_rate;
            if (roll < acc) {
                r[Channel::q_oil] = 0.0;
                r[Channel::q_gas] = 0.0;
                r[Channel::q_water] = 0.0;
                r[Channel::q_gaslift] = 0.0;
                r[Channel::choke_aperture] = 0.0;
                r[Channel::open_hours] = 0.0;
                ledger.entries.push_back({FaultKind::shutin, well_id, Channel::q_oil, {r.day}});
                claimed[j] = true;
                continue;
            }
            acc += fr.short_open_rate;
            if (roll < acc) {
                r[Channel::open_hours] = rng.uniform(0.25, 1.9);
                ledger.entries.push_back(
                    {FaultKind::short_open, well_id, Channel::open_hours, {r.day}});
                claimed[j] = true;
                continue;
            }
            acc += fr.outlier_rate;
            if (roll < acc) {
                const Channel ch =
                    detail::kOutlierTargets[rng.uniform_int(std::size(detail::kOutlierTargets))];
                if (auto it = q3.find(ch); it != q3.end()) {
                    r[ch] = 10.0 * it->second;
                    ledger.entries.push_back({FaultKind::outlier, well_id, ch, {r.day}});
                    claimed[j] = true;
                }
            }
        }
    }
    return {std::move(ds), std::move(ledger)};
}

// --- JSON config / ledger plumbing ------------------------------------------

inline GenConfig gen_config_from_json(const nlohmann::json& j) {
    GenConfig cfg;
    cfg.n_wells = j.value("n_wells", cfg.n_wells);
    cfg.n_days = j.value("n_days", cfg.n_days);
    if (j.contains("field_profile")) {
        const std::string p = j["field_profile"];
        if (p == "field1")
            cfg.profile = FieldProfile::field1;
        else if (p == "field2")
            cfg.profile = FieldProfile::field2;
        else
            throw InvalidConfigError("unknown field_profile: " + p);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    if (j.contains("start_date")) {
        const auto d = Date::parse(j["start_date"].get<std::string>());
        if (!d) throw InvalidConfigError("bad start_date");
        cfg.start_date = *d;
    }
    if (j.contains("fault_rates")) {
        const auto& f = j["fault_rates"];
        cfg.fault_rates.null_rate = f.value("null", 0.0);
        cfg.fault_rates.shutin_rate = f.value("shutin", 0.0);
        cfg.fault_rates.short_open_rate = f.value("short_open", 0.0);
        cfg.fault_rates.frozen_rate = f.value("frozen", 0.0);
        cfg.fault_rates.outlier_rate = f.value("outlier", 0.0);
    }
    cfg.validate();
    return cfg;
}

}  // namespace wellsense
