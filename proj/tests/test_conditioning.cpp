#include <gtest/gtest.h>

#include <set>

#include "wellsense/conditioning.hpp"
#include "wellsense/synthgen.hpp"

using namespace wellsense;

namespace {

// Sensor channels drift with the day so synthetic fixtures never look like
// frozen sensors; the drift is a ramp, which IQR fences cannot flag.
WellRecord make_record(const std::string& well, Date day, double depth = 4800.0) {
    WellRecord r;
    r.well_id = well;
    r.day = day;
    const double t = static_cast<double>(day - Date::from_ymd(2018, 1, 1));
    r[Channel::bhp] = 410.0 + 0.01 * t;
    r[Channel::bht] = 95.0 + 0.001 * t;
    r[Channel::whp] = 200.0 + 0.01 * t;
    r[Channel::wht] = 55.0 + 0.002 * t;
    r[Channel::choke_p] = 40.0 + 0.003 * t;
    r[Channel::choke_t] = 30.0 + 0.001 * t;
    r[Channel::choke_aperture] = 60.0;
    r[Channel::q_oil] = 3000.0;
    r[Channel::q_gas] = 800.0;
    r[Channel::q_water] = 150.0;
    r[Channel::q_gaslift] = 0.0;
    r[Channel::depth_pdg] = depth;
    r[Channel::open_hours] = 24.0;
    return r;
}

DerivedRecord make_derived(const std::string& well, Date day) {
    DerivedRecord d;
    static_cast<WellRecord&>(d) = make_record(well, day);
    d.gor = 0.25;
    d.wcut = 0.05;
    return d;
}

std::set<std::pair<std::string, std::int64_t>> record_keys(const FieldDataset& ds) {
    std::set<std::pair<std::string, std::int64_t>> out;
    for (const auto& [id, recs] : ds.wells)
        for (const auto& r : recs) out.emplace(id, r.day.days_since_epoch());
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// clean
// ---------------------------------------------------------------------------

TEST(Clean, RemovesZeroChokeKeepsBoundaryOpenHours) {
    FieldDataset ds;
    auto a = make_record("W1", Date::from_ymd(2020, 1, 1));
    auto b = make_record("W1", Date::from_ymd(2020, 1, 2));
    b[Channel::choke_aperture] = 0.0;
    auto c = make_record("W1", Date::from_ymd(2020, 1, 3));
    c[Channel::open_hours] = 2.0;  // "less than 2 hours" => exactly 2 is kept
    auto d = make_record("W1", Date::from_ymd(2020, 1, 4));
    d[Channel::open_hours] = 1.99;
    ds.wells["W1"] = {a, b, c, d};

    ConditioningReport rep;
    const FieldDataset out = clean(ds, &rep);
    ASSERT_EQ(out.wells.at("W1").size(), 2u);
    EXPECT_EQ(out.wells.at("W1")[0].day, a.day);
    EXPECT_EQ(out.wells.at("W1")[1].day, c.day);
    EXPECT_EQ(rep.per_well.at("W1").zero_rate, 1u);
    EXPECT_EQ(rep.per_well.at("W1").short_open, 1u);
}

TEST(Clean, NullAndErrorFlagsRemoveButBhtAndWarnDoNot) {
    FieldDataset ds;
    auto a = make_record("W1", Date::from_ymd(2020, 1, 1));
    a[Channel::whp] = std::nullopt;
    a.flags.set_null(Channel::whp);
    auto b = make_record("W1", Date::from_ymd(2020, 1, 2));
    b[Channel::bht] = std::nullopt;  // BHT excluded from the analysis
    b.flags.set_null(Channel::bht);
    auto c = make_record("W1", Date::from_ymd(2020, 1, 3));
    c[Channel::choke_aperture] = 110.0;
    c.flags.set_warn(Channel::choke_aperture);
    ds.wells["W1"] = {a, b, c};

    const FieldDataset out = clean(ds);
    ASSERT_EQ(out.wells.at("W1").size(), 2u);
    EXPECT_EQ(out.wells.at("W1")[0].day, b.day);
    EXPECT_EQ(out.wells.at("W1")[1].day, c.day);
}

TEST(Clean, PlantedFaultsRemovedExactly) {
    GenConfig cfg;
    cfg.n_wells = 8;
    cfg.n_days = 500;
    cfg.seed = 77;
    cfg.fault_rates = {0.01, 0.012, 0.008, 0.0, 0.0};
    const FieldDataset base = generate_field(cfg);
    const auto [faulty, ledger] = inject_faults(base, cfg);

    const FieldDataset cleaned = clean(faulty);
    const auto before = record_keys(faulty);
    const auto after = record_keys(cleaned);
    std::set<std::pair<std::string, std::int64_t>> removed;
    std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                        std::inserter(removed, removed.begin()));

    auto planted = ledger.records(FaultKind::null_cell);
    for (const auto& k : ledger.records(FaultKind::shutin)) planted.insert(k);
    for (const auto& k : ledger.records(FaultKind::short_open)) planted.insert(k);
    EXPECT_EQ(removed, planted);
}

// ---------------------------------------------------------------------------
// detect_frozen
// ---------------------------------------------------------------------------

TEST(DetectFrozen, BoundaryThreeDaysKeptFourRemoved) {
    FieldDataset ds;
    std::vector<WellRecord> recs;
    for (int i = 0; i < 10; ++i) {
        auto r = make_record("W1", Date::from_ymd(2020, 1, 1) + i);
        r[Channel::whp] = 200.0 + i;
        recs.push_back(r);
    }
    // three equal WHP values: kept ("more than 3 days" means 4+)
    recs[2][Channel::whp] = recs[3][Channel::whp] = recs[4][Channel::whp] = 111.0;
    ds.wells["W1"] = recs;
    EXPECT_EQ(detect_frozen(ds).wells.at("W1").size(), 10u);

    recs[5][Channel::whp] = 111.0;  // now a 4-day run
    ds.wells["W1"] = recs;
    ConditioningReport rep;
    const FieldDataset out = detect_frozen(ds, 3, &rep);
    ASSERT_EQ(out.wells.at("W1").size(), 6u);
    EXPECT_EQ(rep.per_well.at("W1").frozen, 4u);
    for (const auto& r : out.wells.at("W1")) EXPECT_NE(*r[Channel::whp], 111.0);
}

TEST(DetectFrozen, PlantedRunsRemovedExactly) {
    GenConfig cfg;
    cfg.n_wells = 8;
    cfg.n_days = 600;
    cfg.seed = 91;
    cfg.fault_rates = {0.0, 0.0, 0.0, 0.004, 0.0};
    const FieldDataset base = generate_field(cfg);
    const auto [faulty, ledger] = inject_faults(base, cfg);
    ASSERT_GT(ledger.record_count(FaultKind::frozen), 0u);

    const FieldDataset cleaned = clean(faulty);  // removes nothing here
    ASSERT_EQ(cleaned.record_count(), faulty.record_count());
    const FieldDataset out = detect_frozen(cleaned);

    const auto before = record_keys(cleaned);
    const auto after = record_keys(out);
    std::set<std::pair<std::string, std::int64_t>> removed;
    std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                        std::inserter(removed, removed.begin()));
    EXPECT_EQ(removed, ledger.records(FaultKind::frozen));
}

// ---------------------------------------------------------------------------
// daily_average
// ---------------------------------------------------------------------------

TEST(DailyAverage, ConstantHoursGiveConstant) {
    std::vector<HourlySample> hours;
    for (int h = 0; h < 24; ++h) {
        HourlySample s;
        s.day = Date::from_ymd(2020, 3, 1);
        s.hour = h;
        s.sensors[0] = 123.0;
        hours.push_back(s);
    }
    const auto daily = daily_average(hours);
    ASSERT_EQ(daily.size(), 1u);
    EXPECT_DOUBLE_EQ(*daily[0].sensors[0], 123.0);
    EXPECT_DOUBLE_EQ(daily[0].open_hours, 24.0);
}

TEST(DailyAverage, ShutInHoursExcluded) {
    std::vector<HourlySample> hours;
    for (int h = 0; h < 24; ++h) {
        HourlySample s;
        s.day = Date::from_ymd(2020, 3, 1);
        s.hour = h;
        s.flowing = h < 12;
        s.sensors[0] = s.flowing ? 100.0 : 7.0;
        hours.push_back(s);
    }
    const auto daily = daily_average(hours);
    ASSERT_EQ(daily.size(), 1u);
    EXPECT_DOUBLE_EQ(*daily[0].sensors[0], 100.0);
    EXPECT_DOUBLE_EQ(daily[0].open_hours, 12.0);
}

TEST(DailyAverage, RampMeansToMidpoint) {
    std::vector<HourlySample> hours;
    for (int h = 0; h < 24; ++h) {
        HourlySample s;
        s.day = Date::from_ymd(2020, 3, 1);
        s.hour = h;
        s.sensors[2] = static_cast<double>(h);
        hours.push_back(s);
    }
    const auto daily = daily_average(hours);
    EXPECT_DOUBLE_EQ(*daily[0].sensors[2], 11.5);
}

// ---------------------------------------------------------------------------
// derive_features
// ---------------------------------------------------------------------------

TEST(DeriveFeatures, RatioArithmetic) {
    FieldDataset ds;
    auto a = make_record("W1", Date::from_ymd(2020, 1, 1));
    a[Channel::q_gas] = 1000.0;
    a[Channel::q_oil] = 500.0;
    a[Channel::q_water] = 0.0;
    auto b = make_record("W1", Date::from_ymd(2020, 1, 2));
    b[Channel::q_oil] = 500.0;
    b[Channel::q_water] = 500.0;
    ds.wells["W1"] = {a, b};

    const DerivedDataset out = derive_features(ds);
    EXPECT_DOUBLE_EQ(out.wells.at("W1")[0].gor, 2.0);
    EXPECT_DOUBLE_EQ(out.wells.at("W1")[0].wcut, 0.0);
    EXPECT_DOUBLE_EQ(out.wells.at("W1")[1].wcut, 0.5);
}

TEST(DeriveFeatures, ZeroOilIsAPipelineBug) {
    FieldDataset ds;
    auto a = make_record("W1", Date::from_ymd(2020, 1, 1));
    a[Channel::q_oil] = 0.0;
    ds.wells["W1"] = {a};
    EXPECT_THROW(derive_features(ds), DomainError);
}

// ---------------------------------------------------------------------------
// iqr_filter
// ---------------------------------------------------------------------------

namespace {

// Brute-force Hazen quantile для verification, written from the plotting
// position definition.
double brute_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double pos = p * n + 0.5;  // 1-based
    pos = std::max(1.0, std::min(pos, n));
    const double lower = v[static_cast<std::size_t>(std::floor(pos)) - 1];
    const double upper = v[static_cast<std::size_t>(std::ceil(pos)) - 1];
    return lower + (pos - std::floor(pos)) * (upper - lower);
}

}  // namespace

TEST(Quantile, MatchesBruteForceOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v;
        const int n = 4 + static_cast<int>(rng.uniform_int(200));
        for (int i = 0; i < n; ++i) v.push_back(rng.uniform(-50, 50));
        for (double p : {0.25, 0.5, 0.75})
            EXPECT_NEAR(stats::quantile_hazen(v, p), brute_quantile(v, p), 1e-12);
    }
}

TEST(IqrFilter, HundredAndOnePointExample) {
    // Values 1..100 plus 1000 on the oil-rate feature; all other features
    // constant so their fences collapse to the constant.
    DerivedDataset ds;
    std::vector<double> values;
    for (int i = 1; i <= 100; ++i) values.push_back(i);
    values.push_back(1000.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto d = make_derived("W1", Date::from_ymd(2020, 1, 1) + static_cast<int>(i));
        d[Channel::q_oil] = values[i];
        ds.wells["W1"].push_back(d);
    }

    // Frozen oracle values for this set (Hazen linear interpolation).
    EXPECT_NEAR(stats::quantile_hazen(values, 0.25), 25.75, 1e-12);
    EXPECT_NEAR(stats::quantile_hazen(values, 0.75), 76.25, 1e-12);

    const IqrResult res = iqr_filter(ds);
    EXPECT_NEAR(res.fences.at(Feature::q_oil).second, 152.0, 1e-12);
    ASSERT_EQ(res.removed.size(), 1u);
    EXPECT_DOUBLE_EQ(*res.removed[0][Channel::q_oil], 1000.0);
    EXPECT_EQ(res.kept.record_count(), 100u);
}

TEST(IqrFilter, DegenerateConstantFeatureRemovesNothing) {
    // All records identical: every IQR is 0 and fences collapse onto the
    // constant, so strict-inequality violations cannot fire.
    DerivedDataset ds;
    for (int i = 0; i < 10; ++i)
        ds.wells["W1"].push_back(make_derived("W1", Date::from_ymd(2020, 1, 1)));
    const IqrResult res = iqr_filter(ds);
    EXPECT_TRUE(res.removed.empty());
    EXPECT_EQ(res.kept.record_count(), 10u);
}

TEST(IqrFilter, ExceptionListKeepsViolatingRecords) {
    DerivedDataset ds;
    for (int i = 0; i < 50; ++i) {
        auto d = make_derived("W1", Date::from_ymd(2020, 1, 1) + i);
        d[Channel::q_oil] = 1000.0 + i;
        ds.wells["W1"].push_back(d);
    }
    auto spike = make_derived("W1", Date::from_ymd(2020, 3, 1));
    spike[Channel::q_oil] = 50000.0;
    ds.wells["W1"].push_back(spike);

    EXPECT_EQ(iqr_filter(ds).removed.size(), 1u);
    const IqrResult excepted = iqr_filter(ds, {Feature::q_oil});
    EXPECT_TRUE(excepted.removed.empty());
    EXPECT_FALSE(excepted.fences.count(Feature::q_oil));
}

TEST(IqrFilter, TooFewSamples) {
    DerivedDataset ds;
    ds.wells["W1"].push_back(make_derived("W1", Date::from_ymd(2020, 1, 1)));
    EXPECT_THROW(iqr_filter(ds), TooFewSamplesError);
}

// ---------------------------------------------------------------------------
// pearson_matrix
// ---------------------------------------------------------------------------

TEST(Pearson, PerfectLinearDependence) {
    DerivedDataset ds;
    for (int i = 0; i < 30; ++i) {
        auto d = make_derived("W1", Date::from_ymd(2020, 1, 1) + i);
        d[Channel::whp] = static_cast<double>(i);
        d[Channel::bhp] = 2.0 * i + 3.0;   // r = +1
        d[Channel::wht] = -static_cast<double>(i);  // r = -1 vs whp
        ds.wells["W1"].push_back(d);
    }
    const Eigen::MatrixXd r =
        pearson_matrix(ds, {Feature::whp, Feature::bhp, Feature::wht});
    EXPECT_NEAR(r(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(r(0, 2), -1.0, 1e-12);
    EXPECT_DOUBLE_EQ(r(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(r(1, 2), r(2, 1));
}

TEST(Pearson, MatchesCovarianceFormulaOnRandomData) {
    // Independent implementation from the covariance definition.
    DerivedDataset ds;
    Rng rng(5);
    std::vector<double> xs, ys;
    for (int i = 0; i < 1000; ++i) {
        auto d = make_derived("W1", Date::from_ymd(2018, 1, 1) + i);
        const double x = rng.normal(10, 3);
        const double y = 0.5 * x + rng.normal(0, 2);
        d[Channel::whp] = x;
        d[Channel::bhp] = y;
        xs.push_back(x);
        ys.push_back(y);
        ds.wells["W1"].push_back(d);
    }
    const double mx = stats::mean(xs), my = stats::mean(ys);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double expected = sxy / std::sqrt(sxx * syy);
    const Eigen::MatrixXd r = pearson_matrix(ds, {Feature::whp, Feature::bhp});
    EXPECT_NEAR(r(0, 1), expected, 1e-12);
}

TEST(Pearson, ConstantFeatureRejected) {
    DerivedDataset ds;
    for (int i = 0; i < 10; ++i)
        ds.wells["W1"].push_back(make_derived("W1", Date::from_ymd(2020, 1, 1) + i));
    EXPECT_THROW(pearson_matrix(ds, {Feature::whp, Feature::q_gaslift}), ConstantFeatureError);
}

// ---------------------------------------------------------------------------
// scalers
// ---------------------------------------------------------------------------

TEST(Scaler, MinMaxMapsTrainingRangeToUnit) {
    const ScalerParams p = fit_scaler({{2.0, 4.0, 6.0}}, ScalerKind::MinMax);
    EXPECT_DOUBLE_EQ(p.transform(0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(p.transform(0, 4.0), 0.5);
    EXPECT_DOUBLE_EQ(p.transform(0, 6.0), 1.0);
    EXPECT_GT(p.transform(0, 7.0), 1.0);  // extrapolation, no clipping
}

TEST(Scaler, StandardRoundTrip) {
    Rng rng(9);
    std::vector<double> col;
    for (int i = 0; i < 500; ++i) col.push_back(rng.normal(40, 7));
    const ScalerParams p = fit_scaler({col}, ScalerKind::Standard);
    for (double v : {12.0, 40.0, 93.5})
        EXPECT_NEAR(p.inverse(0, p.transform(0, v)), v, 1e-12);
    double mean = 0;
    for (double v : col) mean += p.transform(0, v);
    EXPECT_NEAR(mean / col.size(), 0.0, 1e-12);
}

TEST(Scaler, ConstantFeatureFlagged) {
    const ScalerParams p = fit_scaler({{5.0, 5.0, 5.0}}, ScalerKind::MinMax);
    EXPECT_TRUE(p.per_feature[0].constant);
    EXPECT_DOUBLE_EQ(p.transform(0, 5.0), 0.0);
    EXPECT_DOUBLE_EQ(p.inverse(0, 0.0), 5.0);
}

// ---------------------------------------------------------------------------
// window_samples
// ---------------------------------------------------------------------------

TEST(WindowSamples, CountsAndGaps) {
    DerivedDataset ds;
    for (int i = 0; i < 10; ++i)
        ds.wells["W1"].push_back(make_derived("W1", Date::from_ymd(2020, 1, 1) + i));
    const FeatureSet fs = FeatureSet::table5(3);
    EXPECT_EQ(window_samples(ds, fs, 2).size(), 8u);
    EXPECT_EQ(window_samples(ds, fs, 0).size(), 10u);

    // remove day 6 (index 5): windows containing it vanish, leaving targets
    // at days 3, 4, 5, 9, 10
    ds.wells["W1"].erase(ds.wells["W1"].begin() + 5);
    const auto windows = window_samples(ds, fs, 2);
    EXPECT_EQ(windows.size(), 5u);
    for (const auto& w : windows) {
        EXPECT_EQ(w.x.rows(), 3);
        EXPECT_EQ(w.x.cols(), fs.size());
    }
}

TEST(WindowSamples, ShortWellsYieldNothing) {
    DerivedDataset ds;
    ds.wells["W1"].push_back(make_derived("W1", Date::from_ymd(2020, 1, 1)));
    ds.wells["W1"].push_back(make_derived("W1", Date::from_ymd(2020, 1, 2)));
    ConditioningReport rep;
    EXPECT_TRUE(window_samples(ds, FeatureSet::table5(3), 5, &rep).empty());
    EXPECT_EQ(rep.wells_too_short_for_window, 1u);
}

TEST(WindowSamples, NeverMixesWells) {
    DerivedDataset ds;
    for (int i = 0; i < 4; ++i) {
        ds.wells["W1"].push_back(make_derived("W1", Date::from_ymd(2020, 1, 1) + i));
        ds.wells["W2"].push_back(make_derived("W2", Date::from_ymd(2020, 1, 1) + i));
    }
    const auto windows = window_samples(ds, FeatureSet::table5(5), 3);
    ASSERT_EQ(windows.size(), 2u);
    EXPECT_NE(windows[0].well_id, windows[1].well_id);
}

// ---------------------------------------------------------------------------
// partition
// ---------------------------------------------------------------------------

TEST(Partition, DisjointCoverOnSyntheticData) {
    GenConfig cfg;
    cfg.n_wells = 12;
    cfg.n_days = 400;
    cfg.seed = 55;
    const DerivedDataset ds = derive_features(generate_field(cfg));

    SplitSpec spec;
    spec.heldout_wells = {"F1-W03", "F1-W07"};
    spec.temporal_cutoff = cfg.start_date + 299;
    const Partitions parts = partition(ds, spec);

    std::map<std::pair<std::string, std::int64_t>, int> membership;
    auto tally = [&](const DerivedDataset& d) {
        for (const auto& [id, recs] : d.wells)
            for (const auto& r : recs) membership[{id, r.day.days_since_epoch()}]++;
    };
    tally(parts.trainval);
    tally(parts.test1);
    tally(parts.test2);

    std::size_t total = 0;
    for (const auto& [key, count] : membership) {
        EXPECT_EQ(count, 1);
        ++total;
    }
    EXPECT_EQ(total, ds.record_count());

    for (const auto& [id, recs] : parts.trainval.wells) EXPECT_FALSE(spec.heldout_wells.count(id));
    for (const auto& [id, recs] : parts.test1.wells) {
        EXPECT_TRUE(spec.heldout_wells.count(id));
        for (const auto& r : recs) EXPECT_LE(r.day, spec.temporal_cutoff);
    }
    for (const auto& [id, recs] : parts.test2.wells)
        for (const auto& r : recs) EXPECT_GT(r.day, spec.temporal_cutoff);
}

TEST(Partition, EmptyHeldoutSetGivesEmptyTest1) {
    GenConfig cfg;
    cfg.n_wells = 3;
    cfg.n_days = 100;
    cfg.seed = 5;
    const DerivedDataset ds = derive_features(generate_field(cfg));
    SplitSpec spec;
    spec.temporal_cutoff = cfg.start_date + 79;
    const Partitions parts = partition(ds, spec);
    EXPECT_EQ(parts.test1.record_count(), 0u);
    EXPECT_EQ(parts.trainval.record_count() + parts.test2.record_count(), ds.record_count());
}

TEST(Partition, CutoffOutsideRangeRejected) {
    GenConfig cfg;
    cfg.n_wells = 2;
    cfg.n_days = 60;
    cfg.seed = 5;
    const DerivedDataset ds = derive_features(generate_field(cfg));
    SplitSpec spec;
    spec.temporal_cutoff = cfg.start_date + 1000;
    EXPECT_THROW(partition(ds, spec), EmptyPartitionError);
}

// ---------------------------------------------------------------------------
// pipeline properties
// ---------------------------------------------------------------------------

TEST(Pipeline, OrderIndependenceWithinWells) {
    GenConfig cfg;
    cfg.n_wells = 5;
    cfg.n_days = 300;
    cfg.seed = 66;
    cfg.fault_rates = {0.01, 0.01, 0.01, 0.003, 0.003};
    auto [ds, ledger] = inject_faults(generate_field(cfg), cfg);

    FieldDataset shuffled = ds;
    Rng rng(1);
    for (auto& [id, recs] : shuffled.wells) {
        rng.shuffle(recs);
        std::sort(recs.begin(), recs.end(),
                  [](const WellRecord& a, const WellRecord& b) { return a.day < b.day; });
    }
    EXPECT_EQ(clean(ds), clean(shuffled));
    EXPECT_EQ(detect_frozen(clean(ds)), detect_frozen(clean(shuffled)));
}

TEST(Pipeline, SurvivorsKeepDerivedInvariants) {
    GenConfig cfg;
    cfg.n_wells = 10;
    cfg.n_days = 500;
    cfg.seed = 44;
    cfg.fault_rates = {0.01, 0.01, 0.005, 0.003, 0.004};
    auto [ds, ledger] = inject_faults(generate_field(cfg), cfg);

    ConditioningConfig ccfg;
    ccfg.split.heldout_wells = {"F1-W02"};
    ccfg.split.temporal_cutoff = cfg.start_date + 399;
    const ConditionedData cond = run_conditioning(ds, ccfg);

    for (const DerivedDataset* part :
         {&cond.parts.trainval, &cond.parts.test1, &cond.parts.test2}) {
        for (const auto& [id, recs] : part->wells)
            for (const auto& r : recs) {
                EXPECT_GE(r.gor, 0.0);
                EXPECT_GE(r.wcut, 0.0);
                EXPECT_LE(r.wcut, 1.0);
                EXPECT_GT(*r[Channel::q_oil], 0.0);
                EXPECT_GE(*r[Channel::open_hours], 2.0);
            }
    }
}

TEST(Pipeline, ScalerParamsIndependentOfTestPartitions) {
    GenConfig cfg;
    cfg.n_wells = 8;
    cfg.n_days = 300;
    cfg.seed = 33;
    const FieldDataset ds = generate_field(cfg);

    ConditioningConfig ccfg;
    ccfg.split.heldout_wells = {"F1-W01"};
    ccfg.split.temporal_cutoff = cfg.start_date + 239;
    ConditionedData cond = run_conditioning(ds, ccfg);

    const FeatureSet fs = FeatureSet::table5(3);
    const ScalerSet before = fit_scaler(cond.parts.trainval, fs, ScalerKind::MinMax);

    // Perturb every test record; the training-side scaler must not move.
    for (auto* part : {&cond.parts.test1, &cond.parts.test2})
        for (auto& [id, recs] : part->wells)
            for (auto& r : recs) {
                *r[Channel::whp] *= 3.0;
                *r[Channel::bhp] *= 2.0;
            }
    const ScalerSet after = fit_scaler(cond.parts.trainval, fs, ScalerKind::MinMax);
    EXPECT_EQ(before, after);
}

TEST(Pipeline, DerivedCsvRoundTrip) {
    GenConfig cfg;
    cfg.n_wells = 3;
    cfg.n_days = 80;
    cfg.seed = 2;
    const DerivedDataset ds = derive_features(generate_field(cfg));
    const auto path = std::filesystem::temp_directory_path() / "wellsense_derived.csv";
    save_derived_csv(ds, path);
    const DerivedDataset back = load_derived_csv(path);
    EXPECT_EQ(ds.wells, back.wells);
}
