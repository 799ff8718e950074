#include <gtest/gtest.h>

#include <cmath>

#include "wellsense/synthgen.hpp"

using namespace wellsense;

namespace {

// Independent straight-line evaluation of the documented pressure model,
// written against the formula definitions rather than the library code.
double reference_bhp(double whp, double qo, double qg, double qw, double qgl, double depth,
                     double tubing, double kf) {
    const double q_liq = qo + qw;
    const double wc = qw / q_liq;
    const double rho_liquid = wc * 1000.0 + (1.0 - wc) * 850.0;
    const double p_mid = whp + rho_liquid * depth / 20000.0;
    const double gas_expansion = 1.033 / p_mid;
    const double gas_sc_m3 = (qg + qgl) * 1000.0;
    const double mass_per_day = q_liq * rho_liquid + gas_sc_m3 * 0.85;
    const double volume_per_day = q_liq + gas_sc_m3 * gas_expansion;
    const double mixture_density = mass_per_day / volume_per_day;
    const double head = mixture_density * depth / 10000.0;
    double t5 = tubing;
    t5 = t5 * tubing * tubing * tubing * tubing;
    const double friction = kf * q_liq * q_liq / t5;
    return whp + head + friction;
}

WellProps props_with(double depth, double tubing = 0.1397, double kf = kDefaultFrictionCoeff) {
    WellProps p;
    p.depth_pdg = depth;
    p.tubing_id = tubing;
    p.friction_coeff = kf;
    return p;
}

}  // namespace

TEST(BhpOracle, PureWaterHydrostaticColumn) {
    // wcut = 1, no gas, friction constant zero, 1000 m column: the head is
    // exactly 100 kgf/cm2 because g cancels against the kgf definition.
    WellProps p = props_with(1000.0, 0.1397, 0.0);
    const double whp = 50.0;
    const double bhp = bhp_oracle(whp, 0.0, 0.0, 800.0, 0.0, p);
    EXPECT_NEAR(bhp - whp, 100.0, 1e-12);
}

TEST(BhpOracle, GasLiftStrictlyLowersBhp) {
    WellProps p = props_with(4800.0);
    const double base = bhp_oracle(200.0, 3000.0, 700.0, 300.0, 100.0, p);
    const double doubled = bhp_oracle(200.0, 3000.0, 700.0, 300.0, 200.0, p);
    EXPECT_LT(doubled, base);
}

TEST(BhpOracle, MatchesIndependentImplementationOnGrid) {
    // 20 grid points spanning the operating envelope.
    const double whps[] = {80.0, 150.0, 220.0, 320.0};
    const double qoils[] = {500.0, 2000.0, 4500.0, 6500.0, 1200.0};
    int k = 0;
    for (double whp : whps) {
        for (double qo : qoils) {
            const double qg = 0.25 * qo * (1 + 0.1 * k);
            const double qw = 0.15 * qo;
            const double qgl = (k % 3 == 0) ? 120.0 : 0.0;
            const double depth = 4600.0 + 20.0 * k;
            WellProps p = props_with(depth);
            const double got = bhp_oracle(whp, qo, qg, qw, qgl, p);
            const double want =
                reference_bhp(whp, qo, qg, qw, qgl, depth, p.tubing_id, p.friction_coeff);
            EXPECT_NEAR(got, want, 1e-12 * want) << "grid point " << k;
            ++k;
        }
    }
    EXPECT_EQ(k, 20);
}

TEST(BhpOracle, MonotoneInDepthAndWcutAndGas) {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double whp = rng.uniform(60, 320);
        const double qo = rng.uniform(500, 6000);
        const double qg = rng.uniform(0.1, 0.45) * qo;
        const double qw = rng.uniform(0.02, 0.5) * qo;
        WellProps p = props_with(rng.uniform(3500, 5000));

        WellProps deeper = p;
        deeper.depth_pdg += 50.0;
        EXPECT_GT(bhp_oracle(whp, qo, qg, qw, 0, deeper), bhp_oracle(whp, qo, qg, qw, 0, p));

        // More water at the same total liquid rate.
        const double q_liq = qo + qw;
        const double wetter_qw = qw + 0.1 * qo;
        const double wetter_qo = q_liq - wetter_qw;
        EXPECT_GT(bhp_oracle(whp, wetter_qo, qg, wetter_qw, 0, p),
                  bhp_oracle(whp, qo, qg, qw, 0, p));

        EXPECT_LT(bhp_oracle(whp, qo, qg, qw, 50.0, p), bhp_oracle(whp, qo, qg, qw, 0, p));
        EXPECT_GT(bhp_oracle(whp, qo, qg, qw, 0, p), whp);
    }
}

TEST(BhpOracle, ErrorPaths) {
    WellProps p = props_with(4800.0);
    EXPECT_THROW(bhp_oracle(200.0, 0.0, 100.0, 0.0, 0.0, p), NoFlowError);
    EXPECT_THROW(bhp_oracle(200.0, -1.0, 100.0, 10.0, 0.0, p), DomainError);
    EXPECT_THROW(bhp_oracle(0.0, 100.0, 100.0, 10.0, 0.0, p), DomainError);
}

TEST(GenerateField, DeterministicGivenSeed) {
    GenConfig cfg;
    cfg.n_wells = 3;
    cfg.n_days = 120;
    cfg.seed = 42;
    const FieldDataset a = generate_field(cfg);
    const FieldDataset b = generate_field(cfg);
    EXPECT_EQ(a, b);
    cfg.seed = 43;
    const FieldDataset c = generate_field(cfg);
    EXPECT_NE(a, c);
}

TEST(GenerateField, RecordsSatisfyInvariants) {
    GenConfig cfg;
    cfg.n_wells = 4;
    cfg.n_days = 300;
    cfg.seed = 11;
    const FieldDataset ds = generate_field(cfg);
    for (const auto& [id, recs] : ds.wells) {
        ASSERT_FALSE(recs.empty());
        const double depth = *recs[0][Channel::depth_pdg];
        for (std::size_t i = 0; i < recs.size(); ++i) {
            const WellRecord& r = recs[i];
            if (i > 0) EXPECT_LT(recs[i - 1].day, r.day);
            EXPECT_DOUBLE_EQ(*r[Channel::depth_pdg], depth);
            EXPECT_GT(*r[Channel::q_oil], 0.0);
            EXPECT_GE(*r[Channel::q_gas], 0.0);
            EXPECT_GE(*r[Channel::q_water], 0.0);
            EXPECT_GE(*r[Channel::q_gaslift], 0.0);
            EXPECT_GE(*r[Channel::choke_aperture], 0.0);
            EXPECT_LE(*r[Channel::choke_aperture], 100.0);
            EXPECT_DOUBLE_EQ(*r[Channel::open_hours], 24.0);
            EXPECT_GT(*r[Channel::whp], 0.0);
            EXPECT_GT(*r[Channel::bhp], *r[Channel::whp]);
            EXPECT_FALSE(r.flags.any());
        }
    }
}

TEST(GenerateField, ZeroNoiseBhpIsExactFunctionOfInputs) {
    GenConfig cfg;
    cfg.n_wells = 3;
    cfg.n_days = 200;
    cfg.seed = 5;
    cfg.noise_sigma = 0.0;
    const FieldDataset ds = generate_field(cfg);
    WellProps p;
    p.tubing_id = 0.1397;  // field-1 completion
    for (const auto& [id, recs] : ds.wells) {
        p.depth_pdg = *recs[0][Channel::depth_pdg];
        for (const WellRecord& r : recs) {
            const double expect = bhp_oracle(*r[Channel::whp], *r[Channel::q_oil],
                                             *r[Channel::q_gas], *r[Channel::q_water],
                                             *r[Channel::q_gaslift], p);
            EXPECT_NEAR(*r[Channel::bhp], expect, 1e-9);
        }
    }
}

TEST(GenerateField, FieldTwoShiftsDistributionsUpward) {
    GenConfig f1;
    f1.n_wells = 15;
    f1.n_days = 700;
    f1.seed = 21;
    GenConfig f2 = f1;
    f2.profile = FieldProfile::field2;

    auto means = [](const FieldDataset& ds) {
        double bhp = 0, wcut = 0;
        std::size_t n = 0;
        for (const auto& [id, recs] : ds.wells)
            for (const auto& r : recs) {
                bhp += *r[Channel::bhp];
                wcut += *r[Channel::q_water] / (*r[Channel::q_oil] + *r[Channel::q_water]);
                ++n;
            }
        return std::pair{bhp / n, wcut / n};
    };
    const auto [bhp1, wcut1] = means(generate_field(f1));
    const auto [bhp2, wcut2] = means(generate_field(f2));
    EXPECT_GT(bhp2, bhp1);
    EXPECT_GT(wcut2, wcut1);
}

TEST(GenerateField, FieldOneScaleMatchesPaperOrder) {
    GenConfig cfg;
    cfg.n_wells = 45;
    cfg.n_days = 1500;
    cfg.seed = 1;
    const FieldDataset ds = generate_field(cfg);
    const std::size_t n = ds.record_count();
    EXPECT_GT(n, 64000u);
    EXPECT_LE(n, 67500u);
    bool saw_gap = false;
    for (const auto& [id, recs] : ds.wells)
        for (std::size_t i = 1; i < recs.size(); ++i)
            if (recs[i].day - recs[i - 1].day > 1) saw_gap = true;
    EXPECT_TRUE(saw_gap);  // shut-ins appear as gaps
}

TEST(GenerateField, GasLiftOnlyInFieldTwo) {
    GenConfig f1;
    f1.n_wells = 10;
    f1.n_days = 200;
    f1.seed = 3;
    const FieldDataset d1 = generate_field(f1);
    for (const auto& [id, recs] : d1.wells)
        for (const auto& r : recs) EXPECT_DOUBLE_EQ(*r[Channel::q_gaslift], 0.0);

    GenConfig f2 = f1;
    f2.profile = FieldProfile::field2;
    f2.n_wells = 20;
    bool any_gl = false;
    const FieldDataset d2 = generate_field(f2);
    for (const auto& [id, recs] : d2.wells)
        for (const auto& r : recs)
            if (*r[Channel::q_gaslift] > 0.0) any_gl = true;
    EXPECT_TRUE(any_gl);
}

TEST(InjectFaults, ZeroRatesIsIdentity) {
    GenConfig cfg;
    cfg.n_wells = 2;
    cfg.n_days = 100;
    cfg.seed = 9;
    const FieldDataset ds = generate_field(cfg);
    const auto [out, ledger] = inject_faults(ds, cfg);
    EXPECT_EQ(out, ds);
    EXPECT_TRUE(ledger.entries.empty());
}

TEST(InjectFaults, PlantsEveryClassWithLedger) {
    GenConfig cfg;
    cfg.n_wells = 6;
    cfg.n_days = 600;
    cfg.seed = 17;
    cfg.fault_rates = {0.01, 0.01, 0.01, 0.004, 0.005};
    const FieldDataset ds = generate_field(cfg);
    const auto [out, ledger] = inject_faults(ds, cfg);

    EXPECT_EQ(out.record_count(), ds.record_count());  // plants modify, never delete
    EXPECT_GT(ledger.record_count(FaultKind::null_cell), 0u);
    EXPECT_GT(ledger.record_count(FaultKind::shutin), 0u);
    EXPECT_GT(ledger.record_count(FaultKind::short_open), 0u);
    EXPECT_GT(ledger.record_count(FaultKind::frozen), 0u);
    EXPECT_GT(ledger.record_count(FaultKind::outlier), 0u);

    for (const FaultEntry& e : ledger.entries) {
        const auto& recs = out.wells.at(e.well_id);
        switch (e.kind) {
            case FaultKind::frozen: {
                ASSERT_GE(e.days.size(), 4u);
                // all planted records carry the same stored value
                double v0 = 0.0;
                bool first = true;
                for (const auto& r : recs) {
                    if (std::find(e.days.begin(), e.days.end(), r.day) == e.days.end()) continue;
                    if (first) {
                        v0 = *r[e.channel];
                        first = false;
                    } else {
                        EXPECT_EQ(*r[e.channel], v0);
                    }
                }
                break;
            }
            case FaultKind::null_cell: {
                for (const auto& r : recs)
                    if (r.day == e.days[0]) {
                        EXPECT_FALSE(r[e.channel].has_value());
                        EXPECT_TRUE(r.flags.is_null(e.channel));
                    }
                break;
            }
            case FaultKind::shutin: {
                for (const auto& r : recs)
                    if (r.day == e.days[0]) {
                        EXPECT_DOUBLE_EQ(*r[Channel::q_oil], 0.0);
                        EXPECT_DOUBLE_EQ(*r[Channel::choke_aperture], 0.0);
                    }
                break;
            }
            case FaultKind::short_open: {
                for (const auto& r : recs)
                    if (r.day == e.days[0]) EXPECT_LT(*r[Channel::open_hours], 2.0);
                break;
            }
            case FaultKind::outlier: {
                for (const auto& r : recs)
                    if (r.day == e.days[0]) EXPECT_GT(*r[e.channel], 0.0);
                break;
            }
        }
    }
}

TEST(InjectFaults, DeterministicGivenSeed) {
    GenConfig cfg;
    cfg.n_wells = 4;
    cfg.n_days = 300;
    cfg.seed = 30;
    cfg.fault_rates = {0.01, 0.01, 0.01, 0.003, 0.004};
    const FieldDataset ds = generate_field(cfg);
    const auto [a, la] = inject_faults(ds, cfg);
    const auto [b, lb] = inject_faults(ds, cfg);
    EXPECT_EQ(a, b);
    EXPECT_EQ(la.entries.size(), lb.entries.size());
}

TEST(GenConfigJson, ParsesAndValidates) {
    const auto j = nlohmann::json::parse(R"({
        "n_wells": 10, "n_days": 200, "field_profile": "field2", "seed": 7,
        "noise_sigma": 0.004, "start_date": "2012-06-01",
        "fault_rates": {"null": 0.01, "shutin": 0.02, "short_open": 0.0,
                         "frozen": 0.001, "outlier": 0.002}})");
    const GenConfig cfg = gen_config_from_json(j);
    EXPECT_EQ(cfg.n_wells, 10);
    EXPECT_EQ(cfg.profile, FieldProfile::field2);
    EXPECT_DOUBLE_EQ(cfg.fault_rates.shutin_rate, 0.02);
    EXPECT_EQ(cfg.start_date.to_string(), "2012-06-01");

    auto bad = j;
    bad["n_days"] = 5;
    EXPECT_THROW(gen_config_from_json(bad), InvalidConfigError);
    bad = j;
    bad["fault_rates"]["null"] = 1.5;
    EXPECT_THROW(gen_config_from_json(bad), InvalidConfigError);
}
