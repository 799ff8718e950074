// wellsense: batch workflow for the BHP soft sensor. Subcommands wire the
// pipeline end to end: generate -> condition -> train -> evaluate ->
// transfer. All configuration is JSON; every command writes a manifest with
// content hashes of its outputs so runs can be reproduced and verified.
//
// Exit codes: 0 success, 1 domain/data error, 2 usage error.
// Logs go to stderr; data goes to files only.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "wellsense/conditioning.hpp"
#include "wellsense/evaluation.hpp"
#include "wellsense/manifest.hpp"
#include "wellsense/models/model_io.hpp"
#include "wellsense/synthgen.hpp"
#include "wellsense/training.hpp"
#include "wellsense/transfer.hpp"
#include "wellsense/welldata.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wellsense;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "JSON configuration file")->required();
    cmd->add_option("--out", args.out, "output directory")->required();
    cmd->add_option("--seed", args.seed, "seed override")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--jobs", args.jobs, "worker thread cap");
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("bad JSON in " + path + ": " + e.what());
    }
    return j;
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

int cmd_generate(const CommonArgs& args) {
    Timer timer;
    json j = load_config(args.config);
    if (args.seed_set) j["seed"] = args.seed;
    const GenConfig cfg = gen_config_from_json(j);

    const fs::path dir = ensure_out_dir(args.out);
    FieldDataset ds = generate_field(cfg);
    const auto [faulty, ledger] = inject_faults(ds, cfg);

    const fs::path csv = dir / (faulty.field_id + ".csv");
    const fs::path ledger_path = dir / (faulty.field_id + "_ledger.json");
    save_csv(faulty, csv);
    write_text_atomic(ledger_path, ledger.to_json().dump(1));

    RunManifest manifest;
    manifest.command = "generate";
    manifest.config_path = args.config;
    manifest.seed = cfg.seed;
    manifest.wall_clock_seconds = timer.seconds();
    manifest.add_output(csv);
    manifest.add_output(ledger_path);
    manifest.save(dir / "manifest_generate.json");

    std::cerr << "generate: " << faulty.record_count() << " samples across "
              << faulty.wells.size() << " wells; " << ledger.entries.size()
              << " fault entries -> " << csv << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// condition
// ---------------------------------------------------------------------------

int cmd_condition(const CommonArgs& args) {
    Timer timer;
    const json j = load_config(args.config);
    if (!j.contains("input")) throw UsageError("condition config needs 'input'");
    const fs::path input = j["input"].get<std::string>();
    const FieldDataset ds = load_csv(input);

    ConditioningConfig cfg;
    cfg.min_frozen_days = j.value("min_frozen_days", 3);
    if (j.contains("iqr_exceptions")) {
        cfg.iqr_exceptions.clear();
        for (const auto& name : j["iqr_exceptions"]) {
            const auto f = feature_from_name(name.get<std::string>());
            if (!f) throw UsageError("unknown feature in iqr_exceptions: " +
                                     name.get<std::string>());
            cfg.iqr_exceptions.insert(*f);
        }
    }

    // Held-out wells: an explicit list, or a seeded random draw of N wells.
    if (j.contains("heldout_wells")) {
        for (const auto& w : j["heldout_wells"])
            cfg.split.heldout_wells.insert(w.get<std::string>());
    } else if (j.contains("heldout_count")) {
        std::vector<std::string> wells;
        for (const auto& [id, recs] : ds.wells) wells.push_back(id);
        const std::uint64_t seed = args.seed_set ? args.seed : j.value("seed", 0);
        Rng rng(Rng(seed).split(0x4E1D).next_u64());
        rng.shuffle(wells);
        const auto n = std::min<std::size_t>(j["heldout_count"].get<std::size_t>(), wells.size());
        cfg.split.heldout_wells.insert(wells.begin(), wells.begin() + n);
    }

    if (j.contains("temporal_cutoff")) {
        const auto d = Date::parse(j["temporal_cutoff"].get<std::string>());
        if (!d) throw UsageError("bad temporal_cutoff date");
        cfg.split.temporal_cutoff = *d;
    } else if (j.contains("cutoff_last_days")) {
        Date last(std::numeric_limits<std::int64_t>::min());
        for (const auto& [id, recs] : ds.wells)
            if (!recs.empty()) last = std::max(last, recs.back().day);
        cfg.split.temporal_cutoff = last - j["cutoff_last_days"].get<int>();
    } else {
        throw UsageError("condition config needs 'temporal_cutoff' or 'cutoff_last_days'");
    }

    const fs::path dir = ensure_out_dir(args.out);
    const ConditionedData cond = run_conditioning(ds, cfg);

    const fs::path tv = dir / "trainval.csv";
    const fs::path t1 = dir / "test1.csv";
    const fs::path t2 = dir / "test2.csv";
    save_derived_csv(cond.parts.trainval, tv);
    save_derived_csv(cond.parts.test1, t1);
    save_derived_csv(cond.parts.test2, t2);

    const fs::path report_path = dir / "conditioning_report.json";
    json report = cond.report.to_json();
    report["split"] = {{"temporal_cutoff", cfg.split.temporal_cutoff.to_string()},
                       {"heldout_wells", cfg.split.heldout_wells}};
    write_text_atomic(report_path, report.dump(1));

    // Correlation heatmap data over the training pool: inputs plus target.
    std::vector<Feature> corr_features;
    for (Feature f : FeatureSet::table5(2).columns) corr_features.push_back(f);
    corr_features.push_back(Feature::gor);
    corr_features.push_back(Feature::wcut);
    corr_features.push_back(Feature::bhp);
    const Eigen::MatrixXd corr = pearson_matrix(cond.parts.trainval, corr_features);
    const fs::path corr_path = dir / "pearson.csv";
    {
        std::ofstream out(corr_path, std::ios::trunc);
        out << "feature";
        for (Feature f : corr_features) out << ',' << feature_name(f);
        out << '\n';
        for (std::size_t i = 0; i < corr_features.size(); ++i) {
            out << feature_name(corr_features[i]);
            for (std::size_t k = 0; k < corr_features.size(); ++k)
                out << ',' << fmt_double(corr(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(k)));
            out << '\n';
        }
    }

    RunManifest manifest;
    manifest.command = "condition";
    manifest.config_path = args.config;
    manifest.seed = args.seed_set ? args.seed : j.value("seed", 0);
    manifest.inputs = {input.string()};
    manifest.wall_clock_seconds = timer.seconds();
    for (const fs::path& p : {tv, t1, t2, report_path, corr_path}) manifest.add_output(p);
    manifest.save(dir / "manifest_condition.json");

    const RuleCounts total = cond.report.total();
    std::cerr << "condition: " << cond.report.input_records << " -> "
              << cond.report.output_records << " records (null/error " << total.null_error
              << ", zero " << total.zero_rate << ", short-open " << total.short_open
              << ", frozen " << total.frozen << ", iqr " << total.iqr << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int cmd_train(const CommonArgs& args) {
    Timer timer;
    const json j = load_config(args.config);
    if (!j.contains("trainval") || !j.contains("search_space"))
        throw UsageError("train config needs 'trainval' and 'search_space'");
    const fs::path tv_path = j["trainval"].get<std::string>();
    const DerivedDataset trainval = load_derived_csv(tv_path);

    const SearchSpace space = search_space_from_json(j["search_space"]);
    const int k = j.value("folds", 5);
    const int runs = j.value("runs", 3);
    const int top_n = j.value("top_n", 3);
    const std::uint64_t seed = args.seed_set ? args.seed : j.value("seed", 0);

    const auto folds = kfold_by_well(trainval, k, seed);
    const auto ranked = grid_search(space, trainval, folds, runs, seed, args.jobs);

    const fs::path dir = ensure_out_dir(args.out);
    const fs::path rank_path = dir / "rank.csv";
    write_rank_csv(ranked, rank_path);

    RunManifest manifest;
    manifest.command = "train";
    manifest.config_path = args.config;
    manifest.seed = seed;
    manifest.inputs = {tv_path.string()};

    std::vector<fs::path> model_paths;
    const int n_out = std::min<int>(top_n, static_cast<int>(ranked.size()));
    for (int i = 0; i < n_out; ++i) {
        TrainedModel model = train_final(ranked[static_cast<std::size_t>(i)].config, trainval,
                                         Rng(seed).split(0xF17 + static_cast<std::uint64_t>(i))
                                             .next_u64());
        const fs::path path =
            dir / ("model_" + std::to_string(i + 1) + "_" + model.family() + ".json");
        save_model(model, path);
        model_paths.push_back(path);
    }

    manifest.wall_clock_seconds = timer.seconds();
    manifest.add_output(rank_path);
    for (const fs::path& p : model_paths) manifest.add_output(p);
    manifest.save(dir / "manifest_train.json");

    std::cerr << "train: " << ranked.size() << " configurations; best " << ranked[0].config_id
              << " (MAPE " << ranked[0].mean.mape << "%)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == '/' || c == ' ') c = '_';
    return s;
}

int cmd_evaluate(const CommonArgs& args) {
    Timer timer;
    const json j = load_config(args.config);
    if (!j.contains("models") || !j.contains("partitions"))
        throw UsageError("evaluate config needs 'models' and 'partitions'");

    std::vector<std::pair<std::string, TrainedModel>> models;
    for (const auto& mp : j["models"]) {
        const fs::path path = mp.get<std::string>();
        TrainedModel m = load_model(path);
        std::string label = m.config_id.empty() ? path.stem().string() : m.config_id;
        models.emplace_back(sanitize(label), std::move(m));
    }
    if (models.empty()) throw UsageError("evaluate: no models listed");

    const fs::path dir = ensure_out_dir(args.out);
    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.config_path = args.config;
    manifest.wall_clock_seconds = 0;

    for (const auto& [part_name, part_path] : j["partitions"].items()) {
        const DerivedDataset part = load_derived_csv(part_path.get<std::string>());
        manifest.inputs.push_back(part_path.get<std::string>());
        std::vector<ResultRow> rows;
        std::size_t n_samples = 0;

        // Per-well actual series for the time-series reports.
        std::map<std::string, std::vector<std::pair<Date, double>>> actual_series;
        for (const auto& [well, recs] : part.wells)
            for (const auto& r : recs)
                actual_series[well].emplace_back(r.day, r.get(Channel::bhp));
        std::map<std::string, std::map<std::string, std::map<std::int64_t, double>>> series;

        for (const auto& [label, model] : models) {
            const std::string field = part.field_id;
            const PartitionPredictions pp = predict_partition(model, part);
            if (pp.windows.empty()) {
                std::cerr << "evaluate: " << label << " on " << part_name
                          << ": no windows, skipped\n";
                continue;
            }
            n_samples = pp.windows.size();
            const EvalReport rep = evaluate(model, part);
            rows.push_back({label, rep.pooled, Metrics{}, 1});

            const fs::path stem =
                dir / (field + "_" + part_name + "_" + label + "_scatter");
            scatter_report(pp.pred, pp.actual, stem);
            manifest.add_output(stem.string() + ".csv");
            manifest.add_output(stem.string() + ".svg");

            const fs::path rep_path =
                dir / (field + "_" + part_name + "_" + label + "_report.json");
            write_text_atomic(rep_path, rep.to_json().dump(1));
            manifest.add_output(rep_path);

            for (std::size_t i = 0; i < pp.windows.size(); ++i)
                series[pp.windows[i].well_id][label][pp.windows[i].day.days_since_epoch()] =
                    pp.pred[i];
        }

        // Time-series overlays: explicit well list, or the two longest wells.
        std::vector<std::string> ts_wells;
        if (j.contains("timeseries_wells")) {
            for (const auto& w : j["timeseries_wells"]) ts_wells.push_back(w.get<std::string>());
        } else {
            std::vector<std::pair<std::size_t, std::string>> by_len;
            for (const auto& [well, s] : actual_series) by_len.emplace_back(s.size(), well);
            std::sort(by_len.rbegin(), by_len.rend());
            for (std::size_t i = 0; i < std::min<std::size_t>(2, by_len.size()); ++i)
                ts_wells.push_back(by_len[i].second);
        }
        for (const std::string& well : ts_wells) {
            if (!actual_series.count(well) || !series.count(well)) continue;
            const fs::path stem = dir / (part.field_id + "_" + part_name + "_" + sanitize(well) +
                                         "_series");
            timeseries_report(well, actual_series[well], series[well], stem);
            manifest.add_output(stem.string() + ".csv");
            manifest.add_output(stem.string() + ".svg");
        }

        if (!rows.empty()) {
            const fs::path table_path = dir / (part.field_id + "_" + part_name + "_table.csv");
            result_table(rows, n_samples, table_path, part.field_id + " " + part_name);
            manifest.add_output(table_path);
        }
    }

    manifest.wall_clock_seconds = timer.seconds();
    manifest.save(dir / "manifest_evaluate.json");
    std::cerr << "evaluate: wrote reports for " << models.size() << " model(s) -> " << dir
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

TransferSpec transfer_spec_from_json(const json& j, TransferSpec spec, std::uint64_t seed) {
    spec.lr_scale = j.value("lr_scale", spec.lr_scale);
    spec.epochs_scale = j.value("epochs_scale", spec.epochs_scale);
    spec.new_layer_width = j.value("new_layer_width", spec.new_layer_width);
    if (j.contains("unfrozen")) {
        const std::string u = j["unfrozen"].get<std::string>();
        if (u == "All")
            spec.unfrozen = UnfreezeScope::All;
        else if (u == "HeadOnly")
            spec.unfrozen = UnfreezeScope::HeadOnly;
        else if (u == "LastK")
            spec.unfrozen = UnfreezeScope::LastK;
        else
            throw UsageError("unknown unfrozen scope: " + u);
    }
    spec.last_k = j.value("last_k", spec.last_k);
    spec.seed = seed;
    return spec;
}

int cmd_transfer(const CommonArgs& args) {
    Timer timer;
    const json j = load_config(args.config);
    for (const char* key : {"base_model", "field2_trainval"})
        if (!j.contains(key)) throw UsageError(std::string("transfer config needs '") + key + "'");

    const TrainedModel base = load_model(j["base_model"].get<std::string>());
    const DerivedDataset field2_train = load_derived_csv(j["field2_trainval"].get<std::string>());
    const std::uint64_t seed = args.seed_set ? args.seed : j.value("seed", 0);

    // Optional input growth (e.g. the gas-lift rate for the second field).
    TrainedModel grown = base;
    if (j.contains("add_features") && !j["add_features"].empty()) {
        FeatureSet fs = base.feature_set();
        fs.id += "+";
        for (const auto& name : j["add_features"]) {
            const auto f = feature_from_name(name.get<std::string>());
            if (!f) throw UsageError("unknown feature: " + name.get<std::string>());
            fs.columns.push_back(*f);
            fs.id += name.get<std::string>();
        }
        grown = adapt_input(base, fs, field2_train);
    }

    TransferSpec ft_spec = TransferSpec::fine_tune_defaults();
    if (j.contains("fine_tune")) ft_spec = transfer_spec_from_json(j["fine_tune"], ft_spec, seed);
    ft_spec.seed = seed;
    TransferSpec nl_spec = TransferSpec::new_layer_defaults();
    if (j.contains("new_layer"))
        nl_spec = transfer_spec_from_json(j["new_layer"], nl_spec, seed + 1);
    nl_spec.seed = seed + 1;
    nl_spec.strategy = TransferStrategy::NewLayer;

    const TrainedModel tuned = fine_tune(grown, ft_spec, field2_train);
    const TrainedModel extended = extend_with_new_layer(grown, nl_spec, field2_train);

    const fs::path dir = ensure_out_dir(args.out);
    const fs::path tuned_path = dir / "model_fine_tuned.json";
    const fs::path extended_path = dir / "model_new_layer.json";
    save_model(tuned, tuned_path);
    save_model(extended, extended_path);

    RunManifest manifest;
    manifest.command = "transfer";
    manifest.config_path = args.config;
    manifest.seed = seed;
    manifest.inputs = {j["base_model"].get<std::string>(),
                       j["field2_trainval"].get<std::string>()};
    manifest.add_output(tuned_path);
    manifest.add_output(extended_path);

    // Tables: one per available test partition, three rows per family.
    const std::string family = base.family();
    for (const char* part_key : {"field2_test1", "field2_test2"}) {
        if (!j.contains(part_key)) continue;
        const DerivedDataset part = load_derived_csv(j[part_key].get<std::string>());
        manifest.inputs.push_back(j[part_key].get<std::string>());

        std::vector<ResultRow> rows;
        std::size_t n = 0;
        auto add_row = [&](const std::string& label, const TrainedModel& m) {
            const EvalReport rep = evaluate(m, part);
            n = rep.n;
            rows.push_back({label, rep.pooled, Metrics{}, 1});
        };
        add_row(family + " w/o TL", base);
        add_row(family + " w/ New Layer", extended);
        add_row(family + " w/ Fine Tuning", tuned);

        const std::string table_name =
            std::string("transfer_") + (part_key + 7) + ".csv";  // field2_test1 -> test1
        const fs::path table_path = dir / table_name;
        result_table(rows, n, table_path, std::string("Field 2 ") + (part_key + 7));
        manifest.add_output(table_path);
    }

    manifest.wall_clock_seconds = timer.seconds();
    manifest.save(dir / "manifest_transfer.json");
    std::cerr << "transfer: wrote " << tuned_path << " and " << extended_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wellsense: data-driven soft sensor for flowing bottom-hole pressure"};
    app.require_subcommand(1);

    CommonArgs gen_args, cond_args, train_args, eval_args, transfer_args;
    add_common(app.add_subcommand("generate", "generate a synthetic field dataset"), gen_args);
    add_common(app.add_subcommand("condition", "run the data-conditioning pipeline"), cond_args);
    add_common(app.add_subcommand("train", "grid search with well-grouped cross-validation"),
               train_args);
    add_common(app.add_subcommand("evaluate", "evaluate models on blind-test partitions"),
               eval_args);
    add_common(app.add_subcommand("transfer", "adapt a base model to a second field"),
               transfer_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("generate")) return cmd_generate(gen_args);
        if (app.got_subcommand("condition")) return cmd_condition(cond_args);
        if (app.got_subcommand("train")) return cmd_train(train_args);
        if (app.got_subcommand("evaluate")) return cmd_evaluate(eval_args);
        if (app.got_subcommand("transfer")) return cmd_transfer(transfer_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
