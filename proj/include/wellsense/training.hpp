// Well-grouped 5-fold cross-validation, exhaustive hyperparameter grid
// search over the sanctioned ranges, and repeated-run statistics. Scalers
// are refitted inside every fold round on the training folds only, so no
// validation record can influence normalization or weights.
#pragma once

#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "wellsense/conditioning.hpp"
#include "wellsense/evaluation.hpp"
#include "wellsense/models/artifact.hpp"
#include "wellsense/models/train.hpp"

namespace wellsense {

// ---------------------------------------------------------------------------
// Model configurations
// ---------------------------------------------------------------------------

struct ModelConfig {
    std::string family;  // "LR" | "NN" | "LSTM"
    std::string feature_set_id = "Set3";
    ScalerKind scaler_kind = ScalerKind::MinMax;
    // LR
    double alpha = 0.2;
    // NN
    std::vector<int> hidden = {60};
    // LSTM
    int lstm_hidden = 40;
    int lstm_layers = 1;
    int timesteps = 2;  // p previous steps
    // shared NN/LSTM
    double dropout = 0.0;
    LossKind loss = LossKind::MSE;
    Activation activation = Activation::ReLU;
    double learning_rate = 1e-3;
    int epochs = 60;
    int batch_size = 256;

    int window_p() const { return family == "LSTM" ? timesteps : 0; }

    std::string id() const {
        std::string s = family + "/" + feature_set_id + "/" + scaler_kind_name(scaler_kind);
        char buf[64];
        if (family == "LR") {
            std::snprintf(buf, sizeof(buf), "/a%g", alpha);
            return s + buf;
        }
        if (family == "NN") {
            s += "/h";
            for (std::size_t i = 0; i < hidden.size(); ++i)
                s += (i ? "x" : "") + std::to_string(hidden[i]);
        } else {
            s += "/h" + std::to_string(lstm_hidden) + "l" + std::to_string(lstm_layers) + "p" +
                 std::to_string(timesteps);
        }
        std::snprintf(buf, sizeof(buf), "/%s/%s/lr%g/do%g", loss_kind_name(loss),
                      activation_name(activation), learning_rate, dropout);
        return s + buf;
    }

    TrainSpec train_spec(std::uint64_t seed) const {
        TrainSpec t;
        t.loss = loss;
        t.learning_rate = learning_rate;
        t.epochs = epochs;
        t.batch_size = batch_size;
        t.seed = seed;
        return t;
    }

    // Enforces the sanctioned hyperparameter ranges per family.
    void validate() const {
        if (family != "LR" && family != "NN" && family != "LSTM")
            throw InvalidConfigError("unknown model family: " + family);
        FeatureSet::by_id(feature_set_id);
        if (family == "LR") {
            if (alpha < 0) throw InvalidConfigError("alpha must be >= 0");
            return;
        }
        if (learning_rate < 1e-4 || learning_rate > 3e-3)
            throw InvalidConfigError("learning rate outside 0.0001..0.003");
        if (loss != LossKind::MSE && loss != LossKind::MAE && loss != LossKind::SMAPE)
            throw InvalidConfigError("unsupported loss");
        if (dropout != 0.0 && (dropout < 0.05 || dropout > 0.50))
            throw InvalidConfigError("dropout outside 0.05..0.50");
        if (epochs < 1) throw InvalidConfigError("epochs must be >= 1");
        if (family == "NN") {
            if (hidden.empty() || hidden.size() > 3)
                throw InvalidConfigError("NN needs 1 to 3 hidden layers");
            for (int hsz : hidden)
                if (hsz < 20 || hsz > 300)
                    throw InvalidConfigError("NN layer width outside 20..300");
        } else {
            if (lstm_layers < 1 || lstm_layers > 3)
                throw InvalidConfigError("LSTM needs 1 to 3 layers");
            if (lstm_hidden < 20 || lstm_hidden > 200)
                throw InvalidConfigError("LSTM width outside 20..200");
            if (timesteps < 2 || timesteps > 15)
                throw InvalidConfigError("LSTM timesteps outside 2..15");
            if (activation != Activation::ReLU && activation != Activation::Tanh)
                throw InvalidConfigError("LSTM activation must be ReLU or Tanh");
        }
    }
};

// Builds and trains one model for a config on the given training windows.
// The model keeps the supplied scaler; ridge ignores seeds entirely.
inline TrainedModel fit_config(const ModelConfig& cfg, const std::vector<WindowedSample>& train_windows,
                               const ScalerSet& scaler, std::uint64_t seed,
                               const std::vector<WindowedSample>* early_stop = nullptr) {
    const FeatureSet fs = FeatureSet::by_id(cfg.feature_set_id);
    TrainedModel out;
    out.config_id = cfg.id();
    out.spec = cfg.train_spec(seed);

    if (cfg.family == "LR") {
        out.core = ridge_fit_windows(train_windows, fs, scaler, cfg.alpha);
        return out;
    }
    if (cfg.family == "NN") {
        MlpModel m;
        m.feature_set = fs;
        m.scaler = scaler;
        std::vector<Eigen::Index> widths;
        widths.push_back(fs.size());
        for (int hsz : cfg.hidden) widths.push_back(hsz);
        widths.push_back(1);
        m.net = DenseCore::build(std::move(widths), cfg.activation, cfg.dropout);
        Rng init(Rng(seed).split(0xA11CE).next_u64());
        m.net.init_params(init);
        train(m, train_windows, out.spec, early_stop);
        out.core = std::move(m);
        return out;
    }
    LstmModel m;
    m.feature_set = fs;
    m.scaler = scaler;
    m.p = cfg.timesteps;
    m.net = LstmCore::build(fs.size(), cfg.lstm_hidden, cfg.lstm_layers, cfg.activation,
                            cfg.dropout);
    Rng init(Rng(seed).split(0xA11CE).next_u64());
    m.net.init_params(init);
    train(m, train_windows, out.spec, early_stop);
    out.core = std::move(m);
    return out;
}

// ---------------------------------------------------------------------------
// Well-grouped k-fold
// ---------------------------------------------------------------------------

// Random partition of WELLS (never records) into k folds whose well counts
// differ by at most one. Deterministic in the seed.
inline std::vector<std::set<std::string>> kfold_by_well(const DerivedDataset& trainval, int k,
                                                        std::uint64_t seed) {
    if (k < 2) throw TooFewWellsError("kfold_by_well: k must be >= 2");
    std::vector<std::string> wells;
    for (const auto& [id, recs] : trainval.wells) wells.push_back(id);
    if (wells.size() < static_cast<std::size_t>(k))
        throw TooFewWellsError("kfold_by_well: fewer wells than folds");
    Rng rng(Rng(seed).split(0xF01D).next_u64());
    rng.shuffle(wells);
    std::vector<std::set<std::string>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < wells.size(); ++i) folds[i % k].insert(std::move(wells[i]));
    return folds;
}

inline DerivedDataset subset_wells(const DerivedDataset& ds, const std::set<std::string>& wells,
                                   bool keep_listed) {
    DerivedDataset out;
    out.field_id = ds.field_id;
    for (const auto& [id, recs] : ds.wells)
        if (wells.count(id) == static_cast<std::size_t>(keep_listed)) out.wells[id] = recs;
    return out;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct CvResult {
    std::string config_id;
    ModelConfig config;
    std::vector<std::vector<Metrics>> per_fold;  // [run][fold]
    Metrics mean;    // over runs of fold-averages
    Metrics stddev;  // sample std over runs (0 when runs == 1)
    double runtime_seconds = 0.0;
    int runs = 0;
    int k = 0;
};

namespace detail {

inline Metrics average(const std::vector<Metrics>& ms) {
    Metrics out;
    for (const Metrics& m : ms) {
        out.mape += m.mape;
        out.smape += m.smape;
        out.rmse += m.rmse;
        out.nrmse += m.nrmse;
    }
    const auto n = static_cast<double>(ms.size());
    out.mape /= n;
    out.smape /= n;
    out.rmse /= n;
    out.nrmse /= n;
    return out;
}

inline Metrics sample_std(const std::vector<Metrics>& ms, const Metrics& mean) {
    Metrics out;
    if (ms.size() < 2) return out;
    // Deterministic estimators produce bitwise-equal runs; report their std
    // as exactly 0 rather than the rounding residue of the mean.
    auto component = [&](auto member) {
        bool all_equal = true;
        for (const Metrics& m : ms) all_equal &= m.*member == ms[0].*member;
        if (all_equal) return 0.0;
        double ss = 0.0;
        for (const Metrics& m : ms) ss += (m.*member - mean.*member) * (m.*member - mean.*member);
        return std::sqrt(ss / static_cast<double>(ms.size() - 1));
    };
    out.mape = component(&Metrics::mape);
    out.smape = component(&Metrics::smape);
    out.rmse = component(&Metrics::rmse);
    out.nrmse = component(&Metrics::nrmse);
    return out;
}

}  // namespace detail

// Trains on k-1 folds and validates on the held-out fold, k times per run,
// repeating `runs` times with distinct seeds. Normalization parameters are
// recomputed from the training folds of each round.
inline CvResult cross_validate(const ModelConfig& cfg, const DerivedDataset& trainval,
                               const std::vector<std::set<std::string>>& folds, int runs,
                               std::uint64_t seed) {
    cfg.validate();
    if (runs < 1) throw InvalidConfigError("cross_validate: runs must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    const FeatureSet fs = FeatureSet::by_id(cfg.feature_set_id);

    CvResult result;
    result.config = cfg;
    result.config_id = cfg.id();
    result.runs = runs;
    result.k = static_cast<int>(folds.size());

    // Process folds in a canonical content order: permuting the caller's
    // fold list leaves every aggregate bit-identical.
    std::vector<std::set<std::string>> ordered = folds;
    std::sort(ordered.begin(), ordered.end());

    std::vector<Metrics> run_means;
    for (int run = 0; run < runs; ++run) {
        std::vector<Metrics> fold_metrics;
        for (std::size_t f = 0; f < ordered.size(); ++f) {
            const DerivedDataset train_ds = subset_wells(trainval, ordered[f], false);
            const DerivedDataset val_ds = subset_wells(trainval, ordered[f], true);

            const ScalerSet scaler = fit_scaler(train_ds, fs, cfg.scaler_kind);
            const auto train_windows = window_samples(train_ds, fs, cfg.window_p());
            const auto val_windows = window_samples(val_ds, fs, cfg.window_p());
            if (train_windows.empty() || val_windows.empty())
                throw TooFewSamplesError("cross_validate: fold yields no windows");

            // Seed from the fold's content, not its position: permuting the
            // fold list cannot change any result.
            std::string fold_key;
            for (const std::string& w : ordered[f]) {
                fold_key += w;
                fold_key += '\n';
            }
            const std::uint64_t fit_seed = Rng(seed)
                                               .split(static_cast<std::uint64_t>(run))
                                               .split(fnv1a64(fold_key))
                                               .next_u64();
            const TrainedModel model = fit_config(cfg, train_windows, scaler, fit_seed);

            const std::vector<double> pred = predict_all(model, val_windows);
            std::vector<double> actual;
            actual.reserve(val_windows.size());
            for (const auto& w : val_windows) actual.push_back(w.y);
            fold_metrics.push_back(compute_metrics(pred, actual));
        }
        result.per_fold.push_back(fold_metrics);
        run_means.push_back(detail::average(fold_metrics));
    }
    result.mean = detail::average(run_means);
    result.stddev = detail::sample_std(run_means, result.mean);
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct SearchSpace {
    std::string family = "LSTM";
    std::vector<std::string> feature_sets = {"Set3"};
    std::vector<ScalerKind> scalers = {ScalerKind::MinMax};
    std::vector<double> alphas = {0.2};                  // LR
    std::vector<std::vector<int>> hidden_layouts = {{60}};  // NN
    std::vector<int> lstm_hidden = {40};
    std::vector<int> lstm_layers = {1};
    std::vector<int> timesteps = {2};
    std::vector<double> dropouts = {0.0};
    std::vector<LossKind> losses = {LossKind::MSE};
    std::vector<Activation> activations = {Activation::Tanh};
    std::vector<double> learning_rates = {1e-3};
    int epochs = 60;
    int batch_size = 256;

    std::vector<ModelConfig> enumerate() const {
        std::vector<ModelConfig> out;
        for (const std::string& fsid : feature_sets)
            for (ScalerKind sk : scalers) {
                ModelConfig base;
                base.family = family;
                base.feature_set_id = fsid;
                base.scaler_kind = sk;
                base.epochs = epochs;
                base.batch_size = batch_size;
                if (family == "LR") {
                    for (double a : alphas) {
                        ModelConfig c = base;
                        c.alpha = a;
                        out.push_back(c);
                    }
                    continue;
                }
                for (double dropout : dropouts)
                    for (LossKind lk : losses)
                        for (Activation act : activations)
                            for (double lr : learning_rates) {
                                ModelConfig c = base;
                                c.dropout = dropout;
                                c.loss = lk;
                                c.activation = act;
                                c.learning_rate = lr;
                                if (family == "NN") {
                                    for (const auto& h : hidden_layouts) {
                                        ModelConfig cc = c;
                                        cc.hidden = h;
                                        out.push_back(cc);
                                    }
                                } else {
                                    for (int hsz : lstm_hidden)
                                        for (int nl : lstm_layers)
                                            for (int p : timesteps) {
                                                ModelConfig cc = c;
                                                cc.lstm_hidden = hsz;
                                                cc.lstm_layers = nl;
                                                cc.timesteps = p;
                                                out.push_back(cc);
                                            }
                                }
                            }
            }
        for (const ModelConfig& c : out) c.validate();
        return out;
    }
};

// Exhaustive search, ranked by mean MAPE ascending with nRMSE then config id
// as tie-breaks. Configurations run in parallel; the ranking is reduced by
// config id so worker scheduling never changes the output.
inline std::vector<CvResult> grid_search(const SearchSpace& space, const DerivedDataset& trainval,
                                         const std::vector<std::set<std::string>>& folds,
                                         int runs, std::uint64_t seed, int jobs = 1) {
    const std::vector<ModelConfig> configs = space.enumerate();
    if (configs.empty()) throw InvalidConfigError("grid_search: empty space");

    std::vector<CvResult> results(configs.size());
    parallel_for(configs.size(), jobs, [&](std::size_t i) {
        const std::uint64_t cfg_seed = Rng(seed).split(0xC0DE + i).next_u64();
        results[i] = cross_validate(configs[i], trainval, folds, runs, cfg_seed);
    });

    std::sort(results.begin(), results.end(), [](const CvResult& a, const CvResult& b) {
        if (a.mean.mape != b.mean.mape) return a.mean.mape < b.mean.mape;
        if (a.mean.nrmse != b.mean.nrmse) return a.mean.nrmse < b.mean.nrmse;
        return a.config_id < b.config_id;
    });
    return results;
}

// Trains a config on the full training pool for final evaluation. NN/LSTM
// carve an internal early-stopping holdout (a fraction of training wells,
// never test data); ridge fits closed-form on everything.
inline TrainedModel train_final(const ModelConfig& cfg, const DerivedDataset& trainval,
                                std::uint64_t seed, double holdout_frac = 0.15) {
    cfg.validate();
    const FeatureSet fs = FeatureSet::by_id(cfg.feature_set_id);

    if (cfg.family == "LR") {
        const ScalerSet scaler = fit_scaler(trainval, fs, cfg.scaler_kind);
        return fit_config(cfg, window_samples(trainval, fs, 0), scaler, seed);
    }

    std::vector<std::string> wells;
    for (const auto& [id, recs] : trainval.wells) wells.push_back(id);
    Rng rng(Rng(seed).split(0xE5).next_u64());
    rng.shuffle(wells);
    const std::size_t n_hold =
        std::max<std::size_t>(1, static_cast<std::size_t>(holdout_frac * wells.size()));
    std::set<std::string> holdout(wells.begin(), wells.begin() + n_hold);
    if (holdout.size() >= wells.size())
        throw TooFewWellsError("train_final: not enough wells for a holdout");

    const DerivedDataset fit_ds = subset_wells(trainval, holdout, false);
    const DerivedDataset es_ds = subset_wells(trainval, holdout, true);
    const ScalerSet scaler = fit_scaler(fit_ds, fs, cfg.scaler_kind);
    const auto fit_windows = window_samples(fit_ds, fs, cfg.window_p());
    const auto es_windows = window_samples(es_ds, fs, cfg.window_p());
    return fit_config(cfg, fit_windows, scaler, Rng(seed).split(1).next_u64(),
                      es_windows.empty() ? nullptr : &es_windows);
}

// ---------------------------------------------------------------------------
// JSON plumbing for CLI configs
// ---------------------------------------------------------------------------

inline SearchSpace search_space_from_json(const nlohmann::json& j) {
    SearchSpace s;
    s.family = j.value("family", s.family);
    if (j.contains("feature_sets")) s.feature_sets = j["feature_sets"].get<std::vector<std::string>>();
    if (j.contains("scalers")) {
        s.scalers.clear();
        for (const auto& v : j["scalers"]) {
            const std::string name = v.get<std::string>();
            if (name == "MinMax")
                s.scalers.push_back(ScalerKind::MinMax);
            else if (name == "Standard")
                s.scalers.push_back(ScalerKind::Standard);
            else
                throw InvalidConfigError("unknown scaler: " + name);
        }
    }
    if (j.contains("alphas")) s.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("hidden_layouts"))
        s.hidden_layouts = j["hidden_layouts"].get<std::vector<std::vector<int>>>();
    if (j.contains("lstm_hidden")) s.lstm_hidden = j["lstm_hidden"].get<std::vector<int>>();
    if (j.contains("lstm_layers")) s.lstm_layers = j["lstm_layers"].get<std::vector<int>>();
    if (j.contains("timesteps")) s.timesteps = j["timesteps"].get<std::vector<int>>();
    if (j.contains("dropouts")) s.dropouts = j["dropouts"].get<std::vector<double>>();
    if (j.contains("losses")) {
        s.losses.clear();
        for (const auto& v : j["losses"]) s.losses.push_back(loss_kind_from_name(v));
    }
    if (j.contains("activations")) {
        s.activations.clear();
        for (const auto& v : j["activations"]) s.activations.push_back(activation_from_name(v));
    }
    if (j.contains("learning_rates"))
        s.learning_rates = j["learning_rates"].get<std::vector<double>>();
    s.epochs = j.value("epochs", s.epochs);
    s.batch_size = j.value("batch_size", s.batch_size);
    return s;
}

inline void write_rank_csv(const std::vector<CvResult>& ranked,
                           const std::filesystem::path& path) {
    std::vector<ResultRow> rows;
    for (const CvResult& r : ranked)
        rows.push_back({r.config_id, r.mean, r.stddev, r.runs});
    std::size_t n = 0;  // validation rows vary per fold; report config count instead
    n = ranked.size();
    result_table(std::move(rows), n, path, "cross-validation ranking; n = configurations");
}

}  // namespace wellsense
