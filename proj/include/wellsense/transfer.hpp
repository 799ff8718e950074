// Domain adaptation of a trained base model to a second field: fine-tuning
// (unfreeze some or all layers, smaller learning rate, fewer epochs) and
// frozen-base extension (new trainable layer + fresh head). adapt_input
// grows the input layer by zero-initialized columns so added variables are
// prediction-neutral until retraining.
//
// Scalers are refitted on the new field's training data for all features at
// adaptation time; adapt_input alone keeps the base scaling for existing
// columns so the zero-initialization identity holds exactly.
#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "wellsense/manifest.hpp"
#include "wellsense/models/artifact.hpp"
#include "wellsense/models/model_io.hpp"
#include "wellsense/models/train.hpp"

namespace wellsense {

enum class TransferStrategy { NewLayer, FineTune };
enum class UnfreezeScope { All, HeadOnly, LastK };

struct TransferSpec {
    TransferStrategy strategy = TransferStrategy::FineTune;
    double lr_scale = 0.1;      // 0 is the documented null-update limit
    double epochs_scale = 0.3;
    int new_layer_width = 0;    // NewLayer only; 0 means base hidden width
    UnfreezeScope unfrozen = UnfreezeScope::All;  // FineTune only
    int last_k = 1;
    std::uint64_t seed = 0;

    static TransferSpec fine_tune_defaults() { return {}; }
    static TransferSpec new_layer_defaults() {
        TransferSpec s;
        s.strategy = TransferStrategy::NewLayer;
        s.lr_scale = 1.0;
        s.epochs_scale = 1.0;
        return s;
    }

    // The zero endpoints are the documented null-update limits exercised by
    // the transfer contracts (lr = 0 keeps parameters, epochs = 0 skips
    // adaptation training entirely).
    void validate() const {
        if (lr_scale < 0.0 || lr_scale > 1.0)
            throw InvalidConfigError("lr_scale must be in [0, 1]");
        if (epochs_scale < 0.0 || epochs_scale > 1.0)
            throw InvalidConfigError("epochs_scale must be in [0, 1]");
        if (new_layer_width < 0)
            throw InvalidConfigError("new_layer_width must be >= 1 (or 0 = base width)");
        if (last_k < 1) throw InvalidConfigError("last_k must be >= 1");
    }
};

namespace detail {

inline TrainSpec scaled_spec(const TrainSpec& base, const TransferSpec& t) {
    TrainSpec s = base;
    s.learning_rate = base.learning_rate * t.lr_scale;
    s.epochs = static_cast<int>(std::lround(base.epochs * t.epochs_scale));
    s.seed = t.seed;
    return s;
}

inline std::string hash_of(const TrainedModel& m) { return sha256_hex(model_to_json(m).dump()); }

// Tensor names to freeze for a fine-tune scope.
template <class Core>
std::vector<std::string> frozen_tensor_names(const Core& core, UnfreezeScope scope, int last_k,
                                             int n_layers) {
    std::vector<std::string> frozen;
    if (scope == UnfreezeScope::All) return frozen;
    const int unfrozen_from =
        scope == UnfreezeScope::HeadOnly ? n_layers : std::max(0, n_layers - last_k);
    for (const TensorSpec& t : core.layout.tensors) {
        // Head tensors are always trainable.
        if (t.name == "head_w" || t.name == "head_b") continue;
        const char kind = t.name[0];
        const int layer = std::atoi(t.name.c_str() + 1);
        (void)kind;
        if (layer < unfrozen_from) frozen.push_back(t.name);
    }
    return frozen;
}

}  // namespace detail

// Fine-tuning: copies the base, refits the scaler on the new field's
// training data, unfreezes the selected layers and resumes training with a
// scaled-down schedule. The base object is never mutated.
inline TrainedModel fine_tune(const TrainedModel& base, const TransferSpec& spec,
                              const DerivedDataset& field2_train) {
    spec.validate();
    if (spec.strategy != TransferStrategy::FineTune)
        throw InvalidConfigError("fine_tune: spec.strategy must be FineTune");
    if (base.ext) throw InvalidConfigError("fine_tune: extended models are not supported");

    TrainedModel adapted = base;
    adapted.base_hash = detail::hash_of(base);
    const FeatureSet& fs = adapted.feature_set();
    adapted.scaler() = fit_scaler(field2_train, fs, base.scaler().features.kind);
    const auto windows = window_samples(field2_train, fs, adapted.window_p());
    if (windows.empty()) throw TooFewSamplesError("fine_tune: no training windows");
    const TrainSpec tspec = detail::scaled_spec(base.spec, spec);
    adapted.spec = tspec;

    if (auto* mlp = std::get_if<MlpModel>(&adapted.core)) {
        const int n_layers = mlp->net.n_layers();
        // The MLP's output layer is its head: W{last}/b{last}.
        std::vector<std::string> frozen;
        if (spec.unfrozen == UnfreezeScope::HeadOnly) {
            for (const TensorSpec& t : mlp->net.layout.tensors)
                if (t.name != "W" + std::to_string(n_layers - 1) &&
                    t.name != "b" + std::to_string(n_layers - 1))
                    frozen.push_back(t.name);
        } else if (spec.unfrozen == UnfreezeScope::LastK) {
            const int unfrozen_from = std::max(0, n_layers - 1 - spec.last_k);
            for (const TensorSpec& t : mlp->net.layout.tensors) {
                const int layer = std::atoi(t.name.c_str() + 1);
                if (layer < unfrozen_from) frozen.push_back(t.name);
            }
        }
        const auto mask = frozen.empty()
                              ? std::vector<std::uint8_t>()
                              : freeze_mask(mlp->net, frozen);
        train(*mlp, windows, tspec, nullptr, mask.empty() ? nullptr : &mask);
        return adapted;
    }
    if (auto* lstm = std::get_if<LstmModel>(&adapted.core)) {
        const auto frozen =
            detail::frozen_tensor_names(lstm->net, spec.unfrozen, spec.last_k, lstm->net.layers);
        const auto mask = frozen.empty()
                              ? std::vector<std::uint8_t>()
                              : freeze_mask(lstm->net, frozen);
        train(*lstm, windows, tspec, nullptr, mask.empty() ? nullptr : &mask);
        return adapted;
    }
    throw InvalidConfigError("fine_tune: ridge models have no iterative training to resume");
}

// Frozen-base extension: the base parameters stay bitwise unchanged; a new
// layer plus fresh head learn from the base's last hidden representation.
// The new head's weight tensor starts at zero, so an untrained extension is
// the constant predictor at its head bias.
inline TrainedModel extend_with_new_layer(const TrainedModel& base, const TransferSpec& spec,
                                          const DerivedDataset& field2_train) {
    spec.validate();
    if (spec.strategy != TransferStrategy::NewLayer)
        throw InvalidConfigError("extend_with_new_layer: spec.strategy must be NewLayer");
    if (base.ext) throw InvalidConfigError("extend_with_new_layer: base is already extended");

    TrainedModel adapted = base;
    adapted.base_hash = detail::hash_of(base);
    const FeatureSet& fs = adapted.feature_set();
    adapted.scaler() = fit_scaler(field2_train, fs, base.scaler().features.kind);

    Eigen::Index rep_dim = 0;
    Activation act = Activation::Tanh;
    double dropout = 0.0;
    if (const auto* mlp = std::get_if<MlpModel>(&base.core)) {
        rep_dim = mlp->net.last_hidden_dim();
        act = mlp->net.activation;
        dropout = mlp->net.dropout_rate;
    } else if (const auto* lstm = std::get_if<LstmModel>(&base.core)) {
        rep_dim = lstm->net.hidden;
        act = lstm->net.activation;
        dropout = lstm->net.dropout_rate;
    } else {
        throw InvalidConfigError("extend_with_new_layer: requires an NN or LSTM base");
    }

    const Eigen::Index width = spec.new_layer_width > 0 ? spec.new_layer_width : rep_dim;
    ExtensionHead ext;
    ext.net = DenseCore::build({rep_dim, width, 1}, act, dropout);
    Rng init(Rng(spec.seed).split(0xEC7).next_u64());
    ext.net.init_params(init);
    ext.net.layout.mat(ext.net.theta, ext.net.layout.index_of("W1")).setZero();  // fresh head

    const auto windows = window_samples(field2_train, fs, adapted.window_p());
    if (windows.empty()) throw TooFewSamplesError("extend_with_new_layer: no training windows");
    const TrainSpec tspec = detail::scaled_spec(base.spec, spec);
    adapted.spec = tspec;

    if (tspec.epochs > 0) {
        // The base is frozen, so its representation of the training windows
        // is a constant matrix; the extension trains as a small dense net.
        DenseData data;
        data.x = detail::base_representation(adapted, windows);
        data.y.resize(static_cast<Eigen::Index>(windows.size()));
        data.y_raw.resize(windows.size());
        const ScalerSet& sc = adapted.scaler();
        for (std::size_t i = 0; i < windows.size(); ++i) {
            data.y(static_cast<Eigen::Index>(i)) = sc.scale_target(windows[i].y);
            data.y_raw[i] = windows[i].y;
        }
        const LossContext ctx{tspec.loss, &sc.target};
        detail::train_core(detail::DenseOps{ext.net}, data, tspec, ctx, nullptr,
                           static_cast<const DenseData*>(nullptr), sc);
    }
    adapted.ext = std::move(ext);
    return adapted;
}

// Grows the input layer to a superset feature set. Added columns get
// zero-initialized weights and field-2-fitted scaler entries; existing
// columns keep the base weights and base scaling, so predictions are
// bit-compatible with the base until retraining touches the new weights.
inline TrainedModel adapt_input(const TrainedModel& base, const FeatureSet& new_features,
                                const DerivedDataset& field2_train) {
    if (base.ext) throw InvalidConfigError("adapt_input: base is already extended");
    const FeatureSet& old_fs = base.feature_set();
    std::vector<int> source(new_features.columns.size(), -1);  // new col -> old col
    for (std::size_t j = 0; j < new_features.columns.size(); ++j)
        for (std::size_t k = 0; k < old_fs.columns.size(); ++k)
            if (new_features.columns[j] == old_fs.columns[k]) source[j] = static_cast<int>(k);
    for (Feature f : old_fs.columns)
        if (!new_features.contains(f))
            throw IncompatibleFeaturesError(std::string("adapt_input: base feature ") +
                                            feature_name(f) + " missing from the new set");

    TrainedModel adapted = base;
    adapted.base_hash = detail::hash_of(base);

    // Scaler: keep base entries for existing columns; fit the new ones on
    // the second field's training data.
    ScalerSet sc;
    sc.features.kind = base.scaler().features.kind;
    sc.target = base.scaler().target;
    const auto flat = field2_train.flat();
    if (flat.empty()) throw TooFewSamplesError("adapt_input: empty field-2 training data");
    for (std::size_t j = 0; j < new_features.columns.size(); ++j) {
        if (source[j] >= 0) {
            sc.features.per_feature.push_back(
                base.scaler().features.per_feature[static_cast<std::size_t>(source[j])]);
        } else {
            std::vector<double> col;
            col.reserve(flat.size());
            for (const DerivedRecord* r : flat) col.push_back(get_feature(*r, new_features.columns[j]));
            sc.features.per_feature.push_back(
                fit_scaler({col}, sc.features.kind).per_feature[0]);
        }
    }

    auto grow_matrix = [&](const Eigen::MatrixXd& w_old) {
        Eigen::MatrixXd w_new =
            Eigen::MatrixXd::Zero(w_old.rows(), static_cast<Eigen::Index>(source.size()));
        for (std::size_t j = 0; j < source.size(); ++j)
            if (source[j] >= 0) w_new.col(static_cast<Eigen::Index>(j)) = w_old.col(source[j]);
        return w_new;
    };

    if (auto* ridge = std::get_if<RidgeModel>(&adapted.core)) {
        Eigen::VectorXd w_new = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(source.size()));
        for (std::size_t j = 0; j < source.size(); ++j)
            if (source[j] >= 0) w_new(static_cast<Eigen::Index>(j)) = ridge->w(source[j]);
        ridge->w = std::move(w_new);
        ridge->feature_set = new_features;
        ridge->scaler = sc;
        return adapted;
    }
    if (auto* mlp = std::get_if<MlpModel>(&adapted.core)) {
        DenseCore grown = DenseCore::build(
            [&] {
                auto w = mlp->net.widths;
                w[0] = static_cast<Eigen::Index>(source.size());
                return w;
            }(),
            mlp->net.activation, mlp->net.dropout_rate);
        grown.theta.setZero();
        for (std::size_t t = 0; t < grown.layout.tensors.size(); ++t) {
            if (grown.layout.tensors[t].name == "W0")
                grown.layout.mat(grown.theta, t) = grow_matrix(mlp->net.layout.mat(mlp->net.theta, t));
            else
                grown.layout.mat(grown.theta, t) = mlp->net.layout.mat(mlp->net.theta, t);
        }
        mlp->net = std::move(grown);
        mlp->feature_set = new_features;
        mlp->scaler = sc;
        return adapted;
    }
    auto& lstm = std::get<LstmModel>(adapted.core);
    LstmCore grown = LstmCore::build(static_cast<Eigen::Index>(source.size()), lstm.net.hidden,
                                     lstm.net.layers, lstm.net.activation, lstm.net.dropout_rate);
    grown.theta.setZero();
    for (std::size_t t = 0; t < grown.layout.tensors.size(); ++t) {
        if (grown.layout.tensors[t].name == "W0")
            grown.layout.mat(grown.theta, t) = grow_matrix(lstm.net.layout.mat(lstm.net.theta, t));
        else
            grown.layout.mat(grown.theta, t) = lstm.net.layout.mat(lstm.net.theta, t);
    }
    lstm.net = std::move(grown);
    lstm.feature_set = new_features;
    lstm.scaler = sc;
    return adapted;
}

}  // namespace wellsense
