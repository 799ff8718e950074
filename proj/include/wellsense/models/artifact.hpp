// TrainedModel: one of the three estimator families, optionally carrying a
// frozen-base transfer extension, together with everything inference needs
// (feature set, scalers, training spec, provenance).
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wellsense/models/lstm.hpp"
#include "wellsense/models/mlp.hpp"
#include "wellsense/models/ridge.hpp"
#include "wellsense/models/train.hpp"

namespace wellsense {

// A trainable layer plus fresh head stacked on a frozen base model's last
// hidden representation.
struct ExtensionHead {
    DenseCore net;  // widths = [base_hidden, new_width, 1]
};

struct TrainedModel {
    std::string config_id;
    std::variant<RidgeModel, MlpModel, LstmModel> core;
    std::optional<ExtensionHead> ext;
    TrainSpec spec;
    std::string base_hash;  // provenance when adapted from another artifact

    std::string family() const {
        if (std::holds_alternative<RidgeModel>(core)) return "LR";
        if (std::holds_alternative<MlpModel>(core)) return "NN";
        return "LSTM";
    }

    const FeatureSet& feature_set() const {
        return std::visit([](const auto& m) -> const FeatureSet& { return m.feature_set; }, core);
    }
    const ScalerSet& scaler() const {
        return std::visit([](const auto& m) -> const ScalerSet& { return m.scaler; }, core);
    }
    ScalerSet& scaler() {
        return std::visit([](auto& m) -> ScalerSet& { return m.scaler; }, core);
    }

    // Window length this model consumes: p previous steps plus the current one.
    int window_p() const {
        if (const auto* lstm = std::get_if<LstmModel>(&core)) return lstm->p;
        return 0;
    }
};

namespace detail {

// Hidden representation feeding the extension, as a column per sample.
inline Eigen::MatrixXd base_representation(const TrainedModel& m,
                                           const std::vector<WindowedSample>& windows) {
    const ScalerSet& sc = m.scaler();
    if (const auto* mlp = std::get_if<MlpModel>(&m.core)) {
        const DenseData d = prepare_dense(windows, sc);
        return mlp->net.last_hidden(d.x);
    }
    if (const auto* lstm = std::get_if<LstmModel>(&m.core)) {
        const SeqData d = prepare_seq(windows, sc, lstm->p);
        return lstm->net.last_hidden(d.xs);
    }
    throw InvalidConfigError("extension requires an NN or LSTM base model");
}

}  // namespace detail

inline double predict(const TrainedModel& m, const WindowedSample& w) {
    if (m.ext) {
        const Eigen::MatrixXd rep = detail::base_representation(m, {w});
        return m.scaler().unscale_target(m.ext->net.forward(rep)(0));
    }
    return std::visit([&](const auto& core) { return predict(core, w); }, m.core);
}

inline std::vector<double> predict_all(const TrainedModel& m,
                                       const std::vector<WindowedSample>& windows) {
    std::vector<double> out;
    out.reserve(windows.size());
    if (windows.empty()) return out;
    const ScalerSet& sc = m.scaler();
    if (m.ext) {
        const Eigen::MatrixXd rep = detail::base_representation(m, windows);
        const Eigen::RowVectorXd pred = m.ext->net.forward(rep);
        for (Eigen::Index i = 0; i < pred.size(); ++i)
            out.push_back(sc.unscale_target(pred(i)));
        return out;
    }
    // Batched paths per family keep evaluation fast.
    if (const auto* mlp = std::get_if<MlpModel>(&m.core)) {
        const DenseData d = prepare_dense(windows, sc);
        const Eigen::RowVectorXd pred = mlp->net.forward(d.x);
        for (Eigen::Index i = 0; i < pred.size(); ++i)
            out.push_back(sc.unscale_target(pred(i)));
        return out;
    }
    if (const auto* lstm = std::get_if<LstmModel>(&m.core)) {
        const SeqData d = prepare_seq(windows, sc, lstm->p);
        const Eigen::RowVectorXd pred = lstm->net.forward(d.xs);
        for (Eigen::Index i = 0; i < pred.size(); ++i)
            out.push_back(sc.unscale_target(pred(i)));
        return out;
    }
    const auto& ridge = std::get<RidgeModel>(m.core);
    for (const WindowedSample& w : windows) out.push_back(predict(ridge, w));
    return out;
}

}  // namespace wellsense
