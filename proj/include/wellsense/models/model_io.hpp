// Self-describing JSON model artifacts. Doubles serialize with shortest
// round-trip formatting, so a loaded model reproduces the original's
// predictions exactly. Writes are atomic (temp file + rename): an
// interrupted run never leaves a partial artifact behind.
#pragma once

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "wellsense/models/artifact.hpp"

namespace wellsense {

namespace detail {

inline nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Eigen::VectorXd vec_from_json(const nlohmann::json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

inline nlohmann::json feature_set_to_json(const FeatureSet& fs) {
    nlohmann::json cols = nlohmann::json::array();
    for (Feature f : fs.columns) cols.push_back(feature_name(f));
    return {{"id", fs.id}, {"columns", cols}};
}

inline FeatureSet feature_set_from_json(const nlohmann::json& j) {
    std::vector<Feature> cols;
    for (const auto& c : j.at("columns")) {
        const auto f = feature_from_name(c.get<std::string>());
        if (!f) throw ParseError("unknown feature: " + c.get<std::string>());
        cols.push_back(*f);
    }
    return FeatureSet(j.at("id").get<std::string>(), std::move(cols));
}

inline nlohmann::json scaler_params_to_json(const ScalerParams& p) {
    nlohmann::json feats = nlohmann::json::array();
    for (const FeatureScale& s : p.per_feature)
        feats.push_back({{"a", s.a}, {"b", s.b}, {"constant", s.constant}});
    return {{"kind", scaler_kind_name(p.kind)}, {"per_feature", feats}};
}

inline ScalerParams scaler_params_from_json(const nlohmann::json& j) {
    ScalerParams p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "MinMax")
        p.kind = ScalerKind::MinMax;
    else if (kind == "Standard")
        p.kind = ScalerKind::Standard;
    else
        throw ParseError("unknown scaler kind: " + kind);
    for (const auto& f : j.at("per_feature"))
        p.per_feature.push_back(
            {f.at("a").get<double>(), f.at("b").get<double>(), f.at("constant").get<bool>()});
    return p;
}

inline nlohmann::json scaler_set_to_json(const ScalerSet& s) {
    return {{"features", scaler_params_to_json(s.features)},
            {"target", scaler_params_to_json(s.target)}};
}

inline ScalerSet scaler_set_from_json(const nlohmann::json& j) {
    return {scaler_params_from_json(j.at("features")), scaler_params_from_json(j.at("target"))};
}

inline nlohmann::json train_spec_to_json(const TrainSpec& s) {
    return {{"loss", loss_kind_name(s.loss)},
            {"learning_rate", s.learning_rate},
            {"epochs", s.epochs},
            {"batch_size", s.batch_size},
            {"seed", s.seed},
            {"early_stop_patience", s.early_stop_patience}};
}

inline TrainSpec train_spec_from_json(const nlohmann::json& j) {
    TrainSpec s;
    s.loss = loss_kind_from_name(j.at("loss").get<std::string>());
    s.learning_rate = j.at("learning_rate").get<double>();
    s.epochs = j.at("epochs").get<int>();
    s.batch_size = j.at("batch_size").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.early_stop_patience = j.value("early_stop_patience", 20);
    return s;
}

inline nlohmann::json dense_core_to_json(const DenseCore& c) {
    nlohmann::json widths = nlohmann::json::array();
    for (Eigen::Index w : c.widths) widths.push_back(w);
    return {{"activation", activation_name(c.activation)},
            {"dropout", c.dropout_rate},
            {"widths", widths},
            {"theta", vec_to_json(c.theta)}};
}

inline DenseCore dense_core_from_json(const nlohmann::json& j) {
    std::vector<Eigen::Index> widths;
    for (const auto& w : j.at("widths")) widths.push_back(w.get<Eigen::Index>());
    DenseCore c = DenseCore::build(std::move(widths),
                                   activation_from_name(j.at("activation").get<std::string>()),
                                   j.at("dropout").get<double>());
    c.theta = vec_from_json(j.at("theta"));
    if (c.theta.size() != c.layout.size) throw ParseError("dense theta size mismatch");
    return c;
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& m) {
    nlohmann::json j;
    j["format"] = "wellsense-model/1";
    j["config_id"] = m.config_id;
    j["family"] = m.family();
    j["feature_set"] = detail::feature_set_to_json(m.feature_set());
    j["scaler"] = detail::scaler_set_to_json(m.scaler());
    j["train_spec"] = detail::train_spec_to_json(m.spec);
    if (!m.base_hash.empty()) j["base_hash"] = m.base_hash;

    if (const auto* lr = std::get_if<RidgeModel>(&m.core)) {
        j["ridge"] = {{"alpha", lr->alpha}, {"w", detail::vec_to_json(lr->w)}, {"b", lr->b}};
    } else if (const auto* mlp = std::get_if<MlpModel>(&m.core)) {
        j["mlp"] = detail::dense_core_to_json(mlp->net);
    } else {
        const auto& lstm = std::get<LstmModel>(m.core);
        j["lstm"] = {{"activation", activation_name(lstm.net.activation)},
                     {"dropout", lstm.net.dropout_rate},
                     {"layers", lstm.net.layers},
                     {"hidden", lstm.net.hidden},
                     {"p", lstm.p},
                     {"theta", detail::vec_to_json(lstm.net.theta)}};
    }
    if (m.ext) j["extension"] = detail::dense_core_to_json(m.ext->net);
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "wellsense-model/1")
        throw ParseError("not a wellsense model artifact");
    TrainedModel m;
    m.config_id = j.value("config_id", "");
    m.base_hash = j.value("base_hash", "");
    m.spec = detail::train_spec_from_json(j.at("train_spec"));
    const FeatureSet fs = detail::feature_set_from_json(j.at("feature_set"));
    const ScalerSet sc = detail::scaler_set_from_json(j.at("scaler"));

    if (j.contains("ridge")) {
        RidgeModel lr;
        lr.feature_set = fs;
        lr.scaler = sc;
        lr.alpha = j["ridge"].at("alpha").get<double>();
        lr.w = detail::vec_from_json(j["ridge"].at("w"));
        lr.b = j["ridge"].at("b").get<double>();
        m.core = std::move(lr);
    } else if (j.contains("mlp")) {
        MlpModel mlp;
        mlp.feature_set = fs;
        mlp.scaler = sc;
        mlp.net = detail::dense_core_from_json(j["mlp"]);
        m.core = std::move(mlp);
    } else if (j.contains("lstm")) {
        const auto& l = j["lstm"];
        LstmModel lstm;
        lstm.feature_set = fs;
        lstm.scaler = sc;
        lstm.p = l.at("p").get<int>();
        lstm.net = LstmCore::build(static_cast<Eigen::Index>(fs.columns.size()),
                                   l.at("hidden").get<Eigen::Index>(), l.at("layers").get<int>(),
                                   activation_from_name(l.at("activation").get<std::string>()),
                                   l.at("dropout").get<double>());
        lstm.net.theta = detail::vec_from_json(l.at("theta"));
        if (lstm.net.theta.size() != lstm.net.layout.size)
            throw ParseError("lstm theta size mismatch");
        m.core = std::move(lstm);
    } else {
        throw ParseError("model artifact has no family payload");
    }
    if (j.contains("extension")) m.ext = ExtensionHead{detail::dense_core_from_json(j["extension"])};
    return m;
}

// Atomic write: the artifact appears complete or not at all.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw IoError("write failure on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void save_model(const TrainedModel& m, const std::filesystem::path& path) {
    write_text_atomic(path, model_to_json(m).dump(1));
}

inline TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return model_from_json(j);
}

}  // namespace wellsense
