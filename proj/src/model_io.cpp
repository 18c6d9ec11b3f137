#include "ovkit/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ovkit {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "ovkit-model";
constexpr int kVersion = 1;

json classifier_to_json(const BinaryClassifier& clf) {
    json j;
    if (clf.is_dummy()) {
        j["kind"] = "dummy";
    } else if (const auto* lin = std::get_if<LogisticClassifier>(&clf.model())) {
        j["kind"] = "logistic";
        j["weights"] = lin->weights;
        j["bias"] = lin->bias;
    } else if (const auto* svm = std::get_if<SvmRbfClassifier>(&clf.model())) {
        j["kind"] = "svm_rbf";
        j["gamma"] = svm->gamma;
        j["bias"] = svm->bias;
        j["support_vectors"] = {{"rows", svm->support_vectors.rows},
                                {"cols", svm->support_vectors.cols},
                                {"values", svm->support_vectors.values}};
        j["dual_coeffs"] = svm->dual_coeffs;
    }
    return j;
}

BinaryClassifier classifier_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dummy") {
        return BinaryClassifier::dummy();
    }
    if (kind == "logistic") {
        LogisticClassifier lin;
        lin.weights = j.at("weights").get<std::vector<double>>();
        lin.bias = j.at("bias").get<double>();
        return BinaryClassifier{std::move(lin)};
    }
    if (kind == "svm_rbf") {
        SvmRbfClassifier svm;
        svm.gamma = j.at("gamma").get<double>();
        svm.bias = j.at("bias").get<double>();
        const json& sv = j.at("support_vectors");
        svm.support_vectors.rows = sv.at("rows").get<std::size_t>();
        svm.support_vectors.cols = sv.at("cols").get<std::size_t>();
        svm.support_vectors.values = sv.at("values").get<std::vector<double>>();
        if (svm.support_vectors.values.size() !=
            svm.support_vectors.rows * svm.support_vectors.cols) {
            throw ParseError("support vector matrix shape does not match its value count");
        }
        svm.dual_coeffs = j.at("dual_coeffs").get<std::vector<double>>();
        if (svm.dual_coeffs.size() != svm.support_vectors.rows) {
            throw ParseError("dual coefficient count does not match the support vector count");
        }
        return BinaryClassifier{std::move(svm)};
    }
    throw ParseError("unknown classifier kind '" + kind + "'");
}

json hyperparams_to_json(const HyperParams& hp) {
    return {{"base_kind", to_string(hp.base_kind)},
            {"c_reg", hp.c_reg},
            {"gamma", hp.gamma},
            {"lambda_sim", hp.lambda_sim}};
}

HyperParams hyperparams_from_json(const json& j) {
    HyperParams hp;
    hp.base_kind = parse_base_kind(j.at("base_kind").get<std::string>());
    hp.c_reg = j.at("c_reg").get<double>();
    hp.gamma = j.at("gamma").get<double>();
    hp.lambda_sim = j.at("lambda_sim").get<double>();
    return hp;
}

} // namespace

std::string model_to_json(const SavedModel& saved) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["paradigm"] = to_string(saved.model.paradigm);
    j["lambda_sim"] = saved.model.lambda_sim;
    j["label_names"] = saved.model.label_names;

    json entries = json::array();
    for (const ClassEntry& entry : saved.model.entries) {
        json e;
        e["class_id"] = entry.class_id;
        e["similar"] = std::vector<ClassId>(entry.similar.begin(), entry.similar.end());
        e["cannot_be"] = std::vector<ClassId>(entry.cannot_be.begin(), entry.cannot_be.end());
        e["hyperparams"] = hyperparams_to_json(entry.hyperparams);
        e["classifier"] = classifier_to_json(entry.classifier);
        entries.push_back(std::move(e));
    }
    j["entries"] = std::move(entries);

    if (saved.normalizer.has_value()) {
        std::vector<int> pass(saved.normalizer->passthrough.begin(),
                              saved.normalizer->passthrough.end());
        j["normalizer"] = {{"mean", saved.normalizer->mean},
                           {"stddev", saved.normalizer->stddev},
                           {"passthrough", pass}};
    }
    return j.dump(2);
}

SavedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }

    try {
        if (j.at("format").get<std::string>() != kFormat) {
            throw ParseError("not a model file (unexpected format marker)");
        }
        if (j.at("version").get<int>() != kVersion) {
            throw ParseError("unsupported model file version " +
                             std::to_string(j.at("version").get<int>()));
        }

        SavedModel saved;
        saved.model.paradigm = parse_paradigm(j.at("paradigm").get<std::string>());
        saved.model.lambda_sim = j.at("lambda_sim").get<double>();
        saved.model.label_names = j.at("label_names").get<std::vector<std::string>>();
        for (const json& e : j.at("entries")) {
            ClassEntry entry;
            entry.class_id = e.at("class_id").get<ClassId>();
            for (ClassId id : e.at("similar").get<std::vector<ClassId>>()) {
                entry.similar.insert(id);
            }
            for (ClassId id : e.at("cannot_be").get<std::vector<ClassId>>()) {
                entry.cannot_be.insert(id);
            }
            entry.hyperparams = hyperparams_from_json(e.at("hyperparams"));
            entry.classifier = classifier_from_json(e.at("classifier"));
            saved.model.entries.push_back(std::move(entry));
        }

        if (j.contains("normalizer")) {
            const json& n = j.at("normalizer");
            Normalizer norm;
            norm.mean = n.at("mean").get<std::vector<double>>();
            norm.stddev = n.at("stddev").get<std::vector<double>>();
            for (int p : n.at("passthrough").get<std::vector<int>>()) {
                norm.passthrough.push_back(p != 0);
            }
            if (norm.stddev.size() != norm.mean.size() ||
                norm.passthrough.size() != norm.mean.size()) {
                throw ParseError("normalizer fields differ in length");
            }
            saved.normalizer = std::move(norm);
        }

        saved.model.validate();
        return saved;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const SavedModel& saved, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    out << model_to_json(saved) << '\n';
    if (!out) {
        throw ParseError("failed while writing '" + path + "'");
    }
}

SavedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

} // namespace ovkit
