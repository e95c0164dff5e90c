#include "countermachine/model_io.hpp"

#include <fstream>
#include <sstream>

namespace cfm {

using nlohmann::json;

json model_to_json(const TskModel& model) {
    json mfs = json::array();
    for (const auto& input : model.memberships()) {
        json row = json::array();
        for (const auto& mf : input) row.push_back({{"center", mf.center}, {"width", mf.width}});
        mfs.push_back(std::move(row));
    }
    json rules = json::array();
    for (const auto& rule : model.rules()) {
        json coeffs = json::array();
        for (Eigen::Index k = 0; k < rule.coeffs.size(); ++k) coeffs.push_back(rule.coeffs(k));
        rules.push_back({{"mf_indices", rule.mf_indices}, {"coeffs", std::move(coeffs)}});
    }
    const auto& enc = model.label_encoding();
    return {
        {"version", kModelFormatVersion},
        {"feature_names", model.feature_names()},
        {"mfs", std::move(mfs)},
        {"rules", std::move(rules)},
        {"label_encoding", {{"war", enc.war}, {"peace", enc.peace}, {"threshold", enc.threshold}}},
    };
}

namespace {

const json& require(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) throw MalformedModel(std::string("missing field '") + key + "'");
    return obj.at(key);
}

double require_number(const json& obj, const char* key) {
    const auto& v = require(obj, key);
    if (!v.is_number()) throw MalformedModel(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

TskModel model_from_json(const json& doc) {
    try {
        const auto& version = require(doc, "version");
        if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
            throw MalformedModel("unsupported model version " + version.dump());

        auto names = require(doc, "feature_names").get<std::vector<std::string>>();

        TskModel::MembershipTable mfs;
        for (const auto& input : require(doc, "mfs")) {
            auto& row = mfs.emplace_back();
            for (const auto& mf : input) row.push_back({require_number(mf, "center"), require_number(mf, "width")});
        }

        std::vector<Rule<double>> rules;
        for (const auto& r : require(doc, "rules")) {
            Rule<double> rule;
            for (const auto& idx : require(r, "mf_indices")) {
                if (!idx.is_number_integer()) throw MalformedModel("mf_indices must be integers");
                rule.mf_indices.push_back(idx.get<Eigen::Index>());
            }
            const auto coeffs = require(r, "coeffs").get<std::vector<double>>();
            rule.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
            rules.push_back(std::move(rule));
        }

        const auto& enc_doc = require(doc, "label_encoding");
        LabelEncoding enc{require_number(enc_doc, "war"), require_number(enc_doc, "peace"),
                          require_number(enc_doc, "threshold")};
        if (enc.war == enc.peace) throw MalformedModel("label encoding must distinguish war from peace");

        return TskModel(std::move(names), std::move(mfs), rules, enc);
    } catch (const json::exception& e) {
        throw MalformedModel(std::string("malformed model document: ") + e.what());
    }
}

std::string serialize(const TskModel& model) { return model_to_json(model).dump(2) + "\n"; }

TskModel deserialize(std::string_view text) {
    json doc = json::parse(text.begin(), text.end(), nullptr, false);
    if (doc.is_discarded()) throw MalformedModel("model document is not valid JSON");
    return model_from_json(doc);
}

void save_model(const TskModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << serialize(model);
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

TskModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

}  // namespace cfm
