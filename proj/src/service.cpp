#include "countermachine/service.hpp"

#include <json.hpp>

#include "countermachine/counterfactual.hpp"
#include "countermachine/json_io.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a _res macro.
#include <httplib.h>

namespace cfm {

using nlohmann::json;

namespace {

Response reply(int status, const json& body) { return {status, body.dump() + "\n"}; }

Response fail(int status, const std::string& field, const std::string& message) {
    return reply(status, {{"error", message}, {"field", field}});
}

/// A request error tied to one field of the body.
struct FieldError {
    std::string field;
    std::string message;
};

json parse_body(std::string_view body) {
    json doc = json::parse(body.begin(), body.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw FieldError{"", "request body must be a JSON object"};
    return doc;
}

FeatureVector read_features(const TskModel& model, const json& doc, const char* field) {
    if (!doc.contains(field)) throw FieldError{field, std::string("missing field '") + field + "'"};
    try {
        FeatureVector x = feature_vector_from_json(doc.at(field), field);
        validate_features(model, x);
        return x;
    } catch (const Error& e) {
        throw FieldError{field, e.what()};
    }
}

double read_target(const TskModel& model, const json& doc) {
    if (!doc.contains("target")) throw FieldError{"target", "missing field 'target'"};
    const auto& t = doc.at("target");
    if (t.is_string()) {
        try {
            return model.label_encoding().value_of(parse_label(t.get<std::string>()));
        } catch (const Error& e) {
            throw FieldError{"target", e.what()};
        }
    }
    if (t.is_number()) return t.get<double>();
    throw FieldError{"target", "target must be \"war\", \"peace\" or a number"};
}

}  // namespace

Service::Service(TskModel model) : model_(std::move(model)) {}

Response Service::get_model() const {
    const auto& enc = model_.label_encoding();
    return reply(200, {{"feature_names", model_.feature_names()},
                       {"label_encoding", {{"war", enc.war}, {"peace", enc.peace}, {"threshold", enc.threshold}}},
                       {"n_inputs", model_.n_inputs()},
                       {"rule_count", model_.n_rules()}});
}

Response Service::post_evaluate(std::string_view body) const {
    try {
        const json doc = parse_body(body);
        const FeatureVector x = read_features(model_, doc, "features");
        const auto eval = evaluate(model_, x);
        return reply(200, {{"feature_names", model_.feature_names()},
                           {"y", eval.y},
                           {"class", std::string(to_string(model_.label_encoding().classify(eval.y)))},
                           {"degenerate_activation", eval.degenerate}});
    } catch (const FieldError& e) {
        return fail(400, e.field, e.message);
    }
}

Response Service::post_counterfactual(std::string_view body) const {
    try {
        const json doc = parse_body(body);
        CounterfactualQuery query;
        query.factual = read_features(model_, doc, "factual");
        query.desired_consequent = read_target(model_, doc);

        if (doc.contains("free")) {
            const auto& free = doc.at("free");
            if (!free.is_array()) throw FieldError{"free", "free must be an array of feature names"};
            std::vector<std::string> names;
            for (const auto& n : free) {
                if (!n.is_string()) throw FieldError{"free", "free must be an array of feature names"};
                names.push_back(n.get<std::string>());
            }
            try {
                query.free_mask = free_mask_from_names(model_.feature_names(), names);
            } catch (const Error& e) {
                throw FieldError{"free", e.what()};
            }
            if (names.empty()) return fail(422, "free", "no free variables: at least one feature must be free");
        } else {
            query.free_mask.assign(static_cast<std::size_t>(model_.n_inputs()), true);
        }

        if (doc.contains("anneal")) {
            try {
                query.anneal = anneal_config_from_json(doc.at("anneal"));
            } catch (const Error& e) {
                throw FieldError{"anneal", e.what()};
            }
        }
        if (doc.contains("success_margin")) {
            if (!doc.at("success_margin").is_number()) throw FieldError{"success_margin", "must be a number"};
            query.success_margin = doc.at("success_margin").get<double>();
        }

        try {
            validate_query(model_, query);
        } catch (const Error& e) {
            throw FieldError{"", e.what()};
        }
        const auto result = find_counterfactual(model_, query);
        return reply(200, to_json(result, model_.feature_names()));
    } catch (const FieldError& e) {
        return fail(400, e.field, e.message);
    } catch (const Error& e) {
        return fail(500, "", e.what());
    }
}

void Service::mount(httplib::Server& server, const std::string& allow_origin) const {
    auto send = [allow_origin](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
        if (!allow_origin.empty()) res.set_header("Access-Control-Allow-Origin", allow_origin);
    };
    server.Get("/model", [this, send](const httplib::Request&, httplib::Response& res) { send(res, get_model()); });
    server.Post("/evaluate", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, post_evaluate(req.body));
    });
    server.Post("/counterfactual", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, post_counterfactual(req.body));
    });
    if (!allow_origin.empty()) {
        server.Options(R"(/.*)", [allow_origin](const httplib::Request&, httplib::Response& res) {
            res.status = 204;
            res.set_header("Access-Control-Allow-Origin", allow_origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
    }
}

void run_server(const Service& service, const ServiceConfig& config) {
    httplib::Server server;
    service.mount(server, config.allow_origin);
    if (!server.bind_to_port(config.host, config.port))
        throw Error("cannot bind " + config.host + ":" + std::to_string(config.port));
    server.listen_after_bind();
}

}  // namespace cfm
