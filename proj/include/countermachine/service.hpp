#pragma once

// HTTP facade over evaluate and find_counterfactual.
//
//   GET  /model           -> feature names, label encoding, rule count
//   POST /evaluate        {features: [...]} -> {y, class}
//   POST /counterfactual  {factual, target, free?, anneal?, success_margin?}

#include <string>
#include <string_view>

#include "countermachine/fuzzy.hpp"

namespace httplib {
class Server;
}

namespace cfm {

struct Response {
    int status = 200;
    std::string body;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    /// Value for Access-Control-Allow-Origin; empty disables CORS headers.
    std::string allow_origin;
};

/// Request handlers over one immutable model. Safe to call concurrently.
class Service {
public:
    explicit Service(TskModel model);

    const TskModel& model() const { return model_; }

    Response get_model() const;
    Response post_evaluate(std::string_view body) const;
    Response post_counterfactual(std::string_view body) const;

    /// Registers the routes (and CORS preflight when allow_origin is set).
    void mount(httplib::Server& server, const std::string& allow_origin) const;

private:
    TskModel model_;
};

/// Blocks serving requests until the server is stopped.
void run_server(const Service& service, const ServiceConfig& config);

}  // namespace cfm
