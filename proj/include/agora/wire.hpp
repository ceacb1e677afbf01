#pragma once

#include <string>

#include <json.hpp>

#include "agora/common.hpp"

namespace agora {

using Json = nlohmann::json;

// One message on the bus. Request/response pairs share request_id; a reply's
// msg_type is the request's msg_type plus ".reply". Canonical form is a single
// JSON line with lexicographically sorted keys, so a fixed payload always
// serializes to the same bytes.
struct Envelope {
    int version = 1;
    std::string msg_type;    // dotted, e.g. "auc.submit"
    std::string request_id;
    std::string sender;
    std::string recipient;
    Json body = Json::object();
    double sent_at = 0;

    Json to_json() const {
        return Json{{"body", body},
                    {"msg_type", msg_type},
                    {"recipient", recipient},
                    {"request_id", request_id},
                    {"sender", sender},
                    {"sent_at", sent_at},
                    {"version", version}};
    }

    std::string line() const { return to_json().dump(); }

    static Envelope from_json(const Json& j) {
        Envelope e;
        e.version = j.at("version").get<int>();
        e.msg_type = j.at("msg_type").get<std::string>();
        e.request_id = j.at("request_id").get<std::string>();
        e.sender = j.at("sender").get<std::string>();
        e.recipient = j.at("recipient").get<std::string>();
        e.body = j.at("body");
        e.sent_at = j.at("sent_at").get<double>();
        return e;
    }

    static Envelope parse_line(const std::string& line) {
        Json j = Json::parse(line, nullptr, /*allow_exceptions=*/true);
        return from_json(j);
    }

    bool is_reply() const { return ends_with(msg_type, ".reply") || msg_type == "sim.error"; }

    bool is_error() const { return body.is_object() && body.contains("error"); }

    std::string error_code() const {
        if (!is_error()) return "";
        return body["error"].value("code", "");
    }
};

inline Json error_body(const std::string& code, const std::string& message) {
    return Json{{"error", Json{{"code", code}, {"message", message}}}};
}

}  // namespace agora
