#include "refinder/service/http.hpp"

#include <charconv>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "refinder/errors.hpp"

namespace refinder {

using nlohmann::json;

namespace {

struct HttpError {
    int status;
    const char* type;
};

HttpError classify(const std::exception& e) {
    if (dynamic_cast<const NotFoundError*>(&e)) return {404, "not_found"};
    if (dynamic_cast<const ValidationError*>(&e)) return {400, "validation"};
    if (dynamic_cast<const DimensionError*>(&e)) return {400, "dimension"};
    if (dynamic_cast<const ParameterError*>(&e)) return {400, "parameter"};
    if (dynamic_cast<const IngestError*>(&e)) return {400, "ingest"};
    if (dynamic_cast<const json::exception*>(&e)) return {400, "bad_request"};
    if (dynamic_cast<const FeedbackError*>(&e)) return {422, "feedback"};
    if (dynamic_cast<const ConditioningError*>(&e)) return {422, "conditioning"};
    if (dynamic_cast<const Error*>(&e)) return {422, "refinder"};
    return {500, "internal"};
}

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json dataset_json(const Dataset& d) {
    json j = {{"handle", d.handle},
              {"name", d.name},
              {"count", d.index.size()},
              {"dim", d.index.dim()},
              {"background", d.background != nullptr}};
    return j;
}

json session_json(const SessionInfo& s) {
    json j = {{"session_id", s.session_id},
              {"dataset", s.dataset},
              {"method", s.method},
              {"round", s.round},
              {"total", s.total}};
    j["query_id"] = s.query_id ? json(*s.query_id) : json(nullptr);
    return j;
}

std::size_t query_count(const httplib::Request& req, const char* key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    const std::string v = req.get_param_value(key);
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ValidationError(std::string("query parameter '") + key + "' must be a non-negative integer");
    return out;
}

json parse_body(const httplib::Request& req) {
    json body = json::parse(req.body.empty() ? std::string("{}") : req.body);
    if (!body.is_object()) throw ValidationError("request body must be a JSON object");
    return body;
}

std::optional<Method> method_field(const json& body) {
    if (!body.contains("method") || body["method"].is_null()) return std::nullopt;
    return parse_method(body["method"].get<std::string>());
}

}  // namespace

struct HttpServer::Impl {
    DatasetRegistry& registry;
    SessionManager& sessions;
    httplib::Server server;
    bool bound = false;

    Impl(DatasetRegistry& r, SessionManager& s) : registry(r), sessions(s) { routes(); }

    template <typename F>
    auto guarded(F f) {
        return [f](const httplib::Request& req, httplib::Response& res) {
            try {
                f(req, res);
            } catch (const std::exception& e) {
                const HttpError err = classify(e);
                send(res, err.status, {{"error", {{"type", err.type}, {"message", e.what()}}}});
            }
        };
    }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });

        server.Post("/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto ds = registry.ingest(DatasetManifest::from_json(parse_body(req)));
            send(res, 201, dataset_json(*ds));
        }));
        server.Get("/datasets", guarded([this](const httplib::Request&, httplib::Response& res) {
            json list = json::array();
            for (const auto& ds : registry.list()) list.push_back(dataset_json(*ds));
            send(res, 200, {{"datasets", list}});
        }));

        server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            if (!body.contains("dataset")) throw ValidationError("session request needs \"dataset\"");
            SessionQuery q;
            if (body.contains("query_id")) q.image_id = body["query_id"].get<std::string>();
            if (body.contains("descriptor")) q.descriptor = body["descriptor"].get<std::vector<float>>();
            const SessionInfo info = sessions.create(body["dataset"].get<std::string>(), q, method_field(body));
            send(res, 201, session_json(info));
        }));
        server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
            json list = json::array();
            for (const auto& s : sessions.list()) list.push_back(session_json(s));
            send(res, 200, {{"sessions", list}});
        }));
        server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, session_json(sessions.info(req.matches[1])));
        }));
        server.Delete(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            sessions.remove(req.matches[1]);
            res.status = 204;
        }));

        server.Get(R"(/sessions/([^/]+)/results)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const std::size_t offset = query_count(req, "offset", 0);
            const std::size_t limit = query_count(req, "limit", 20);
            const SessionInfo info = sessions.info(id);
            json items = json::array();
            for (const ResultItem& r : sessions.results(id, offset, limit))
                items.push_back({{"rank", r.rank},
                                 {"image_id", r.image_id},
                                 {"score", r.score},
                                 {"image_uri", r.image_uri},
                                 {"marked", std::string(mark_name(r.mark))}});
            send(res, 200,
                 {{"session_id", id}, {"round", info.round}, {"total", info.total}, {"offset", offset}, {"items", items}});
        }));

        server.Post(R"(/sessions/([^/]+)/feedback)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            std::vector<MarkInput> marks;
            if (body.contains("marks")) {
                if (!body["marks"].is_array()) throw ValidationError("\"marks\" must be an array");
                for (const auto& m : body["marks"])
                    marks.push_back({m.at("image_id").get<std::string>(), m.at("relevant").get<bool>()});
            }
            send(res, 200, session_json(sessions.submit_feedback(req.matches[1], marks, method_field(body))));
        }));

        server.Get(R"(/sessions/([^/]+)/history)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            json rounds = json::array();
            for (const HistoryEntry& h : sessions.history(id)) {
                json marks = json::array();
                for (const MarkInput& m : h.marks) marks.push_back({{"image_id", m.image_id}, {"relevant", m.relevant}});
                rounds.push_back({{"round", h.round}, {"method", h.method}, {"marks", marks}, {"top", h.top}});
            }
            send(res, 200, {{"session_id", id}, {"rounds", rounds}});
        }));
    }
};

HttpServer::HttpServer(DatasetRegistry& registry, SessionManager& sessions)
    : impl_(std::make_unique<Impl>(registry, sessions)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound_port = port;
    if (port == 0) bound_port = impl_->server.bind_to_any_port(host);
    else if (!impl_->server.bind_to_port(host, port)) bound_port = -1;
    if (bound_port < 0) throw ParameterError("cannot bind " + host + ":" + std::to_string(port));
    impl_->bound = true;
    return bound_port;
}

void HttpServer::listen() {
    if (!impl_->bound) throw ParameterError("HttpServer::listen called before bind");
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

std::pair<std::string, int> parse_listen_address(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon + 1 == address.size())
        throw ParameterError("listen address must look like host:port, got '" + address + "'");
    std::string host = address.substr(0, colon);
    if (host.empty()) host = "0.0.0.0";
    int port = 0;
    const char* first = address.data() + colon + 1;
    const char* last = address.data() + address.size();
    auto [ptr, ec] = std::from_chars(first, last, port);
    if (ec != std::errc() || ptr != last || port < 0 || port > 65535)
        throw ParameterError("invalid port in listen address '" + address + "'");
    return {host, port};
}

}  // namespace refinder
