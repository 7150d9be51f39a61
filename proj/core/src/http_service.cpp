#include <functional>

#include "httplib.h"
#include "json.hpp"
#include "seedgrow/service.hpp"

namespace seedgrow {

using nlohmann::json;

struct HttpService::Impl {
    SessionManager& sessions;
    HttpOptions options;
    httplib::Server server;

    Impl(SessionManager& s, HttpOptions o) : sessions(s), options(std::move(o)) {}
};

namespace {

class BadRequest : public Error {
public:
    using Error::Error;
};

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
    send_json(res, status, {{"code", std::string(code)}, {"message", std::string(message)}});
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps library errors onto status codes so handlers can just throw.
Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
        try {
            inner(req, res);
        } catch (const NotFoundError& e) {
            send_error(res, 404, "not_found", e.what());
        } catch (const ConflictError& e) {
            send_error(res, 409, "conflict", e.what());
        } catch (const BadRequest& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const ConfigError& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    };
}

json parse_body(const httplib::Request& req) {
    try {
        auto j = json::parse(req.body);
        if (!j.is_object()) throw BadRequest("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw BadRequest(std::string("request body is not valid JSON: ") + e.what());
    }
}

json progress_json(const Progress& p) {
    json effort = json::array();
    for (const auto& e : p.effort) effort.push_back({{"iteration", e.iteration}, {"positives", e.positives}});
    json j = {{"session", p.session},
              {"class", p.class_name},
              {"status", std::string(to_string(p.status))},
              {"iteration", p.iterations},
              {"effort", std::move(effort)},
              {"totals",
               {{"labeled", p.labeled},
                {"positives", p.positives},
                {"negatives", p.negatives},
                {"seeds", p.seeds},
                {"pool_remaining", p.pool_remaining}}},
              {"terminated", p.status == SessionStatus::terminated}};
    j["recall"] = p.recall ? json(*p.recall) : json(nullptr);
    j["kl"] = p.kl ? json(*p.kl) : json(nullptr);
    return j;
}

void install_routes(httplib::Server& srv, SessionManager& sessions, const HttpOptions& options) {
    srv.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        if (body.contains("corpus") && body.at("corpus").get<std::string>() != sessions.corpus_id())
            throw NotFoundError("unknown corpus '" + body.at("corpus").get<std::string>() + "'");
        SessionSpec spec;
        if (!body.contains("class")) throw BadRequest("missing field 'class'");
        spec.class_name = body.at("class").get<std::string>();
        if (!body.contains("seeds") || !body.at("seeds").is_array())
            throw BadRequest("missing array field 'seeds'");
        for (const auto& id : body.at("seeds")) spec.seeds.insert(id.get<std::string>());
        if (body.contains("config")) spec.config = expansion_config_from_json(body.at("config").dump());
        const auto id = sessions.create(spec);
        send_json(res, 201, {{"session", id}, {"status", std::string(to_string(sessions.progress(id).status))}});
    }));

    srv.Get("/sessions", guarded([&](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"sessions", sessions.sessions()}});
    }));

    srv.Get(R"(/sessions/([^/]+)/batch)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        const auto v = sessions.batch(req.matches[1].str());
        json items = json::array();
        for (const auto& it : v.items) items.push_back({{"id", it.id}, {"text", it.text}});
        send_json(res, 200,
                  {{"session", v.session},
                   {"class", v.class_name},
                   {"status", std::string(to_string(v.status))},
                   {"iteration", v.iteration},
                   {"page", v.page},
                   {"max_pages", v.max_pages},
                   {"nonce", v.nonce},
                   {"items", std::move(items)}});
    }));

    srv.Post(R"(/sessions/([^/]+)/verdicts)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        if (!body.contains("nonce")) throw BadRequest("missing field 'nonce'");
        if (!body.contains("assignments") || !body.at("assignments").is_object())
            throw BadRequest("missing object field 'assignments'");
        BatchVerdict verdict;
        for (const auto& [id, v] : body.at("assignments").items()) {
            const auto parsed = parse_verdict(v.get<std::string>());
            if (!parsed) throw BadRequest("verdict for '" + id + "' must be \"pos\" or \"neg\"");
            verdict.assignments[id] = *parsed;
        }
        const auto r = sessions.submit(req.matches[1].str(), body.at("nonce").get<std::string>(), verdict);
        send_json(res, 200,
                  {{"status", std::string(to_string(r.status))},
                   {"next", std::string(to_string(r.next))},
                   {"iteration", r.iterations},
                   {"replayed", r.replayed}});
    }));

    srv.Get(R"(/sessions/([^/]+)/progress)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, progress_json(sessions.progress(req.matches[1].str())));
    }));

    srv.Get(R"(/sessions/([^/]+)/export)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        res.status = 200;
        res.set_content(sessions.export_json(req.matches[1].str()), "application/json");
    }));

    if (options.static_dir && !srv.set_mount_point("/", options.static_dir->string()))
        throw ConfigError("static directory not found: " + options.static_dir->string());
}

} // namespace

HttpService::HttpService(SessionManager& sessions, HttpOptions options)
    : impl_(std::make_unique<Impl>(sessions, std::move(options))) {
    install_routes(impl_->server, impl_->sessions, impl_->options);
}

HttpService::~HttpService() { stop(); }

int HttpService::bind() {
    auto& o = impl_->options;
    if (o.port == 0) {
        const int port = impl_->server.bind_to_any_port(o.host);
        if (port < 0) throw Error("cannot bind " + o.host);
        o.port = port;
        return port;
    }
    if (!impl_->server.bind_to_port(o.host, o.port))
        throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
    return o.port;
}

void HttpService::serve() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
    if (impl_) impl_->server.stop();
}

} // namespace seedgrow
