#pragma once

#include <memory>
#include <string>

#include "refinder/service/registry.hpp"
#include "refinder/service/sessions.hpp"

namespace refinder {

/// JSON-over-HTTP front end:
///   POST   /datasets                    manifest -> dataset
///   GET    /datasets
///   POST   /sessions                    {dataset, query_id | descriptor, method?}
///   GET    /sessions/{id}
///   GET    /sessions/{id}/results       ?offset=0&limit=20
///   POST   /sessions/{id}/feedback      {marks: [{image_id, relevant}], method?}
///   GET    /sessions/{id}/history
///   DELETE /sessions/{id}
class HttpServer {
public:
    HttpServer(DatasetRegistry& registry, SessionManager& sessions);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port (port 0 picks a free port) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); requires a successful bind().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// "host:port" parsing for the listen address; ParameterError on bad input.
std::pair<std::string, int> parse_listen_address(const std::string& address);

}  // namespace refinder
