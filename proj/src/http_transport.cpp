#include <httplib.h>

#include "scamlens/llm_gateway.hpp"

namespace scamlens {

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    std::size_t host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto slash = url.find('/', host_begin);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

HttpResponse HttpTransport::send(const HttpRequest& request) {
    ParsedUrl target = split_url(request.url);
    httplib::Client client(target.origin);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [name, value] : request.headers) {
        if (name == "Content-Type")
            content_type = value;
        else
            headers.emplace(name, value);
    }

    auto started = std::chrono::steady_clock::now();
    auto result = client.Post(target.path, headers, request.body, content_type);
    HttpResponse response;
    if (!result) {
        auto elapsed = std::chrono::steady_clock::now() - started;
        auto err = result.error();
        response.timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && elapsed >= request.timeout);
        return response;
    }
    response.status = result->status;
    response.body = result->body;
    return response;
}

}  // namespace scamlens
