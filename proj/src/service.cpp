#include "scamlens/service.hpp"

#include <httplib.h>
#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>

#include "scamlens/errors.hpp"
#include "text_util.hpp"

namespace scamlens {

namespace {

ServiceResponse json_response(int status, const Json& body) { return {status, dump(body), "application/json"}; }

ServiceResponse error_response(int status, std::string_view code, std::string_view message) {
    return json_response(status, {{"error", {{"code", code}, {"message", message}}}});
}

std::optional<double> parse_threshold(std::optional<std::string_view> raw, double fallback) {
    if (!raw || raw->empty()) return fallback;
    std::string s(*raw);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

Json labels_json(const std::vector<AnnotatorLabel>& labels) {
    Json out = Json::array();
    for (const auto& l : labels) out.push_back({{"annotator_id", l.annotator_id}, {"label", std::string(to_string(l.label))}});
    return out;
}

}  // namespace

Json to_json(const ReviewItem& item) {
    Json flags = Json::array();
    for (const auto& f : item.flags) flags.push_back(to_json(f));
    return {{"example_id", item.example_id},
            {"confidence", item.confidence},
            {"decision", std::string(to_string(item.decision))},
            {"flags", std::move(flags)},
            {"body", item.body},
            {"labels", labels_json(item.labels)},
            {"consensus", std::string(to_string(item.consensus))},
            {"disputed", item.consensus == Consensus::disputed}};
}

EmailDocument parse_classify_request(std::string_view body) {
    if (text::trim(body).empty()) throw EmptyInput("request body is empty");
    Json obj = Json::parse(body, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw Error("request body must be a JSON object");
    bool has_raw = obj.contains("raw_email"), has_text = obj.contains("text");
    if (has_raw == has_text) throw Error("provide exactly one of `raw_email` or `text`");
    const Json& field = has_raw ? obj["raw_email"] : obj["text"];
    if (!field.is_string()) throw Error("message field must be a string");
    const auto& message = field.get_ref<const std::string&>();
    if (text::trim(message).empty()) throw EmptyInput("message is empty");
    return has_raw ? parse_any(message) : parse_plaintext(message);
}

Service::Service(ServiceOptions options) : pipeline_(options.pipeline, options.transport) {
    Corpus corpus = options.corpus.value_or(Corpus{});
    for (const auto& ex : corpus.examples) {
        EmailDocument doc = ex.document();
        results_.push_back({ex.id, pipeline_.classify(doc), doc.body});
    }
    store_ = std::make_unique<AnnotationStore>(std::move(corpus), options.label_log, options.clock);
}

ServiceResponse Service::classify(std::string_view request_body) const {
    EmailDocument doc;
    try {
        doc = parse_classify_request(request_body);
    } catch (const EmptyInput& e) {
        return error_response(400, "empty_input", e.what());
    } catch (const Error& e) {
        return error_response(400, "bad_request", e.what());
    }
    try {
        return json_response(200, to_json(pipeline_.classify(doc)));
    } catch (const AuthFailure& e) {
        return error_response(502, "llm_auth_failure", e.what());
    } catch (const Error& e) {
        return error_response(503, "llm_unavailable", e.what());
    }
}

ServiceResponse Service::healthz() const { return {200, "ok", "text/plain"}; }

std::vector<ReviewItem> Service::review_queue(double threshold) const {
    std::vector<ReviewItem> scams;
    std::set<std::string, std::less<>> listed;
    for (const auto& r : results_) {
        if (decide(r.verdict.confidence, threshold) != Label::scam) continue;
        auto labels = store_->effective_labels(r.example_id);
        scams.push_back({r.example_id, r.verdict.confidence, Label::scam, r.verdict.flags, r.body, labels,
                         aggregate_labels(labels)});
        listed.insert(r.example_id);
    }
    std::stable_sort(scams.begin(), scams.end(),
                     [](const ReviewItem& a, const ReviewItem& b) { return a.confidence > b.confidence; });

    for (const auto& r : results_) {
        if (listed.count(r.example_id)) continue;
        auto labels = store_->effective_labels(r.example_id);
        if (aggregate_labels(labels) != Consensus::disputed) continue;
        scams.push_back({r.example_id, r.verdict.confidence, r.verdict.decision, r.verdict.flags, r.body, labels,
                         Consensus::disputed});
    }
    return scams;
}

ServiceResponse Service::queue(std::optional<std::string_view> threshold) const {
    auto t = parse_threshold(threshold, pipeline_.config().threshold);
    if (!t) return error_response(400, "bad_threshold", "threshold must be a number");
    Json items = Json::array();
    for (const auto& item : review_queue(*t)) items.push_back(to_json(item));
    return json_response(200, {{"threshold", *t}, {"items", std::move(items)}});
}

ServiceResponse Service::post_label(std::string_view request_body) {
    Json obj = Json::parse(request_body, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) return error_response(400, "bad_request", "request body must be a JSON object");
    auto str = [&](const char* key) -> std::optional<std::string> {
        if (!obj.contains(key) || !obj[key].is_string()) return std::nullopt;
        return obj[key].get<std::string>();
    };
    auto example_id = str("example_id"), annotator_id = str("annotator_id"), label_text = str("label");
    if (!example_id || !annotator_id || annotator_id->empty() || !label_text)
        return error_response(400, "bad_request", "example_id, annotator_id and label are required strings");
    auto label = parse_label(*label_text);
    if (!label) return error_response(400, "bad_label", "label must be `scam` or `legitimate`");
    try {
        AnnotationEvent e = store_->record_label(*example_id, *annotator_id, *label, str("note"));
        Json out = Json::parse(serialize_event(e));
        out["consensus"] = std::string(to_string(store_->consensus(e.example_id)));
        return json_response(200, out);
    } catch (const UnknownExample& e) {
        return error_response(404, "unknown_example", e.what());
    } catch (const StoreWriteFailure& e) {
        return error_response(500, "store_write_failure", e.what());
    }
}

ServiceResponse Service::get_labels(std::optional<std::string_view> example_id) const {
    auto one = [&](std::string_view id) -> Json {
        auto labels = store_->effective_labels(id);
        return {{"example_id", id}, {"labels", labels_json(labels)}, {"consensus", std::string(to_string(aggregate_labels(labels)))}};
    };
    if (example_id) {
        if (!store_->is_known(*example_id)) return error_response(404, "unknown_example", "unknown example: " + std::string(*example_id));
        return json_response(200, one(*example_id));
    }
    Json all = Json::array();
    for (const auto& [id, labels] : store_->state()) all.push_back(one(id));
    return json_response(200, {{"examples", std::move(all)}});
}

ServiceResponse Service::metrics(std::optional<std::string_view> threshold) const {
    auto t = parse_threshold(threshold, pipeline_.config().threshold);
    if (!t) return error_response(400, "bad_threshold", "threshold must be a number");
    std::vector<double> scores;
    std::vector<Label> truth;
    for (const auto& r : results_) {
        auto label = as_label(store_->consensus(r.example_id));
        if (!label) continue;
        scores.push_back(r.verdict.confidence);
        truth.push_back(*label);
    }
    if (scores.empty()) return error_response(409, "no_labeled_results", "no batch results with a consensus label");
    return json_response(200, to_json(evaluate(scores, truth, *t)));
}

ServiceResponse Service::export_labels() const { return {200, serialize_corpus(store_->export_corpus()), "application/x-ndjson"}; }

void Service::mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    auto param = [](const httplib::Request& req, const char* key) -> std::optional<std::string> {
        if (!req.has_param(key)) return std::nullopt;
        return req.get_param_value(key);
    };
    server.Post("/classify", [=, this](const httplib::Request& req, httplib::Response& res) { send(res, classify(req.body)); });
    server.Get("/healthz", [=, this](const httplib::Request&, httplib::Response& res) { send(res, healthz()); });
    server.Get("/queue", [=, this](const httplib::Request& req, httplib::Response& res) {
        auto t = param(req, "threshold");
        send(res, queue(t ? std::optional<std::string_view>(*t) : std::nullopt));
    });
    server.Post("/labels", [=, this](const httplib::Request& req, httplib::Response& res) { send(res, post_label(req.body)); });
    server.Get("/labels", [=, this](const httplib::Request& req, httplib::Response& res) {
        auto id = param(req, "example_id");
        send(res, get_labels(id ? std::optional<std::string_view>(*id) : std::nullopt));
    });
    server.Get("/metrics", [=, this](const httplib::Request& req, httplib::Response& res) {
        auto t = param(req, "threshold");
        send(res, metrics(t ? std::optional<std::string_view>(*t) : std::nullopt));
    });
    server.Get("/export/labels", [=, this](const httplib::Request&, httplib::Response& res) { send(res, export_labels()); });
}

HttpServer::HttpServer(Service& service, std::ostream* access_log) : server_(std::make_unique<httplib::Server>()) {
    service.mount(*server_);
    server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(dump({{"error", {{"code", "internal"}, {"message", what}}}}), "application/json");
    });
    if (access_log) {
        auto mutex = std::make_shared<std::mutex>();
        server_->set_logger([access_log, mutex](const httplib::Request& req, const httplib::Response& res) {
            std::lock_guard lock(*mutex);
            *access_log << req.method << ' ' << req.path << ' ' << res.status << '\n' << std::flush;
        });
    }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

int serve_until_signal(Service& service, const std::string& host, int port, std::ostream& log) {
    // Block the signals before any worker thread exists so that only the
    // waiter below receives them.
    sigset_t signals, previous;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, &previous);

    HttpServer server(service, &log);
    int bound = 0;
    try {
        bound = server.bind(host, port);
    } catch (const Error& e) {
        pthread_sigmask(SIG_SETMASK, &previous, nullptr);
        log << "error: " << e.what() << '\n';
        return 1;
    }
    log << "listening on " << host << ':' << bound << '\n' << std::flush;

    std::atomic<bool> signalled{false};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        signalled = true;
        log << "shutting down\n" << std::flush;
        server.stop();
    });
    server.listen();
    // listen can also return on a socket error; wake the waiter ourselves
    if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    return 0;
}

}  // namespace scamlens
