#pragma once

// Request handlers for the HTTP API, kept independent of the socket layer so
// tests can call them directly, plus a cpp-httplib server that mounts them.
//
//   POST /classify          {raw_email | text} -> Verdict
//   GET  /healthz           "ok"
//   GET  /queue?threshold=  predicted-scam batch results, then disputed items
//   POST /labels            {example_id, annotator_id, label, note?} -> event
//   GET  /labels?example_id=
//   GET  /metrics?threshold= EvalReport over the batch results
//   GET  /export/labels     corpus JSONL with effective labels

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "scamlens/annotation_store.hpp"
#include "scamlens/classifier.hpp"
#include "scamlens/corpus.hpp"
#include "scamlens/evaluation.hpp"
#include "scamlens/json_codec.hpp"

namespace httplib {
class Server;
}

namespace scamlens {

struct ServiceOptions {
    PipelineConfig pipeline;
    std::optional<Corpus> corpus;                    // classified at startup to feed /queue and /metrics
    std::optional<std::filesystem::path> label_log;  // absent: labels kept in memory
    std::shared_ptr<Transport> transport;            // remote backend only; default HttpTransport
    AnnotationStore::Clock clock;
};

struct ServiceResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

struct BatchResult {
    std::string example_id;
    Verdict verdict;
    std::string body;  // normalized body; flag offsets index into it
};

struct ReviewItem {
    std::string example_id;
    double confidence = 0.0;
    Label decision = Label::legitimate;
    std::vector<RedFlag> flags;
    std::string body;
    std::vector<AnnotatorLabel> labels;
    Consensus consensus = Consensus::disputed;
};

Json to_json(const ReviewItem& item);

/// Decodes a POST /classify body. Throws EmptyInput or Error with a client-facing message.
EmailDocument parse_classify_request(std::string_view body);

class Service {
public:
    explicit Service(ServiceOptions options);

    ServiceResponse classify(std::string_view request_body) const;
    ServiceResponse healthz() const;
    ServiceResponse queue(std::optional<std::string_view> threshold) const;
    ServiceResponse post_label(std::string_view request_body);
    ServiceResponse get_labels(std::optional<std::string_view> example_id) const;
    ServiceResponse metrics(std::optional<std::string_view> threshold) const;
    ServiceResponse export_labels() const;

    /// Predicted-scam results by descending confidence, then disputed examples not already listed.
    std::vector<ReviewItem> review_queue(double threshold) const;

    const std::vector<BatchResult>& batch_results() const noexcept { return results_; }
    const Pipeline& pipeline() const noexcept { return pipeline_; }
    AnnotationStore& store() noexcept { return *store_; }

    void mount(httplib::Server& server);

private:
    Pipeline pipeline_;
    std::vector<BatchResult> results_;
    std::unique_ptr<AnnotationStore> store_;
};

/// Owns a cpp-httplib server with the service routes mounted.
class HttpServer {
public:
    HttpServer(Service& service, std::ostream* access_log = nullptr);
    ~HttpServer();

    /// Binds and returns the port; port 0 picks a free one. Throws Error on failure.
    int bind(const std::string& host, int port);
    /// Blocks until stop(); in-flight requests complete first.
    void listen();
    void stop();

private:
    std::unique_ptr<httplib::Server> server_;
};

/// Binds, then serves until SIGINT or SIGTERM. Returns a process exit code.
int serve_until_signal(Service& service, const std::string& host, int port, std::ostream& log);

}  // namespace scamlens
