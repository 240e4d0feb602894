// elig: command-line front end for the eligibility pipeline.
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "elig/decider.hpp"
#include "elig/errors.hpp"
#include "elig/evaluation.hpp"
#include "elig/evidence.hpp"
#include "elig/fixtures.hpp"
#include "elig/serialization.hpp"
#include "elig/service.hpp"
#include "elig/store.hpp"

namespace {

struct Common {
    std::string backend = "baseline";
    std::string remote_url = "http://127.0.0.1:8090";
    int remote_timeout_ms = 5000;
    bool fallback = false;
    std::string config;
    std::string store;
};

void add_common(CLI::App* cmd, Common& c, bool with_backend) {
    if (with_backend) {
        cmd->add_option("--backend", c.backend, "Evidence backend")
            ->check(CLI::IsMember({"baseline", "remote", "both"}))
            ->capture_default_str();
        cmd->add_option("--remote-url", c.remote_url, "Inference server base URL")->capture_default_str();
        cmd->add_option("--remote-timeout-ms", c.remote_timeout_ms, "Per-request timeout")->capture_default_str();
        cmd->add_flag("--fallback", c.fallback, "Use the baseline rules when the remote backend fails");
    }
    cmd->add_option("--config", c.config, "Decider config (JSON); shipped default if omitted");
    cmd->add_option("--store", c.store, std::string("Store directory; defaults to $") + elig::kStoreEnvVar +
                                            ", else in-memory");
}

std::shared_ptr<const elig::EvidenceBackend> make_backend(const Common& c) {
    auto baseline = std::make_shared<const elig::BaselineBackend>();
    if (c.backend == "baseline") return baseline;
    elig::RemoteModelConfig rc;
    rc.endpoint = c.remote_url;
    rc.timeout = std::chrono::milliseconds(c.remote_timeout_ms);
    auto remote = std::make_shared<const elig::RemoteBackend>(rc);
    if (c.backend == "remote") return remote;
    return std::make_shared<const elig::CombinedBackend>(
        std::vector<std::shared_ptr<const elig::EvidenceBackend>>{baseline, remote});
}

std::unique_ptr<elig::Controller> make_controller(const Common& c) {
    elig::ControllerOptions opts;
    if (!c.config.empty()) opts.decider = elig::load_decider_config(c.config);
    opts.backend = make_backend(c);
    if (c.fallback && c.backend != "baseline") opts.fallback = std::make_shared<const elig::BaselineBackend>();
    std::shared_ptr<elig::KeyValueStore> store =
        elig::open_store(c.store.empty() ? std::nullopt : std::optional<std::string>(c.store));
    return std::make_unique<elig::Controller>(std::move(store), std::move(opts));
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw elig::InputError("cannot write '" + path + "'");
    out << text;
}

elig::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eligibility evidence detection and decision tool"};
    app.require_subcommand(1);

    Common common;

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host = "127.0.0.1";
    int port = 8080;
    add_common(serve, common, true);
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Store documents with their annotations");
    std::string ingest_file;
    add_common(ingest, common, false);
    ingest->add_option("file", ingest_file, "Corpus (JSONL or JSON)")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "Detect evidence and decide");
    std::string predict_file, golden_dir;
    bool no_timings = false;
    add_common(predict, common, true);
    predict->add_option("file", predict_file)->required();
    predict->add_option("--golden-dir", golden_dir, "Write one <id>.json per document (no timings)");
    predict->add_flag("--no-timings", no_timings, "Omit timings from the output");

    // decide
    auto* decide = app.add_subcommand("decide", "Decide on the submitted annotations");
    std::string decide_file;
    add_common(decide, common, false);
    decide->add_option("file", decide_file)->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Agreement and extraction metrics");
    evaluate->require_subcommand(1);
    auto* iaa = evaluate->add_subcommand("iaa", "IoU agreement between two annotators per document");
    std::string iaa_corpus, iaa_out = "-";
    bool hull = false, iaa_json = false;
    iaa->add_option("corpus", iaa_corpus)->required();
    iaa->add_flag("--hull", hull, "Compare [first,last) hulls instead of character sets");
    iaa->add_flag("--json", iaa_json, "Per-document detail as JSON");
    iaa->add_option("--out", iaa_out)->capture_default_str();

    auto* prf = evaluate->add_subcommand("prf", "Precision, recall and F1 against gold annotations");
    std::string prf_corpus, prf_pred, prf_out = "-", mode = "exact";
    double theta = 0.5;
    add_common(prf, common, true);
    prf->add_option("corpus", prf_corpus, "Gold corpus")->required();
    prf->add_option("--pred", prf_pred, "Predicted corpus; runs the backend on the gold texts if omitted");
    prf->add_option("--mode", mode)->check(CLI::IsMember({"exact", "overlap"}))->capture_default_str();
    prf->add_option("--theta", theta, "IoU threshold for overlap mode")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    prf->add_option("--out", prf_out, "Report file")->capture_default_str();

    // export-training
    auto* export_cmd = app.add_subcommand("export-training", "Write training examples of reviewed documents");
    std::string export_out;
    add_common(export_cmd, common, false);
    export_cmd->add_option("out", export_out, "Output file, - for stdout")->required();

    // generate-fixtures
    auto* gen = app.add_subcommand("generate-fixtures", "Write the synthetic fixture corpus");
    std::string gen_out;
    elig::FixtureSpec spec = elig::default_fixture_spec();
    gen->add_option("out", gen_out, "Output JSONL, - for stdout")->required();
    gen->add_option("--seed", spec.seed)->capture_default_str();
    gen->add_option("--documents", spec.document_count)->capture_default_str();
    gen->add_option("--german-share", spec.german_share)->check(CLI::Range(0.0, 1.0))->capture_default_str();

    // print-config
    auto* print_config = app.add_subcommand("print-config", "Print the shipped decider configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            auto controller = make_controller(common);
            elig::HttpServer server(*controller);
            const int bound = server.bind(host, port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << host << ":" << bound << " (backend " << controller->backend_name()
                      << ")\n";
            server.listen();
            g_server = nullptr;
        } else if (*ingest) {
            auto controller = make_controller(common);
            const auto docs = elig::read_corpus_file(ingest_file);
            for (const auto& d : docs) controller->ingest(d);
            std::cerr << "ingested " << docs.size() << " document(s)\n";
        } else if (*predict) {
            auto controller = make_controller(common);
            if (!golden_dir.empty()) std::filesystem::create_directories(golden_dir);
            for (auto& d : elig::read_corpus_file(predict_file)) {
                const auto r = controller->predict(std::move(d));
                if (!golden_dir.empty())
                    write_text((std::filesystem::path(golden_dir) / (r.document_id + ".json")).string(),
                               elig::to_json(r, false).dump(2) + "\n");
                else
                    std::cout << elig::to_json(r, !no_timings).dump() << '\n';
            }
        } else if (*decide) {
            auto controller = make_controller(common);
            for (auto& d : elig::read_corpus_file(decide_file))
                std::cout << elig::to_json(controller->decide(std::move(d))).dump() << '\n';
        } else if (*iaa) {
            const auto docs = elig::read_corpus_file(iaa_corpus);
            const auto report = elig::iaa_report(docs, hull ? elig::IouMode::hull : elig::IouMode::charset);
            write_text(iaa_out, iaa_json ? elig::to_json(report).dump(2) + "\n" : elig::format_agreement(report));
        } else if (*prf) {
            const auto gold = elig::read_corpus_file(prf_corpus);
            std::vector<elig::Document> pred;
            if (!prf_pred.empty()) {
                pred = elig::read_corpus_file(prf_pred);
            } else {
                const auto backend = make_backend(common);
                for (const auto& g : gold) {
                    auto d = g;
                    d.annotations = backend->detect(g);
                    pred.push_back(std::move(d));
                }
            }
            const auto m = mode == "exact" ? elig::MatchMode::exact() : elig::MatchMode::overlap(theta);
            write_text(prf_out, elig::format_report(elig::evaluate_corpus(pred, gold, m)));
        } else if (*export_cmd) {
            auto controller = make_controller(common);
            write_text(export_out, controller->export_training());
        } else if (*gen) {
            std::ostringstream buf;
            elig::write_corpus(buf, elig::generate_corpus(spec));
            write_text(gen_out, buf.str());
        } else if (*print_config) {
            std::cout << elig::to_json(elig::default_decider_config()).dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
