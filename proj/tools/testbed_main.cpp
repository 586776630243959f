// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// Standalone testbed server: deterministic corpus origin with latency
// shaping, fault scripting, replica roots, on-demand Metalink generation and
// a /.metrics endpoint.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "httpio/errors.hpp"
#include "httpio/testbed.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

std::vector<std::pair<std::string, std::filesystem::path>> parse_replicas(
    const std::string& spec) {
    std::vector<std::pair<std::string, std::filesystem::path>> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto colon = item.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= item.size())
            throw httpio::InvalidParams("replica spec must be name:dir, got '" + item + "'");
        out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"httpio-testbed: deterministic HTTP/1.1 origin for tests and benchmarks"};

    std::string corpus, replicas_spec, faults_file, bind = "127.0.0.1:0";
    std::string metalink_mode = "all";
    std::uint64_t latency_ms = 0, per_mb_ms = 0, jitter_ms = 0, seed = 0;

    app.add_option("--corpus", corpus, "Corpus root directory")->required();
    app.add_option("--replicas", replicas_spec, "Virtual replica roots: r0:DIR,r1:DIR,...");
    app.add_option("--latency-ms", latency_ms, "Per-request delay before the status line");
    app.add_option("--per-mb-ms", per_mb_ms, "Throughput shaping: delay per megabyte sent");
    app.add_option("--jitter-ms", jitter_ms, "Uniform jitter half-width");
    app.add_option("--seed", seed, "Jitter seed (same seed, same delays)");
    app.add_option("--faults", faults_file, "Fault plan file (line DSL)");
    app.add_option("--bind", bind, "HOST:PORT (port 0 = ephemeral)");
    app.add_option("--metalink", metalink_mode,
                   "Metalink endpoints: off|accept|query|suffix|garbage|all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        httpio::testbed::TestbedServer::Options options;
        options.corpus_root = corpus;
        options.replicas = parse_replicas(replicas_spec);
        options.latency.per_request_delay = std::chrono::milliseconds(latency_ms);
        options.latency.per_megabyte_delay = std::chrono::milliseconds(per_mb_ms);
        options.latency.jitter = std::chrono::milliseconds(jitter_ms);
        options.latency.seed = seed;
        options.metalink_mode = httpio::testbed::parse_metalink_mode(metalink_mode);
        if (!faults_file.empty()) {
            std::ifstream in(faults_file);
            if (!in) throw httpio::InvalidParams("cannot read fault plan '" + faults_file + "'");
            std::ostringstream text;
            text << in.rdbuf();
            options.faults = httpio::testbed::FaultPlan::parse(text.str());
        }
        auto colon = bind.rfind(':');
        if (colon == std::string::npos)
            throw httpio::InvalidParams("--bind must be HOST:PORT");
        options.bind_host = bind.substr(0, colon);
        options.port = static_cast<std::uint16_t>(std::stoul(bind.substr(colon + 1)));

        auto server = httpio::testbed::TestbedServer::serve(std::move(options));
        std::cout << "listening on " << server->base_url() << "\n";
        std::cout << "metrics at " << server->base_url() << "/.metrics" << std::endl;

        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server->stop();
        return 0;
    } catch (const httpio::InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
