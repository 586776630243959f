// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// httpio command line: CRUD, vectored reads, multi-stream downloads and the
// benchmark harness. Exit codes: 0 success, 1 operational error, 2 usage
// error.

#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "httpio/bench.hpp"
#include "httpio/client.hpp"
#include "httpio/digest.hpp"
#include "httpio/errors.hpp"
#include "httpio/metalink.hpp"
#include "httpio/trace.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw httpio::InvalidParams("cannot read file '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw httpio::InvalidParams("cannot write file '" + path + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

std::string default_metrics_url(const std::string& object_uri) {
    httpio::Uri uri = httpio::Uri::parse(object_uri);
    uri.path = "/.metrics";
    uri.query.clear();
    return uri.to_string();
}

struct GlobalOptions {
    std::optional<std::string> config_file;
    bool pool_stats = false;
};

httpio::ClientConfig make_config(const GlobalOptions& options) {
    return httpio::load_config(options.config_file, httpio::environment_overrides());
}

int cmd_get(const GlobalOptions& global, const std::string& uri, const std::string& out_path) {
    httpio::Client client(make_config(global));
    std::string body = client.get(uri);
    if (out_path.empty())
        std::cout.write(body.data(), static_cast<std::streamsize>(body.size()));
    else
        write_file(out_path, body);
    if (global.pool_stats) std::cerr << client.pool().format_stats();
    return 0;
}

int cmd_put(const GlobalOptions& global, const std::string& file, const std::string& uri) {
    httpio::Client client(make_config(global));
    httpio::ResourceInfo info = client.put(uri, read_file(file));
    std::cout << "uri=" << info.uri << "\n";
    if (info.size) std::cout << "size=" << *info.size << "\n";
    if (global.pool_stats) std::cerr << client.pool().format_stats();
    return 0;
}

int cmd_rm(const GlobalOptions& global, const std::string& uri) {
    httpio::Client client(make_config(global));
    auto outcome = client.remove(uri);
    std::cout << "removed="
              << (outcome == httpio::RemoveOutcome::removed ? "true" : "already-absent") << "\n";
    if (global.pool_stats) std::cerr << client.pool().format_stats();
    return 0;
}

int cmd_info(const GlobalOptions& global, const std::string& uri) {
    httpio::Client client(make_config(global));
    httpio::ResourceInfo info = client.stat(uri);
    std::cout << "uri=" << info.uri << "\n";
    std::cout << "size=" << (info.size ? std::to_string(*info.size) : "unknown") << "\n";
    std::cout << "last_modified=" << info.last_modified.value_or("unknown") << "\n";
    std::cout << "etag=" << info.etag.value_or("none") << "\n";
    std::cout << "supports_ranges=" << (info.supports_ranges ? "true" : "false") << "\n";
    if (global.pool_stats) std::cerr << client.pool().format_stats();
    return 0;
}

int cmd_vecread(const GlobalOptions& global, const std::string& uri,
                const std::string& trace_path, const std::string& out_dir) {
    httpio::Client client(make_config(global));
    httpio::bench::AccessTrace trace = httpio::bench::parse_trace(read_file(trace_path));

    std::deque<std::string> buffers;
    std::vector<httpio::FragmentRequest> fragments;
    fragments.reserve(trace.fragments.size());
    for (const auto& f : trace.fragments) {
        buffers.emplace_back(static_cast<std::size_t>(f.length), '\0');
        fragments.push_back(httpio::FragmentRequest{
            f.id, httpio::ByteRange{f.offset, f.length},
            std::span(buffers.back().data(), buffers.back().size())});
    }

    httpio::RemoteFileHandle handle = client.open(uri);
    auto outcomes = client.preadvec(handle, fragments);

    std::size_t filled = 0;
    for (const auto& o : outcomes)
        if (o.filled()) ++filled;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (!outcomes[i].filled()) continue;
            write_file(out_dir + "/" + std::to_string(outcomes[i].id) + ".bin", buffers[i]);
        }
    }
    httpio::Digest digest("sha-256");
    for (const auto& b : buffers) digest.update(b);
    std::cout << "fragments=" << outcomes.size() << "\n";
    std::cout << "filled=" << filled << "\n";
    std::cout << "errors=" << outcomes.size() - filled << "\n";
    std::cout << "payload_digest=sha-256:" << digest.hex() << "\n";
    for (const auto& o : outcomes)
        if (!o.filled())
            std::cerr << "fragment " << o.id << ": " << o.message << "\n";
    if (global.pool_stats) std::cerr << client.pool().format_stats();
    return filled == outcomes.size() ? 0 : 1;
}

int cmd_dl_multi(const GlobalOptions& global, const std::string& uri, std::size_t streams,
                 std::uint64_t chunk_size, std::string out_path) {
    httpio::ClientConfig config = make_config(global);
    if (streams > 0) config.metalink_streams = streams;
    if (chunk_size > 0) config.metalink_chunk_size = chunk_size;
    httpio::Client client(config);

    httpio::Uri target = httpio::Uri::parse(uri);
    auto discovery = httpio::discover_metalink(client.pool(), target, config.engine_limits());
    for (const auto& line : discovery.attempts) std::cerr << "discovery: " << line << "\n";
    if (!discovery.document) {
        std::cerr << "no metalink discoverable for " << uri << "\n";
        return 1;
    }
    if (!discovery.document->size) {
        std::cerr << "metalink carries no size; cannot plan chunks\n";
        return 1;
    }
    if (out_path.empty()) {
        out_path = discovery.document->name;
        if (out_path.empty()) out_path = "download.out";
    }

    httpio::FileSink sink(out_path, *discovery.document->size);
    httpio::MultistreamParams params;
    params.chunk_size = config.metalink_chunk_size;
    params.streams = config.metalink_streams;
    params.limits = config.engine_limits();
    httpio::DownloadReport report =
        httpio::multistream_download(client.pool(), *discovery.document, sink, params);

    std::cout << "file=" << out_path << "\n";
    std::cout << "bytes=" << report.bytes << "\n";
    std::cout << "checksum_checked=" << (report.checksum_checked ? "true" : "false") << "\n";
    std::cout << "checksum_verified=" << (report.checksum_verified ? "true" : "false") << "\n";
    if (!report.checksum_algorithm.empty())
        std::cout << "checksum_algorithm=" << report.checksum_algorithm << "\n";
    for (const auto& [replica, chunks] : report.chunks_per_replica)
        std::cout << "chunks." << replica << "=" << chunks << "\n";
    for (const auto& event : report.events) std::cerr << "event: " << event << "\n";
    if (global.pool_stats) std::cerr << client.pool().format_stats();
    return 0;
}

int cmd_bench(const GlobalOptions& global, const std::string& trace_path, const std::string& mode,
              std::size_t repeat, const std::string& report_path, const std::string& csv_path,
              std::string metrics_url) {
    httpio::ClientConfig config = make_config(global);
    httpio::bench::AccessTrace trace = httpio::bench::parse_trace(read_file(trace_path));
    httpio::bench::BenchMode bench_mode = httpio::bench::parse_bench_mode(mode);
    if (metrics_url.empty() && !trace.object_uri.empty())
        metrics_url = default_metrics_url(trace.object_uri);

    httpio::bench::BenchReport report =
        httpio::bench::run_benchmark(trace, bench_mode, config, metrics_url, repeat);
    std::string text = report.to_kv();
    std::cout << text;
    if (!report_path.empty()) write_file(report_path, text);
    if (!csv_path.empty()) write_file(csv_path, report.to_csv());
    return report.valid ? 0 : 1;
}

int cmd_gen_trace(const std::string& object_uri, std::uint64_t size, std::size_t fragments,
                  std::uint64_t min_len, std::uint64_t max_len, std::uint64_t seed,
                  const std::string& out_path) {
    httpio::bench::AccessTrace trace =
        httpio::bench::generate_trace(size, fragments, min_len, max_len, seed);
    trace.object_uri = object_uri;
    std::string text = httpio::bench::serialize_trace(trace);
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"httpio: pooled keep-alive HTTP I/O with vectored range reads,\n"
                 "Metalink fail-over and multi-stream downloads"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_file, "Config file (key=value lines)");
    app.add_flag("--pool-stats", global.pool_stats, "Dump pool stats to stderr on exit");

    std::string uri, file, out_path, trace_path, out_dir, mode = "vectored";
    std::string report_path, csv_path, metrics_url, object_uri;
    std::size_t streams = 0, repeat = 5, fragments = 1200;
    std::uint64_t chunk_size = 0, size = 7'000'000, min_len = 100, max_len = 1000, seed = 42;

    auto* get = app.add_subcommand("get", "Fetch an object");
    get->add_option("uri", uri)->required();
    get->add_option("-o,--output", out_path, "Write body to file instead of stdout");

    auto* put = app.add_subcommand("put", "Upload a file to an object URI");
    put->add_option("file", file)->required()->check(CLI::ExistingFile);
    put->add_option("uri", uri)->required();

    auto* rm = app.add_subcommand("rm", "Delete an object");
    rm->add_option("uri", uri)->required();

    auto* info = app.add_subcommand("info", "Print object metadata (HEAD)");
    info->add_option("uri", uri)->required();

    auto* vecread = app.add_subcommand("vecread", "Vectored read of a trace's fragments");
    vecread->add_option("uri", uri)->required();
    vecread->add_option("--trace", trace_path, "Access trace file")->required();
    vecread->add_option("--out", out_dir, "Directory for per-fragment output files");

    auto* dl = app.add_subcommand("dl-multi", "Multi-stream download via Metalink replicas");
    dl->add_option("uri", uri)->required();
    dl->add_option("--streams", streams, "Parallel streams (default from config)");
    dl->add_option("--chunk-size", chunk_size, "Chunk size in bytes");
    dl->add_option("-o,--output", out_path, "Output file (default: metalink name)");

    auto* bench = app.add_subcommand("bench", "Replay a trace and report timings");
    bench->add_option("--trace", trace_path)->required();
    bench->add_option("--mode", mode, "sequential|vectored|failover|multistream");
    bench->add_option("--repeat", repeat, "Repetitions (default 5)");
    bench->add_option("--report", report_path, "Write key=value report to file");
    bench->add_option("--csv", csv_path, "Write per-repetition CSV to file");
    bench->add_option("--metrics", metrics_url, "Testbed metrics URL (default <object>/.metrics)");

    auto* gen = app.add_subcommand("gen-trace", "Generate a deterministic access trace");
    gen->add_option("--object-uri", object_uri, "URI recorded in the trace header");
    gen->add_option("--size", size, "Object size in bytes");
    gen->add_option("--fragments", fragments, "Fragment count");
    gen->add_option("--min", min_len, "Minimum fragment length");
    gen->add_option("--max", max_len, "Maximum fragment length");
    gen->add_option("--seed", seed, "RNG seed");
    gen->add_option("-o,--output", out_path, "Output trace file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (get->parsed()) return cmd_get(global, uri, out_path);
        if (put->parsed()) return cmd_put(global, file, uri);
        if (rm->parsed()) return cmd_rm(global, uri);
        if (info->parsed()) return cmd_info(global, uri);
        if (vecread->parsed()) return cmd_vecread(global, uri, trace_path, out_dir);
        if (dl->parsed()) return cmd_dl_multi(global, uri, streams, chunk_size, out_path);
        if (bench->parsed())
            return cmd_bench(global, trace_path, mode, repeat, report_path, csv_path, metrics_url);
        if (gen->parsed())
            return cmd_gen_trace(object_uri, size, fragments, min_len, max_len, seed, out_path);
    } catch (const httpio::InvalidParams& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const httpio::ConfigInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
