// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the installed binaries: exit codes and the documented
// output formats.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "httpio/testbed.hpp"
#include "test_util.hpp"

using httpio_test::TempDir;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& command) {
    TempDir dir;
    std::string capture = (dir / "out.txt").string();
    int status = std::system((command + " >" + capture + " 2>&1").c_str());
    RunResult result;
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    result.output = httpio_test::read_file(capture);
    return result;
}

const std::string cli = HTTPIO_CLI_PATH;

}  // namespace

TEST_CASE("usage errors exit 2 with a synopsis") {
    RunResult no_args = run(cli);
    CHECK(no_args.exit_code == 2);

    RunResult bad_sub = run(cli + " frobnicate");
    CHECK(bad_sub.exit_code == 2);

    RunResult bad_mode = run(cli + " bench --trace /nonexistent --mode bogus");
    CHECK(bad_mode.exit_code == 2);

    RunResult help = run(cli + " --help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("vecread") != std::string::npos);
}

TEST_CASE("operational errors exit 1 and mention the cause") {
    TempDir dir;
    httpio_test::write_file(dir / "f.bin", "0123456789");
    httpio::testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    auto server = httpio::testbed::TestbedServer::serve(std::move(options));

    RunResult missing = run(cli + " get " + server->url("/missing.bin"));
    CHECK(missing.exit_code == 1);
    CHECK(missing.output.find("404") != std::string::npos);
}

TEST_CASE("get, info, put, rm and gen-trace round-trip through the binary") {
    TempDir dir;
    httpio_test::write_file(dir / "f.bin", "0123456789");
    httpio::testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    auto server = httpio::testbed::TestbedServer::serve(std::move(options));

    RunResult info = run(cli + " info " + server->url("/f.bin"));
    CHECK(info.exit_code == 0);
    CHECK(info.output.find("size=10") != std::string::npos);
    CHECK(info.output.find("supports_ranges=true") != std::string::npos);

    RunResult got = run(cli + " get " + server->url("/f.bin"));
    CHECK(got.exit_code == 0);
    CHECK(got.output == "0123456789");

    TempDir work;
    httpio_test::write_file(work / "upload.bin", "uploaded-bytes");
    RunResult put =
        run(cli + " put " + (work / "upload.bin").string() + " " + server->url("/up.bin"));
    CHECK(put.exit_code == 0);
    RunResult echoed = run(cli + " get " + server->url("/up.bin"));
    CHECK(echoed.output == "uploaded-bytes");
    RunResult removed = run(cli + " rm " + server->url("/up.bin"));
    CHECK(removed.exit_code == 0);
    CHECK(removed.output.find("removed=true") != std::string::npos);

    std::string trace_path = (work / "trace.txt").string();
    RunResult gen = run(cli + " gen-trace --object-uri " + server->url("/f.bin") +
                        " --size 10 --fragments 3 --min 1 --max 2 --seed 1 -o " + trace_path);
    CHECK(gen.exit_code == 0);
    RunResult vec = run(cli + " vecread " + server->url("/f.bin") + " --trace " + trace_path +
                        " --out " + (work / "frags").string());
    CHECK(vec.exit_code == 0);
    CHECK(vec.output.find("filled=3") != std::string::npos);

    RunResult bench = run(cli + " bench --trace " + trace_path +
                          " --mode vectored --repeat 2 --report " +
                          (work / "report.txt").string() + " --csv " +
                          (work / "report.csv").string());
    CHECK(bench.exit_code == 0);
    std::string report = httpio_test::read_file(work / "report.txt");
    CHECK(report.rfind("report.version=1\n", 0) == 0);
    std::string csv = httpio_test::read_file(work / "report.csv");
    CHECK(csv.rfind("repetition,wall_ms,requests,connections,bytes\n", 0) == 0);
}

TEST_CASE("dl-multi downloads through replicas via the binary") {
    TempDir dir;
    std::string content = httpio_test::corpus_bytes(55, 200000);
    httpio_test::write_file(dir / "f.bin", content);
    httpio::testbed::TestbedServer::Options options;
    options.corpus_root = dir.path();
    options.replicas = {{"r0", dir.path()}, {"r1", dir.path()}};
    auto server = httpio::testbed::TestbedServer::serve(std::move(options));

    TempDir work;
    std::string out = (work / "downloaded.bin").string();
    RunResult dl = run(cli + " dl-multi " + server->url("/r0/f.bin") +
                       " --streams 2 --chunk-size 65536 -o " + out);
    CHECK(dl.exit_code == 0);
    CHECK(dl.output.find("checksum_verified=true") != std::string::npos);
    CHECK(httpio_test::read_file(out) == content);
}

TEST_CASE("testbed binary serves until terminated") {
    TempDir dir;
    httpio_test::write_file(dir / "f.bin", "payload");
    std::string testbed = HTTPIO_TESTBED_PATH;
    // Probe the usage path only; the long-running path is covered in-process.
    RunResult bad = run(testbed + " --corpus");
    CHECK(bad.exit_code == 2);
    RunResult missing_corpus = run(testbed + " --corpus /nonexistent --bind 127.0.0.1:0");
    CHECK(missing_corpus.exit_code == 1);
}
