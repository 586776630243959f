// Copyright 2026 The httpio authors
// SPDX-License-Identifier: Apache-2.0

#include "httpio/vector_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <mutex>
#include <numeric>
#include <thread>

#include "httpio/errors.hpp"

namespace httpio {

namespace {

std::size_t digits(std::uint64_t v) {
    std::size_t n = 1;
    while (v >= 10) {
        v /= 10;
        ++n;
    }
    return n;
}

/// Length of the "a-b" segment this range contributes to a Range header.
std::size_t segment_length(const ByteRange& r) { return digits(r.offset) + 1 + digits(r.last()); }

VectorPlan plan_from_sorted(std::span<const ByteRange> ranges,
                            std::span<const std::size_t> order, const VectorConfig& config) {
    VectorPlan plan;
    plan.stats.input_fragments = ranges.size();
    plan.mapping.resize(ranges.size());
    if (ranges.empty()) return plan;

    std::uint64_t coalesced_bytes = 0;
    std::uint64_t union_bytes = 0;
    std::uint64_t union_start = 0;
    std::uint64_t union_end = 0;
    bool union_open = false;

    for (std::size_t idx : order) {
        const ByteRange& r = ranges[idx];
        if (plan.coalesced.empty() || r.offset > plan.coalesced.back().end() + config.gap_threshold) {
            plan.coalesced.push_back(r);
        } else {
            ByteRange& cur = plan.coalesced.back();
            std::uint64_t new_end = std::max(cur.end(), r.end());
            cur.length = new_end - cur.offset;
        }
        plan.mapping[idx] = VectorPlan::Mapping{plan.coalesced.size() - 1,
                                                r.offset - plan.coalesced.back().offset};

        // Union of the requested bytes (gap-0 sweep) for extra_bytes.
        if (!union_open) {
            union_start = r.offset;
            union_end = r.end();
            union_open = true;
        } else if (r.offset > union_end) {
            union_bytes += union_end - union_start;
            union_start = r.offset;
            union_end = r.end();
        } else {
            union_end = std::max(union_end, r.end());
        }
    }
    if (union_open) union_bytes += union_end - union_start;

    for (const auto& c : plan.coalesced) coalesced_bytes += c.length;
    plan.stats.coalesced_ranges = plan.coalesced.size();
    plan.stats.extra_bytes = coalesced_bytes - union_bytes;
    return plan;
}

}  // namespace

VectorPlan plan_ranges(std::span<const ByteRange> ranges, const VectorConfig& config) {
    for (const auto& r : ranges) validate_range(r);
    std::vector<std::size_t> order(ranges.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranges[a].offset < ranges[b].offset;
    });
    return plan_from_sorted(ranges, order, config);
}

VectorPlan normalize_fragments(std::span<const FragmentRequest> fragments,
                               const VectorConfig& config) {
    std::vector<ByteRange> ranges;
    ranges.reserve(fragments.size());
    for (const auto& f : fragments) {
        validate_range(f.range);
        if (f.destination.size() != f.range.length)
            throw InvalidParams("fragment " + std::to_string(f.id) +
                                " destination capacity != range length");
        ranges.push_back(f.range);
    }
    return plan_ranges(ranges, config);
}

void partition_ranges(VectorPlan& plan, const VectorConfig& config) {
    plan.batches.clear();
    const std::size_t base = 6;  // "bytes="
    std::size_t header_len = base;
    for (std::size_t i = 0; i < plan.coalesced.size(); ++i) {
        std::size_t seg = segment_length(plan.coalesced[i]);
        bool open = !plan.batches.empty() && !plan.batches.back().empty();
        std::size_t candidate = open ? header_len + 1 + seg : base + seg;
        if (!open || plan.batches.back().size() >= config.max_ranges_per_request ||
            candidate > config.max_range_header_bytes) {
            plan.batches.emplace_back();
            header_len = base + seg;
        } else {
            header_len = candidate;
        }
        plan.batches.back().push_back(i);
    }
    plan.stats.batch_count = plan.batches.size();
}

namespace {

struct RangeResult {
    enum class State { pending, filled, rns, http_error, transport_error, retry };
    State state = State::pending;
    int http_status = 0;
    std::optional<std::uint64_t> total;
    std::string message;
};

struct ScatterContext {
    std::span<const FragmentRequest> fragments;
    const VectorPlan& plan;
    std::vector<std::vector<std::size_t>> fragments_by_range;
    std::vector<RangeResult> results;

    explicit ScatterContext(std::span<const FragmentRequest> frags, const VectorPlan& p)
        : fragments(frags), plan(p), fragments_by_range(p.coalesced.size()),
          results(p.coalesced.size()) {
        for (std::size_t i = 0; i < p.mapping.size(); ++i)
            fragments_by_range[p.mapping[i].coalesced_index].push_back(i);
    }

    /// Copies range data into every fragment mapped onto the range.
    void fill(std::size_t range_index, std::string_view data) {
        for (std::size_t frag_index : fragments_by_range[range_index]) {
            const auto& mapping = plan.mapping[frag_index];
            const auto& frag = fragments[frag_index];
            std::memcpy(frag.destination.data(),
                        data.data() + static_cast<std::size_t>(mapping.intra_offset),
                        frag.destination.size());
        }
        results[range_index].state = RangeResult::State::filled;
    }

    void mark(std::size_t range_index, RangeResult::State state, int status,
              std::optional<std::uint64_t> total, std::string message) {
        auto& r = results[range_index];
        r.state = state;
        r.http_status = status;
        r.total = total;
        r.message = std::move(message);
    }
};

/// Applies one RangedResponse to the ranges it was asked for. Ranges the
/// reply did not cover are flagged for per-range retry.
void apply_response(ScatterContext& ctx, std::span<const std::size_t> range_indices,
                    const RangedResponse& resp) {
    if (resp.kind == ResponseKind::full_body) {
        std::string_view body = resp.parts.empty() ? std::string_view() : resp.parts[0].data;
        for (std::size_t ri : range_indices) {
            const ByteRange& r = ctx.plan.coalesced[ri];
            if (r.end() <= body.size()) {
                ctx.fill(ri, body.substr(static_cast<std::size_t>(r.offset),
                                         static_cast<std::size_t>(r.length)));
            } else {
                ctx.mark(ri, RangeResult::State::rns, 0, body.size(),
                         "range outside object of size " + std::to_string(body.size()));
            }
        }
        return;
    }
    for (std::size_t ri : range_indices) {
        const ByteRange& r = ctx.plan.coalesced[ri];
        auto it = std::find_if(resp.parts.begin(), resp.parts.end(),
                               [&](const MultipartPart& p) { return p.range == r; });
        if (it != resp.parts.end()) {
            ctx.fill(ri, it->data);
        } else if (resp.total_size && r.offset >= *resp.total_size) {
            ctx.mark(ri, RangeResult::State::rns, 0, resp.total_size,
                     "range beyond EOF (total " + std::to_string(*resp.total_size) + ")");
        } else {
            ctx.results[ri].state = RangeResult::State::retry;
        }
    }
}

void run_batch(SessionPool& pool, const Uri& uri, ScatterContext& ctx,
               std::span<const std::size_t> range_indices, const EngineLimits& limits,
               std::atomic<std::uint64_t>& request_counter, bool& transport_failed) {
    std::vector<ByteRange> ranges;
    ranges.reserve(range_indices.size());
    for (std::size_t ri : range_indices) ranges.push_back(ctx.plan.coalesced[ri]);

    bool needs_per_range = false;
    try {
        ++request_counter;
        RangedResponse resp = execute_ranged_get(pool, uri, ranges, limits);
        apply_response(ctx, range_indices, resp);
    } catch (const RangeNotSatisfiable& e) {
        for (std::size_t ri : range_indices)
            ctx.mark(ri, RangeResult::State::rns, 416, e.total(), e.what());
        return;
    } catch (const FullBodyTooLarge&) {
        // Server ignored the Range header and the object is too large to
        // swallow; single-range GETs may still be honored.
        needs_per_range = true;
    } catch (const HttpError& e) {
        for (std::size_t ri : range_indices)
            ctx.mark(ri, RangeResult::State::http_error, e.status(), std::nullopt, e.what());
        return;
    } catch (const Error& e) {
        transport_failed = true;
        for (std::size_t ri : range_indices)
            ctx.mark(ri, RangeResult::State::transport_error, 0, std::nullopt, e.what());
        return;
    }

    // Degradation: any range the batch reply did not cover (single-range-only
    // servers, coalesced replies clipped at EOF, Range-ignoring servers with
    // oversized objects) is fetched with its own single-range GET.
    for (std::size_t ri : range_indices) {
        auto& result = ctx.results[ri];
        if (!needs_per_range && result.state != RangeResult::State::retry) continue;
        if (result.state == RangeResult::State::filled || result.state == RangeResult::State::rns)
            continue;
        const ByteRange r = ctx.plan.coalesced[ri];
        try {
            ++request_counter;
            RangedResponse resp = execute_ranged_get(pool, uri, std::span(&r, 1), limits);
            apply_response(ctx, std::span(&ri, 1), resp);
            if (ctx.results[ri].state == RangeResult::State::retry)
                ctx.mark(ri, RangeResult::State::rns, 0, resp.total_size,
                         "server cannot serve full range " + to_string(r));
        } catch (const RangeNotSatisfiable& e) {
            ctx.mark(ri, RangeResult::State::rns, 416, e.total(), e.what());
        } catch (const HttpError& e) {
            ctx.mark(ri, RangeResult::State::http_error, e.status(), std::nullopt, e.what());
        } catch (const Error& e) {
            ctx.mark(ri, RangeResult::State::http_error, 0, std::nullopt, e.what());
        }
    }
}

}  // namespace

std::vector<FragmentOutcome> vector_read(SessionPool& pool, const Uri& uri,
                                         std::span<const FragmentRequest> fragments,
                                         const VectorConfig& config, const EngineLimits& limits,
                                         VectorReadStats* stats_out) {
    VectorPlan plan = normalize_fragments(fragments, config);
    partition_ranges(plan, config);
    if (stats_out) {
        stats_out->plan = plan.stats;
        stats_out->batch_ms.assign(plan.batches.size(), 0.0);
        stats_out->ranged_requests = 0;
    }
    if (fragments.empty()) return {};

    ScatterContext ctx(fragments, plan);
    std::atomic<std::uint64_t> request_counter{0};
    std::vector<char> batch_transport_failed(plan.batches.size(), 0);
    std::vector<double> batch_ms(plan.batches.size(), 0.0);

    auto worker_loop = [&](std::atomic<std::size_t>& next) {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= plan.batches.size()) return;
            auto start = std::chrono::steady_clock::now();
            bool transport_failed = false;
            run_batch(pool, uri, ctx, plan.batches[b], limits, request_counter, transport_failed);
            batch_transport_failed[b] = transport_failed ? 1 : 0;
            batch_ms[b] = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
        }
    };

    std::atomic<std::size_t> next_batch{0};
    std::size_t workers = std::min(config.max_concurrent_batches, plan.batches.size());
    if (workers <= 1) {
        worker_loop(next_batch);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i)
            threads.emplace_back([&] { worker_loop(next_batch); });
        for (auto& t : threads) t.join();
    }

    if (stats_out) {
        stats_out->batch_ms = batch_ms;
        stats_out->ranged_requests = request_counter.load();
    }

    bool all_transport_failed =
        !plan.batches.empty() &&
        std::all_of(batch_transport_failed.begin(), batch_transport_failed.end(),
                    [](char c) { return c != 0; });
    if (all_transport_failed) {
        std::string msg = "no batch succeeded against " + uri.to_string();
        if (!ctx.results.empty() && !ctx.results[0].message.empty())
            msg += ": " + ctx.results[0].message;
        throw TransportError(msg);
    }

    std::vector<FragmentOutcome> outcomes(fragments.size());
    for (std::size_t i = 0; i < fragments.size(); ++i) {
        const auto& result = ctx.results[plan.mapping[i].coalesced_index];
        FragmentOutcome& out = outcomes[i];
        out.id = fragments[i].id;
        out.http_status = result.http_status;
        out.message = result.message;
        switch (result.state) {
            case RangeResult::State::filled:
                out.state = FragmentState::filled;
                break;
            case RangeResult::State::rns:
                out.state = FragmentState::range_not_satisfiable;
                break;
            case RangeResult::State::transport_error:
                out.state = FragmentState::transport_error;
                break;
            default:
                out.state = FragmentState::http_error;
                break;
        }
    }
    return outcomes;
}

}  // namespace httpio
