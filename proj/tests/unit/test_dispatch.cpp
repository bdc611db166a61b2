#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "hazmat/dispatch.hpp"
#include "oracles.hpp"

using namespace hazmat;
using namespace hazmat::dispatch;

namespace {

HazmatCard card(std::uint64_t t_id) {
    HazmatCard c;
    c.c_id = 500;
    c.t_id = t_id;
    c.s_id = "0000002C";
    return c;
}

ReadEvent read(std::uint32_t portal, std::uint64_t t_id, std::uint32_t pass, double t) {
    return ReadEvent{{portal, 500, pass}, t, t_id, card(t_id)};
}

truck::AlertMessage alert(std::uint64_t unit, std::uint32_t seq, double t) {
    truck::AlertMessage a;
    a.unit_id = unit;
    a.seq_no = seq;
    a.t = t;
    a.card = card(unit);
    a.position = truck::Position{44.9, 26.0};
    return a;
}

}  // namespace

TEST(EventStore, DuplicateIngestIsIdempotent) {
    EventStore store;
    const auto f = wire::read_event_frame(read(1, 7, 1, 10));
    const auto r1 = store.ingest(f, 10);
    const auto r2 = store.ingest(f, 11);
    EXPECT_EQ(r1.stored, 1u);
    EXPECT_EQ(r2.stored, 0u);
    EXPECT_EQ(r2.duplicates, 1u);
    EXPECT_EQ(store.read_count(), 1u);
    EXPECT_EQ(r2.ack.events, r1.ack.events);
    EXPECT_EQ(store.journal().size(), 1u);
}

TEST(EventStore, BatchStoresEachEvent) {
    EventStore store;
    const std::vector<ReadEvent> batch{read(1, 7, 1, 10), read(2, 7, 1, 70), read(1, 7, 1, 10)};
    const auto r = store.ingest(wire::batch_frame(batch), 80);
    EXPECT_EQ(r.stored, 2u);
    EXPECT_EQ(r.duplicates, 1u);
    EXPECT_EQ(r.ack.events.size(), 3u);
}

TEST(EventStore, MalformedFrameStoresNothing) {
    EventStore store;
    auto f = wire::read_event_frame(read(1, 7, 1, 10));
    f[30] ^= 1;
    EXPECT_THROW(store.ingest(f, 0), Error);
    EXPECT_EQ(store.read_count(), 0u);
    EXPECT_THROW(store.ingest(wire::ack_frame({wire::MsgType::Batch, {}, {}}), 0), Error);
}

TEST(EventStore, BadCardIsQuarantinedButAcked) {
    EventStore store;
    auto payload = wire::encode_read_event(read(1, 7, 1, 10));
    payload[28 + 50] ^= 0xFF;
    const auto r = store.ingest(wire::encode_frame(wire::MsgType::ReadEvent, payload), 12);
    EXPECT_EQ(r.stored, 0u);
    EXPECT_EQ(r.ack.events.size(), 1u);
    ASSERT_EQ(store.quarantined().size(), 1u);
    EXPECT_EQ(store.quarantined()[0].reason, Errc::CardDecodeFailure);
    EXPECT_EQ(store.read_count(), 0u);
}

TEST(EventStore, TrackIsTimeOrdered) {
    EventStore store;
    store.ingest(wire::read_event_frame(read(3, 7, 1, 150)), 150);
    store.ingest(wire::read_event_frame(read(1, 7, 1, 30)), 150);
    store.ingest(wire::read_event_frame(read(2, 7, 1, 90)), 150);
    store.ingest(wire::read_event_frame(read(2, 8, 1, 95)), 150);
    EXPECT_EQ(store.track(7), (std::vector<TrackPoint>{{1, 30}, {2, 90}, {3, 150}}));
    EXPECT_TRUE(store.track(99).empty());
}

TEST(EventStore, AlertsNewestFirstAndDeduped) {
    EventStore store;
    store.ingest(wire::alert_frame(alert(7, 1, 100)), 100);
    store.ingest(wire::alert_frame(alert(8, 1, 120)), 120);
    const auto dup = store.ingest(wire::alert_frame(alert(7, 1, 100)), 101);
    EXPECT_EQ(dup.duplicates, 1u);
    const auto a = store.active_alerts();
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].unit_id, 8u);
    EXPECT_EQ(a[1].alarm_code, "ALERT ACCIDENT");
}

TEST(EventStore, ReportRangesAreHalfOpenAndAdditive) {
    EventStore store;
    std::mt19937_64 rng(61);
    for (std::uint32_t i = 0; i < 200; ++i) {
        const double t = static_cast<double>(rng() % 1000);
        store.ingest(wire::read_event_frame(read(1 + i % 4, 1 + rng() % 6, i + 1, t)), t);
    }
    store.ingest(wire::alert_frame(alert(3, 1, 500)), 500);
    for (int k = 0; k < 50; ++k) {
        const double a = static_cast<double>(rng() % 1000), b = static_cast<double>(rng() % 1000);
        const double lo = std::min(a, b), hi = std::max(a, b);
        const double mid = lo + std::floor((hi - lo) / 2);
        const auto whole = store.report(lo, hi);
        const auto left = store.report(lo, mid);
        const auto right = store.report(mid, hi);
        EXPECT_EQ(whole.total_reads, left.total_reads + right.total_reads);
        EXPECT_EQ(whole.alerts, left.alerts + right.alerts);
        for (const auto& [portal, n] : whole.reads_per_portal) {
            const auto get = [&](const ReportSummary& s) {
                const auto it = s.reads_per_portal.find(portal);
                return it == s.reads_per_portal.end() ? std::size_t{0} : it->second;
            };
            EXPECT_EQ(n, get(left) + get(right));
        }
    }
    EXPECT_EQ(store.report(0, 1000).total_reads, 200u);
    EXPECT_EQ(store.report(500, 500).total_reads, 0u);
    EXPECT_THROW(store.report(10, 5), Error);
}

TEST(EventStore, JournalReplayRebuildsStore) {
    EventStore store;
    store.ingest(wire::read_event_frame(read(1, 7, 1, 30)), 30);
    store.ingest(wire::alert_frame(alert(7, 1, 100)), 100.1);
    auto bad = wire::encode_read_event(read(2, 7, 1, 90));
    bad[28 + 5] ^= 1;
    store.ingest(wire::encode_frame(wire::MsgType::ReadEvent, bad), 91);

    EventStore copy;
    copy.replay(store.journal_text());
    EXPECT_EQ(copy.journal_text(), store.journal_text());
    EXPECT_EQ(copy.track(7), store.track(7));
    EXPECT_EQ(copy.active_alerts(), store.active_alerts());
    EXPECT_EQ(copy.quarantined().size(), 1u);
}

TEST(EventStore, ReplayRejectsMalformedLog) {
    for (const char* text : {"nonsense\n", "1.0|READ|1:2:3|zz\n", "x|READ|1:2:3|00\n", "1.0|BOGUS|k|00\n"}) {
        EventStore s;
        try {
            s.replay(text);
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::MalformedLog) << text;
        }
    }
}

TEST(EventStore, JournalSinkSeesEveryLine) {
    EventStore store;
    std::vector<std::string> lines;
    store.set_journal_sink([&](const std::string& l) { lines.push_back(l); });
    store.ingest(wire::read_event_frame(read(1, 7, 1, 30)), 30);
    store.ingest(wire::read_event_frame(read(1, 7, 1, 30)), 31);
    EXPECT_EQ(lines, store.journal());
}

// Writers and readers at once: every key stored exactly once, queries never
// observe a torn state.
TEST(EventStore, ConcurrentIngestAndQuery) {
    EventStore store;
    constexpr int kWriters = 4, kPerWriter = 300;
    std::atomic<bool> done{false};
    std::atomic<std::size_t> bad_reads{0};
    std::vector<std::thread> threads;
    for (int w = 0; w < kWriters; ++w) {
        threads.emplace_back([&, w] {
            for (int i = 0; i < kPerWriter; ++i) {
                // Writers overlap on half their keys.
                const auto pass = static_cast<std::uint32_t>(i + (w % 2) * kPerWriter / 2);
                store.ingest(wire::read_event_frame(read(1, 7, pass + 1, pass)), pass);
            }
        });
    }
    std::thread reader([&] {
        while (!done) {
            const auto n = store.read_count();
            const auto track = store.track(7);
            if (track.size() < n) ++bad_reads;
        }
    });
    for (auto& t : threads) t.join();
    done = true;
    reader.join();
    EXPECT_EQ(bad_reads.load(), 0u);
    EXPECT_EQ(store.read_count(), static_cast<std::size_t>(kPerWriter + kPerWriter / 2));
    EXPECT_EQ(store.journal().size(), store.read_count());
}
