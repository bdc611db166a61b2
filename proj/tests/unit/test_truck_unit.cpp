#include <gtest/gtest.h>

#include <random>

#include "hazmat/truck_unit.hpp"
#include "oracles.hpp"

using namespace hazmat;
using namespace hazmat::truck;

namespace {

constexpr Vec3 kOneG{0, 0, 9.81};

HazmatCard card() {
    HazmatCard c;
    c.t_id = 7;
    c.s_id = "0000002C";
    return c;
}

std::size_t count(const Effects& e, EffectKind k) {
    return static_cast<std::size_t>(std::count_if(e.begin(), e.end(), [&](const Effect& x) { return x.kind == k; }));
}

// Drives the unit to ALERTING with a composed alert.
void crash(TruckUnit& u, double t0) {
    u.ingest_sample({t0, kOneG, 0});
    u.ingest_sample({t0 + 0.01, {45, 0, 9.81}, 0});
    const auto e = u.ingest_sample({t0 + 0.02, kOneG, 0});
    ASSERT_EQ(count(e, EffectKind::ComposeAlert), 1u);
    u.compose_alert(card());
}

}  // namespace

TEST(TruckUnit, SteadySamplesDoNothing) {
    TruckUnit u(1);
    for (int i = 0; i < 100; ++i) EXPECT_TRUE(u.ingest_sample({i * 0.01, kOneG, 0}).empty());
    EXPECT_EQ(u.mode(), Mode::Normal);
}

TEST(TruckUnit, TwoLargeDeltasDeclareCrash) {
    TruckUnit u(1);
    u.ingest_sample({0.00, kOneG, 0});
    EXPECT_EQ(u.ingest_sample({0.01, {45, 0, 9.81}, 0}).size(), 2u);  // first pair: jerk warning only
    const auto e = u.ingest_sample({0.02, kOneG, 0});
    EXPECT_EQ(u.mode(), Mode::Alerting);
    ASSERT_GE(e.size(), 2u);
    EXPECT_EQ(e[0].kind, EffectKind::ReadLocalTag);
    EXPECT_EQ(e[1].kind, EffectKind::ComposeAlert);
    EXPECT_EQ(e.back(), (Effect{EffectKind::DisplayText, "ALERT ACCIDENT"}));
}

TEST(TruckUnit, SingleSpikeIsNotACrash) {
    TruckUnit u(1);
    u.ingest_sample({0.0, kOneG, 0});
    u.ingest_sample({0.1, {45, 0, 9.81}, 0});
    u.ingest_sample({0.2, {45, 0, 9.81}, 0});
    EXPECT_NE(u.mode(), Mode::Alerting);
}

TEST(TruckUnit, RolloverHeldTriggersAlert) {
    TruckUnit u(1);
    Effects last;
    for (int i = 0; i <= 6; ++i) {
        last = u.ingest_sample({i * 0.1, kOneG, 75});
        if (i < 5) EXPECT_NE(u.mode(), Mode::Alerting) << i;
    }
    EXPECT_EQ(u.mode(), Mode::Alerting);
}

TEST(TruckUnit, ShortRollIsIgnored) {
    TruckUnit u(1);
    for (int i = 0; i < 4; ++i) u.ingest_sample({i * 0.1, kOneG, 75});
    u.ingest_sample({0.4, kOneG, 10});
    u.ingest_sample({0.5, kOneG, 75});
    EXPECT_EQ(u.mode(), Mode::Normal);
}

TEST(TruckUnit, SpeedingWarnsOnceAfterSustain) {
    TruckUnit u(1);
    std::size_t displays = 0;
    for (int i = 0; i <= 30; ++i) {
        const auto e = u.ingest_fix({i * 0.1, 44.93, 26.02, 80});
        displays += count(e, EffectKind::DisplayText);
        if (i < 20) EXPECT_EQ(u.mode(), Mode::Normal) << i;
        if (!e.empty()) EXPECT_EQ(e[1].text, "SPEED LIMIT");
    }
    EXPECT_EQ(displays, 1u);
    EXPECT_EQ(u.mode(), Mode::Warning);
    EXPECT_TRUE(u.ingest_fix({3.1, 44.93, 26.02, 60}).empty());
    EXPECT_EQ(u.mode(), Mode::Normal);
}

TEST(TruckUnit, UnderLimitOrShortBurstDoesNotWarn) {
    TruckUnit u(1);
    for (int i = 0; i < 30; ++i) EXPECT_TRUE(u.ingest_fix({i * 0.1, 44.93, 26.02, 50}).empty());
    TruckUnit v(2);
    for (int i = 0; i < 10; ++i) EXPECT_TRUE(v.ingest_fix({i * 0.1, 44.93, 26.02, 80}).empty());
    EXPECT_TRUE(v.ingest_fix({1.0, 44.93, 26.02, 60}).empty());
    EXPECT_EQ(v.mode(), Mode::Normal);
}

TEST(TruckUnit, NoWarningWhileAlerting) {
    TruckUnit u(1);
    crash(u, 0);
    for (int i = 0; i < 40; ++i) EXPECT_TRUE(u.ingest_fix({1 + i * 0.1, 44.93, 26.02, 90}).empty());
    EXPECT_EQ(u.mode(), Mode::Alerting);
}

TEST(TruckUnit, ComposeCopiesFixAndCard) {
    TruckUnit u(99);
    u.ingest_fix({10, 44.93, 26.02, 40});
    crash(u, 10.5);
    const auto& a = *u.pending_alert();
    EXPECT_EQ(a.alarm_code, "ALERT ACCIDENT");
    EXPECT_EQ(a.position, (Position{44.93, 26.02}));
    EXPECT_EQ(a.card, card());
    EXPECT_EQ(a.unit_id, 99u);
    EXPECT_EQ(a.seq_no, 1u);
    EXPECT_FALSE(a.no_fix());
}

TEST(TruckUnit, NoFixGivesNullPosition) {
    TruckUnit u(1);
    crash(u, 0);
    EXPECT_TRUE(u.pending_alert()->no_fix());
}

TEST(TruckUnit, SecondCrashIncrementsSeq) {
    TruckUnit u(1);
    crash(u, 0);
    EXPECT_TRUE(u.acknowledge(1));
    EXPECT_EQ(u.mode(), Mode::Normal);
    crash(u, 1);
    EXPECT_EQ(u.pending_alert()->seq_no, 2u);
}

TEST(TruckUnit, ComposeOutsideCrashIsInvalidState) {
    TruckUnit u(1);
    EXPECT_THROW(u.compose_alert(card()), Error);
    crash(u, 0);
    try {
        u.compose_alert(card());
        FAIL() << "second compose for one crash";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidState);
    }
}

TEST(TruckUnit, NonMonotonicInputsThrow) {
    TruckUnit u(1);
    u.ingest_sample({1.0, kOneG, 0});
    EXPECT_THROW(u.ingest_sample({1.0, kOneG, 0}), Error);
    u.ingest_fix({1.0, 0, 0, 0});
    EXPECT_THROW(u.ingest_fix({0.5, 0, 0, 0}), Error);
    EXPECT_THROW(u.ingest_sample({2.0, kOneG, 181}), Error);
    EXPECT_THROW(u.ingest_fix({2.0, 91, 0, 0}), Error);
}

TEST(TruckUnit, RetriesAtIntervalAndNeverGivesUp) {
    TruckUnit u(1);
    crash(u, 0);
    std::vector<double> sends;
    for (int i = 0; i < 100; ++i) {
        const double now = 0.1 * i;
        if (!u.tick(now, true).empty()) sends.push_back(now);
    }
    ASSERT_EQ(sends.size(), 10u);
    for (std::size_t i = 0; i < sends.size(); ++i) EXPECT_NEAR(sends[i], static_cast<double>(i), 1e-9);
    EXPECT_EQ(u.send_attempts(), 10u);
    const auto& bb = u.blackbox();
    EXPECT_EQ(std::count_if(bb.begin(), bb.end(),
                            [](const std::string& l) { return l.find("RETRY_LIMIT_EXCEEDED") != std::string::npos; }),
              1);
}

TEST(TruckUnit, ChannelDownThenUpSendsOnUpTick) {
    TruckUnit u(1);
    crash(u, 0);
    EXPECT_TRUE(u.tick(0.1, false).empty());
    EXPECT_TRUE(u.tick(0.2, false).empty());
    EXPECT_TRUE(u.tick(0.3, false).empty());
    EXPECT_EQ(u.tick(0.4, true), (Effects{{EffectKind::SendAlert, "1"}}));
    EXPECT_TRUE(u.tick(0.5, true).empty());
}

TEST(TruckUnit, NoPendingNoSend) {
    TruckUnit u(1);
    EXPECT_TRUE(u.tick(0, true).empty());
    EXPECT_FALSE(u.acknowledge(1));
}

TEST(TruckUnit, BlackboxRecordsFixesAndEffects) {
    TruckUnit u(1);
    std::size_t last_size = 0;
    for (int i = 0; i < 25; ++i) {
        u.ingest_fix({i * 0.1, 44.93, 26.02, 80});
        u.ingest_sample({i * 0.1 + 0.05, kOneG, 0});
        ASSERT_GE(u.blackbox().size(), last_size);
        last_size = u.blackbox().size();
    }
    u.flush_blackbox();
    const auto& bb = u.blackbox();
    auto kind_count = [&](const std::string& kind) {
        return std::count_if(bb.begin(), bb.end(),
                             [&](const std::string& l) { return l.find("|" + kind + "|") != std::string::npos; });
    };
    EXPECT_EQ(kind_count("FIX"), 25);
    EXPECT_EQ(kind_count("EFFECT"), 2);
    EXPECT_EQ(kind_count("SAMPLE_SUMMARY"), 3);  // seconds 0, 1, 2
}

// Every step of 300 random streams against the history-based reference table.
TEST(TruckUnit, MatchesReferenceTable) {
    std::mt19937_64 rng(31);
    std::size_t crashes = 0, warnings = 0;
    for (int s = 0; s < 300; ++s) {
        TruckUnit unit(1);
        oracle::ReferenceUnit ref;
        for (const auto& ev : oracle::random_stream(rng, 400)) {
            Effects got, want;
            switch (ev.kind) {
            case oracle::StreamEvent::Kind::Sample:
                got = unit.ingest_sample(ev.sample);
                want = ref.on_sample(ev.sample);
                if (count(got, EffectKind::ComposeAlert)) {
                    unit.compose_alert(card());
                    ref.on_compose();
                    ++crashes;
                }
                break;
            case oracle::StreamEvent::Kind::Fix:
                got = unit.ingest_fix(ev.fix);
                want = ref.on_fix(ev.fix);
                break;
            case oracle::StreamEvent::Kind::Tick:
                got = unit.tick(ev.now, ev.channel_up);
                want = ref.on_tick(ev.now, ev.channel_up);
                break;
            case oracle::StreamEvent::Kind::Ack: {
                const bool had = unit.pending_alert().has_value();
                const bool acked = had && unit.acknowledge(unit.pending_alert()->seq_no);
                ASSERT_EQ(acked, ref.on_ack());
                break;
            }
            }
            warnings += count(got, EffectKind::DisplayText);
            ASSERT_EQ(got, want) << "stream " << s;
            ASSERT_EQ(unit.mode(), ref.mode()) << "stream " << s;
            ASSERT_EQ(unit.pending_alert().has_value(), unit.mode() == Mode::Alerting) << "stream " << s;
        }
    }
    // The generator must actually reach the interesting branches.
    EXPECT_GT(crashes, 100u);
    EXPECT_GT(warnings, crashes);
}
