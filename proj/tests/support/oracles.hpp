#pragma once

// Independent reference implementations and generators used by the tests.
// Nothing here calls into the code under test except for the plain data types.

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hazmat/card.hpp"
#include "hazmat/truck_unit.hpp"

namespace oracle {

// Bit-at-a-time shift registers, straight from the polynomial definitions.
std::uint64_t crc64_ecma_bitwise(std::span<const std::uint8_t> data);
std::uint32_t crc32_bitwise(std::span<const std::uint8_t> data);

std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t max_len);

// A card satisfying every field rule, with each field independently empty,
// partial or full.
hazmat::HazmatCard random_card(std::mt19937_64& rng);

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// --- truck unit reference -----------------------------------------------------

struct StreamEvent {
    enum class Kind { Sample, Fix, Tick, Ack } kind;
    hazmat::truck::SensorSample sample;
    hazmat::truck::GpsFix fix;
    double now = 0;
    bool channel_up = false;
};

// Random interleaving of samples, fixes, ticks and acknowledgements with
// runs of speeding, jerks, crash spikes and sustained roll.
std::vector<StreamEvent> random_stream(std::mt19937_64& rng, std::size_t length);

// Decides every condition from the full input history rather than from
// incremental counters, then applies an explicit transition table.
class ReferenceUnit {
public:
    explicit ReferenceUnit(hazmat::truck::UnitConfig cfg = {});

    hazmat::truck::Effects on_sample(const hazmat::truck::SensorSample& s);
    hazmat::truck::Effects on_fix(const hazmat::truck::GpsFix& f);
    hazmat::truck::Effects on_tick(double now, bool up);
    // Mirrors compose: called when the unit under test composed an alert.
    void on_compose();
    bool on_ack();

    hazmat::truck::Mode mode() const noexcept { return mode_; }
    bool pending() const noexcept { return pending_; }

private:
    hazmat::truck::Effects warning_row(bool jerk, bool speeding);
    bool crash_now() const;
    bool rollover_sustained() const;
    std::size_t roll_run_start() const;
    bool jerk_now() const;
    bool speeding_now() const;

    hazmat::truck::UnitConfig cfg_;
    hazmat::truck::Mode mode_ = hazmat::truck::Mode::Normal;
    std::vector<hazmat::truck::SensorSample> samples_;
    std::vector<hazmat::truck::GpsFix> fixes_;
    std::size_t last_declare_ = 1;  // first sample index whose pair may count toward a crash
    std::vector<std::size_t> latched_runs_;  // start index of roll runs that already declared a crash
    bool pending_ = false;
    std::uint32_t seq_ = 0;
    double last_send_ = -1;
};

}  // namespace oracle
