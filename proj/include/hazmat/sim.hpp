#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hazmat/card.hpp"
#include "hazmat/dispatch.hpp"
#include "hazmat/portal_net.hpp"
#include "hazmat/truck_unit.hpp"

namespace hazmat::sim {

// --- scenario ---------------------------------------------------------------

struct LatLon {
    double lat = 0;
    double lon = 0;
};

struct SpeedPoint {
    double t = 0;  // seconds after departure
    double kmh = 0;
};

struct TruckSpec {
    std::uint64_t t_id = 0;
    std::string card;  // path as written in the scenario file
    CardBlob card_blob{};
    double departure = 0;
    std::vector<SpeedPoint> speed_profile;
};

enum class FaultKind { Crash, GsmDown, LinkDown };
std::string_view to_string(FaultKind kind) noexcept;

// Targets: "*" (everything the fault applies to), "truck:<t_id>", "portal:<id>".
struct Fault {
    FaultKind kind = FaultKind::Crash;
    std::string target;
    double t_start = 0;
    double t_end = 0;
};

struct Scenario {
    std::uint64_t seed = 0;
    std::vector<LatLon> road;
    std::vector<double> portals;  // positions along the road, meters, ascending
    std::size_t aggregator_ratio = net::kDefaultRatio;
    std::vector<TruckSpec> trucks;
    std::vector<Fault> faults;
    double duration = 0;
    double tick_s = 0.1;

    // Optional knobs, all off / default unless set.
    double read_range_m = net::kDefaultReadRange;
    double read_miss_prob = 0;
    double ack_loss_prob = 0;
    double corrupt_prob = 0;
    bool relay_backup = false;
    truck::UnitConfig unit;
};

// Card paths are resolved against the scenario file's directory.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir);
// Throws InvalidScenario naming the offending field.
void validate_scenario(const Scenario& scenario);

// --- geometry and motion ----------------------------------------------------

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kGravity = 9.81;
inline constexpr double kCrashSpike = 50.0;
inline constexpr double kTruckHalfLength = 6.0;

double haversine_m(const LatLon& a, const LatLon& b) noexcept;

// Maps a 1-D road coordinate to lat/lon by linear interpolation inside the
// polyline segment that contains it (segment lengths are great-circle).
class RoadGeometry {
public:
    explicit RoadGeometry(std::vector<LatLon> polyline);
    double length_m() const noexcept { return cumulative_.back(); }
    LatLon at(double position_m) const;

private:
    std::vector<LatLon> points_;
    std::vector<double> cumulative_;
};

// Piecewise-linear speed; held flat outside the given points.
double speed_at(const std::vector<SpeedPoint>& profile, double t_rel) noexcept;
// Slope of the segment containing t_rel, in m/s^2.
double accel_at(const std::vector<SpeedPoint>& profile, double t_rel) noexcept;

struct TruckKinematics {
    double position_m = 0;
    double speed_kmh = 0;
    double accel_long = 0;  // m/s^2
    int spike_sample = -1;  // 0 or 1 while a crash spike is being emitted
};

std::pair<truck::GpsFix, truck::SensorSample> synthesize_streams(const RoadGeometry& road,
                                                                 const TruckKinematics& truck, double t);

// --- tags and visibility ----------------------------------------------------

enum class Placement { Front, LeftA, LeftB, RightA, RightB, Back };
std::string_view to_string(Placement p) noexcept;

struct Tag {
    Placement placement;
    std::uint32_t c_id;
    CardBlob blob;
};

using TagSet = std::array<Tag, 6>;

// Six tags carrying the same card; c_id is card.c_id + placement index.
TagSet make_tag_set(const HazmatCard& card);

enum class ReaderSide { Left, Right, Overhead };

struct ReaderPose {
    double position_m = 0;
    ReaderSide side = ReaderSide::Left;
};

// Distance gate, then orientation: side readers see their side's two tags
// plus FRONT while the truck approaches and BACK once it has passed (more than
// kTruckHalfLength away). A rolled-over truck presents its other side.
std::vector<net::VisibleTag> visible_tags(const net::TruckPose& truck, const ReaderPose& reader, double range_m,
                                          const TagSet& tags);

// --- run --------------------------------------------------------------------

struct TruckOutcome {
    std::uint64_t t_id = 0;
    double final_position_m = 0;
    bool crashed = false;
    TagSet tags;
    truck::TruckUnit unit;
};

struct SimResult {
    std::vector<std::string> log;  // `t|source|event_kind|detail`
    std::unique_ptr<dispatch::EventStore> store;
    std::vector<net::Portal> portals;
    std::vector<TruckOutcome> trucks;

    std::string log_text() const;
};

SimResult run(const Scenario& scenario);

// simlog.txt, dispatch.log, metrics.txt, backup/portal_<id>.log, blackbox/truck_<t_id>.log
void write_outputs(const SimResult& result, const std::filesystem::path& out_dir);

}  // namespace hazmat::sim
