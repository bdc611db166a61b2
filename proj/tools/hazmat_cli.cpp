// hazmat: card tooling, portable reader, simulator and dispatch queries.
//
// Exit codes: 0 success, 1 domain error (validation, ECC, bad input data),
// 2 usage error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hazmat/card.hpp"
#include "hazmat/bytes.hpp"
#include "hazmat/dispatch.hpp"
#include "hazmat/frame_server.hpp"
#include "hazmat/metrics.hpp"
#include "hazmat/registry.hpp"
#include "hazmat/sim.hpp"
#include "hazmat/text.hpp"

namespace fs = std::filesystem;
using namespace hazmat;

namespace {

constexpr int kDomainError = 1;

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string violation_line(const Violation& v) {
    return std::string(to_string(v.code)) + ": " + v.field + ": " + v.detail;
}

int card_verify(const fs::path& in) {
    const auto blob = read_binary_file(in);
    const auto problems = verify_blob(blob);
    for (const auto& v : problems) std::cout << violation_line(v) << '\n';
    if (!problems.empty()) return kDomainError;
    std::cout << "OK\n";
    return 0;
}

int portable(const fs::path& card_path, const fs::path& registry_root) {
    const auto blob = read_binary_file(card_path);
    const auto problems = verify_blob(blob);
    if (!problems.empty()) {
        std::cerr << "refusing to display card: " << violation_line(problems.front()) << '\n';
        return kDomainError;
    }
    const Registry registry = Registry::load(registry_root);
    for (const auto& w : registry.warnings()) std::cerr << "registry warning: " << w.path.string() << ": " << w.detail << '\n';
    std::cout << format_sheet(resolve_card(decode_card(blob), registry));
    return 0;
}

std::unique_ptr<dispatch::EventStore> load_store(const fs::path& log) {
    auto store = std::make_unique<dispatch::EventStore>();
    store->replay(read_text(log));
    return store;
}

void print_track(const dispatch::EventStore& store, std::uint64_t t_id) {
    const auto points = store.track(t_id);
    std::printf("truck %llu: %zu passages\n", static_cast<unsigned long long>(t_id), points.size());
    std::printf("%-10s %10s\n", "portal_id", "t");
    for (const auto& p : points) std::printf("%-10u %10s\n", p.portal_id, text::fixed(p.t).c_str());
}

void print_alerts(const dispatch::EventStore& store) {
    const auto alerts = store.active_alerts();
    std::printf("%zu alerts\n", alerts.size());
    if (alerts.empty()) return;
    std::printf("%-10s %-5s %10s %-23s %-10s %s\n", "unit", "seq", "t", "position", "s_id", "alarm");
    for (const auto& a : alerts) {
        const std::string where =
            a.position ? text::fixed(a.position->lat, 6) + "," + text::fixed(a.position->lon, 6) : std::string("NOFIX");
        std::printf("%-10llu %-5u %10s %-23s %-10s %s\n", static_cast<unsigned long long>(a.unit_id), a.seq_no,
                    text::fixed(a.t).c_str(), where.c_str(), a.card.s_id.c_str(), a.alarm_code.c_str());
    }
}

dispatch::FrameServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int serve(std::uint16_t port, const fs::path& log, std::size_t max_frames) {
    dispatch::EventStore store;
    if (fs::exists(log)) store.replay(read_text(log));
    std::ofstream journal(log, std::ios::binary | std::ios::app);
    if (!journal) throw Error(Errc::Io, "cannot append to " + log.string());
    store.set_journal_sink([&](const std::string& line) { journal << line << '\n' << std::flush; });

    const auto start = std::chrono::steady_clock::now();
    dispatch::FrameServer server(store, port, [start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on 127.0.0.1:" << server.port() << std::endl;
    server.run(max_frames);
    g_server = nullptr;
    std::cout << "handled " << server.frames_handled() << " frames, rejected " << server.frames_rejected() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hazardous-goods truck tag tooling and monitoring simulator"};
    app.require_subcommand(1);

    // card
    auto* card = app.add_subcommand("card", "Encode, decode, inspect or verify a 512-byte tag card");
    card->require_subcommand(1);
    fs::path card_in, card_out;
    auto* encode = card->add_subcommand("encode", "Dump text to .hmc blob");
    encode->add_option("--in", card_in, "Dump text file")->required()->check(CLI::ExistingFile);
    encode->add_option("--out", card_out, "Output .hmc file")->required();
    auto* decode = card->add_subcommand("decode", "Print the dump text of a blob");
    decode->add_option("--in", card_in, "Input .hmc file")->required()->check(CLI::ExistingFile);
    auto* inspect = card->add_subcommand("inspect", "Print the dump text plus the stored ECC");
    inspect->add_option("--in", card_in, "Input .hmc file")->required()->check(CLI::ExistingFile);
    auto* verify = card->add_subcommand("verify", "Check ECC and every field; one line per violation");
    verify->add_option("--in", card_in, "Input .hmc file")->required()->check(CLI::ExistingFile);

    // portable
    auto* port_cmd = app.add_subcommand("portable", "Offline intervention sheet from a tag blob");
    fs::path portable_card, registry_root;
    port_cmd->add_option("--card", portable_card, "Tag blob (.hmc)")->required()->check(CLI::ExistingFile);
    port_cmd->add_option("--registry", registry_root, "Registry root directory")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its logs");
    fs::path scenario_path, sim_out;
    std::optional<std::uint64_t> seed;
    std::optional<double> speed_limit, read_range;
    std::optional<std::size_t> ratio;
    simulate->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", sim_out, "Output directory")->required();
    simulate->add_option("--seed", seed, "Override scenario seed");
    simulate->add_option("--speed-limit", speed_limit, "Override speed limit, km/h")->check(CLI::PositiveNumber);
    simulate->add_option("--read-range", read_range, "Override portal read range, m")->check(CLI::PositiveNumber);
    simulate->add_option("--ratio", ratio, "Override portals per aggregator")->check(CLI::Range(1, 1000000));

    // query
    auto* query = app.add_subcommand("query", "Replay a dispatch log and query it");
    query->require_subcommand(1);
    fs::path store_log;
    std::uint64_t truck_id = 0;
    double from = 0, to = 0;
    auto* track = query->add_subcommand("track", "Portal passages of one truck");
    track->add_option("--log", store_log, "Dispatch log")->required()->check(CLI::ExistingFile);
    track->add_option("--truck", truck_id, "Truck id")->required();
    auto* alerts = query->add_subcommand("alerts", "Stored alerts, newest first");
    alerts->add_option("--log", store_log, "Dispatch log")->required()->check(CLI::ExistingFile);
    auto* report = query->add_subcommand("report", "Read counts over [from, to)");
    report->add_option("--log", store_log, "Dispatch log")->required()->check(CLI::ExistingFile);
    report->add_option("--from", from, "Start time, s")->required();
    report->add_option("--to", to, "End time, s (exclusive)")->required();

    // registry
    auto* registry = app.add_subcommand("registry", "Code registry utilities");
    registry->require_subcommand(1);
    fs::path registry_out;
    auto* reg_init = registry->add_subcommand("init", "Write the reference registry layout");
    reg_init->add_option("--out", registry_out, "Registry root to create")->required();

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Dispatch frame server on 127.0.0.1");
    std::uint16_t serve_port = 0;
    fs::path serve_log;
    std::size_t max_frames = 0;
    serve_cmd->add_option("--port", serve_port, "TCP port (0 picks one)");
    serve_cmd->add_option("--log", serve_log, "Dispatch log, replayed then appended")->required();
    serve_cmd->add_option("--max-frames", max_frames, "Exit after this many frames (0 = run until signalled)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*encode) {
            save_card_file(card_out, encode_card(parse_dump(read_text(card_in))));
        } else if (*decode) {
            std::cout << to_dump(decode_card(read_binary_file(card_in)));
        } else if (*inspect) {
            const auto blob = read_binary_file(card_in);
            const HazmatCard c = decode_card(blob);
            std::cout << to_dump(c) << "ecc: " << bytes::to_hex(std::span(blob).subspan(kEccOffset, 8)) << '\n';
        } else if (*verify) {
            return card_verify(card_in);
        } else if (*port_cmd) {
            return portable(portable_card, registry_root);
        } else if (*simulate) {
            sim::Scenario s = sim::load_scenario(scenario_path);
            if (seed) s.seed = *seed;
            if (speed_limit) s.unit.speed_limit_kmh = *speed_limit;
            if (read_range) s.read_range_m = *read_range;
            if (ratio) s.aggregator_ratio = *ratio;
            const auto result = sim::run(s);
            sim::write_outputs(result, sim_out);
            std::cout << sim::format_metrics(sim::metrics(result.log));
        } else if (*track) {
            print_track(*load_store(store_log), truck_id);
        } else if (*alerts) {
            print_alerts(*load_store(store_log));
        } else if (*report) {
            const auto store = load_store(store_log);
            std::cout << dispatch::format_report(store->report(from, to), from, to);
        } else if (*reg_init) {
            write_registry(registry_out, fixture_registry());
            std::cout << "wrote " << fixture_registry().size() << " entries under " << registry_out.string() << '\n';
        } else if (*serve_cmd) {
            return serve(serve_port, serve_log, max_frames);
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return kDomainError;
    } catch (const std::exception& e) {
        std::cerr << "Io: " << e.what() << '\n';
        return kDomainError;
    }
    return 0;
}
