#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hazmat/dispatch.hpp"

namespace hazmat::dispatch {

// Loopback TCP listener speaking the portal wire frames: each well-formed
// frame is ingested and answered with its ACK frame; a malformed frame closes
// the connection.
class FrameServer {
public:
    // port 0 picks an ephemeral port. `clock` supplies ingest timestamps.
    FrameServer(EventStore& store, std::uint16_t port, std::function<double()> clock);
    ~FrameServer();

    FrameServer(const FrameServer&) = delete;
    FrameServer& operator=(const FrameServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }

    // Serves connections one at a time until stop() or until `max_frames`
    // frames have been handled (0 = unlimited).
    void run(std::size_t max_frames = 0);
    void stop() noexcept { stopping_ = true; }

    std::size_t frames_handled() const noexcept { return handled_; }
    std::size_t frames_rejected() const noexcept { return rejected_; }

private:
    bool serve_connection(int fd, std::size_t max_frames);

    EventStore& store_;
    std::function<double()> clock_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::atomic<std::size_t> handled_{0};
    std::atomic<std::size_t> rejected_{0};
};

// Client side: sends each frame on one connection and collects the reply
// (empty when the server closed the connection instead of answering).
std::vector<wire::Bytes> send_frames(std::uint16_t port, std::span<const wire::Bytes> frames);

}  // namespace hazmat::dispatch
