#include "hazmat/frame_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace hazmat::dispatch {
namespace {

[[noreturn]] void sys_fail(const std::string& what) {
    throw Error(Errc::Io, what + ": " + std::strerror(errno));
}

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
    while (n > 0) {
        const ssize_t got = ::recv(fd, buf, n, 0);
        if (got <= 0) {
            if (got < 0 && errno == EINTR) continue;
            return false;
        }
        buf += got;
        n -= static_cast<std::size_t>(got);
    }
    return true;
}

bool write_all(int fd, std::span<const std::uint8_t> data) {
    while (!data.empty()) {
        const ssize_t put = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (put <= 0) {
            if (put < 0 && errno == EINTR) continue;
            return false;
        }
        data = data.subspan(static_cast<std::size_t>(put));
    }
    return true;
}

sockaddr_in loopback(std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

// Reads one frame; empty on EOF or a header that cannot start a frame.
wire::Bytes read_frame(int fd, bool& header_ok) {
    header_ok = true;
    wire::Bytes frame(wire::kHeaderSize);
    if (!read_exact(fd, frame.data(), frame.size())) return {};
    std::size_t total = 0;
    try {
        total = wire::frame_size_from_header(frame);
    } catch (const Error&) {
        header_ok = false;
        return {};
    }
    frame.resize(total);
    if (!read_exact(fd, frame.data() + wire::kHeaderSize, total - wire::kHeaderSize)) return {};
    return frame;
}

}  // namespace

FrameServer::FrameServer(EventStore& store, std::uint16_t port, std::function<double()> clock)
    : store_(store), clock_(std::move(clock)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) sys_fail("socket");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = loopback(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(listen_fd_);
        sys_fail("bind 127.0.0.1:" + std::to_string(port));
    }
    if (::listen(listen_fd_, 8) != 0) {
        ::close(listen_fd_);
        sys_fail("listen");
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

FrameServer::~FrameServer() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

bool FrameServer::serve_connection(int fd, std::size_t max_frames) {
    while (!stopping_) {
        bool header_ok = true;
        const wire::Bytes frame = read_frame(fd, header_ok);
        if (frame.empty()) {
            if (!header_ok) ++rejected_;
            return false;
        }
        try {
            const IngestResult result = store_.ingest(frame, clock_());
            if (!write_all(fd, wire::ack_frame(result.ack))) return false;
        } catch (const Error&) {
            ++rejected_;
            return false;
        }
        if (++handled_ >= max_frames && max_frames != 0) return true;
    }
    return true;
}

void FrameServer::run(std::size_t max_frames) {
    while (!stopping_) {
        pollfd p{listen_fd_, POLLIN, 0};
        const int ready = ::poll(&p, 1, 100);
        if (ready < 0 && errno != EINTR) sys_fail("poll");
        if (ready <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        const bool done = serve_connection(fd, max_frames);
        ::close(fd);
        if (done && max_frames != 0 && handled_ >= max_frames) return;
    }
}

std::vector<wire::Bytes> send_frames(std::uint16_t port, std::span<const wire::Bytes> frames) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) sys_fail("socket");
    sockaddr_in addr = loopback(port);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        sys_fail("connect 127.0.0.1:" + std::to_string(port));
    }
    std::vector<wire::Bytes> replies;
    bool open = true;
    for (const auto& frame : frames) {
        wire::Bytes reply;
        if (open && write_all(fd, frame)) {
            bool header_ok = true;
            reply = read_frame(fd, header_ok);
            if (reply.empty()) open = false;
        }
        replies.push_back(std::move(reply));
    }
    ::close(fd);
    return replies;
}

}  // namespace hazmat::dispatch
